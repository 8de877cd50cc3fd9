"""Simulation and large-array analysis of amplify-and-forward SA-ZF
relaying in a multiuser cellular two-way relay network."""

__version__ = "0.1.0"

from .channel import (  # noqa: E402
    ChannelRealization,
    EffectivePowers,
    NetworkConfig,
    NormalizationMode,
    PowerPolicy,
    dbm_to_mw,
    draw_realization,
    sample_small_scale,
    trial_rng,
)
from .protocol import (  # noqa: E402
    LinkSnrs,
    ProtocolMatrices,
    build_protocol,
    instantaneous_snrs,
    simulate_transmission,
)
from .asymptotics import (  # noqa: E402
    asymptotic_snrs,
    cutset_exact,
    cutset_high_snr,
    energy_efficiency,
    gap_high_snr,
    rate_report,
    sum_spectral_efficiency,
)
from .experiments import Scenario, SweepResult, run_point, sweep  # noqa: E402
