"""Monte Carlo harness and scenario sweeps.

Every trial gets its own generator derived from ``(master_seed,
point_index, trial_index)``, so trials can run in any order or in
parallel, and the reduction (compensated sums in trial order) makes
serial and parallel runs bitwise identical.
"""

import enum
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .asymptotics import (
    asymptotic_snrs,
    cutset_exact,
    cutset_high_snr,
    energy_efficiency,
    sum_spectral_efficiency,
)
from .channel import NormalizationMode, PowerPolicy, draw_realization, trial_rng
from .errors import InvalidConfig
from .protocol import (
    build_protocol,
    instantaneous_snrs,
    protocol_residuals,
    simulate_transmission,
)

__all__ = [
    "SeriesKind",
    "SweepAxis",
    "Scenario",
    "Stat",
    "PointResult",
    "SweepResult",
    "config_at",
    "run_point",
    "sweep",
    "WishartReport",
    "wishart_identity_check",
    "protocol_invariant_suite",
]

RATE_CONVENTION = "ergodic: per-realization rates from instantaneous SNRs, then averaged"


class SeriesKind(str, enum.Enum):
    MONTE_CARLO = "MonteCarloSAZF"
    CLOSED_FORM = "ClosedFormSAZF"
    CUTSET_EXACT = "CutsetExact"
    CUTSET_HIGH_SNR = "CutsetHighSNR"
    ENERGY_EFFICIENCY = "EnergyEfficiency"

    @classmethod
    def parse(cls, text):
        for kind in cls:
            if str(text).strip().lower() == kind.value.lower():
                return kind
        raise ValueError(f"unknown series {text!r}")


class SweepAxis(str, enum.Enum):
    THETA_BR = "theta_br"
    N_R = "relay_antennas"
    K = "users"

    @classmethod
    def parse(cls, text):
        key = str(text).strip().lower()
        aliases = {"theta_br": cls.THETA_BR, "thetabr": cls.THETA_BR,
                   "relay_antennas": cls.N_R, "nr": cls.N_R, "n_r": cls.N_R,
                   "users": cls.K, "k": cls.K}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown sweep axis {text!r}") from None

    @property
    def field_name(self):
        return {"theta_br": "theta_BR", "relay_antennas": "N_R", "users": "K"}[self.value]


ALL_SERIES = frozenset(SeriesKind)
MONTE_CARLO_SERIES = frozenset({SeriesKind.MONTE_CARLO, SeriesKind.CUTSET_EXACT})


def config_at(base, axis, value, policy=None):
    """`base` with the swept parameter (and optionally the policy) set."""
    axis = SweepAxis(axis)
    if axis is not SweepAxis.THETA_BR:
        if float(value) != int(value):
            raise InvalidConfig(f"{axis.value} must be an integer, got {value}")
        value = int(value)
    changes = {axis.field_name: value}
    if policy is not None:
        changes["power_policy"] = policy
    return replace(base, **changes)


@dataclass(frozen=True)
class Scenario:
    base: object                    # NetworkConfig
    sweep_axis: SweepAxis = SweepAxis.THETA_BR
    axis_values: tuple = (5.0,)
    trials: int = 200
    master_seed: int = 20150101
    series: frozenset = ALL_SERIES
    policies: tuple = (PowerPolicy.FIXED,)

    def __post_init__(self):
        object.__setattr__(self, "sweep_axis", SweepAxis(self.sweep_axis))
        object.__setattr__(self, "axis_values", tuple(self.axis_values))
        object.__setattr__(self, "series", frozenset(SeriesKind(s) for s in self.series))
        object.__setattr__(self, "policies",
                           tuple(dict.fromkeys(PowerPolicy(p) for p in self.policies)))
        if not self.axis_values:
            raise InvalidConfig("axis_values must be non-empty")
        if any(b <= a for a, b in zip(self.axis_values, self.axis_values[1:])):
            raise InvalidConfig("axis_values must be strictly increasing")
        if int(self.trials) != self.trials or self.trials < 1:
            raise InvalidConfig(f"trials must be a positive integer, got {self.trials}")
        if not self.policies:
            raise InvalidConfig("at least one power policy is required")
        for value in self.axis_values:
            for policy in self.policies:
                config_at(self.base, self.sweep_axis, value, policy)

    def point_configs(self):
        return [config_at(self.base, self.sweep_axis, v) for v in self.axis_values]


@dataclass(frozen=True)
class Stat:
    mean: float
    stderr: float
    trials: int


def _stat(samples):
    """Mean and standard error with compensated summation, fixed order."""
    x = [float(v) for v in samples]
    n = len(x)
    mean = math.fsum(x) / n
    if n < 2:
        return Stat(mean, 0.0, n)
    var = math.fsum((v - mean) ** 2 for v in x) / (n - 1)
    return Stat(mean, math.sqrt(var / n), n)


def _exact(value):
    return Stat(float(value), 0.0, 0)


def _trial(config, policies, master_seed, point_index, trial_index):
    """One channel draw shared by all policies: rows are policies, columns
    are (Monte Carlo sum rate, exact cut-set bound)."""
    rng = trial_rng(master_seed, point_index, trial_index)
    realization = draw_realization(config, rng)
    out = np.empty((len(policies), 2))
    for i, policy in enumerate(policies):
        cfg = replace(config, power_policy=policy)
        protocol = build_protocol(cfg, realization)
        out[i, 0] = sum_spectral_efficiency(instantaneous_snrs(cfg, realization, protocol))
        out[i, 1] = cutset_exact(cfg, realization)
    return out


def _trial_star(args):
    return _trial(*args)


@dataclass
class PointResult:
    config: object
    policies: tuple
    trials: int
    monte_carlo: dict          # policy -> Stat of the sum rate
    cutset_exact: dict         # policy -> Stat
    closed_form: dict          # policy -> sum rate from the asymptotic SNRs
    cutset_high_snr: dict      # policy -> float
    energy_efficiency: dict    # policy -> closed-form rate per mW


def run_point(config, trials, seed, *, policies=None, point_index=0, workers=1,
              finite_correction=False):
    """Monte Carlo statistics at one configuration, plus the deterministic
    closed-form values for each policy.

    Parameters
    ----------
    config : NetworkConfig
    trials : int
        Channel realizations; each is shared across `policies`.
    seed : int
        Master seed. Trial t uses the stream ``(seed, point_index, t)``.
    policies : sequence of PowerPolicy, optional
        Defaults to ``(config.power_policy,)``.
    workers : int
        Processes to spread trials over; results do not depend on it.
    """
    policies = tuple(policies) if policies is not None else (config.power_policy,)
    trials = int(trials)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    jobs = [(config, policies, seed, point_index, t) for t in range(trials)]
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_trial_star, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        rows = [_trial(*job) for job in jobs]
    data = np.stack(rows)      # trials x policies x 2

    mc, cs, cf, hs, ee = {}, {}, {}, {}, {}
    for i, policy in enumerate(policies):
        cfg = replace(config, power_policy=policy)
        mc[policy] = _stat(data[:, i, 0])
        cs[policy] = _stat(data[:, i, 1])
        cf[policy] = sum_spectral_efficiency(asymptotic_snrs(cfg, finite_correction))
        hs[policy] = cutset_high_snr(cfg)
        ee[policy] = energy_efficiency(cf[policy], cfg)
    return PointResult(config, policies, trials, mc, cs, cf, hs, ee)


@dataclass
class SweepResult:
    """Per (series, policy) statistics aligned with `axis_values`."""

    axis: SweepAxis
    axis_values: tuple
    entries: dict                 # (SeriesKind, PowerPolicy) -> list[Stat]
    scenario: Scenario = None
    metadata: dict = field(default_factory=dict)


def sweep(scenario, *, workers=1, progress=None):
    """Evaluate every requested (series, policy) at every axis value.

    Monte Carlo work is skipped when no Monte Carlo series is requested.
    Point i draws its trials from ``(master_seed, i, t)``.
    """
    start = time.perf_counter()
    series = scenario.series
    entries = {(s, p): [] for s in series for p in scenario.policies}
    needs_mc = bool(series & MONTE_CARLO_SERIES)
    for index, cfg in enumerate(scenario.point_configs()):
        if needs_mc:
            point = run_point(cfg, scenario.trials, scenario.master_seed,
                              policies=scenario.policies, point_index=index, workers=workers)
        for policy in scenario.policies:
            pcfg = replace(cfg, power_policy=policy)
            closed = sum_spectral_efficiency(asymptotic_snrs(pcfg))
            values = {
                SeriesKind.CLOSED_FORM: lambda: _exact(closed),
                SeriesKind.CUTSET_HIGH_SNR: lambda: _exact(cutset_high_snr(pcfg)),
                SeriesKind.ENERGY_EFFICIENCY: lambda: _exact(energy_efficiency(closed, pcfg)),
                SeriesKind.MONTE_CARLO: lambda: point.monte_carlo[policy],
                SeriesKind.CUTSET_EXACT: lambda: point.cutset_exact[policy],
            }
            for kind in series:
                entries[(kind, policy)].append(values[kind]())
        if progress is not None:
            progress(index, scenario.axis_values[index])
    metadata = {
        "master_seed": scenario.master_seed,
        "config": scenario.base.to_dict(),
        "trials": scenario.trials,
        "rate_convention": RATE_CONVENTION,
        "wall_clock_s": time.perf_counter() - start,
    }
    return SweepResult(scenario.sweep_axis, scenario.axis_values, entries, scenario, metadata)


@dataclass
class WishartReport:
    M: int
    N: int
    trials: int
    sample_mean: float
    stderr: float
    expected: float

    @property
    def rel_error(self):
        return abs(self.sample_mean - self.expected) / self.expected


def wishart_identity_check(M, N, trials, seed, batch=2000):
    """Sample mean of ``tr[(X^H X)^{-1}]`` for N x M i.i.d. CN(0, 1) `X`,
    against the central complex Wishart value ``M / (N - M)``."""
    if not N > M >= 1:
        raise ValueError(f"need N > M >= 1, got M={M}, N={N}")
    samples = []
    for chunk, start in enumerate(range(0, trials, batch)):
        n = min(batch, trials - start)
        rng = trial_rng(seed, chunk)
        X = (rng.standard_normal((n, N, M)) + 1j * rng.standard_normal((n, N, M))) * np.sqrt(0.5)
        G = np.conj(np.swapaxes(X, 1, 2)) @ X
        samples.append(np.real(np.trace(np.linalg.inv(G), axis1=1, axis2=2)))
    s = _stat(np.concatenate(samples))
    return WishartReport(M, N, trials, s.mean, s.stderr, M / (N - M))


def protocol_invariant_suite(config, realizations, seed, n_symbols=2000):
    """Check the SA-ZF identities and power constraints on many draws.

    Returns a dict of worst-case figures:

    - ``alignment``, ``relay_zf``, ``end_to_end_zf``: relative residuals.
    - ``si_residual_B``, ``si_residual_U``: residual self-interference power
      after cancellation, relative to the desired-signal power.
    - ``bs_power_error``, ``relay_power_error``: relative deviation of the
      per-realization expected transmit power from the budget
      (instantaneous normalization).
    - ``bs_power_mc_error``, ``relay_power_mc_error``: the same measured
      from symbol-level traces, pooled over all realizations.
    """
    P = config.effective_powers()
    inst = replace(config, normalization_mode=NormalizationMode.INSTANTANEOUS)
    worst = {k: 0.0 for k in ("alignment", "relay_zf", "end_to_end_zf", "si_residual_B",
                              "si_residual_U", "bs_power_error", "relay_power_error")}
    bs_power, relay_power = [], []
    sqrt_PU = math.sqrt(P.P_U)
    for r in range(realizations):
        rng = trial_rng(seed, r)
        real = draw_realization(config, rng)
        for cfg in (config, inst):
            prot = build_protocol(cfg, real)
            for name, value in protocol_residuals(real, prot).items():
                worst[name] = max(worst[name], value)

        prot = build_protocol(inst, real)
        trace = simulate_transmission(inst, real, prot, rng, n_symbols)
        wanted_B = real.H_RB @ prot.apply_relay(sqrt_PU * (real.H_UR @ trace.s_U))
        clean_B = wanted_B + real.H_RB @ prot.apply_relay(trace.z_R) + trace.z_B
        resid_B = (trace.y_B - trace.si_B) - clean_B
        worst["si_residual_B"] = max(worst["si_residual_B"],
                                     float(np.sum(np.abs(resid_B) ** 2) / np.sum(np.abs(wanted_B) ** 2)))
        wanted_U = prot.alpha_R * prot.alpha_B * trace.s_B
        clean_U = wanted_U + prot.alpha_R * (prot.relay_rx @ trace.z_R) + trace.z_U
        resid_U = trace.y_tilde_U - clean_U
        worst["si_residual_U"] = max(worst["si_residual_U"],
                                     float(np.sum(np.abs(resid_U) ** 2) / np.sum(np.abs(wanted_U) ** 2)))

        expected_bs = float(np.real(np.trace(prot.F_B @ prot.F_B.conj().T)))
        W_R = prot.W_R
        cov_y = ((prot.alpha_B ** 2 + P.P_U) * (real.H_UR @ real.H_UR.conj().T)
                 + config.sigma2 * np.eye(config.N_R))
        expected_relay = float(np.real(np.trace(W_R @ cov_y @ W_R.conj().T)))
        worst["bs_power_error"] = max(worst["bs_power_error"], abs(expected_bs / P.P_B - 1))
        worst["relay_power_error"] = max(worst["relay_power_error"], abs(expected_relay / P.P_R - 1))
        bs_power.append(np.mean(np.sum(np.abs(trace.x_B) ** 2, axis=0)))
        relay_power.append(np.mean(np.sum(np.abs(trace.x_R) ** 2, axis=0)))

    worst["bs_power_mc_error"] = abs(math.fsum(bs_power) / len(bs_power) / P.P_B - 1)
    worst["relay_power_mc_error"] = abs(math.fsum(relay_power) / len(relay_power) / P.P_R - 1)
    return worst
