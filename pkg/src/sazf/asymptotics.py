"""Large-array closed forms: per-link SNRs, sum rate, cut-set bounds,
the high-SNR gap between them, and energy efficiency.

All three power policies are covered. Rates are in bps/Hz over the
two-phase exchange, hence the 1/2 pre-log.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .channel import PowerPolicy
from .errors import InvalidConfig
from .linalg import log_det_capacity
from .protocol import LinkSnrs

__all__ = [
    "RateReport",
    "capacity",
    "asymptotic_snrs",
    "sum_spectral_efficiency",
    "cutset_high_snr",
    "cutset_from_channels",
    "cutset_exact",
    "gap_high_snr",
    "energy_efficiency",
    "rate_report",
]


def capacity(x):
    """Half-duplex Gaussian rate ``0.5 log2(1 + x)``, elementwise."""
    return 0.5 * np.log2(1.0 + np.asarray(x, dtype=float))


def _check_theta(config):
    if not config.theta_BR > 1:
        raise InvalidConfig(f"need theta_BR > 1, got {config.theta_BR}")


def _finite_snrs(config):
    # normalization constants and noise variances before the N_R >> K limit
    P = config.effective_powers()
    N_R, N_B, K = config.N_R, config.N_B, config.K
    s2 = config.sigma2
    a_B2 = (N_B - N_R) * config.ell_B * P.P_B / (N_R * K * config.ell_U)
    a_R2 = (N_R - K) * config.ell_U * P.P_R / (K * (a_B2 + P.P_U))
    relay_var = s2 / ((N_R - K) * config.ell_U)
    bs_var = N_R * config.ell_U * s2 / ((N_B - N_R) * config.ell_B)
    gamma_U = a_R2 * a_B2 / (a_R2 * relay_var + s2)
    gamma_B = a_R2 * P.P_U / (a_R2 * relay_var + bs_var)
    return gamma_B, gamma_U, bs_var


def asymptotic_snrs(config, finite_correction=False):
    """Deterministic per-stream SNRs for the configured power policy.

    Parameters
    ----------
    config : NetworkConfig
    finite_correction : bool
        Keep the ``N_R - K`` factors and the exact ``N_B - N_R`` instead
        of taking ``N_R >> K``. Closer to Monte Carlo at moderate sizes.

    Returns
    -------
    LinkSnrs
        Identical entries for every user.
    """
    _check_theta(config)
    K = config.K
    if finite_correction:
        gB, gU, bs_var = _finite_snrs(config)
    else:
        t = config.theta_BR - 1.0
        lB, lU = config.ell_B, config.ell_U
        EB, ER, EU = config.E_B, config.E_R, config.E_U
        s2, N_R = config.sigma2, config.N_R
        policy = config.power_policy
        if policy is PowerPolicy.FIXED:
            gU = N_R * t * lU * lB * EB * ER / (K * (lU * (ER + K * EU) + t * lB * EB) * s2)
            gB = N_R * t * lB * lU * ER * EU / ((t * lB * (ER + EB) + lU * K * EU) * s2)
        elif policy is PowerPolicy.CASE_I:
            gU = N_R * t * lU * lB * EB * ER / (K * (lU * ER + t * lB * EB) * s2)
            gB = lU * ER * EU / ((ER + EB) * s2)
        else:
            gU = t * lB * EB / (K * s2)
            gB = lU * EU / s2
        bs_var = lU * s2 / (t * lB)
    return LinkSnrs(gamma_B=np.full(K, gB), gamma_U=np.full(K, gU),
                    sigma_tilde_B=np.full(K, bs_var))


def sum_spectral_efficiency(snrs):
    """Sum over streams of uplink plus downlink rates, bps/Hz."""
    return float(np.sum(capacity(snrs.gamma_B)) + np.sum(capacity(snrs.gamma_U)))


def cutset_high_snr(config):
    """Large-array, high-SNR cut-set bound with equal relay power split.

    Independent of the BS array. Warns (does not clamp) when either log
    argument drops to 1 or below, where the bound stops being meaningful.
    """
    P = config.effective_powers()
    K, N_R, lU, s2 = config.K, config.N_R, config.ell_U, config.sigma2
    uplink = N_R * lU * P.P_U / s2
    downlink = N_R * lU * P.P_R / (K * s2)
    if uplink <= 1 or downlink <= 1:
        warnings.warn("cut-set high-SNR form used outside its regime "
                      f"(log arguments {uplink:.3g}, {downlink:.3g})", stacklevel=2)
    return 0.5 * K * (math.log2(uplink) + math.log2(downlink))


def cutset_from_channels(H_UR, H_RU, P_R, P_U, sigma2):
    """Cut-set bound for given user-relay channels, equal relay power
    ``P_R / K`` per stream and user power ``P_U``.

    Uses the K x K forms, ``det(I + A A^H) = det(I + A^H A)``.
    """
    H_UR = np.asarray(H_UR, dtype=complex)
    H_RU = np.asarray(H_RU, dtype=complex)
    K = H_UR.shape[1]
    down = log_det_capacity(H_RU @ H_RU.conj().T, P_R / (K * sigma2))
    up = log_det_capacity(H_UR.conj().T @ H_UR, P_U / sigma2)
    return 0.5 * (down + up)


def cutset_exact(config, realization):
    P = config.effective_powers()
    return cutset_from_channels(realization.H_UR, realization.H_RU, P.P_R, P.P_U, config.sigma2)


def gap_high_snr(config):
    """Network-total high-SNR gap between the cut-set bound and SA-ZF.

    Divide by ``config.K`` for the per-user figure.
    """
    _check_theta(config)
    K, lam, t = config.K, config.lam, config.theta_BR - 1.0
    EB, ER, EU = config.E_B, config.E_R, config.E_U
    policy = config.power_policy
    if policy is PowerPolicy.FIXED:
        return 0.5 * K * (math.log2(1 + lam * (ER + K * EU) / (t * EB))
                          + math.log2(1 + EB / ER + lam * K * EU / (t * ER)))
    if policy is PowerPolicy.CASE_I:
        return 0.5 * K * (math.log2(1 + EB / ER) + math.log2(1 + lam * ER / (t * EB)))
    return 0.5 * K * math.log2(lam * config.N_R * ER / (t * EB))


def energy_efficiency(rate, config):
    """Spectral efficiency per milliwatt of total transmit power."""
    if rate < 0:
        raise ValueError(f"rate must be non-negative, got {rate}")
    return rate / config.effective_powers().total(config.K)


@dataclass
class RateReport:
    per_link_rates_B: np.ndarray
    per_link_rates_U: np.ndarray
    R_sum: float
    R_cutset_highsnr: float
    gap_highsnr: float
    energy_efficiency: float
    R_cutset_exact: float = None

    @property
    def gap_highsnr_per_user(self):
        return self.gap_highsnr / len(self.per_link_rates_B)

    @property
    def gap_direct(self):
        """``R_cutset_highsnr - R_sum``, network total."""
        return self.R_cutset_highsnr - self.R_sum


def rate_report(config, finite_correction=False, realization=None):
    snrs = asymptotic_snrs(config, finite_correction)
    R_sum = sum_spectral_efficiency(snrs)
    return RateReport(
        per_link_rates_B=capacity(snrs.gamma_B),
        per_link_rates_U=capacity(snrs.gamma_U),
        R_sum=R_sum,
        R_cutset_highsnr=cutset_high_snr(config),
        gap_highsnr=gap_high_snr(config),
        energy_efficiency=energy_efficiency(R_sum, config),
        R_cutset_exact=None if realization is None else cutset_exact(config, realization),
    )
