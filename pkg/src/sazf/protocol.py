"""Signal-space-alignment zero-forcing (SA-ZF) relaying for one channel
realization.

Phase one: the BS precodes with ``F_B = alpha_B H_BR^dag H_UR`` so that its
stream k lands on the relay along user k's channel, and the relay sees
``H_UR (alpha_B s_B + sqrt(P_U) s_U) + z_R``. The relay zero-forces with
``W_R = alpha_R H_RU^dag H_UR^dag`` and broadcasts. Phase two: every node
subtracts its own (known) contribution, and the BS applies the ZF receiver
``W_B = (H_RU H_RB^dag)^H``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .channel import NormalizationMode
from .errors import ShapeError
from .linalg import left_pseudo_inverse, right_pseudo_inverse

__all__ = [
    "ProtocolMatrices",
    "LinkSnrs",
    "TransmissionTrace",
    "alpha_bs_closed_form",
    "alpha_rs_closed_form",
    "alpha_bs",
    "alpha_rs",
    "build_protocol",
    "protocol_residuals",
    "link_snrs",
    "instantaneous_snrs",
    "simulate_transmission",
    "empirical_snrs",
]


@dataclass(eq=False)
class ProtocolMatrices:
    """Precoders, receivers and normalization scalars.

    The relay matrix is kept factored as ``alpha_R * relay_tx @ relay_rx``
    (``N_R x K`` times ``K x N_R``); `W_R` materializes it on request.
    """

    F_B: np.ndarray        # N_B x K
    W_B: np.ndarray        # N_B x K
    alpha_B: float
    alpha_R: float
    relay_tx: np.ndarray   # H_RU^dag, N_R x K
    relay_rx: np.ndarray   # H_UR^dag, K x N_R
    mode: NormalizationMode = NormalizationMode.STATISTICAL

    @property
    def W_R(self):
        return self.alpha_R * (self.relay_tx @ self.relay_rx)

    @property
    def w_U(self):
        """Columns ``w_{U,k}`` of ``(H_UR^dag)^H``, N_R x K."""
        return self.relay_rx.conj().T

    def apply_relay(self, y):
        return self.alpha_R * (self.relay_tx @ (self.relay_rx @ y))

    @property
    def relay_noise_gain(self):
        """``||w_{U,k}||^2`` per user."""
        return np.sum(np.abs(self.relay_rx) ** 2, axis=1)

    @property
    def bs_noise_gain(self):
        """``||h_{R,k}^T H_RB^dag||^2`` per stream, i.e. squared column
        norms of `W_B`."""
        return np.sum(np.abs(self.W_B) ** 2, axis=0)


@dataclass(eq=False)
class LinkSnrs:
    """Per-stream SNRs (linear) and BS-side effective noise variances."""

    gamma_B: np.ndarray
    gamma_U: np.ndarray
    sigma_tilde_B: np.ndarray

    @property
    def K(self):
        return len(self.gamma_B)


@dataclass(eq=False)
class TransmissionTrace:
    """Signals for a batch of symbol periods; each column is one period."""

    s_B: np.ndarray
    s_U: np.ndarray
    x_B: np.ndarray
    x_R: np.ndarray
    z_R: np.ndarray
    z_B: np.ndarray
    z_U: np.ndarray
    y_R: np.ndarray
    y_B: np.ndarray
    y_U: np.ndarray
    si_B: np.ndarray       # H_RB W_R H_BR x_B, known at the BS
    y_tilde_B: np.ndarray
    y_tilde_U: np.ndarray


def alpha_bs_closed_form(N_B, N_R, K, ell_B, ell_U, P_B):
    """Statistical BS normalization, from ``E tr[(H_BR H_BR^H)^{-1}]``
    being ``N_R / ((N_B - N_R) ell_B)``."""
    if N_B <= N_R:
        raise ShapeError(f"need N_B > N_R, got N_B={N_B}, N_R={N_R}")
    return math.sqrt((N_B - N_R) * ell_B * P_B / (N_R * K * ell_U))


def alpha_rs_closed_form(N_R, K, ell_U, P_R, alpha_B, P_U):
    """Statistical relay normalization (relay-noise term neglected)."""
    if N_R <= K:
        raise ShapeError(f"need N_R > K, got N_R={N_R}, K={K}")
    return math.sqrt((N_R - K) * ell_U * P_R / (K * (alpha_B ** 2 + P_U)))


def _mode(config, mode):
    return config.normalization_mode if mode is None else NormalizationMode(mode)


def alpha_bs(config, realization=None, mode=None):
    """BS precoder scale so that the transmit power meets ``P_B``.

    Statistical mode ignores `realization`. Instantaneous mode makes
    ``tr(F_B F_B^H) = P_B`` hold for this realization.
    """
    P = config.effective_powers()
    if _mode(config, mode) is NormalizationMode.STATISTICAL:
        return alpha_bs_closed_form(config.N_B, config.N_R, config.K,
                                    config.ell_B, config.ell_U, P.P_B)
    gram = realization.bs_gram(config.condition_threshold)
    return math.sqrt(P.P_B / float(np.sum(gram.quad_diag(realization.H_UR))))


def alpha_rs(config, alpha_B, realization=None, mode=None):
    """Relay scale so that the relay transmit power meets ``P_R``.

    Instantaneous mode includes the forwarded relay noise in the power
    budget, averaging over symbols and noise but not over the channel.
    """
    P = config.effective_powers()
    if _mode(config, mode) is NormalizationMode.STATISTICAL:
        return alpha_rs_closed_form(config.N_R, config.K, config.ell_U, P.P_R, alpha_B, P.P_U)
    T = right_pseudo_inverse(realization.H_RU, config.condition_threshold)
    R = left_pseudo_inverse(realization.H_UR, config.condition_threshold)
    # covariance of H_UR^dag y_R
    C = (alpha_B ** 2 + P.P_U) * np.eye(config.K) + config.sigma2 * (R @ R.conj().T)
    unit_power = float(np.real(np.trace(T @ C @ T.conj().T)))
    return math.sqrt(P.P_R / unit_power)


def build_protocol(config, realization, mode=None):
    mode = _mode(config, mode)
    H_BR, H_UR = realization.H_BR, realization.H_UR
    gram = realization.bs_gram(config.condition_threshold)
    # (H_BR H_BR^H)^{-1} H_UR, shared by the precoder and the BS receiver
    G_inv_H_UR = gram.solve(H_UR)

    a_B = alpha_bs(config, realization, mode)
    F_B = a_B * (H_BR.conj().T @ G_inv_H_UR)
    relay_tx = right_pseudo_inverse(realization.H_RU, config.condition_threshold)
    relay_rx = left_pseudo_inverse(H_UR, config.condition_threshold)
    a_R = alpha_rs(config, a_B, realization, mode)
    # H_RB^dag = conj((H_BR H_BR^H)^{-1}) H_RB^H, hence
    # W_B = (H_RU H_RB^dag)^H = H_RB conj((H_BR H_BR^H)^{-1} H_UR)
    W_B = realization.H_RB @ G_inv_H_UR.conj()
    return ProtocolMatrices(F_B=F_B, W_B=W_B, alpha_B=a_B, alpha_R=a_R,
                            relay_tx=relay_tx, relay_rx=relay_rx, mode=mode)


def protocol_residuals(realization, protocol):
    """Relative residuals of the alignment and zero-forcing identities."""
    H_UR = realization.H_UR
    K = H_UR.shape[1]
    I = np.eye(K)
    a_B, a_R = protocol.alpha_B, protocol.alpha_R
    target = a_B * H_UR
    alignment = np.linalg.norm(realization.H_BR @ protocol.F_B - target) / np.linalg.norm(target)
    relay_eff = realization.H_RU @ protocol.apply_relay(H_UR) / a_R
    uplink_eff = protocol.W_B.conj().T @ (realization.H_RB @ protocol.apply_relay(H_UR)) / a_R
    sqrt_k = math.sqrt(K)
    return {
        "alignment": float(alignment),
        "relay_zf": float(np.linalg.norm(relay_eff - I) / sqrt_k),
        "end_to_end_zf": float(np.linalg.norm(uplink_eff - I) / sqrt_k),
    }


def link_snrs(alpha_B, alpha_R, P_U, sigma2, relay_noise_gain, bs_noise_gain):
    """Per-stream SNRs after self-interference removal and zero-forcing.

    Zero noise yields ``inf`` rather than a floating-point error.
    """
    w = np.asarray(relay_noise_gain, dtype=float)
    g = np.asarray(bs_noise_gain, dtype=float)
    relay_noise = alpha_R ** 2 * sigma2 * w
    sigma_tilde_B = sigma2 * g
    with np.errstate(divide="ignore", invalid="ignore"):
        gamma_U = alpha_R ** 2 * alpha_B ** 2 / (relay_noise + sigma2)
        gamma_B = alpha_R ** 2 * P_U / (relay_noise + sigma_tilde_B)
    gamma_U = np.where(np.isnan(gamma_U), np.inf, gamma_U)
    gamma_B = np.where(np.isnan(gamma_B), np.inf, gamma_B)
    return LinkSnrs(gamma_B=gamma_B, gamma_U=gamma_U, sigma_tilde_B=sigma_tilde_B)


def instantaneous_snrs(config, realization, protocol):
    P = config.effective_powers()
    return link_snrs(protocol.alpha_B, protocol.alpha_R, P.P_U, config.sigma2,
                     protocol.relay_noise_gain, protocol.bs_noise_gain)


def _cn(rng, shape, variance=1.0):
    return np.sqrt(variance / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def simulate_transmission(config, realization, protocol, rng, n_symbols=1, noise=True):
    """Run the two-phase exchange for `n_symbols` symbol periods.

    Symbols are unit-power circularly-symmetric Gaussian. With
    ``noise=False`` every noise vector is zero, which leaves only the
    desired streams after self-interference removal.
    """
    P = config.effective_powers()
    K, N_R, N_B = config.K, config.N_R, config.N_B
    n = int(n_symbols)
    s_B = _cn(rng, (K, n))
    s_U = _cn(rng, (K, n))
    if noise:
        z_R = _cn(rng, (N_R, n), config.sigma2)
        z_B = _cn(rng, (N_B, n), config.sigma2)
        z_U = _cn(rng, (K, n), config.sigma2)
    else:
        z_R = np.zeros((N_R, n), complex)
        z_B = np.zeros((N_B, n), complex)
        z_U = np.zeros((K, n), complex)

    sqrt_PU = math.sqrt(P.P_U)
    x_B = protocol.F_B @ s_B
    y_R = realization.H_BR @ x_B + sqrt_PU * (realization.H_UR @ s_U) + z_R
    x_R = protocol.apply_relay(y_R)
    y_B = realization.H_RB @ x_R + z_B
    y_U = realization.H_RU @ x_R + z_U

    si_B = realization.H_RB @ protocol.apply_relay(realization.H_BR @ x_B)
    y_tilde_B = protocol.W_B.conj().T @ (y_B - si_B)
    # user k knows alpha_R and its own symbol, so it removes alpha_R sqrt(P_U) s_{U,k}
    y_tilde_U = y_U - protocol.alpha_R * sqrt_PU * s_U
    return TransmissionTrace(s_B=s_B, s_U=s_U, x_B=x_B, x_R=x_R, z_R=z_R, z_B=z_B, z_U=z_U,
                             y_R=y_R, y_B=y_B, y_U=y_U, si_B=si_B,
                             y_tilde_B=y_tilde_B, y_tilde_U=y_tilde_U)


def empirical_snrs(config, protocol, trace):
    """Sample SNRs of the post-processing estimates in `trace`.

    Returns ``(gamma_B, gamma_U)``, each of length K.
    """
    P = config.effective_powers()
    gain_B = protocol.alpha_R * math.sqrt(P.P_U)
    gain_U = protocol.alpha_R * protocol.alpha_B
    err_B = trace.y_tilde_B - gain_B * trace.s_U
    err_U = trace.y_tilde_U - gain_U * trace.s_B
    gamma_B = gain_B ** 2 / np.mean(np.abs(err_B) ** 2, axis=1)
    gamma_U = gain_U ** 2 / np.mean(np.abs(err_U) ** 2, axis=1)
    return gamma_B, gamma_U
