"""Network configuration, power policies and Rayleigh channel draws."""

import enum
import logging
import math
import warnings
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import DegenerateChannel, InvalidConfig, SingularGram
from .linalg import POLICY, GramFactor, gram_factor

__all__ = [
    "PowerPolicy",
    "NormalizationMode",
    "EffectivePowers",
    "NetworkConfig",
    "ChannelRealization",
    "dbm_to_mw",
    "mw_to_dbm",
    "trial_rng",
    "sample_small_scale",
    "draw_realization",
]

log = logging.getLogger(__name__)

MAX_REDRAWS = 100


class PowerPolicy(str, enum.Enum):
    """How the BS and user transmit powers scale with the relay array."""

    FIXED = "fixed"
    CASE_I = "case1"    # user power E_U / N_R
    CASE_II = "case2"   # BS and user power E_B / N_R, E_U / N_R

    @classmethod
    def parse(cls, text):
        key = str(text).strip().lower().replace("_", "").replace("-", "").replace(" ", "")
        aliases = {
            "fixed": cls.FIXED,
            "case1": cls.CASE_I, "casei": cls.CASE_I, "i": cls.CASE_I,
            "case2": cls.CASE_II, "caseii": cls.CASE_II, "ii": cls.CASE_II,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown power policy {text!r}") from None

    @property
    def label(self):
        return {"fixed": "Fixed", "case1": "CaseI", "case2": "CaseII"}[self.value]


class NormalizationMode(str, enum.Enum):
    STATISTICAL = "statistical"
    INSTANTANEOUS = "instantaneous"

    @classmethod
    def parse(cls, text):
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise ValueError(f"unknown normalization mode {text!r}") from None


def dbm_to_mw(p_dbm):
    return 10.0 ** (p_dbm / 10.0)


def mw_to_dbm(p_mw):
    return 10.0 * math.log10(p_mw)


@dataclass(frozen=True)
class EffectivePowers:
    P_B: float
    P_R: float
    P_U: float

    def total(self, K):
        """Total consumed transmit power ``P_B + P_R + K P_U`` in mW."""
        return self.P_B + self.P_R + K * self.P_U


@dataclass(frozen=True)
class NetworkConfig:
    """Scenario parameters. Powers and noise in milliwatts, path losses as
    linear gains in (0, 1].

    The BS array size is ``N_B = round(theta_BR * N_R)``.
    """

    K: int = 3
    N_R: int = 200
    theta_BR: float = 5.0
    E_B: float = 10.0
    E_R: float = 100.0
    E_U: float = 1.0
    sigma2: float = 0.01
    ell_B: float = 1.0
    ell_U: float = 0.125
    power_policy: PowerPolicy = PowerPolicy.FIXED
    normalization_mode: NormalizationMode = NormalizationMode.STATISTICAL
    condition_threshold: float = POLICY.condition_threshold

    def __post_init__(self):
        object.__setattr__(self, "power_policy", PowerPolicy.parse(self.power_policy)
                           if not isinstance(self.power_policy, PowerPolicy) else self.power_policy)
        object.__setattr__(self, "normalization_mode",
                           self.normalization_mode
                           if isinstance(self.normalization_mode, NormalizationMode)
                           else NormalizationMode.parse(self.normalization_mode))
        if int(self.K) != self.K or self.K < 1:
            raise InvalidConfig(f"K must be a positive integer, got {self.K}")
        if int(self.N_R) != self.N_R or self.N_R <= self.K:
            raise InvalidConfig(f"need N_R > K, got N_R={self.N_R}, K={self.K}")
        object.__setattr__(self, "K", int(self.K))
        object.__setattr__(self, "N_R", int(self.N_R))
        if not self.theta_BR > 1:
            raise InvalidConfig(f"need theta_BR > 1, got {self.theta_BR}")
        if not self.N_B > self.N_R:
            raise InvalidConfig(f"need N_B > N_R, got N_B={self.N_B}, N_R={self.N_R}")
        for name in ("E_B", "E_R", "E_U", "sigma2"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise InvalidConfig(f"{name} must be positive and finite, got {value}")
        for name in ("ell_B", "ell_U"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise InvalidConfig(f"{name} must lie in (0, 1], got {value}")
        if not self.condition_threshold > 1:
            raise InvalidConfig("condition_threshold must exceed 1")
        realized = self.N_B / self.N_R
        if abs(realized - self.theta_BR) > 1e-3 * self.theta_BR:
            warnings.warn(
                f"N_B rounded to {self.N_B}; realized antenna ratio {realized:.4f} "
                f"differs from theta_BR={self.theta_BR}",
                stacklevel=3,
            )

    @property
    def N_B(self):
        return int(round(self.theta_BR * self.N_R))

    @property
    def lam(self):
        """Path-loss ratio ``ell_U / ell_B``."""
        return self.ell_U / self.ell_B

    def effective_powers(self):
        policy = self.power_policy
        if policy is PowerPolicy.FIXED:
            return EffectivePowers(self.E_B, self.E_R, self.E_U)
        if policy is PowerPolicy.CASE_I:
            return EffectivePowers(self.E_B, self.E_R, self.E_U / self.N_R)
        return EffectivePowers(self.E_B / self.N_R, self.E_R, self.E_U / self.N_R)

    def to_dict(self):
        d = asdict(self)
        d["power_policy"] = self.power_policy.value
        d["normalization_mode"] = self.normalization_mode.value
        return d


@dataclass(eq=False)
class ChannelRealization:
    """One draw of the uplink channels; downlink channels follow by
    reciprocity (plain transpose, no conjugation)."""

    H_BR: np.ndarray   # N_R x N_B
    H_UR: np.ndarray   # N_R x K, column k is h_{k,R}
    _bs_gram: GramFactor = field(default=None, repr=False)
    _user_gram: GramFactor = field(default=None, repr=False)

    @property
    def H_RB(self):
        return self.H_BR.T

    @property
    def H_RU(self):
        return self.H_UR.T

    @property
    def shape(self):
        """``(N_R, N_B, K)``."""
        return self.H_BR.shape[0], self.H_BR.shape[1], self.H_UR.shape[1]

    def bs_gram(self, threshold=None):
        """Cholesky factor of ``H_BR H_BR^H`` (N_R x N_R), cached."""
        if self._bs_gram is None:
            self._bs_gram = gram_factor(self.H_BR, "rows", threshold)
        return self._bs_gram

    def user_gram(self, threshold=None):
        """Cholesky factor of ``H_UR^H H_UR`` (K x K), cached."""
        if self._user_gram is None:
            self._user_gram = gram_factor(self.H_UR, "cols", threshold)
        return self._user_gram


def trial_rng(master_seed, *indices):
    """Independent generator for one work unit, derived by hashing the
    master seed together with `indices` (e.g. point and trial index)."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(i) for i in indices))
    return np.random.default_rng(ss)


def sample_small_scale(rows, cols, rng):
    """I.i.d. CN(0, 1) matrix: real and imaginary parts N(0, 1/2)."""
    if rows < 1 or cols < 1:
        raise ValueError(f"rows and cols must be >= 1, got ({rows}, {cols})")
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return (re + 1j * im) * np.sqrt(0.5)


def draw_realization(config, rng):
    """Draw ``H_BR = sqrt(ell_B) H~_BR`` and ``H_UR = sqrt(ell_U) H~_UR``.

    Draws whose BS-side or user-side Gram matrix exceeds
    ``config.condition_threshold`` are discarded and redrawn from the same
    stream, so results stay deterministic for a given generator state.
    """
    N_R, N_B, K = config.N_R, config.N_B, config.K
    for attempt in range(MAX_REDRAWS):
        H_BR = np.sqrt(config.ell_B) * sample_small_scale(N_R, N_B, rng)
        H_UR = np.sqrt(config.ell_U) * sample_small_scale(N_R, K, rng)
        realization = ChannelRealization(H_BR, H_UR)
        try:
            realization.bs_gram(config.condition_threshold)
            realization.user_gram(config.condition_threshold)
        except SingularGram as exc:
            log.warning("rejected ill-conditioned channel draw %d: %s", attempt, exc)
            continue
        return realization
    raise DegenerateChannel(
        f"{MAX_REDRAWS} consecutive ill-conditioned draws; check N_B, N_R, K "
        f"and condition_threshold"
    )
