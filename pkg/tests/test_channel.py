import logging
import warnings

import numpy as np
import pytest

from sazf.channel import (
    EffectivePowers,
    NetworkConfig,
    NormalizationMode,
    PowerPolicy,
    dbm_to_mw,
    draw_realization,
    mw_to_dbm,
    sample_small_scale,
    trial_rng,
)
from sazf.errors import DegenerateChannel, InvalidConfig


def test_small_scale_deterministic():
    a = sample_small_scale(2, 2, np.random.default_rng(5))
    b = sample_small_scale(2, 2, np.random.default_rng(5))
    assert np.array_equal(a, b)


def test_small_scale_unit_power_and_halves():
    H = sample_small_scale(200, 200, np.random.default_rng(0))
    assert np.mean(np.abs(H) ** 2) == pytest.approx(1.0, rel=0.03)
    assert np.var(H.real) == pytest.approx(0.5, rel=0.03)
    assert np.var(H.imag) == pytest.approx(0.5, rel=0.03)


def test_small_scale_entries_uncorrelated():
    rng = np.random.default_rng(1)
    draws = np.stack([sample_small_scale(2, 2, rng).ravel() for _ in range(10_000)])
    cov = draws.T @ draws.conj() / len(draws)
    off = cov[~np.eye(4, dtype=bool)]
    assert np.max(np.abs(off)) < 0.05
    # circular symmetry: pseudo-covariance vanishes too
    assert np.max(np.abs(draws.T @ draws / len(draws))) < 0.05


def test_small_scale_rejects_empty():
    with pytest.raises(ValueError):
        sample_small_scale(0, 3, np.random.default_rng(0))


def test_unit_path_loss_keeps_small_scale_draw():
    cfg = NetworkConfig(K=2, N_R=4, theta_BR=2.0, ell_B=1.0, ell_U=1.0)
    real = draw_realization(cfg, np.random.default_rng(3))
    rng = np.random.default_rng(3)
    H_BR = sample_small_scale(4, 8, rng)
    H_UR = sample_small_scale(4, 2, rng)
    assert np.array_equal(real.H_BR, H_BR)
    assert np.array_equal(real.H_UR, H_UR)


def test_path_loss_scales_entry_power():
    cfg = NetworkConfig(K=3, N_R=200, theta_BR=1.5, ell_U=2.0 ** -3, ell_B=0.5)
    rng = trial_rng(11, 0)
    reals = [draw_realization(cfg, rng) for _ in range(20)]
    assert np.mean([np.mean(np.abs(r.H_UR) ** 2) for r in reals]) == pytest.approx(0.125, rel=0.03)
    assert np.mean([np.mean(np.abs(r.H_BR) ** 2) for r in reals]) == pytest.approx(0.5, rel=0.03)


def test_reciprocity_is_exact():
    cfg = NetworkConfig(K=3, N_R=16, theta_BR=2.0)
    real = draw_realization(cfg, np.random.default_rng(0))
    assert np.array_equal(real.H_RB, real.H_BR.T)
    assert np.linalg.norm(real.H_RB - real.H_BR.T) == 0.0
    for k in range(3):
        assert np.array_equal(real.H_RU[k], real.H_UR[:, k])
    assert real.shape == (16, 32, 3)


def test_same_seed_same_realization():
    cfg = NetworkConfig(K=3, N_R=16, theta_BR=2.0)
    a = draw_realization(cfg, trial_rng(9, 1, 2))
    b = draw_realization(cfg, trial_rng(9, 1, 2))
    c = draw_realization(cfg, trial_rng(9, 2, 1))
    assert np.array_equal(a.H_BR, b.H_BR) and np.array_equal(a.H_UR, b.H_UR)
    assert not np.array_equal(a.H_BR, c.H_BR)


def test_degenerate_channel_after_repeated_rejection(caplog):
    cfg = NetworkConfig(K=2, N_R=4, theta_BR=2.0, condition_threshold=1.0001)
    with caplog.at_level(logging.WARNING, logger="sazf.channel"):
        with pytest.raises(DegenerateChannel):
            draw_realization(cfg, np.random.default_rng(0))
    assert len(caplog.records) == 100
    assert "rejected" in caplog.records[0].getMessage()


@pytest.mark.parametrize("kwargs", [
    {"K": 4, "N_R": 4},
    {"K": 0},
    {"theta_BR": 1.0},
    {"theta_BR": 1.001, "N_R": 10},      # N_B rounds to N_R
    {"E_B": 0.0},
    {"sigma2": -1.0},
    {"ell_U": 1.5},
    {"ell_B": 0.0},
    {"power_policy": "case3"},
])
def test_invalid_configs(kwargs):
    with pytest.raises((InvalidConfig, ValueError)):
        NetworkConfig(**kwargs)


def test_bs_array_rounding_and_warning():
    assert NetworkConfig(N_R=200, theta_BR=5).N_B == 1000
    with pytest.warns(UserWarning, match="rounded"):
        cfg = NetworkConfig(K=3, N_R=32, theta_BR=7 / 3)
    assert cfg.N_B == 75
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        NetworkConfig(K=3, N_R=32, theta_BR=3.0)


def test_effective_powers_per_policy():
    base = dict(K=3, N_R=200, E_B=10.0, E_R=100.0, E_U=1.0)
    assert NetworkConfig(**base).effective_powers() == EffectivePowers(10.0, 100.0, 1.0)
    assert NetworkConfig(**base, power_policy=PowerPolicy.CASE_I).effective_powers() \
        == EffectivePowers(10.0, 100.0, 1.0 / 200)
    assert NetworkConfig(**base, power_policy="case2").effective_powers() \
        == EffectivePowers(10.0 / 200, 100.0, 1.0 / 200)


def test_policy_and_mode_parsing():
    assert PowerPolicy.parse("CaseI") is PowerPolicy.CASE_I
    assert PowerPolicy.parse("case_ii") is PowerPolicy.CASE_II
    assert PowerPolicy.parse("Fixed") is PowerPolicy.FIXED
    assert NormalizationMode.parse("Instantaneous") is NormalizationMode.INSTANTANEOUS
    cfg = NetworkConfig(normalization_mode="instantaneous")
    assert cfg.normalization_mode is NormalizationMode.INSTANTANEOUS
    assert cfg.lam == pytest.approx(0.125)


def test_dbm_conversion():
    assert dbm_to_mw(10) == 10.0
    assert dbm_to_mw(20) == 100.0
    assert dbm_to_mw(0) == 1.0
    assert dbm_to_mw(-20) == pytest.approx(0.01)
    assert mw_to_dbm(100.0) == pytest.approx(20.0)
