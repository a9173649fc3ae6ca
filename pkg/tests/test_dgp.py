"""Tests for the synthetic data generators."""

import numpy as np
import pytest

from mixtvp.dgp import (
    DgpConfig,
    data_csv,
    generate,
    generate_var_break,
    truth_csv,
)
from mixtvp.indicators import simulate_ms_chain, stationary_probs


def test_default_design_basics():
    y, X, truth = generate(DgpConfig(seed=1))
    assert y.shape == (100,) and X.shape == (100, 5)
    np.testing.assert_array_equal(X[:, 4], np.ones(100))
    assert truth.alpha.shape == (100, 5)
    assert set(np.unique(truth.s)) <= {0, 1}
    # both regime variances for coefficient 4 are tiny: the path is flat
    assert np.max(np.abs(truth.alpha[:, 3] - 2.0)) < 0.01


def test_regeneration_is_bit_identical():
    a = generate(DgpConfig(seed=7))
    b = generate(DgpConfig(seed=7))
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])
    np.testing.assert_array_equal(a[2].alpha, b[2].alpha)
    c = generate(DgpConfig(seed=8))
    assert not np.array_equal(a[0], c[0])


def test_chain_marginal_matches_stationary_law():
    rng = np.random.default_rng(0)
    hits = total = 0
    for _ in range(10_000):
        s = simulate_ms_chain(0.6, 0.95, 30, rng)
        hits += int(s.sum())
        total += s.size
    want = stationary_probs(0.6, 0.95)[1]
    assert want == pytest.approx(0.4 / 0.45)
    assert abs(hits / total - want) < 0.01


def test_regime_labelled_increment_scales():
    """Coefficient 1 moves like a unit-variance walk only in regime 1."""
    steps = []
    stay0 = []
    for seed in range(10):
        _, _, truth = generate(DgpConfig(seed=seed))
        a1, s = truth.alpha[:, 0], truth.s
        both_one = (s[1:] == 1) & (s[:-1] == 1)
        steps.extend(np.diff(a1)[both_one])
        stay0.extend(a1[s == 0] - (-4.0))
    assert 0.8 < np.var(steps) < 1.25
    assert np.max(np.abs(stay0)) < 1e-3


def test_config_validation():
    with pytest.raises(ValueError):
        DgpConfig(alpha0=(1.0, 2.0), psi0_bar=(1.0,), psi1_bar=(1.0, 1.0))
    with pytest.raises(ValueError):
        DgpConfig(p00=1.0)
    with pytest.raises(ValueError):
        DgpConfig(T=1)
    with pytest.raises(ValueError):
        DgpConfig(h_var=0.0)


def test_var_break_design():
    d = generate_var_break(T=120, seed=3)
    assert d.Y.shape == (120, 3) and d.break_at == 60
    assert np.all(np.isfinite(d.Y))
    for A in (d.A_pre, d.A_post):
        assert np.max(np.abs(np.linalg.eigvals(A))) < 1.0
    d2 = generate_var_break(T=120, seed=3)
    np.testing.assert_array_equal(d.Y, d2.Y)
    # the break moves the stationary mean, so the two halves separate
    mu_pre = d.Y[10 : d.break_at].mean(axis=0)
    mu_post = d.Y[d.break_at + 10 :].mean(axis=0)
    assert np.linalg.norm(mu_pre - mu_post) > 0.5


def test_csv_exports_parse_back():
    y, X, truth = generate(DgpConfig(T=12, seed=2))
    lines = data_csv(y, X).strip().splitlines()
    assert lines[0] == "y,x1,x2,x3,x4,x5"
    assert len(lines) == 13
    row = np.array([float(v) for v in lines[1].split(",")])
    assert row[0] == y[0] and np.all(row[1:] == X[0])

    tlines = truth_csv(truth).strip().splitlines()
    assert tlines[0] == "s,h,alpha1,alpha2,alpha3,alpha4,alpha5"
    vals = tlines[3].split(",")
    assert int(vals[0]) == truth.s[2]
    assert float(vals[1]) == truth.h[2]
