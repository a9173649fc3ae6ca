"""Tests for regime indicator conditionals.

The chain sampler is checked against exhaustive path enumeration, the
conjugate updates against hand-computed parameters, and the whole
indicator block against a successive-conditional prior-invariance run.
"""

import numpy as np
import pytest
from scipy import stats

from mixtvp.indicators import (
    PAIRING_LITERAL,
    BernoulliCounts,
    MsCounts,
    bernoulli_posterior_params,
    regime_log_densities,
    sample_indicators_mix,
    sample_indicators_ms,
    stationary_probs,
    transition_posterior_params,
    update_bernoulli_probs,
    update_transition_probs,
)
from mixtvp.shrinkage import ConstantBlock


def make_block(alpha0, sp1, sp0):
    return ConstantBlock(
        alpha0=np.asarray(alpha0, dtype=float),
        sqrt_psi1=np.asarray(sp1, dtype=float),
        sqrt_psi0=np.asarray(sp0, dtype=float),
    )


def loglik_reference(alpha, alpha0, sp1, sp0, model_class, pool_means=None):
    """Straight-loop pairwise transition log densities, (T, K, 2, 2).

    Entry [t, i, k, l]: density of alpha[t, i] under regime k at t-1 and
    regime l at t.  Regime 1 (and both regimes of the random-walk class)
    carries the previous deviation from the center rescaled by the ratio
    of the arriving and departing innovation roots.  Roots are signed;
    the ratio and pool offsets keep the sign, the scale drops it.
    """
    T, K = alpha.shape
    out = np.zeros((T, K, 2, 2))
    roots = np.stack([np.asarray(sp0, float), np.asarray(sp1, float)], axis=-1)
    for t in range(T):
        for i in range(K):
            dev = 0.0 if t == 0 else alpha[t - 1, i] - alpha0[i]
            for k in range(2):
                for l in range(2):
                    rl, rk = roots[i, l], roots[i, k]
                    if model_class == "TVP-MIX":
                        m = alpha0[i] + (rl / rk) * dev if l == 1 else alpha0[i]
                    elif model_class == "TVP-RW":
                        m = alpha0[i] + (rl / rk) * dev
                    else:
                        m = alpha0[i] + rl * pool_means[t, i]
                    out[t, i, k, l] = stats.norm.logpdf(alpha[t, i], m, abs(rl))
    return out


def enum_chain_marginals(loglik, p00, p11):
    """Exact marginals of s_1..s_T by summing over all 2^T paths.

    loglik has shape (T, 2, 2); the first period reads the k = 0 slice
    (its densities carry no previous-regime dependence).
    """
    T = loglik.shape[0]
    trans = np.array([[p00, 1.0 - p00], [1.0 - p11, p11]])
    init = stationary_probs(p00, p11)
    joint = np.zeros((2,) * T)
    for idx in np.ndindex(*joint.shape):
        lp = np.log(init[idx[0]]) + loglik[0, 0, idx[0]]
        for t in range(1, T):
            lp += np.log(trans[idx[t - 1], idx[t]]) + loglik[t, idx[t - 1], idx[t]]
        joint[idx] = np.exp(lp)
    joint /= joint.sum()
    marg = np.empty(T)
    for t in range(T):
        axes = tuple(a for a in range(T) if a != t)
        marg[t] = joint.sum(axis=axes)[1]
    return marg


def test_regime_log_densities_match_reference():
    rng = np.random.default_rng(11)
    T, K = 9, 3
    alpha0 = rng.normal(size=K)
    sp1 = rng.uniform(0.5, 1.5, size=K)
    sp0 = rng.uniform(0.02, 0.2, size=K)
    alpha = rng.normal(size=(T, K))
    block = make_block(alpha0, sp1, sp0)
    for cls in ("TVP-MIX", "TVP-RW"):
        got = regime_log_densities(alpha, block, cls)
        want = loglik_reference(alpha, alpha0, sp1, sp0, cls)
        np.testing.assert_allclose(got, want, rtol=1e-10)
    # first period carries no previous-regime dependence
    got = regime_log_densities(alpha, block, "TVP-MIX")
    np.testing.assert_allclose(got[0, :, 0, :], got[0, :, 1, :], rtol=1e-14)
    # roots enter as signed coefficients: flipping one sign must flip the
    # cross-regime carry, not just rescale it
    sp1_signed = sp1 * np.array([1.0, -1.0, 1.0])
    sp0_signed = sp0 * np.array([-1.0, 1.0, 1.0])
    block_signed = make_block(alpha0, sp1_signed, sp0_signed)
    for cls in ("TVP-MIX", "TVP-RW"):
        got = regime_log_densities(alpha, block_signed, cls)
        want = loglik_reference(alpha, alpha0, sp1_signed, sp0_signed, cls)
        np.testing.assert_allclose(got, want, rtol=1e-10)


def test_pool_regime_means():
    rng = np.random.default_rng(3)
    T, K = 4, 2
    block = make_block(rng.normal(size=K), [1.0, 0.8], [0.1, 0.05])
    pool_means = rng.normal(size=(T, K))
    got = regime_log_densities(rng.normal(size=(T, K)) * 0.0, block, "TVP-POOL", pool_means)
    # regime-0 density of 0 equals N(0; a0 + sp0*mu, sp0^2)
    want = stats.norm.logpdf(
        0.0, block.alpha0[0] + block.sqrt_psi0[0] * pool_means[2, 0], block.sqrt_psi0[0]
    )
    np.testing.assert_allclose(got[2, 0, 0, 0], want, rtol=1e-12)
    # no autoregression: densities are unchanged by the previous regime
    np.testing.assert_allclose(got[..., 0, :], got[..., 1, :], rtol=1e-14)
    with pytest.raises(ValueError):
        regime_log_densities(np.zeros((T, K)), block, "TVP-POOL")


def test_ms_sampler_matches_enumeration():
    rng = np.random.default_rng(20240212)
    T, K = 8, 2
    alpha0 = np.array([0.4, -0.7])
    sp1 = np.array([0.9, 1.1])
    sp0 = np.array([0.08, 0.12])
    block = make_block(alpha0, sp1, sp0)
    # a path with a visible mid-sample drift so regimes are informative
    alpha = np.vstack([alpha0 + 0.02 * rng.normal(size=(4, K)),
                       alpha0 + np.cumsum(0.8 * rng.normal(size=(4, K)), axis=0)])
    p00, p11 = 0.6, 0.9
    pooled = loglik_reference(alpha, alpha0, sp1, sp0, "TVP-MIX").sum(axis=1)
    want = enum_chain_marginals(pooled, p00, p11)

    n = 40000
    draws = np.empty((n, T), dtype=np.int8)
    for j in range(n):
        draws[j] = sample_indicators_ms(alpha, block, p00, p11, "TVP-MIX", rng)
    freq = draws.mean(axis=0)
    se = np.sqrt(np.maximum(want * (1.0 - want), 1e-6) / n)
    assert np.all(np.abs(freq - want) < 5.0 * se + 1e-4)


def enum_site_marginals(loglik, p):
    """Exact P(s_t = 1) for one coefficient under the independent prior."""
    T = loglik.shape[0]
    joint = np.zeros((2,) * T)
    for idx in np.ndindex(*joint.shape):
        lp = 0.0
        for t in range(T):
            lp += np.log(p) if idx[t] else np.log1p(-p)
            lp += loglik[t, idx[t - 1] if t > 0 else 0, idx[t]]
        joint[idx] = np.exp(lp)
    joint /= joint.sum()
    marg = np.empty(T)
    for t in range(T):
        axes = tuple(a for a in range(T) if a != t)
        marg[t] = joint.sum(axis=axes)[1]
    return marg


def test_mix_sampler_single_period_is_pointwise():
    rng = np.random.default_rng(77)
    K = 2
    alpha0 = np.zeros(K)
    sp1 = np.array([1.0, 0.7])
    sp0 = np.array([0.1, 0.05])
    block = make_block(alpha0, sp1, sp0)
    alpha = np.array([[0.5, -0.2]])
    p = np.array([0.3, 0.6])

    want = np.empty(K)
    for i in range(K):
        l1 = stats.norm.logpdf(alpha[0, i], alpha0[i], sp1[i]) + np.log(p[i])
        l0 = stats.norm.logpdf(alpha[0, i], alpha0[i], sp0[i]) + np.log1p(-p[i])
        want[i] = 1.0 / (1.0 + np.exp(l0 - l1))

    n = 30000
    acc = np.zeros(K)
    for _ in range(n):
        acc += sample_indicators_mix(alpha, block, p, "TVP-MIX", rng)[0]
    freq = acc / n
    se = np.sqrt(np.maximum(want * (1.0 - want), 1e-6) / n)
    assert np.all(np.abs(freq - want) < 5.0 * se + 1e-4)


def test_mix_sampler_matches_enumeration():
    """Long-run site frequencies match brute-force joint marginals."""
    rng = np.random.default_rng(99)
    T, K = 5, 1
    alpha0 = np.array([0.2])
    sp1 = np.array([0.8])
    sp0 = np.array([0.12])
    block = make_block(alpha0, sp1, sp0)
    alpha = np.array([[0.25], [0.1], [0.9], [1.1], [0.3]])
    p = np.array([0.4])

    ll = loglik_reference(alpha, alpha0, sp1, sp0, "TVP-MIX")[:, 0]
    want = enum_site_marginals(ll, p[0])

    n = 40000
    s = np.ones((T, K), dtype=np.int8)
    acc = np.zeros(T)
    for _ in range(n):
        s = sample_indicators_mix(alpha, block, p, "TVP-MIX", rng, S=s)
        acc += s[:, 0]
    freq = acc / n
    # sweeps are a Markov chain, so pad the binomial error for correlation
    se = np.sqrt(np.maximum(want * (1.0 - want), 1e-6) / n)
    assert np.all(np.abs(freq - want) < 12.0 * se + 2e-3)


def test_transition_posterior_params_exact():
    s = np.array([0, 0, 1, 1, 0, 1], dtype=np.int8)
    counts = MsCounts(c00=0.3, c01=30.0, c10=30.0, c11=0.3)
    (a0, b0), (a1, b1) = transition_posterior_params(s, counts)
    assert (a0, b0) == (1.0 + 0.3, 2.0 + 30.0)
    assert (a1, b1) == (1.0 + 30.0, 1.0 + 0.3)
    rng = np.random.default_rng(0)
    p00, p11 = update_transition_probs(s, counts, rng)
    assert 0.0 < p00 < 1.0 and 0.0 < p11 < 1.0


def test_bernoulli_posterior_params_exact():
    S = np.ones((10, 1), dtype=np.int8)
    counts = BernoulliCounts(c0=0.3, c1=30.0)
    a, b = bernoulli_posterior_params(S, counts)
    assert a[0] == 10.3 and b[0] == 30.0
    a, b = bernoulli_posterior_params(S, counts, pairing=PAIRING_LITERAL)
    assert a[0] == 0.3 and b[0] == 40.0
    with pytest.raises(ValueError):
        bernoulli_posterior_params(S, counts, pairing="other")
    rng = np.random.default_rng(1)
    p = update_bernoulli_probs(np.zeros((6, 3), dtype=np.int8), counts, rng)
    assert p.shape == (3,) and np.all((p > 0) & (p < 1))


def simulate_path_given_s(s, block, rng):
    """Prior draw of the centered path for the MS mixture law.

    On a regime-1 step the carried deviation is rescaled by the ratio of
    the arriving and departing innovation roots; regime 0 reverts to the
    center.  Period 1 starts from the center.
    """
    T = s.shape[0]
    K = block.K
    sd = np.where(s[:, None] == 1, block.sqrt_psi1, block.sqrt_psi0)
    alpha = np.empty((T, K))
    alpha[0] = block.alpha0 + sd[0] * rng.normal(size=K)
    for t in range(1, T):
        if s[t] == 1:
            mean = block.alpha0 + (sd[t] / sd[t - 1]) * (alpha[t - 1] - block.alpha0)
        else:
            mean = block.alpha0
        alpha[t] = mean + sd[t] * rng.normal(size=K)
    return alpha


def simulate_chain(p00, p11, T, rng):
    s = np.empty(T, dtype=np.int8)
    s[0] = rng.random() < stationary_probs(p00, p11)[1]
    for t in range(1, T):
        stay = p11 if s[t - 1] == 1 else 1.0 - p00
        s[t] = rng.random() < stay
    return s


def test_geweke_prior_invariance():
    """Alternating the three conditionals must leave the prior invariant."""
    rng = np.random.default_rng(314159)
    T, K = 20, 1
    block = make_block([0.5], [1.0], [0.05])
    counts = MsCounts(c00=3.0, c01=8.0, c10=4.0, c11=2.0)

    n_direct = 60000
    direct_occ = np.empty(n_direct)
    for j in range(n_direct):
        p00 = rng.beta(counts.c00, counts.c10)
        p11 = rng.beta(counts.c01, counts.c11)
        direct_occ[j] = simulate_chain(p00, p11, T, rng).mean()

    p00 = rng.beta(counts.c00, counts.c10)
    p11 = rng.beta(counts.c01, counts.c11)
    s = simulate_chain(p00, p11, T, rng)
    n_sweep, burn = 20000, 1000
    rec_p = np.empty((n_sweep, 2))
    rec_occ = np.empty(n_sweep)
    for j in range(n_sweep + burn):
        alpha = simulate_path_given_s(s, block, rng)
        s = sample_indicators_ms(alpha, block, p00, p11, "TVP-MIX", rng)
        p00, p11 = update_transition_probs(s, counts, rng)
        if j >= burn:
            rec_p[j - burn] = (p00, p11)
            rec_occ[j - burn] = s.mean()

    def batch_se(x, nb=50):
        m = x.reshape(nb, -1).mean(axis=1)
        return m.std(ddof=1) / np.sqrt(nb)

    mean_p00 = counts.c00 / (counts.c00 + counts.c10)
    mean_p11 = counts.c01 / (counts.c01 + counts.c11)
    assert abs(rec_p[:, 0].mean() - mean_p00) < 6.0 * batch_se(rec_p[:, 0]) + 1e-3
    assert abs(rec_p[:, 1].mean() - mean_p11) < 6.0 * batch_se(rec_p[:, 1]) + 1e-3
    se_occ = np.hypot(batch_se(rec_occ), direct_occ.std(ddof=1) / np.sqrt(n_direct))
    assert abs(rec_occ.mean() - direct_occ.mean()) < 6.0 * se_occ + 1e-3


def test_validation_errors():
    block = make_block([0.0], [1.0], [0.1])
    with pytest.raises(ValueError):
        regime_log_densities(np.zeros((3, 1)), block, "NOPE")
    no_spike = ConstantBlock(alpha0=np.zeros(1), sqrt_psi1=np.ones(1))
    with pytest.raises(ValueError):
        regime_log_densities(np.zeros((3, 1)), no_spike, "TVP-MIX")
    with pytest.raises(ValueError):
        MsCounts(c00=0.0, c01=1.0, c10=1.0, c11=1.0)
    with pytest.raises(ValueError):
        BernoulliCounts(c0=-1.0, c1=2.0)
    np.testing.assert_allclose(stationary_probs(1.0, 1.0), [0.5, 0.5])
