"""Regime indicator updates in the centered parameterization.

Holding the centered coefficient paths fixed makes the observation
equation independent of the indicators, so their conditionals involve
only the Gaussian transition densities of the state equation.  Regime 1
is the persistent-drift regime (slab variances, and for the mixture
class a unit autoregressive coefficient on the normalized state);
regime 0 is the abrupt-shift regime (spike variances, mean reverting to
the center).

Because the dynamics are placed on the normalized states with unit
innovation variance, the centered transition carries the deviation from
the center scaled by the ratio of the arriving and departing innovation
roots.  An indicator therefore enters two adjacent transition densities:
its own period's, and the next period's through that root ratio.  The
chain sampler folds the second term into pair emissions; the independent
law updates one site at a time along the sample.  Period 1 starts the
normalized state at zero, so its indicator is identified from the
variance discrimination alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .shrinkage import ConstantBlock

VAR_FLOOR = 1e-10

CLASS_MIX = "TVP-MIX"
CLASS_POOL = "TVP-POOL"
CLASS_RW = "TVP-RW"

PAIRING_SUCCESS = "success"
PAIRING_LITERAL = "literal"


@dataclass(frozen=True)
class MsCounts:
    """Beta prior counts for the joint two-state chain."""

    c00: float
    c01: float
    c10: float
    c11: float

    def __post_init__(self):
        if min(self.c00, self.c01, self.c10, self.c11) <= 0.0:
            raise ValueError("prior counts must be positive")


@dataclass(frozen=True)
class BernoulliCounts:
    """Beta prior counts for independent per-covariate indicators."""

    c0: float
    c1: float

    def __post_init__(self):
        if min(self.c0, self.c1) <= 0.0:
            raise ValueError("prior counts must be positive")


def regime_log_densities(
    alpha: np.ndarray,
    block: ConstantBlock,
    model_class: str,
    pool_means: np.ndarray | None = None,
) -> np.ndarray:
    """Pairwise log transition densities, shape (T, K, 2, 2).

    Entry [t, i, k, l] is the log density of alpha[t, i] given regime k
    at t-1 and regime l at t.  alpha holds the centered paths.  Regime
    means follow the class: the mixture class reverts to the center in
    regime 0 and carries the previous deviation scaled by the root ratio
    in regime 1; the random-walk class carries the scaled deviation in
    both regimes; the pool class centers both regimes on the (scaled)
    cluster means, with no dependence on the previous period.  The first
    period starts the normalized state at zero, so its densities do not
    depend on k.

    The roots are signed regression coefficients, so the carry ratio and
    the pool offsets keep their signs; only the variances are squared.
    """
    T, K = alpha.shape
    if block.sqrt_psi0 is None:
        raise ValueError("regime densities need both variance regimes")
    root = np.stack([block.sqrt_psi0, block.sqrt_psi1], axis=-1)
    var = np.maximum(root**2, VAR_FLOOR)
    # ratio[i, k, l] = root_l / root_k for coefficient i; the departing
    # root is floored in magnitude with its sign kept
    denom = np.copysign(np.maximum(np.abs(root), np.sqrt(VAR_FLOOR)), root)
    ratio = root[:, None, :] / denom[:, :, None]

    dev = np.zeros((T, K))
    dev[1:] = alpha[:-1] - block.alpha0

    if model_class == CLASS_MIX:
        carry = ratio * np.array([0.0, 1.0])
    elif model_class == CLASS_RW:
        carry = ratio
    elif model_class == CLASS_POOL:
        if pool_means is None:
            raise ValueError("pool class needs cluster means per period")
        carry = np.zeros((K, 2, 2))
    else:
        raise ValueError(f"unknown model class {model_class!r}")

    mean = block.alpha0[None, :, None, None] + carry[None] * dev[:, :, None, None]
    if model_class == CLASS_POOL:
        mean = mean + (root[:, None, :] * pool_means[:, :, None, None])

    resid2 = (alpha[:, :, None, None] - mean) ** 2
    return -0.5 * (np.log(2.0 * np.pi * var[:, None, :]) + resid2 / var[:, None, :])


def stationary_probs(p00: float, p11: float) -> np.ndarray:
    denom = 2.0 - p00 - p11
    if denom <= 0.0:
        return np.array([0.5, 0.5])
    return np.array([(1.0 - p11) / denom, (1.0 - p00) / denom])


def simulate_ms_chain(p00: float, p11: float, T: int, rng: np.random.Generator) -> np.ndarray:
    """Forward simulation of the two-state chain from its stationary law."""
    s = np.empty(T, dtype=np.int8)
    s[0] = rng.random() < stationary_probs(p00, p11)[1]
    for t in range(1, T):
        stay = p11 if s[t - 1] == 1 else 1.0 - p00
        s[t] = rng.random() < stay
    return s


def sample_indicators_ms(
    alpha: np.ndarray,
    block: ConstantBlock,
    p00: float,
    p11: float,
    model_class: str,
    rng: np.random.Generator,
    pool_means: np.ndarray | None = None,
) -> np.ndarray:
    """Joint chain draw s_1..s_T by forward filtering, backward sampling.

    The per-period regime likelihood pools the pairwise transition
    densities over all coefficients; because the emission for period t
    depends on the regime pair (s_{t-1}, s_t), the emissions are folded
    into the transition kernel.  The chain starts from its stationary
    law.
    """
    loglik = regime_log_densities(alpha, block, model_class, pool_means).sum(axis=1)
    T = loglik.shape[0]
    trans = np.array([[p00, 1.0 - p00], [1.0 - p11, p11]])

    # kernels[t][k, l] = P(k -> l) * emission_t(k, l), rescaled per period
    kernels = trans[None] * np.exp(
        loglik[1:] - loglik[1:].max(axis=(1, 2), keepdims=True)
    )
    filt = np.empty((T, 2))
    first = loglik[0, 0]
    f = stationary_probs(p00, p11) * np.exp(first - first.max())
    filt[0] = f / f.sum()
    for t in range(1, T):
        f = filt[t - 1] @ kernels[t - 1]
        total = f.sum()
        filt[t] = f / total if total > 0 else np.array([0.5, 0.5])
    s = np.empty(T, dtype=np.int8)
    s[T - 1] = rng.random() < filt[T - 1, 1]
    for t in range(T - 2, -1, -1):
        w = filt[t] * kernels[t][:, s[t + 1]]
        total = w.sum()
        s[t] = rng.random() < (w[1] / total if total > 0 else 0.5)
    return s


def sample_indicators_mix(
    alpha: np.ndarray,
    block: ConstantBlock,
    p: np.ndarray,
    model_class: str,
    rng: np.random.Generator,
    pool_means: np.ndarray | None = None,
    S: np.ndarray | None = None,
) -> np.ndarray:
    """Per-coefficient indicator draws, one site at a time along t.

    With the centered path fixed, s_it enters its own period's
    transition density and, through the root ratio on the carried
    deviation, the next period's.  Coefficients are independent chains,
    so the scan is vectorized across them; S supplies the current
    configuration the single-site conditionals are built from.  For the
    pool class both terms are regime-pair free and the sites decouple,
    so any S produces exact independent draws.
    """
    loglik = regime_log_densities(alpha, block, model_class, pool_means)
    T, K = alpha.shape
    cols = np.arange(K)
    out = (
        np.ones((T, K), dtype=np.int8)
        if S is None
        else np.array(S, dtype=np.int8, copy=True)
    )
    base_logit = np.log(p) - np.log1p(-p)
    for t in range(T):
        prev = out[t - 1] if t > 0 else np.zeros(K, dtype=np.int8)
        logit = base_logit + loglik[t, cols, prev, 1] - loglik[t, cols, prev, 0]
        if t + 1 < T:
            nxt = out[t + 1]
            logit = logit + loglik[t + 1, cols, 1, nxt] - loglik[t + 1, cols, 0, nxt]
        out[t] = rng.random(size=K) < expit(logit)
    return out


def transition_posterior_params(s: np.ndarray, counts: MsCounts):
    """Beta parameters for (p00, p11) given the sampled chain."""
    prev, cur = s[:-1], s[1:]
    t00 = float(np.sum((prev == 0) & (cur == 0)))
    t01 = float(np.sum((prev == 0) & (cur == 1)))
    t10 = float(np.sum((prev == 1) & (cur == 0)))
    t11 = float(np.sum((prev == 1) & (cur == 1)))
    return (t00 + counts.c00, t01 + counts.c10), (t11 + counts.c01, t10 + counts.c11)


def update_transition_probs(s, counts: MsCounts, rng) -> tuple[float, float]:
    (a0, b0), (a1, b1) = transition_posterior_params(s, counts)
    return float(rng.beta(a0, b0)), float(rng.beta(a1, b1))


def bernoulli_posterior_params(S: np.ndarray, counts: BernoulliCounts, pairing: str = PAIRING_SUCCESS):
    """Beta parameters per covariate for the regime-1 probabilities.

    The default pairing puts the regime-1 occupancy counts on the first
    Beta parameter (the event whose probability is drawn); the literal
    pairing instead accumulates regime-0 counts there.
    """
    t1 = S.sum(axis=0).astype(float)
    t0 = S.shape[0] - t1
    if pairing == PAIRING_SUCCESS:
        return t1 + counts.c0, t0 + counts.c1
    if pairing == PAIRING_LITERAL:
        return t0 + counts.c0, t1 + counts.c1
    raise ValueError(f"unknown pairing {pairing!r}")


def update_bernoulli_probs(S, counts: BernoulliCounts, rng, pairing: str = PAIRING_SUCCESS) -> np.ndarray:
    a, b = bernoulli_posterior_params(S, counts, pairing)
    return rng.beta(a, b)
