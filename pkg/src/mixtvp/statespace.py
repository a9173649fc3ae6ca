"""Static-form state regression: design rows and the fast joint draw.

The normalized states enter the observation equation through per-period
rows only, so the conditional Gaussian posterior over all T*K states can
be sampled by factorizing a single T x T matrix.  Identity used, with
W~ = Sigma^{-1} W and Omega_0 the structured prior covariance:

    draw = Omega_0 W~' (I_T + W~ Omega_0 W~')^{-1} (y~ - W~ q - v) + q,
    q = a_0 + Phi^{-1} u,   u ~ N(0, I_nu),  v ~ N(0, I_T),

which matches N(a_1, Omega_1) with Omega_1^{-1} = W~'W~ + Omega_0^{-1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from .banded import (
    BlockBidiagonalLowerUnit,
    cholesky_spd,
    omega0_weighted_gram,
    solve_lower,
    solve_upper,
)
from .shrinkage import ConstantBlock

SQRT_PSI_FLOOR = 1e-10
NAIVE_DIM_LIMIT = 500


@dataclass(frozen=True)
class Design:
    """Per-period observation rows for the constant block and the states.

    xhat rows multiply the sampled block (means first, then slab roots,
    then spike roots when present); wtilde rows are the state loadings
    already divided by the observation volatility.
    """

    xhat: np.ndarray
    wtilde: np.ndarray


def sqrt_psi_matrix(block: ConstantBlock, S: np.ndarray | None, T: int) -> np.ndarray:
    """Signed square roots of the innovation variances, per period (T, K)."""
    if block.sqrt_psi1 is None:
        raise ValueError("block carries no innovation roots")
    if S is None:
        return np.broadcast_to(block.sqrt_psi1, (T, block.K)).copy()
    if block.sqrt_psi0 is None:
        raise ValueError("two-regime layout requires spike roots")
    S = np.asarray(S, dtype=float)
    return S * block.sqrt_psi1 + (1.0 - S) * block.sqrt_psi0


def build_design_rows(
    x: np.ndarray,
    alpha_tilde: np.ndarray,
    S: np.ndarray | None,
    block: ConstantBlock,
    sigma: np.ndarray,
) -> Design:
    """Observation rows given current states and regime indicators.

    With indicators present the block row is (x', (S x * a~)', ((I-S) x * a~)');
    without them it collapses to (x', (x * a~)').
    """
    T, K = x.shape
    if alpha_tilde.shape != (T, K):
        raise ValueError("alpha_tilde shape mismatch")
    scaled = x * alpha_tilde
    if S is None:
        xhat = np.hstack([x, scaled])
    else:
        xhat = np.hstack([x, S * scaled, (1.0 - S) * scaled])
    wtilde = x * sqrt_psi_matrix(block, S, T) / sigma[:, None]
    return Design(xhat=xhat, wtilde=wtilde)


def draw_states_fast(
    ytilde: np.ndarray,
    wtilde: np.ndarray,
    a0: np.ndarray,
    Phi: BlockBidiagonalLowerUnit,
    rng: np.random.Generator | None,
    size: int | None = None,
    noise: tuple[np.ndarray, np.ndarray] | None = None,
) -> np.ndarray:
    """Joint draw of the normalized states; only T x T dense factorizations.

    ``noise`` injects the (u, v) pair directly (deterministic use in
    identity checks); otherwise both are standard normal from ``rng``.
    Batched draws share the single factorization when ``size`` is given.
    """
    T, K = Phi.T, Phi.K
    nu = T * K
    if ytilde.shape != (T,) or wtilde.shape != (T, K) or a0.shape != (nu,):
        raise ValueError("input dimensions do not match Phi")
    n = 1 if size is None else int(size)
    if noise is not None:
        u, v = noise
        u = np.broadcast_to(np.asarray(u, float), (n, nu))
        v = np.broadcast_to(np.asarray(v, float), (n, T))
    else:
        u = rng.normal(size=(n, nu))
        v = rng.normal(size=(n, T))

    gram = omega0_weighted_gram(Phi, wtilde)
    gram[np.diag_indices_from(gram)] += 1.0
    chol = cholesky_spd(gram)

    q = a0 + solve_lower(Phi, u)
    r = (wtilde * q.reshape(n, T, K)).sum(axis=2) + v
    f = cho_solve((chol, True), (ytilde - r).T).T
    scatter = (wtilde[None, :, :] * f[:, :, None]).reshape(n, nu)
    draws = solve_lower(Phi, solve_upper(Phi, scatter)) + q
    return draws[0] if size is None else draws


def posterior_moments_naive(ytilde, wtilde, a0, Phi):
    """Dense two-sided oracle for the state posterior; small cases only."""
    T, K = Phi.T, Phi.K
    nu = T * K
    if nu > NAIVE_DIM_LIMIT:
        raise ValueError(f"naive moments limited to dimension {NAIVE_DIM_LIMIT}")
    W = np.zeros((T, nu))
    for t in range(T):
        W[t, t * K:(t + 1) * K] = wtilde[t]
    D = Phi.to_dense()
    prior_prec = D.T @ D
    post_prec = W.T @ W + prior_prec
    cov = np.linalg.inv(post_prec)
    mean = cov @ (W.T @ ytilde + prior_prec @ a0)
    return mean, cov


def reconstruct_centered(block: ConstantBlock, S: np.ndarray | None, alpha_tilde: np.ndarray) -> np.ndarray:
    """Centered coefficient paths alpha_t = alpha0 + sqrt(Psi_t) * a~_t."""
    T = alpha_tilde.shape[0]
    return block.alpha0 + sqrt_psi_matrix(block, S, T) * alpha_tilde


def normalized_from_centered(block: ConstantBlock, S: np.ndarray | None, alpha_centered: np.ndarray) -> np.ndarray:
    """Invert the centering map; roots below the floor pin the state to zero."""
    T = alpha_centered.shape[0]
    roots = sqrt_psi_matrix(block, S, T)
    out = np.zeros_like(alpha_centered)
    live = np.abs(roots) >= SQRT_PSI_FLOOR
    out[live] = (alpha_centered - block.alpha0)[live] / roots[live]
    return out
