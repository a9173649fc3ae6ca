"""Structured linear algebra for the stacked state regression.

The non-centered state equation couples consecutive periods through a unit
lower block-bidiagonal matrix whose subdiagonal blocks are diagonal.  All
solves against that matrix run in O(T*K) time, and the implied prior
covariance (the inverse Gram matrix) is applied through a pair of
triangular solves without ever being materialized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a symmetric factorization hits a non-positive pivot."""


@dataclass(frozen=True)
class BlockBidiagonalLowerUnit:
    """Unit lower block-bidiagonal matrix of size (T*K) x (T*K).

    Diagonal blocks are implicitly I_K.  ``subdiag[t]`` stores the diagonal
    of block (t+1, t), equal to minus the autoregressive coefficients of
    period t+2 (1-based).  The determinant is one, so the matrix is
    invertible for any coefficient values.

    Attributes
    ----------
    T : int
        Number of periods (block rows).
    K : int
        Block size (coefficients per period).
    subdiag : ndarray, shape (T-1, K)
        Diagonals of the subdiagonal blocks, holding -phi_{t+1}.
    """

    T: int
    K: int
    subdiag: np.ndarray

    def __post_init__(self):
        if self.T < 1 or self.K < 1:
            raise ValueError("T and K must be positive")
        if self.subdiag.shape != (self.T - 1, self.K):
            raise ValueError(
                f"subdiag shape {self.subdiag.shape} does not match (T-1, K)="
                f"{(self.T - 1, self.K)}"
            )
        if not np.all(np.isfinite(self.subdiag)):
            raise ValueError("subdiag entries must be finite")

    @property
    def nu(self) -> int:
        return self.T * self.K

    def phi_body(self) -> np.ndarray:
        """Autoregressive diagonals phi_2..phi_T as a (T-1, K) array."""
        return -self.subdiag

    def to_dense(self) -> np.ndarray:
        """Materialize the full (T*K, T*K) matrix.  Testing and small T only."""
        T, K = self.T, self.K
        out = np.eye(T * K)
        for t in range(T - 1):
            rows = np.arange((t + 1) * K, (t + 2) * K)
            out[rows, rows - K] = self.subdiag[t]
        return out


@dataclass(frozen=True)
class SpdDense:
    """Dense symmetric positive definite matrix wrapper.

    Symmetry is validated on construction (1e-12 relative tolerance);
    positive definiteness is only discovered at factorization time.
    """

    values: np.ndarray

    def __post_init__(self):
        a = self.values
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("values must be a square matrix")
        scale = max(np.abs(a).max(), 1.0)
        if np.abs(a - a.T).max() > 1e-12 * scale:
            raise ValueError("matrix is not symmetric within tolerance")

    @property
    def n(self) -> int:
        return self.values.shape[0]


def build_phi(phi_diagonals: np.ndarray) -> BlockBidiagonalLowerUnit:
    """Assemble the state-coupling matrix from per-period AR diagonals.

    Parameters
    ----------
    phi_diagonals : ndarray, shape (T, K)
        Diagonals of phi_t for t = 1..T.  The first row is ignored: the
        period-1 block carries no subdiagonal, which encodes the
        convention that the initial state innovation is standard
        Gaussian regardless of the period-1 regime.
    """
    phi = np.asarray(phi_diagonals, dtype=float)
    if phi.ndim != 2:
        raise ValueError("phi_diagonals must be 2-d with shape (T, K)")
    T, K = phi.shape
    return BlockBidiagonalLowerUnit(T=T, K=K, subdiag=-phi[1:].copy())


def solve_lower(Phi: BlockBidiagonalLowerUnit, rhs: np.ndarray) -> np.ndarray:
    """Solve Phi x = rhs by forward substitution in O(T*K).

    ``rhs`` may be a (nu,) vector or a (n, nu) batch; the solve is applied
    row-wise in the batched case.
    """
    T, K = Phi.T, Phi.K
    r = _as_blocks(rhs, T, K)
    x = np.empty_like(r)
    x[..., 0, :] = r[..., 0, :]
    for t in range(1, T):
        x[..., t, :] = r[..., t, :] - Phi.subdiag[t - 1] * x[..., t - 1, :]
    return x.reshape(rhs.shape)


def solve_upper(Phi: BlockBidiagonalLowerUnit, rhs: np.ndarray) -> np.ndarray:
    """Solve Phi' x = rhs by backward substitution in O(T*K)."""
    T, K = Phi.T, Phi.K
    r = _as_blocks(rhs, T, K)
    x = np.empty_like(r)
    x[..., T - 1, :] = r[..., T - 1, :]
    for t in range(T - 2, -1, -1):
        x[..., t, :] = r[..., t, :] - Phi.subdiag[t] * x[..., t + 1, :]
    return x.reshape(rhs.shape)


def apply_omega0(Phi: BlockBidiagonalLowerUnit, v: np.ndarray) -> np.ndarray:
    """Apply the implied prior covariance (Phi'Phi)^{-1} to a vector.

    One backward and one forward structured solve; the covariance itself
    is never formed.
    """
    return solve_lower(Phi, solve_upper(Phi, v))


def reset_indices(Phi: BlockBidiagonalLowerUnit) -> np.ndarray:
    """Per-coefficient index of the most recent zero AR coefficient.

    Returns z with shape (T, K): z[t, i] is the largest period r <= t
    (0-based) at which phi_r[i] == 0, or 0 when no such period exists.
    Requires the AR diagonals to be 0/1 valued; this is what makes the
    prior covariance block diagonal across zero boundaries.
    """
    T, K = Phi.T, Phi.K
    phi = Phi.phi_body()
    if not np.all((phi == 0.0) | (phi == 1.0)):
        raise ValueError("reset indices require 0/1 AR coefficients")
    z = np.zeros((T, K), dtype=np.int64)
    for t in range(1, T):
        z[t] = np.where(phi[t - 1] == 0.0, t, z[t - 1])
    return z


def omega0_weighted_gram(Phi: BlockBidiagonalLowerUnit, w: np.ndarray) -> np.ndarray:
    """Form the T x T matrix W (Phi'Phi)^{-1} W' for block-diagonal W.

    W has one K-row per period (rows ``w[t]``).  Because the AR
    coefficients are 0/1, the (s, t) entry reduces to a run-length count:

        sum_i w[s, i] w[t, i] * max(0, min(s, t) + 1 - z_i(max(s, t)))

    with z the reset indices.  Cost is O(K*T^2) with no (T*K)-sized
    intermediates.
    """
    T, K = Phi.T, Phi.K
    w = np.asarray(w, dtype=float)
    if w.shape != (T, K):
        raise ValueError(f"w must have shape {(T, K)}")
    z = reset_indices(Phi)
    idx = np.arange(T)
    lo = np.minimum.outer(idx, idx) + 1
    hi = np.maximum.outer(idx, idx)
    out = np.zeros((T, T))
    for i in range(K):
        count = lo - z[hi, i]
        np.clip(count, 0, None, out=count)
        out += np.outer(w[:, i], w[:, i]) * count
    return out


def cholesky_spd(A: SpdDense | np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of a dense SPD matrix.

    Raises NotPositiveDefiniteError when the matrix is not positive
    definite, identifying the op rather than bubbling a bare LAPACK error.
    """
    values = A.values if isinstance(A, SpdDense) else np.asarray(A, dtype=float)
    try:
        return np.linalg.cholesky(values)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"Cholesky failed: {exc}") from exc


def _as_blocks(v: np.ndarray, T: int, K: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != T * K:
        raise ValueError(f"vector length {v.shape[-1]} does not match nu={T * K}")
    return v.reshape(v.shape[:-1] + (T, K))
