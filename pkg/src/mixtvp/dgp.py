"""Synthetic data generators for recovery and forecast experiments.

Two designs live here: a single-equation regression whose coefficients
follow the regime-switching law of motion (used for recovery checks),
and a small VAR with one mid-sample coefficient break (used to check
that adaptive models beat a constant benchmark out of sample).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .indicators import simulate_ms_chain

__all__ = [
    "DgpConfig",
    "DgpTruth",
    "generate",
    "generate_var_break",
    "data_csv",
    "truth_csv",
]

_H_INIT = float(np.log(0.1))


@dataclass(frozen=True)
class DgpConfig:
    """Regression design with regime-tied coefficient innovations.

    Coefficient k follows a_t = a0 + s_t (a_{t-1} - a0) + e_t with
    e_t ~ N(0, psi1[k]) in the persistent regime (s_t = 1) and
    N(0, psi0[k]) otherwise, anchored at a0 for t = 0. Covariates are
    standard normal except the last column, which is an intercept.
    """

    T: int = 100
    alpha0: tuple[float, ...] = (-4.0, 3.0, -2.0, 2.0, 0.0)
    psi0_bar: tuple[float, ...] = (1e-10, 0.5, 0.1, 1e-10, 1.0)
    psi1_bar: tuple[float, ...] = (1.0, 0.1, 0.5, 1e-10, 1e-10)
    p00: float = 0.6
    p11: float = 0.95
    h_init: float = _H_INIT
    h_var: float = 0.1
    seed: int = 0

    def __post_init__(self):
        K = len(self.alpha0)
        if len(self.psi0_bar) != K or len(self.psi1_bar) != K:
            raise ValueError("alpha0, psi0_bar and psi1_bar must share a length")
        if self.T < 2:
            raise ValueError("need at least two periods")
        if not (0.0 < self.p00 < 1.0 and 0.0 < self.p11 < 1.0):
            raise ValueError("transition probabilities must lie in (0, 1)")
        if self.h_var <= 0.0 or min(self.psi0_bar) < 0.0 or min(self.psi1_bar) < 0.0:
            raise ValueError("variances must be non-negative, h_var positive")

    @property
    def K(self) -> int:
        return len(self.alpha0)


@dataclass(frozen=True)
class DgpTruth:
    """Latent paths behind one generated sample."""

    alpha: np.ndarray
    s: np.ndarray
    h: np.ndarray


def generate(config: DgpConfig) -> tuple[np.ndarray, np.ndarray, DgpTruth]:
    """Simulate (y, X) plus the latent truth, bit-reproducible per seed."""
    rng = np.random.default_rng(config.seed)
    T, K = config.T, config.K
    X = rng.normal(size=(T, K))
    X[:, -1] = 1.0

    s = simulate_ms_chain(config.p00, config.p11, T, rng)
    alpha0 = np.asarray(config.alpha0)
    sd0 = np.sqrt(np.asarray(config.psi0_bar))
    sd1 = np.sqrt(np.asarray(config.psi1_bar))
    alpha = np.empty((T, K))
    prev = alpha0.copy()
    for t in range(T):
        sd = sd1 if s[t] == 1 else sd0
        prev = alpha0 + s[t] * (prev - alpha0) + sd * rng.normal(size=K)
        alpha[t] = prev

    h = config.h_init + np.sqrt(config.h_var) * np.cumsum(rng.normal(size=T))
    y = (X * alpha).sum(axis=1) + np.exp(0.5 * h) * rng.normal(size=T)
    return y, X, DgpTruth(alpha=alpha, s=s, h=h)


@dataclass(frozen=True)
class VarBreakDesign:
    """A VAR(1) whose coefficients jump once, halfway through the sample."""

    Y: np.ndarray
    break_at: int
    A_pre: np.ndarray
    A_post: np.ndarray
    c_pre: np.ndarray
    c_post: np.ndarray


def generate_var_break(
    T: int = 120,
    seed: int = 0,
    noise_sd: float = 0.25,
    break_at: int | None = None,
) -> VarBreakDesign:
    """Three-variable VAR(1) with one coefficient and intercept break.

    Both segments are stationary; the jump is large relative to the
    error scale so an adaptive model has something real to pick up.
    ``break_at`` defaults to the middle of the sample.
    """
    rng = np.random.default_rng(seed)
    A_pre = np.array(
        [[0.7, 0.0, 0.0], [0.2, 0.5, 0.0], [0.0, 0.2, 0.5]]
    )
    A_post = np.array(
        [[0.2, 0.4, 0.0], [-0.3, 0.7, 0.1], [0.3, -0.2, 0.6]]
    )
    c_pre = np.array([0.5, -0.3, 0.2])
    c_post = np.array([-0.5, 0.6, -0.2])
    if break_at is None:
        break_at = T // 2
    if not 1 < break_at < T:
        raise ValueError("break_at must be inside the sample")
    Y = np.zeros((T, 3))
    Y[0] = np.linalg.solve(np.eye(3) - A_pre, c_pre)
    for t in range(1, T):
        A, c = (A_pre, c_pre) if t < break_at else (A_post, c_post)
        Y[t] = A @ Y[t - 1] + c + noise_sd * rng.normal(size=3)
    return VarBreakDesign(
        Y=Y, break_at=break_at, A_pre=A_pre, A_post=A_post,
        c_pre=c_pre, c_post=c_post,
    )


def data_csv(y: np.ndarray, X: np.ndarray) -> str:
    """Observable sample as CSV: response first, covariates after."""
    T, K = X.shape
    rows = ["y," + ",".join(f"x{k + 1}" for k in range(K))]
    for t in range(T):
        cells = [y[t]] + list(X[t])
        rows.append(",".join(format(c, ".17g") for c in cells))
    return "\n".join(rows) + "\n"


def truth_csv(truth: DgpTruth) -> str:
    """Latent paths as CSV: regime, log variance, coefficients."""
    T, K = truth.alpha.shape
    rows = ["s,h," + ",".join(f"alpha{k + 1}" for k in range(K))]
    for t in range(T):
        cells = [format(truth.h[t], ".17g")] + [
            format(a, ".17g") for a in truth.alpha[t]
        ]
        rows.append(f"{int(truth.s[t])}," + ",".join(cells))
    return "\n".join(rows) + "\n"
