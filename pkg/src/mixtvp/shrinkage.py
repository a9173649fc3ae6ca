"""Normal-Gamma shrinkage hierarchy for the constant block.

The constant block stacks the coefficient means with the signed square
roots of the state innovation variances; every entry gets its own local
scale, and the locals share one global scale and one hyper-shape per
group (means, slab roots, spike roots).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaln

from .distributions import GigParams, sample_gamma_rate, sample_gig

TAU_FLOOR = 1e-12

GROUP_MEANS = "a"
GROUP_SLAB = "psi1"
GROUP_SPIKE = "psi0"


@dataclass(frozen=True)
class ConstantBlock:
    """Coefficient means plus signed square roots of innovation variances.

    ``sqrt_psi0`` is absent for the single-variance layout; for the fixed
    spike layout it holds the (positive) fixed roots that are not sampled.
    """

    alpha0: np.ndarray
    sqrt_psi1: np.ndarray | None = None
    sqrt_psi0: np.ndarray | None = None

    def __post_init__(self):
        K = self.alpha0.shape[0]
        for part in (self.sqrt_psi1, self.sqrt_psi0):
            if part is not None and part.shape != (K,):
                raise ValueError("block parts must share length K")

    @property
    def K(self) -> int:
        return self.alpha0.shape[0]

    def psi1_bar(self) -> np.ndarray:
        return self.sqrt_psi1**2

    def psi0_bar(self) -> np.ndarray:
        return self.sqrt_psi0**2


@dataclass
class NgHyper:
    """Local scales plus per-group global scale and hyper-shape.

    ``groups`` maps a group name to the index array of block entries it
    owns; together the groups partition the sampled block exactly.
    """

    tau: np.ndarray
    groups: dict[str, np.ndarray]
    lam: dict[str, float]
    rho: dict[str, float]
    zeta: float = 0.01

    def __post_init__(self):
        m = self.tau.shape[0]
        seen = np.concatenate([np.asarray(v) for v in self.groups.values()])
        if sorted(seen.tolist()) != list(range(m)):
            raise ValueError("groups must partition the block indices exactly")
        if set(self.lam) != set(self.groups) or set(self.rho) != set(self.groups):
            raise ValueError("lam and rho must carry one entry per group")
        if np.any(self.tau <= 0.0):
            raise ValueError("tau must be positive")

    def tau_of(self, name: str) -> np.ndarray:
        return self.tau[self.groups[name]]

    def per_coef(self) -> tuple[np.ndarray, np.ndarray]:
        """rho and lam broadcast to one value per block entry."""
        m = self.tau.shape[0]
        rho = np.empty(m)
        lam = np.empty(m)
        for name, idx in self.groups.items():
            rho[idx] = self.rho[name]
            lam[idx] = self.lam[name]
        return rho, lam


def default_ng_hyper(K: int, n_variance_groups: int, zeta: float = 0.01) -> NgHyper:
    """Hierarchy for a block of K means plus 0, 1 or 2 variance-root groups."""
    if n_variance_groups not in (0, 1, 2):
        raise ValueError("n_variance_groups must be 0, 1 or 2")
    names = [GROUP_MEANS] + [GROUP_SLAB, GROUP_SPIKE][:n_variance_groups]
    groups = {name: np.arange(i * K, (i + 1) * K) for i, name in enumerate(names)}
    m = K * len(names)
    return NgHyper(
        tau=np.ones(m),
        groups=groups,
        lam={n: 1.0 for n in names},
        rho={n: 0.5 for n in names},
        zeta=zeta,
    )


def constant_block_moments(y, xhat, sigma, tau, prior_mean=None):
    """Gaussian posterior of the block: mean and upper Cholesky of precision.

    Weighted regression of y/sigma on xhat/sigma with independent N(m, tau)
    priors (m = 0 unless given).
    """
    xw = xhat / sigma[:, None]
    yw = y / sigma
    prec = xw.T @ xw
    prec[np.diag_indices_from(prec)] += 1.0 / tau
    lin = xw.T @ yw
    if prior_mean is not None:
        lin = lin + prior_mean / tau
    chol = np.linalg.cholesky(prec)
    mean = solve_triangular(chol.T, solve_triangular(chol, lin, lower=True), lower=False)
    return mean, chol


def draw_constant_block(y, xhat, sigma, tau, rng, prior_mean=None) -> np.ndarray:
    mean, chol = constant_block_moments(y, xhat, sigma, tau, prior_mean)
    z = rng.normal(size=mean.shape[0])
    return mean + solve_triangular(chol.T, z, lower=False)


def draw_tau(coefs: np.ndarray, hyper: NgHyper, rng: np.random.Generator) -> np.ndarray:
    """Local scales: tau_j ~ GIG(rho_j - 1/2, rho_j lam_j, coef_j^2)."""
    rho, lam = hyper.per_coef()
    out = np.empty(coefs.shape[0])
    for j in range(coefs.shape[0]):
        out[j] = sample_gig(GigParams(rho[j] - 0.5, rho[j] * lam[j], coefs[j] ** 2), rng)
    return np.maximum(out, TAU_FLOOR)


def lambda_posterior_params(tau_group: np.ndarray, rho: float, zeta: float) -> tuple[float, float]:
    shape = zeta + rho * tau_group.shape[0]
    rate = zeta + 0.5 * rho * float(np.sum(tau_group))
    return shape, rate


def draw_lambda(tau_group, rho, zeta, rng) -> float:
    shape, rate = lambda_posterior_params(tau_group, rho, zeta)
    return float(sample_gamma_rate(shape, rate, rng))


def _rho_log_target(rho: float, tau_group: np.ndarray, lam: float) -> float:
    # product of Gamma(tau_j; rho, rho*lam/2) likelihoods, Exponential(1) prior
    p = tau_group.shape[0]
    return (
        p * (rho * np.log(rho * lam / 2.0) - gammaln(rho))
        + (rho - 1.0) * float(np.sum(np.log(tau_group)))
        - 0.5 * rho * lam * float(np.sum(tau_group))
        - rho
    )


def update_rho(tau_group, lam, rho, scale, rng) -> tuple[float, bool]:
    """Log-scale random-walk step on the group hyper-shape."""
    prop = rho * np.exp(scale * rng.normal())
    if not np.isfinite(prop) or prop <= 0.0:
        return rho, False
    log_accept = (
        _rho_log_target(prop, tau_group, lam)
        - _rho_log_target(rho, tau_group, lam)
        + np.log(prop)
        - np.log(rho)
    )
    if np.log(rng.random()) <= log_accept:
        return float(prop), True
    return rho, False


@dataclass
class MhScale:
    """Adaptive proposal scale, tuned toward a target rate during burn-in."""

    scale: float
    target: float = 0.3
    window: int = 50
    accepted: int = 0
    tried: int = 0
    batches: int = field(default=0)

    def record(self, accepted: bool, adapting: bool):
        self.tried += 1
        self.accepted += int(accepted)
        if adapting and self.tried >= self.window:
            rate = self.accepted / self.tried
            self.batches += 1
            step = 1.0 / np.sqrt(self.batches)
            self.scale = float(np.clip(self.scale * np.exp(step * (rate - self.target)), 1e-3, 10.0))
            self.accepted = 0
            self.tried = 0
