"""Stochastic volatility sweep for the observation error variance.

log-variances follow a stationary AR(1); one sweep updates the auxiliary
mixture indicators, the joint log-variance path through its tridiagonal
precision, the AR(1) parameters in the centered parameterization, and then
re-draws level and scale in the non-centered parameterization (ancillary
sufficiency interweaving), which keeps mixing fast when the innovation
variance is small.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cholesky_banded, solve_banded, solveh_banded
from scipy.stats import beta as beta_dist

from .distributions import GigParams, sample_categorical_rows, sample_gig

# 10-component Gaussian mixture approximation to log chi^2(1)
MIX_PROB = np.array([
    0.00609, 0.04775, 0.13057, 0.20674, 0.22715,
    0.18842, 0.12047, 0.05591, 0.01575, 0.00115,
])
MIX_MEAN = np.array([
    1.92677, 1.34744, 0.73504, 0.02266, -0.85173,
    -1.97278, -3.46788, -5.55246, -8.68384, -14.65000,
])
MIX_VAR = np.array([
    0.11265, 0.17788, 0.26768, 0.40611, 0.62699,
    0.98583, 1.57469, 2.54498, 4.16591, 7.33342,
])

LOG_OFFSET = 1e-8
PSI_FLOOR = 1e-12


@dataclass(frozen=True)
class SvPriors:
    """Priors: level N(mu_mean, mu_var), (persistence+1)/2 Beta(a, b),
    innovation variance Gamma(shape, rate)."""

    mu_mean: float = 0.0
    mu_var: float = 100.0
    phi_beta_a: float = 25.0
    phi_beta_b: float = 1.5
    psi_shape: float = 0.5
    psi_rate: float = 0.5


DEFAULT_SV_PRIORS = SvPriors()


@dataclass(frozen=True)
class SvState:
    """Log-variance path h (length T), pre-sample value h0, and AR(1)
    parameters (mu, phi, psi) with |phi| < 1 and psi > 0."""

    h: np.ndarray
    h0: float
    mu: float
    phi: float
    psi: float

    def __post_init__(self):
        if self.h.ndim != 1 or self.h.size == 0:
            raise ValueError("h must be a non-empty vector")
        if not np.all(np.isfinite(self.h)) or not np.isfinite(self.h0):
            raise ValueError("h must be finite")
        if not abs(self.phi) < 1.0:
            raise ValueError("|phi| must be below one")
        if not self.psi > 0.0:
            raise ValueError("psi must be positive")

    def sigma(self) -> np.ndarray:
        return np.exp(self.h / 2.0)


def initial_sv_state(residuals: np.ndarray) -> SvState:
    level = float(np.log(np.var(residuals) + LOG_OFFSET))
    return SvState(h=np.full(residuals.shape[0], level), h0=level, mu=level, phi=0.95, psi=0.1)


def sample_sv_prior(T: int, rng: np.random.Generator, priors: SvPriors = DEFAULT_SV_PRIORS) -> SvState:
    """Draw a full SV state from its prior (used by simulation checks)."""
    mu = priors.mu_mean + np.sqrt(priors.mu_var) * rng.normal()
    phi = 2.0 * rng.beta(priors.phi_beta_a, priors.phi_beta_b) - 1.0
    psi = rng.gamma(shape=priors.psi_shape, scale=1.0 / priors.psi_rate)
    h0 = mu + np.sqrt(psi / (1.0 - phi**2)) * rng.normal()
    h = np.empty(T)
    prev = h0
    for t in range(T):
        prev = mu + phi * (prev - mu) + np.sqrt(psi) * rng.normal()
        h[t] = prev
    return SvState(h=h, h0=h0, mu=mu, phi=phi, psi=psi)


def sv_sweep(
    residuals: np.ndarray,
    state: SvState,
    rng: np.random.Generator,
    priors: SvPriors = DEFAULT_SV_PRIORS,
) -> SvState:
    """One full update of the volatility block given observation residuals."""
    resid = np.asarray(residuals, dtype=float)
    if resid.ndim != 1 or resid.size == 0:
        raise ValueError("residuals must be a non-empty vector")
    if not np.all(np.isfinite(resid)):
        raise ValueError("residuals must be finite")
    if resid.size != state.h.size:
        raise ValueError("residual length does not match state")
    T = resid.size
    ystar = np.log(resid**2 + LOG_OFFSET)

    comp = _draw_mixture_indicators(ystar, state.h, rng)
    m = MIX_MEAN[comp]
    d = 1.0 / MIX_VAR[comp]

    h_full = _draw_h_joint(ystar - m, d, state, rng)
    mu = _draw_mu_centered(h_full, state.phi, state.psi, priors, rng)
    phi = _draw_phi_centered(h_full, mu, state.phi, state.psi, priors, rng)
    psi = _draw_psi_centered(h_full, mu, phi, priors, rng)

    mu, psi, h_full = _interweave_noncentered(ystar - m, d, h_full, mu, phi, psi, priors, rng)
    return SvState(h=h_full[1:], h0=float(h_full[0]), mu=mu, phi=phi, psi=psi)


def _draw_mixture_indicators(ystar, h, rng):
    resid = ystar[:, None] - h[:, None] - MIX_MEAN[None, :]
    logw = np.log(MIX_PROB)[None, :] - 0.5 * np.log(MIX_VAR)[None, :] - 0.5 * resid**2 / MIX_VAR[None, :]
    return sample_categorical_rows(logw, rng)


def _draw_h_joint(obs, d, state, rng):
    """Joint draw of (h0, h_1..h_T) from the tridiagonal-precision Gaussian.

    obs = ystar - mixture mean, d = per-period observation precisions.
    """
    T = obs.size
    phi, psi, mu = state.phi, state.psi, state.mu
    diag = np.empty(T + 1)
    diag[0] = 1.0 / psi
    diag[1:] = 1.0 / psi + d
    diag[1:T] += phi**2 / psi
    super_ = np.full(T, -phi / psi)
    b = np.concatenate(([0.0], d * (obs - mu)))

    ab = np.zeros((2, T + 1))
    ab[1] = diag
    ab[0, 1:] = super_
    mean = solveh_banded(ab, b)
    u_band = cholesky_banded(ab)
    noise = solve_banded((0, 1), u_band, rng.normal(size=T + 1))
    return mu + mean + noise


def _draw_mu_centered(h_full, phi, psi, priors, rng):
    h0, h = h_full[0], h_full[1:]
    T = h.size
    lagged = h_full[:-1]
    prec = ((1.0 - phi**2) + T * (1.0 - phi) ** 2) / psi + 1.0 / priors.mu_var
    lin = ((1.0 - phi**2) * h0 + (1.0 - phi) * np.sum(h - phi * lagged)) / psi
    lin += priors.mu_mean / priors.mu_var
    return lin / prec + rng.normal() / np.sqrt(prec)


def _draw_phi_centered(h_full, mu, phi, psi, priors, rng):
    g = h_full - mu
    g0, glag, gcur = g[0], g[:-1], g[1:]
    den = np.sum(glag**2)
    if den <= 0.0:
        return phi
    center = np.sum(gcur * glag) / den
    prop = center + np.sqrt(psi / den) * rng.normal()
    if not abs(prop) < 1.0:
        return phi

    def log_extra(p):
        return (
            0.5 * np.log1p(-(p**2))
            - (1.0 - p**2) * g0**2 / (2.0 * psi)
            + beta_dist.logpdf((p + 1.0) / 2.0, priors.phi_beta_a, priors.phi_beta_b)
        )

    if np.log(rng.random()) <= log_extra(prop) - log_extra(phi):
        return prop
    return phi


def _draw_psi_centered(h_full, mu, phi, priors, rng):
    g = h_full - mu
    sse = (1.0 - phi**2) * g[0] ** 2 + np.sum((g[1:] - phi * g[:-1]) ** 2)
    T = h_full.size - 1
    a = priors.psi_shape - (T + 1) / 2.0
    psi = sample_gig(GigParams(a, 2.0 * priors.psi_rate, max(sse, PSI_FLOOR)), rng)
    return max(float(psi), PSI_FLOOR)


def _interweave_noncentered(obs, d, h_full, mu, phi, psi, priors, rng):
    """Re-draw (level, signed scale) with the path held fixed in
    non-centered form; valid only under the chi-square-type variance prior
    (psi_shape = 1/2), which is the square of a Gaussian scale."""
    if priors.psi_shape != 0.5:
        return mu, psi, h_full
    htil = (h_full - mu) / np.sqrt(psi)
    x1 = np.ones(obs.size)
    x2 = htil[1:]
    scale_prior_var = priors.psi_shape / priors.psi_rate  # N(0, v) on signed sqrt
    p11 = np.sum(d * x1 * x1) + 1.0 / priors.mu_var
    p12 = np.sum(d * x1 * x2)
    p22 = np.sum(d * x2 * x2) + 1.0 / scale_prior_var
    prec = np.array([[p11, p12], [p12, p22]])
    lin = np.array(
        [np.sum(d * obs) + priors.mu_mean / priors.mu_var, np.sum(d * obs * x2)]
    )
    chol = np.linalg.cholesky(prec)
    mean = np.linalg.solve(chol.T, np.linalg.solve(chol, lin))
    draw = mean + np.linalg.solve(chol.T, rng.normal(size=2))
    mu_new, scale_new = float(draw[0]), float(draw[1])
    psi_new = max(scale_new**2, PSI_FLOOR)
    return mu_new, psi_new, mu_new + scale_new * htil


def simulate_sv_path(state: SvState, horizons: int, rng: np.random.Generator) -> np.ndarray:
    """Simulate h_{T+1..T+H} forward from the fitted law of motion."""
    out = np.empty(horizons)
    prev = state.h[-1]
    sd = np.sqrt(state.psi)
    for i in range(horizons):
        prev = state.mu + state.phi * (prev - state.mu) + sd * rng.normal()
        out[i] = prev
    return out


def replace_h(state: SvState, h: np.ndarray) -> SvState:
    return replace(state, h=h)
