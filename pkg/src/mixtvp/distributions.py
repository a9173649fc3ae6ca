"""Random-variate generators for the non-standard conditionals.

The generalized inverse Gaussian here follows the three-parameter density

    p(x) propto x^(a-1) exp{-(b*x + c/x) / 2},   x > 0,

so Gamma(a, rate b/2) is the c = 0 special case and InverseGamma(-a, c/2)
the b = 0 special case.  Both reductions are dispatched exactly; the
interior case uses a uniformly efficient rejection scheme on the log scale
that stays valid for arbitrarily small or large b*c.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GigParams:
    """Parameters (a, b, c) of the generalized inverse Gaussian above.

    Valid regions: a > 0 with b > 0 (any c >= 0); a < 0 with c > 0
    (any b >= 0); a == 0 requires b > 0 and c > 0.
    """

    a: float
    b: float
    c: float

    def __post_init__(self):
        a, b, c = self.a, self.b, self.c
        if not (np.isfinite(a) and np.isfinite(b) and np.isfinite(c)):
            raise ValueError("GIG parameters must be finite")
        if b < 0.0 or c < 0.0:
            raise ValueError("GIG requires b >= 0 and c >= 0")
        if c == 0.0 and a <= 0.0:
            raise ValueError("GIG with c = 0 requires a > 0 (Gamma reduction)")
        if b == 0.0 and a >= 0.0:
            raise ValueError("GIG with b = 0 requires a < 0 (inverse-Gamma reduction)")


def sample_gig(params: GigParams, rng: np.random.Generator, size: int | None = None):
    """Draw from the generalized inverse Gaussian distribution.

    Returns a scalar when ``size`` is None, else an array of ``size`` draws.
    """
    a, b, c = params.a, params.b, params.c
    if c == 0.0:
        return rng.gamma(shape=a, scale=2.0 / b, size=size)
    if b == 0.0:
        return 1.0 / rng.gamma(shape=-a, scale=2.0 / c, size=size)
    lam = abs(a)
    omega = np.sqrt(b * c)
    if omega == 0.0:
        # b*c underflowed; the dominant reduction is exact at this precision
        if a > 0.0:
            return rng.gamma(shape=a, scale=2.0 / b, size=size)
        if a < 0.0:
            return 1.0 / rng.gamma(shape=-a, scale=2.0 / c, size=size)
        raise ValueError("GIG with a = 0 requires b*c bounded away from zero")
    n = 1 if size is None else int(size)
    draws = _gig_two_param(lam, omega, rng, n)
    if a < 0.0:
        draws = 1.0 / draws
    draws = draws * np.sqrt(c / b)
    return float(draws[0]) if size is None else draws


def _gig_two_param(lam: float, omega: float, rng: np.random.Generator, n: int) -> np.ndarray:
    """Draws from p(x) propto x^(lam-1) exp{-omega (x + 1/x) / 2}, lam >= 0.

    Rejection sampler of Devroye (2014) built on the log-concave density of
    log(X / mode): a flat center piece with two exponential tails.  The
    acceptance rate is bounded away from zero uniformly in (lam, omega).
    """
    alpha = np.sqrt(omega * omega + lam * lam) - lam

    def psi(x):
        return -alpha * (np.cosh(x) - 1.0) - lam * (np.expm1(x) - x)

    def dpsi(x):
        return -alpha * np.sinh(x) - lam * np.expm1(x)

    # Right and left switch points of the three-piece envelope.
    x0 = -psi(1.0)
    if 0.5 <= x0 <= 2.0:
        t = 1.0
    elif x0 > 2.0:
        t = np.sqrt(2.0 / (alpha + lam))
    else:
        t = np.log(4.0 / (alpha + 2.0 * lam))

    x1 = -psi(-1.0)
    if 0.5 <= x1 <= 2.0:
        s = 1.0
    elif x1 > 2.0:
        s = np.sqrt(4.0 / (alpha * np.cosh(1.0) + lam))
    else:
        if lam == 0.0:
            s = np.log(1.0 + 1.0 / alpha + np.sqrt(1.0 / alpha**2 + 2.0 / alpha))
        elif alpha == 0.0:
            s = 1.0 / lam
        else:
            s = min(1.0 / lam, np.log(1.0 + 1.0 / alpha + np.sqrt(1.0 / alpha**2 + 2.0 / alpha)))

    eta = -psi(t)
    zeta = -dpsi(t)
    theta = -psi(-s)
    xi = dpsi(-s)
    p = 1.0 / xi
    r = 1.0 / zeta
    t_star = t - r * eta
    s_star = s - p * theta
    q = t_star + s_star

    out = np.empty(n)
    filled = 0
    while filled < n:
        m = max(int((n - filled) * 1.6) + 16, 32)
        u = rng.random(m)
        v = rng.random(m)
        w = rng.random(m)
        cand = np.empty(m)
        mid = u < q / (p + q + r)
        right = (~mid) & (u < (q + r) / (p + q + r))
        left = ~(mid | right)
        cand[mid] = -s_star + q * v[mid]
        cand[right] = t_star + r * np.log(1.0 / v[right])
        cand[left] = -s_star - p * np.log(1.0 / v[left])
        log_envelope = np.zeros(m)
        log_envelope[right] = -eta - zeta * (cand[right] - t)
        log_envelope[left] = -theta + xi * (cand[left] + s)
        with np.errstate(over="ignore"):
            accept = np.log(w) + log_envelope <= psi(cand)
        good = cand[accept]
        take = min(good.size, n - filled)
        out[filled:filled + take] = good[:take]
        filled += take
    mode = (lam + np.sqrt(lam * lam + omega * omega)) / omega
    return np.exp(out) * mode


def sample_dirichlet(concentrations: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Dirichlet draw that is robust to very small concentrations.

    Gamma variates with shape well below one underflow to exact zeros in
    the direct method; sampling their logs keeps the normalized weights
    finite.  Output is non-negative and sums to one within 1e-12.
    """
    conc = np.asarray(concentrations, dtype=float)
    if conc.ndim != 1 or conc.size == 0:
        raise ValueError("concentrations must be a non-empty 1-d array")
    if np.any(conc <= 0.0) or not np.all(np.isfinite(conc)):
        raise ValueError("concentrations must be positive and finite")
    # log Gamma(a) = log Gamma(a+1) + log(U)/a, exact for any a > 0
    log_g = np.log(rng.gamma(shape=conc + 1.0)) + np.log(rng.random(conc.size)) / conc
    log_g -= log_g.max()
    w = np.exp(log_g)
    return w / w.sum()


def sample_categorical(weights: np.ndarray, rng: np.random.Generator) -> int:
    """Single draw of a 0-based category index proportional to ``weights``."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty 1-d array")
    if np.any(w < 0.0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be non-negative and finite")
    total = w.sum()
    if total <= 0.0:
        raise ValueError("weights sum to zero")
    u = rng.random() * total
    return int(np.searchsorted(np.cumsum(w), u, side="right").clip(0, w.size - 1))


def sample_categorical_rows(log_weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Row-wise categorical draws from unnormalized log weights (n, K)."""
    lw = np.asarray(log_weights, dtype=float)
    lw = lw - lw.max(axis=1, keepdims=True)
    w = np.exp(lw)
    cdf = np.cumsum(w, axis=1)
    u = rng.random(lw.shape[0]) * cdf[:, -1]
    return (cdf < u[:, None]).sum(axis=1).clip(0, lw.shape[1] - 1)


def sample_gamma_rate(shape: float, rate: float, rng: np.random.Generator, size=None):
    """Gamma draw in shape/rate form, matching the G(a, b) convention here."""
    if shape <= 0.0 or rate <= 0.0:
        raise ValueError("Gamma shape and rate must be positive")
    return rng.gamma(shape=shape, scale=1.0 / rate, size=size)
