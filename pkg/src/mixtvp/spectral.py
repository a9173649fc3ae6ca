"""Zero-frequency spectral summaries of reduced-form VAR draws.

The long-run (zero-frequency) spectral density of a stable VAR is
accumulated from the companion form, and the ratio of its off-diagonal
to diagonal entries summarizes the low-frequency co-movement of a pair
of variables. Unstable draws are flagged and excluded from bands.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "STABILITY_MARGIN",
    "CompanionForm",
    "companion",
    "low_freq_matrix",
    "low_freq",
    "low_freq_bands",
    "bands_csv",
]

STABILITY_MARGIN = 1e-8


@dataclass(frozen=True)
class CompanionForm:
    """First-order stacking of a VAR(p): Z_t = F Z_{t-1} + E_t.

    ``F`` is mp x mp, ``upsilon`` embeds the reduced-form error
    covariance in the leading m x m block, and ``J = [I_m, 0]`` selects
    the contemporaneous subvector.
    """

    F: np.ndarray
    upsilon: np.ndarray
    J: np.ndarray

    @property
    def m(self) -> int:
        return self.J.shape[0]

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.F))))

    def is_stable(self, margin: float = STABILITY_MARGIN) -> bool:
        return self.spectral_radius() < 1.0 - margin


def companion(A: np.ndarray, sigma_red: np.ndarray, p: int) -> CompanionForm:
    """Build the companion form from reduced-form coefficients.

    ``A`` is m x (mp+1) ordered as (lag blocks, intercept); the
    intercept does not enter the dynamics and is dropped.
    """
    A = np.asarray(A, dtype=float)
    m = A.shape[0]
    if A.shape[1] != m * p + 1:
        raise ValueError("A must be m x (mp+1)")
    d = m * p
    F = np.zeros((d, d))
    F[:m, :] = A[:, :-1]
    if p > 1:
        F[m:, :-m] = np.eye(d - m)
    upsilon = np.zeros((d, d))
    upsilon[:m, :m] = sigma_red
    J = np.zeros((m, d))
    J[:, :m] = np.eye(m)
    return CompanionForm(F=F, upsilon=upsilon, J=J)


def low_freq_matrix(cf: CompanionForm) -> np.ndarray:
    """Zero-frequency spectral density J (I-F)^-1 Ups (I-F')^-1 J'.

    Requires a stable companion matrix; symmetric PSD by construction.
    """
    if not cf.is_stable():
        raise ValueError("companion matrix too close to the unit circle")
    d = cf.F.shape[0]
    inv = np.linalg.solve(np.eye(d) - cf.F, np.eye(d))
    pi = cf.J @ inv @ cf.upsilon @ inv.T @ cf.J.T
    return 0.5 * (pi + pi.T)


def low_freq(cf: CompanionForm, i: int, j: int) -> float:
    """Ratio Pi_ij(0) / Pi_jj(0) of the zero-frequency density."""
    pi = low_freq_matrix(cf)
    return float(pi[i, j] / pi[j, j])


def low_freq_bands(
    draws: list[tuple[np.ndarray, np.ndarray]],
    p: int,
    i: int,
    j: int,
    quantiles: tuple[float, ...] = (0.16, 0.5, 0.84),
) -> tuple[np.ndarray, int]:
    """Quantiles of the ratio over posterior draws, skipping unstable ones.

    ``draws`` holds (A, Sigma_red) pairs for one period. Returns the
    requested quantiles and how many draws were excluded; raises if
    every draw is unstable.
    """
    vals = []
    excluded = 0
    for A, sigma in draws:
        cf = companion(A, sigma, p)
        if not cf.is_stable():
            excluded += 1
            continue
        vals.append(low_freq(cf, i, j))
    if not vals:
        raise ValueError("every draw was unstable")
    return np.quantile(vals, quantiles), excluded


def bands_csv(rows: list[tuple[int, float, float, float]], excluded: int) -> str:
    """Per-period band table: t, median, 16th, 84th percentile."""
    out = [f"# excluded_unstable: {excluded}", "t,median,q16,q84"]
    for t, med, lo, hi in rows:
        out.append(
            f"{t}," + ",".join(format(v, ".17g") for v in (med, lo, hi))
        )
    return "\n".join(out) + "\n"
