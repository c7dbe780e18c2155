"""Evaluation metrics for distribution ensembles and output statistics.

Three measures: the average mean-square distance between an ensemble's
member densities and a reference density, the 95% confidence range of an
empirical CDF (difference of the 2.5% and 97.5% quantiles), and the area
validation metric (area between an empirical CDF and the step function at
the true value).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import FAMILIES, ModelFamily, log_pdf_grid
from .propagation import DistributionEnsemble

__all__ = [
    "EmpiricalCdf",
    "CoarseGridError",
    "default_sigma0_grid",
    "avg_mean_square_distance",
    "confidence_range",
    "area_validation_metric",
]

MIN_CONFIDENCE_POINTS = 40


class CoarseGridError(RuntimeError):
    """Metric integral is not converged on the supplied grid."""


@dataclass(frozen=True)
class EmpiricalCdf:
    """Step CDF of a sample: sorted values with cumulative probabilities k/n."""

    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        p = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probs", p)
        if v.ndim != 1 or v.size < 1 or v.shape != p.shape:
            raise ValueError("values and probs must be matching nonempty vectors")
        if np.any(np.diff(v) < 0.0):
            raise ValueError("values must be sorted ascending")
        if np.any(np.diff(p) <= 0.0) or abs(p[-1] - 1.0) > 1e-12:
            raise ValueError("probs must increase strictly to 1")

    @classmethod
    def from_samples(cls, samples) -> "EmpiricalCdf":
        v = np.sort(np.asarray(samples, dtype=float))
        n = v.size
        return cls(values=v, probs=np.arange(1, n + 1) / n)

    @property
    def n(self) -> int:
        return int(self.values.size)


def default_sigma0_grid(n_points: int = 2001) -> np.ndarray:
    """Yield-strength grid (ksi) covering all materials with margin."""
    return np.linspace(15.0, 65.0, n_points)


def _member_square_distance(
    ens: DistributionEnsemble, truth_density: np.ndarray, grid: np.ndarray
) -> float:
    total = 0.0
    for j in range(len(FAMILIES)):
        idx = np.flatnonzero(ens.family_codes == j)
        for start in range(0, idx.size, 64):
            block = idx[start : start + 64]
            p = np.exp(log_pdf_grid(FAMILIES[j], ens.thetas[block], grid))
            total += float(np.sum(np.trapezoid((p - truth_density) ** 2, grid, axis=1)))
    return total


def avg_mean_square_distance(
    ens: DistributionEnsemble,
    truth: tuple[ModelFamily, np.ndarray],
    grid: np.ndarray | None = None,
    check_refinement: bool = True,
) -> float:
    """Half the mean, over members, of the integrated squared difference
    between member density and the reference density.

    The integral uses the trapezoid rule on ``grid``; a doubled-resolution
    pass guards against under-resolved grids.
    """
    if grid is None:
        grid = default_sigma0_grid()
    grid = np.asarray(grid, dtype=float)
    fam, theta = truth

    def delta_on(g: np.ndarray) -> float:
        p_true = np.exp(log_pdf_grid(fam, np.asarray(theta)[None, :], g)[0])
        return 0.5 * _member_square_distance(ens, p_true, g) / ens.n_members

    delta = delta_on(grid)
    if check_refinement:
        fine = np.linspace(grid[0], grid[-1], 2 * (grid.size - 1) + 1)
        delta_fine = delta_on(fine)
        scale = max(abs(delta_fine), abs(delta))
        if scale > 0.0 and abs(delta_fine - delta) > 0.01 * scale:
            raise CoarseGridError(
                f"density distance changed {delta:.6g} -> {delta_fine:.6g} "
                "on refinement; use a finer grid"
            )
    return delta


def confidence_range(cdf: EmpiricalCdf) -> float:
    """95% confidence range: 97.5% quantile minus 2.5% quantile, with linear
    interpolation between order statistics."""
    if cdf.n < MIN_CONFIDENCE_POINTS:
        raise ValueError(
            f"need at least {MIN_CONFIDENCE_POINTS} points for quantile resolution, "
            f"got {cdf.n}"
        )
    lo, hi = np.quantile(cdf.values, [0.025, 0.975])
    return float(hi - lo)


def area_validation_metric(cdf: EmpiricalCdf, truth: float) -> float:
    """Area between the empirical CDF and the unit step at ``truth``.

    Both curves are piecewise constant, so the integral is summed exactly
    over the segments between consecutive breakpoints.
    """
    breaks = np.unique(np.append(cdf.values, truth))
    # CDF value just after each breakpoint (right-continuous steps)
    f = np.searchsorted(cdf.values, breaks, side="right") / cdf.n
    t = (breaks >= truth).astype(float)
    widths = np.diff(breaks)
    return float(np.sum(np.abs(f[:-1] - t[:-1]) * widths))
