"""Parameter priors: bounded uniform boxes and data-driven kernel densities.

Noninformative priors are proper uniform boxes whose bounds come from a
physical envelope on yield strength (mean 20..60 ksi, COV 0.01..0.35)
mapped through each family's moment relations.  Informative priors are
built in three stages: a flat pre-prior, an MCMC posterior on a historical
dataset, and a product-Gaussian kernel density estimate of that posterior
with AMISE-optimal bandwidths.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .distributions import (
    Dataset,
    ModelFamily,
    PARAM_DIM,
    params_from_moments,
    sample as dist_sample,
)
from .mcmc import EnsembleConfig, sample_posterior
from .seeding import rng_for

__all__ = [
    "UniformBoxPrior",
    "KdePrior",
    "ParameterPrior",
    "DegenerateDataError",
    "ENVELOPE_MEAN",
    "ENVELOPE_COV",
    "default_uniform_prior",
    "kde_bandwidths",
    "build_informative_prior",
    "HISTORICAL_SOURCES",
    "HISTORICAL_SEED",
    "historical_dataset",
]

_LOG_2PI = np.log(2.0 * np.pi)

# Yield-strength envelope (ksi) that the noninformative boxes must cover.
ENVELOPE_MEAN = (20.0, 60.0)
ENVELOPE_COV = (0.01, 0.35)


class DegenerateDataError(ValueError):
    """Sample set carries no spread in some dimension."""


@dataclass(frozen=True)
class UniformBoxPrior:
    """Proper uniform density over an axis-aligned box."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))
        if self.lo.shape != (PARAM_DIM,) or self.hi.shape != (PARAM_DIM,):
            raise ValueError("bounds must be length-2 vectors")
        if not (np.all(np.isfinite(self.lo)) and np.all(np.isfinite(self.hi))):
            raise ValueError("bounds must be finite (prior must be proper)")
        if not np.all(self.lo < self.hi):
            raise ValueError("need lo < hi componentwise")

    @property
    def log_volume(self) -> float:
        return float(np.sum(np.log(self.hi - self.lo)))

    def log_density_batch(self, thetas: np.ndarray) -> np.ndarray:
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        inside = np.all((thetas >= self.lo) & (thetas <= self.hi), axis=1)
        return np.where(inside, -self.log_volume, -np.inf)

    def log_density(self, theta) -> float:
        return float(self.log_density_batch(np.asarray(theta)[None, :])[0])

    def density(self, theta) -> float:
        return float(np.exp(self.log_density(theta)))

    def sample(self, rng: np.random.Generator, count: int = 1) -> np.ndarray:
        if count < 1:
            raise ValueError("count must be >= 1")
        return rng.uniform(self.lo, self.hi, size=(count, PARAM_DIM))


@dataclass(frozen=True)
class KdePrior:
    """Product-Gaussian kernel mixture over posterior support samples.

    Density is the mean over support samples of per-dimension Gaussian
    kernels; sampling picks a support sample uniformly and adds independent
    Gaussian noise with the bandwidth as standard deviation.  Tails are
    Gaussian, so the density is positive everywhere, including outside the
    physical parameter domain (such draws are killed downstream by a -inf
    likelihood).
    """

    support_samples: np.ndarray
    bandwidths: np.ndarray
    _log_norm: float = field(init=False, repr=False)

    def __post_init__(self) -> None:
        samples = np.atleast_2d(np.asarray(self.support_samples, dtype=float))
        bw = np.asarray(self.bandwidths, dtype=float)
        if samples.shape[1] != PARAM_DIM or bw.shape != (PARAM_DIM,):
            raise ValueError("need (n, 2) support samples and 2 bandwidths")
        if not np.all(bw > 0.0):
            raise ValueError("bandwidths must be strictly positive")
        object.__setattr__(self, "support_samples", samples)
        object.__setattr__(self, "bandwidths", bw)
        ln = np.log(samples.shape[0]) + np.sum(np.log(bw)) + PARAM_DIM / 2.0 * _LOG_2PI
        object.__setattr__(self, "_log_norm", float(ln))

    @property
    def n_components(self) -> int:
        return int(self.support_samples.shape[0])

    def log_density_batch(self, thetas: np.ndarray, chunk: int = 512) -> np.ndarray:
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        out = np.empty(thetas.shape[0])
        scaled_support = self.support_samples / self.bandwidths
        for start in range(0, thetas.shape[0], chunk):
            stop = min(start + chunk, thetas.shape[0])
            z = thetas[start:stop, None, :] / self.bandwidths - scaled_support[None, :, :]
            expo = -0.5 * np.sum(z * z, axis=2)
            peak = np.max(expo, axis=1)
            out[start:stop] = peak + np.log(
                np.sum(np.exp(expo - peak[:, None]), axis=1)
            )
        return out - self._log_norm

    def log_density(self, theta) -> float:
        return float(self.log_density_batch(np.asarray(theta)[None, :])[0])

    def density(self, theta) -> float:
        return float(np.exp(self.log_density(theta)))

    def sample(self, rng: np.random.Generator, count: int = 1) -> np.ndarray:
        if count < 1:
            raise ValueError("count must be >= 1")
        idx = rng.integers(0, self.n_components, size=count)
        noise = rng.standard_normal((count, PARAM_DIM)) * self.bandwidths
        return self.support_samples[idx] + noise


ParameterPrior = UniformBoxPrior | KdePrior


def default_uniform_prior(family: ModelFamily) -> UniformBoxPrior:
    """Noninformative box for a family, spanning the parameter values of all
    distributions with mean in ENVELOPE_MEAN and COV in ENVELOPE_COV."""
    corners = np.array(
        [
            params_from_moments(family, mean, cov)
            for mean, cov in itertools.product(ENVELOPE_MEAN, ENVELOPE_COV)
        ]
    )
    return UniformBoxPrior(lo=corners.min(axis=0), hi=corners.max(axis=0))


def kde_bandwidths(samples: np.ndarray) -> np.ndarray:
    """AMISE-optimal per-dimension bandwidths for a Gaussian product kernel:
    w_i = [4 / (K + 2)]^{1/(K+4)} n^{-1/(K+4)} sigma_i."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    n, k = samples.shape
    if n < 2:
        raise ValueError("need at least 2 samples for a bandwidth")
    sigma = np.std(samples, axis=0, ddof=1)
    if np.any(sigma <= 0.0):
        raise DegenerateDataError("zero-variance dimension; prior would be degenerate")
    return (4.0 / (k + 2.0)) ** (1.0 / (k + 4.0)) * n ** (-1.0 / (k + 4.0)) * sigma


_PRE_PRIOR_CFG = EnsembleConfig(n_walkers=32, n_steps=1500, burn_in=500)

# Kernel count cap for priors consumed by downstream MCMC; density cost per
# posterior evaluation is linear in the component count.
DEFAULT_KDE_COMPONENTS = 5000


def build_informative_prior(
    family: ModelFamily,
    historical: Dataset,
    pre_prior: UniformBoxPrior | None = None,
    cfg: EnsembleConfig | None = None,
    rng: np.random.Generator | None = None,
    max_components: int | None = DEFAULT_KDE_COMPONENTS,
) -> KdePrior:
    """Data-driven prior: flat pre-prior -> posterior on historical data ->
    KDE of the posterior chain with AMISE bandwidths.

    ``max_components`` caps the kernel count by deterministic striding of
    the chain (None keeps every post burn-in sample).
    """
    if np.std(historical.values) == 0.0:
        raise DegenerateDataError(
            f"historical dataset {historical.label!r} has zero variance"
        )
    if pre_prior is None:
        pre_prior = default_uniform_prior(family)
    if cfg is None:
        cfg = _PRE_PRIOR_CFG
    chain = sample_posterior(family, historical, pre_prior, cfg, rng)
    support = chain.samples
    if max_components is not None and support.shape[0] > max_components:
        stride = int(np.ceil(support.shape[0] / max_components))
        support = support[::stride]
    return KdePrior(support_samples=support, bandwidths=kde_bandwidths(support))


# ---------------------------------------------------------------------------
# historical material data (regenerated synthetically from published
# summary statistics; raw test values were never published)


@dataclass(frozen=True)
class HistoricalSource:
    mean: float
    cov: float
    family: ModelFamily
    n_tests: int


HISTORICAL_SOURCES: dict[str, HistoricalSource] = {
    "ABS-A": HistoricalSource(36.091, 0.059, ModelFamily.LOGNORMAL, 33),
    "ABS-B": HistoricalSource(34.782, 0.116, ModelFamily.LOGNORMAL, 79),
    "ABS-C": HistoricalSource(33.831, 0.081, ModelFamily.LOGNORMAL, 13),
    "ASTM-A7": HistoricalSource(38.197, 0.108, ModelFamily.NORMAL, 58),
}

# Fixed so the regenerated reference datasets are stable across runs and
# machines (the source test programs date to 1948).
HISTORICAL_SEED = 1948


def historical_dataset(name: str, seed: int = HISTORICAL_SEED) -> Dataset:
    """Regenerate the named historical yield-strength dataset.

    Draws from the published distribution shape, then standardizes the
    sample affinely so its mean and coefficient of variation equal the
    published summary statistics exactly; only those summaries (not the raw
    1948-1962 test values) were ever published, so they are the contract
    the regenerated set must honor.
    """
    try:
        src = HISTORICAL_SOURCES[name]
    except KeyError:
        raise KeyError(
            f"unknown historical dataset {name!r}; "
            f"choose from {sorted(HISTORICAL_SOURCES)}"
        ) from None
    theta = params_from_moments(src.family, src.mean, src.cov)
    values = dist_sample(src.family, theta, rng_for(seed, "historical", name), src.n_tests)
    values = src.mean + (values - values.mean()) * (
        src.mean * src.cov / values.std(ddof=1)
    )
    return Dataset(values, label=name)
