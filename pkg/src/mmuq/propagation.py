"""Finite ensembles of (model, parameters) pairs and single-loop propagation.

The total uncertainty quantified upstream (posterior model probabilities
plus per-model posterior parameter samples) is represented by an ensemble
of sampled distributions.  The equally weighted mixture of the ensemble
members is the optimal sampling density; one Monte Carlo sample from it is
reweighted by importance sampling to give every member's output statistics
in a single pass over the physics function.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .distributions import FAMILIES, ModelFamily, log_pdf_grid, sample_one_per
from .evidence import ModelPosteriorProbs
from .mcmc import PosteriorChain

__all__ = [
    "DistributionEnsemble",
    "PropagationResult",
    "draw_ensemble",
    "mixture_density",
    "sample_mixture",
    "propagate",
]

_MEMBER_CHUNK = 64


@dataclass
class DistributionEnsemble:
    """Sampled (family, parameters) pairs approximating the total
    uncertainty; member order is the sampling order."""

    family_codes: np.ndarray  # (n_d,) indices into FAMILIES
    thetas: np.ndarray  # (n_d, 2)
    source: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        self.family_codes = np.asarray(self.family_codes, dtype=np.int64)
        self.thetas = np.asarray(self.thetas, dtype=float)
        if self.family_codes.ndim != 1 or self.family_codes.size < 1:
            raise ValueError("ensemble needs at least one member")
        if self.thetas.shape != (self.family_codes.size, 2):
            raise ValueError("thetas must be (n_d, 2)")

    @property
    def n_members(self) -> int:
        return int(self.family_codes.size)

    def member(self, i: int) -> tuple[ModelFamily, np.ndarray]:
        return FAMILIES[self.family_codes[i]], self.thetas[i]

    def __iter__(self):
        return (self.member(i) for i in range(self.n_members))

    def permuted(self, order: np.ndarray) -> "DistributionEnsemble":
        order = np.asarray(order)
        return DistributionEnsemble(
            self.family_codes[order], self.thetas[order], self.source
        )


@dataclass
class PropagationResult:
    """Per-member output statistics from one importance-sampling pass.

    ``mean_weights`` holds each member's average importance weight, which
    should sit near 1; values far from 1 flag degenerate reweighting.
    """

    x_samples: np.ndarray
    g_values: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    pfs: np.ndarray
    mean_weights: np.ndarray
    failure_threshold: float


def draw_ensemble(
    posteriors: Mapping[ModelFamily, PosteriorChain],
    probs: ModelPosteriorProbs,
    n_d: int,
    rng: np.random.Generator,
) -> DistributionEnsemble:
    """Draw ``n_d`` members: family by a categorical draw over the posterior
    model probabilities, parameters uniformly from that family's chain."""
    if n_d < 1:
        raise ValueError("n_d must be >= 1")
    pi_hat = probs.pi_hat
    if pi_hat.size != len(FAMILIES):
        raise ValueError("probs must cover the full candidate set")
    for j, fam in enumerate(FAMILIES):
        if pi_hat[j] > 0.0 and (
            fam not in posteriors or posteriors[fam].samples.shape[0] == 0
        ):
            raise ValueError(f"no posterior chain for {fam} with positive probability")

    codes = rng.choice(len(FAMILIES), size=n_d, p=pi_hat)
    lengths = np.array(
        [posteriors[f].samples.shape[0] if f in posteriors else 1 for f in FAMILIES]
    )
    rows = np.floor(rng.random(n_d) * lengths[codes]).astype(np.int64)
    thetas = np.empty((n_d, 2))
    for j, fam in enumerate(FAMILIES):
        sel = codes == j
        if np.any(sel):
            thetas[sel] = posteriors[fam].samples[rows[sel]]
    source = tuple(
        f"{fam.value}:chain[{posteriors[fam].samples.shape[0]}]"
        for fam in FAMILIES
        if fam in posteriors and np.any(codes == FAMILIES.index(fam))
    )
    return DistributionEnsemble(codes, thetas, source)


def _accumulate_density(
    ens: DistributionEnsemble, x: np.ndarray, out: np.ndarray
) -> None:
    for j in range(len(FAMILIES)):
        idx = np.flatnonzero(ens.family_codes == j)
        for start in range(0, idx.size, _MEMBER_CHUNK):
            block = idx[start : start + _MEMBER_CHUNK]
            logp = log_pdf_grid(FAMILIES[j], ens.thetas[block], x)
            out += np.sum(np.exp(logp), axis=0)


def mixture_density(ens: DistributionEnsemble, x) -> np.ndarray | float:
    """Equal-weight mixture density of the ensemble members at ``x``."""
    xa = np.asarray(x, dtype=float)
    flat = np.atleast_1d(xa).ravel()
    acc = np.zeros(flat.size)
    _accumulate_density(ens, flat, acc)
    dens = acc / ens.n_members
    return float(dens[0]) if xa.ndim == 0 else dens.reshape(xa.shape)


def sample_mixture(ens: DistributionEnsemble, rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw from the mixture: pick a member uniformly, then draw from it."""
    if n < 1:
        raise ValueError("n must be >= 1")
    member = rng.integers(0, ens.n_members, size=n)
    x = np.empty(n)
    for j in range(len(FAMILIES)):
        sel = np.flatnonzero(ens.family_codes[member] == j)
        if sel.size:
            x[sel] = sample_one_per(FAMILIES[j], ens.thetas[member[sel]], rng)
    return x


def propagate(
    ens: DistributionEnsemble,
    g: Callable[[np.ndarray], np.ndarray],
    n: int,
    rng: np.random.Generator,
    failure_threshold: float = 0.6,
    x_samples: np.ndarray | None = None,
) -> PropagationResult:
    """Propagate every ensemble member through ``g`` with one sample set.

    Draws ``n`` points from the mixture, evaluates ``g`` once, and computes
    per-member mean, variance and failure probability P(g < threshold) by
    importance-sampling reweighting with weights p_i(x) / q(x).
    ``x_samples`` reuses an existing mixture sample instead of drawing.
    """
    x = sample_mixture(ens, rng, n) if x_samples is None else np.asarray(x_samples, float)
    gv = np.asarray(g(x), dtype=float)
    if gv.shape != x.shape:
        raise ValueError("g must map the sample array to an equal-shape array")
    if not np.all(np.isfinite(gv)):
        bad = x[~np.isfinite(gv)][0]
        raise ValueError(f"g returned a non-finite value at x={bad!r}")

    q = np.zeros(n)
    _accumulate_density(ens, x, q)
    q /= ens.n_members

    n_d = ens.n_members
    means = np.empty(n_d)
    m2 = np.empty(n_d)
    pfs = np.empty(n_d)
    mean_w = np.empty(n_d)
    fails = (gv < failure_threshold).astype(float)
    for j in range(len(FAMILIES)):
        idx = np.flatnonzero(ens.family_codes == j)
        for start in range(0, idx.size, _MEMBER_CHUNK):
            block = idx[start : start + _MEMBER_CHUNK]
            w = np.exp(log_pdf_grid(FAMILIES[j], ens.thetas[block], x)) / q[None, :]
            mean_w[block] = np.mean(w, axis=1)
            means[block] = w @ gv / n
            m2[block] = w @ (gv * gv) / n
            pfs[block] = w @ fails / n

    return PropagationResult(
        x_samples=x,
        g_values=gv,
        means=means,
        variances=m2 - means**2,
        pfs=pfs,
        mean_weights=mean_w,
        failure_threshold=failure_threshold,
    )
