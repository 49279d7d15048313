"""Monte Carlo density evolution for protograph ensembles over the BSC.

One population of LLR samples is kept per nonzero protograph entry (i, j);
the s_ij parallel edges of that entry are statistically identical and share
it. The all-zero source with an all-zero syndrome is used throughout, which
is exact for syndrome decoding over a symmetric channel.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Optional

import numpy as np
import numpy.typing as npt
import structlog

from app import __version__
from app.config import settings
from app.exceptions import Unconnected
from app.models.protograph import (
    BscChannel,
    DensityEvolutionParams,
    Protograph,
    ThresholdReport,
    inverse_binary_entropy,
)

logger = structlog.get_logger(__name__)

_TANH_LIMIT = 1.0 - 1e-15


class _EdgeLayout:
    def __init__(self, entries: npt.NDArray[np.int64]) -> None:
        self.entries = entries
        self.edges = [(int(i), int(j)) for i, j in zip(*np.nonzero(entries))]
        self.index = {edge: e for e, edge in enumerate(self.edges)}
        self.row_edges = {
            i: [self.index[(i, j)] for j in np.flatnonzero(entries[i])]
            for i in range(entries.shape[0])
        }
        self.col_edges = {
            j: [self.index[(i, j)] for i in np.flatnonzero(entries[:, j])]
            for j in range(entries.shape[1])
        }

    def multiplicity(self, e: int) -> int:
        i, j = self.edges[e]
        return int(self.entries[i, j])


def _channel_samples(
    rng: np.random.Generator, size: int, p: float, magnitude: float
) -> npt.NDArray[np.float64]:
    flips = rng.random(size) < p
    return np.where(flips, -magnitude, magnitude)


def _draw(
    rng: np.random.Generator, population: npt.NDArray[np.float64], count: int
) -> npt.NDArray[np.float64]:
    """``count`` independent resamplings of ``population``, shape (count, samples)."""
    return population[rng.integers(0, population.shape[0], size=(count, population.shape[0]))]


def de_converges(
    S: Protograph,
    p: float,
    params: DensityEvolutionParams,
    rng: np.random.Generator,
) -> tuple[bool, int, float]:
    """Run density evolution at one crossover probability.

    Returns (success, iterations run, final error). The error is the probability
    that a variable-to-check message has the wrong sign, worst over protograph
    edges.
    """
    if p <= 0.0:
        return True, 0, 0.0
    if p >= 0.5:
        return False, 0, 0.5

    layout = _EdgeLayout(S.array)
    samples = params.samples
    magnitude = BscChannel(p=p).llr_magnitude(params.llr_clamp)
    v2c = np.stack([_channel_samples(rng, samples, p, magnitude) for _ in layout.edges])
    c2v = np.zeros_like(v2c)

    error = 1.0
    for iteration in range(1, params.max_iterations + 1):
        tanh_v2c = np.clip(np.tanh(0.5 * v2c), -_TANH_LIMIT, _TANH_LIMIT)
        for e, (i, _) in enumerate(layout.edges):
            product = np.ones(samples)
            for other in layout.row_edges[i]:
                count = layout.multiplicity(other) - (1 if other == e else 0)
                if count:
                    product *= _draw(rng, tanh_v2c[other], count).prod(axis=0)
            product = np.clip(product, -_TANH_LIMIT, _TANH_LIMIT)
            c2v[e] = np.clip(2.0 * np.arctanh(product), -params.llr_clamp, params.llr_clamp)

        error = 0.0
        for col in layout.col_edges.values():
            channel = _channel_samples(rng, samples, p, magnitude)
            for e in col:
                extrinsic = channel.copy()
                for other in col:
                    count = layout.multiplicity(other) - (1 if other == e else 0)
                    if count:
                        extrinsic += _draw(rng, c2v[other], count).sum(axis=0)
                v2c[e] = np.clip(extrinsic, -params.llr_clamp, params.llr_clamp)
                error = max(error, float(np.mean(v2c[e] < 0) + 0.5 * np.mean(v2c[e] == 0)))

        if error <= params.target_error:
            return True, iteration, error
    return False, params.max_iterations, error


def _bisection_rng(seed: int, step: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, step]))


@lru_cache(maxsize=4096)
def _cached_threshold(
    key: tuple[tuple[int, ...], ...],
    params: DensityEvolutionParams,
    seed: int,
) -> tuple[float, bool, int]:
    S = Protograph.from_array(key)
    lo, hi = 0.0, 0.5
    evaluations = 0
    while hi - lo > params.tolerance and evaluations < params.max_bisections:
        mid = 0.5 * (lo + hi)
        success, _, _ = de_converges(S, mid, params, _bisection_rng(seed, evaluations))
        evaluations += 1
        if success:
            lo = mid
        else:
            hi = mid
    return lo, hi - lo <= params.tolerance, evaluations


def de_threshold(
    S: Protograph,
    params: Optional[DensityEvolutionParams] = None,
    seed: Optional[int] = None,
) -> ThresholdReport:
    """Bisect the largest decodable crossover probability of S on [0, 1/2]."""
    params = params or DensityEvolutionParams()
    seed = settings.default_seed if seed is None else seed
    unconnected = S.zero_columns()
    if unconnected:
        raise Unconnected(f'VN types {unconnected} of {S.id} have no edges')

    threshold, converged, evaluations = _cached_threshold(S.canonical_key(), params, seed)
    if not converged:
        logger.warning(
            'Threshold bisection hit its iteration cap',
            protograph_id=S.id,
            evaluations=evaluations,
        )
    logger.debug(
        'Threshold computed', protograph_id=S.id, threshold=threshold, evaluations=evaluations
    )
    return ThresholdReport(
        protograph_id=S.id,
        entries=S.entries,
        threshold=threshold,
        params=params,
        converged=converged,
        evaluations=evaluations,
        shannon_limit=inverse_binary_entropy(float(S.rate)),
        seed=seed,
        tool_version=__version__,
    )
