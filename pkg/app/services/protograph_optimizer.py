"""Differential-evolution search over integer protographs.

Candidates live as real matrices in [0, d_max]; each is rounded and clipped
before its density-evolution threshold is evaluated. The scheme is rand/1/bin.
"""

from __future__ import annotations

from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

import numpy as np
import numpy.typing as npt
import structlog

from app.config import settings
from app.models.protograph import DensityEvolutionParams, Protograph, ThresholdReport
from app.services.density_evolution import de_threshold

logger = structlog.get_logger(__name__)

DIFFERENTIAL_WEIGHT = 0.5
CROSSOVER_RATE = 0.9


def evaluation_seed(seed: int, S: Protograph) -> int:
    flat = [int(e) for row in S.entries for e in row]
    return int(np.random.SeedSequence([seed, *flat]).generate_state(1)[0])


def selection_key(report: ThresholdReport) -> tuple[float, int, tuple[tuple[int, ...], ...]]:
    """Lower is better: highest threshold, then fewest edges, then lexicographic entries."""
    edges = sum(sum(row) for row in report.entries)
    return -report.threshold, edges, report.entries


def _evaluate(args: tuple[Protograph, DensityEvolutionParams, int]) -> ThresholdReport:
    S, params, seed = args
    return de_threshold(S, params, evaluation_seed(seed, S))


def _repair(
    real: npt.NDArray[np.float64], d_max: int, rng: np.random.Generator
) -> npt.NDArray[np.int64]:
    """Round, clip, and give every empty column one edge (mirrored into ``real``)."""
    np.clip(real, 0.0, d_max, out=real)
    entries = np.clip(np.rint(real), 0, d_max).astype(np.int64)
    for j in np.flatnonzero(entries.sum(axis=0) == 0):
        i = int(rng.integers(entries.shape[0]))
        entries[i, j] = 1
        real[i, j] = 1.0
    return entries


class _Evaluator:
    def __init__(self, params: DensityEvolutionParams, seed: int, workers: int) -> None:
        self.params = params
        self.seed = seed
        self.workers = max(1, workers)

    def __call__(self, candidates: Sequence[Protograph]) -> list[ThresholdReport]:
        jobs = [(S, self.params, self.seed) for S in candidates]
        if self.workers == 1 or len(jobs) == 1:
            return [_evaluate(job) for job in jobs]
        with ProcessPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(_evaluate, jobs))


def optimize_protograph(
    S_m: int,
    S_n: int,
    d_max: int,
    population: int,
    iterations: int,
    seed: Optional[int] = None,
    params: Optional[DensityEvolutionParams] = None,
    workers: Optional[int] = None,
) -> tuple[Protograph, ThresholdReport]:
    """Return the best protograph found and its threshold report.

    A trial replaces its target when its selection key is not worse, so the
    best member never degrades across generations.
    """
    if population < 4:
        raise ValueError('differential evolution needs a population of at least 4')
    if not 0 < S_m < S_n:
        raise ValueError(f'need 0 < S_m < S_n, got S_m={S_m}, S_n={S_n}')
    if d_max < 1:
        raise ValueError('d_max must be >= 1')
    if iterations < 0:
        raise ValueError('iterations must be >= 0')

    seed = settings.default_seed if seed is None else seed
    params = params or DensityEvolutionParams()
    evaluate = _Evaluator(params, seed, settings.workers if workers is None else workers)
    rng = np.random.default_rng(seed)

    dimension = S_m * S_n
    if not 5 * dimension < population < 10 * dimension:
        logger.warning(
            'Population size outside the advised range',
            population=population,
            low=5 * dimension,
            high=10 * dimension,
        )

    logger.info(
        'Starting protograph search',
        cn_types=S_m,
        vn_types=S_n,
        d_max=d_max,
        population=population,
        iterations=iterations,
        seed=seed,
    )

    real = rng.uniform(0.0, d_max, size=(population, S_m, S_n))
    members = [Protograph.from_array(_repair(real[k], d_max, rng)) for k in range(population)]
    reports = evaluate(members)

    for generation in range(1, iterations + 1):
        trial_real = np.empty_like(real)
        trials: list[Protograph] = []
        for target in range(population):
            donors = rng.choice(
                [k for k in range(population) if k != target], size=3, replace=False
            )
            a, b, c = (real[int(k)] for k in donors)
            mutant = a + DIFFERENTIAL_WEIGHT * (b - c)
            cross = rng.random((S_m, S_n)) < CROSSOVER_RATE
            cross.flat[int(rng.integers(dimension))] = True
            trial_real[target] = np.where(cross, mutant, real[target])
            trials.append(Protograph.from_array(_repair(trial_real[target], d_max, rng)))

        trial_reports = evaluate(trials)
        for target, (trial, report) in enumerate(zip(trials, trial_reports)):
            if selection_key(report) <= selection_key(reports[target]):
                real[target] = trial_real[target]
                members[target] = trial
                reports[target] = report

        best = min(reports, key=selection_key)
        logger.info(
            'Generation finished',
            generation=generation,
            best_threshold=best.threshold,
            best_protograph=best.protograph_id,
        )

    best_index = min(range(population), key=lambda k: selection_key(reports[k]))
    logger.info(
        'Protograph search finished',
        threshold=reports[best_index].threshold,
        entries=members[best_index].entries,
    )
    return members[best_index], reports[best_index]
