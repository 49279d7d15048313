"""Monte Carlo experiments: BER per (rate, p), minimum decodable rate, 4-cycle census."""

from __future__ import annotations

import sys
import time
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np
import structlog
from scipy.stats import norm
from tqdm import tqdm

from app import __version__
from app.config import settings
from app.exceptions import ManifestError, NeverDecodes, RateOffGrid
from app.models.codec import DecoderConfig, LdpcaCode
from app.models.experiment import CycleRow, ExperimentSpec, MinRateResult, PointResult, SimResult
from app.models.ladder import CodeLadder
from app.models.matrix import BinaryMatrix
from app.models.protograph import BscChannel, Rate, binary_entropy
from app.repositories.ladder_repository import LadderRepository
from app.services.codec_service import (
    BeliefPropagationDecoder,
    encode_syndrome,
    ldpca_accumulate,
    ldpca_code,
    ldpca_difference,
    ldpca_merged_code,
    ldpca_schedule,
    ldpca_transmit,
)
from app.services.graph_service import count_4cycles

logger = structlog.get_logger(__name__)

LADDER = 'ladder'
LDPCA = 'ldpca'


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials <= 0:
        return 0.0, 1.0
    z = float(norm.ppf(0.5 + confidence / 2.0))
    phat = successes / trials
    denom = 1.0 + z * z / trials
    centre = (phat + z * z / (2.0 * trials)) / denom
    half = z * np.sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials)) / denom
    return max(0.0, float(centre - half)), min(1.0, float(centre + half))


def frame_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))


def draw_couple(
    rng: np.random.Generator, n: int, channel: BscChannel
) -> tuple[np.ndarray, np.ndarray]:
    """Uniform source x and side information y = x + Bernoulli(p)."""
    x = rng.integers(0, 2, size=n, dtype=np.uint8)
    return x, channel.sample(x, rng)


@dataclass(frozen=True)
class _FrameJob:
    scheme: str
    matrix: BinaryMatrix
    mother: BinaryMatrix
    target_m: int
    p: float
    config: DecoderConfig
    seed: int
    keys: tuple[int, ...]

    def decoder(self) -> BeliefPropagationDecoder:
        if self.scheme == LDPCA:
            indices = ldpca_schedule(self.mother.rows, self.target_m)
            merged, _ = ldpca_merged_code(self.mother, indices)
            return BeliefPropagationDecoder(merged, self.config)
        return BeliefPropagationDecoder(self.matrix, self.config)

    def syndrome(self, x: np.ndarray) -> np.ndarray:
        if self.scheme == LDPCA:
            accumulated = ldpca_accumulate(encode_syndrome(self.mother, x))
            _, values = ldpca_transmit(accumulated, self.target_m)
            return ldpca_difference(values)
        return encode_syndrome(self.matrix, x)


def _run_frames(job: _FrameJob, frames: Sequence[int]) -> tuple[int, int, int]:
    decoder = job.decoder()
    channel = BscChannel(p=job.p)
    bit_errors = frame_errors = 0
    for frame in frames:
        x, y = draw_couple(frame_rng(job.seed, *job.keys, frame), job.mother.cols, channel)
        result = decoder.decode(job.syndrome(x), y, job.p)
        errors = int(np.count_nonzero(result.x_hat != x))
        bit_errors += errors
        frame_errors += int(errors > 0)
    return bit_errors, frame_errors, len(frames)


def _simulate_point(
    job: _FrameJob,
    frames: int,
    batch_size: int,
    max_frame_errors: int,
    workers: int,
) -> tuple[int, int, int]:
    bit_errors = frame_errors = done = 0
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    progress = tqdm(
        total=frames,
        desc=f'{job.scheme} p={job.p:g}',
        leave=False,
        disable=not sys.stderr.isatty(),
    )
    try:
        while done < frames and frame_errors < max_frame_errors:
            batch = list(range(done, min(done + batch_size, frames)))
            if pool is None:
                outcomes = [_run_frames(job, batch)]
            else:
                chunks = [batch[w::workers] for w in range(workers) if batch[w::workers]]
                outcomes = list(pool.map(_run_frames, [job] * len(chunks), chunks))
            for bits, errs, count in outcomes:
                bit_errors += bits
                frame_errors += errs
                done += count
            progress.update(len(batch))
    finally:
        progress.close()
        if pool is not None:
            pool.shutdown()
    return bit_errors, frame_errors, done


def _ldpca_target(rate: Fraction, n: int, m1: int) -> Optional[int]:
    symbols = rate * n
    if symbols.denominator != 1 or not 1 <= symbols.numerator <= m1:
        return None
    return symbols.numerator


def simulate_ber(
    ladder: CodeLadder,
    spec: ExperimentSpec,
    workers: Optional[int] = None,
) -> SimResult:
    """BER/FER per (rate, p); the LDPCA baseline sees the same frames when enabled."""
    workers = settings.workers if workers is None else workers
    started = time.perf_counter()
    levels = {level.rate: level for level in ladder.grid()}
    rates = [r.fraction for r in spec.rates] if spec.rates else ladder.anchor_rates
    n, m1 = ladder.n, ladder.mother.matrix.rows

    points: list[PointResult] = []
    for rate_index, rate in enumerate(rates):
        if rate not in levels:
            raise RateOffGrid(f'rate {rate} is not on the grid of {ladder.code_id}')
        schemes = [LADDER]
        target_m = _ldpca_target(rate, n, m1)
        if spec.baseline:
            if target_m is None:
                logger.warning('No LDPCA schedule for rate', rate=str(rate), n=n)
            else:
                schemes.append(LDPCA)

        for p_index, p in enumerate(spec.p_values):
            for scheme in schemes:
                job = _FrameJob(
                    scheme=scheme,
                    matrix=levels[rate].matrix,
                    mother=ladder.mother.matrix,
                    target_m=target_m or 0,
                    p=p,
                    config=spec.decoder,
                    seed=spec.seed,
                    keys=(rate_index, p_index),
                )
                bit_errors, frame_errors, frames = _simulate_point(
                    job, spec.frames, spec.batch_size, spec.max_frame_errors, workers
                )
                low, high = wilson_interval(bit_errors, frames * n)
                point = PointResult(
                    code_id=ladder.code_id,
                    rate=Rate.of(rate),
                    p=p,
                    frames=frames,
                    bit_errors=bit_errors,
                    frame_errors=frame_errors,
                    ber=bit_errors / (frames * n),
                    fer=frame_errors / frames,
                    ci_low=low,
                    ci_high=high,
                    seed=spec.seed,
                    scheme=scheme,
                )
                points.append(point)
                logger.info(
                    'BER point finished',
                    scheme=scheme,
                    rate=str(point.rate),
                    p=p,
                    llr=BscChannel(p=p).llr_magnitude(spec.decoder.llr_clamp),
                    frames=frames,
                    ber=point.ber,
                    fer=point.fer,
                )

    return SimResult(
        mode='ber',
        code_id=ladder.code_id,
        points=points,
        wall_clock=time.perf_counter() - started,
        seed=spec.seed,
        tool_version=__version__,
    )


def _first_success(
    decoders: Sequence[tuple[Fraction, BeliefPropagationDecoder, np.ndarray]],
    x: np.ndarray,
    y: np.ndarray,
    p: float,
) -> Fraction:
    # a matching syndrome with x_hat != x still counts as a failure
    for rate, decoder, syndrome in decoders:
        if np.array_equal(decoder.decode(syndrome, y, p).x_hat, x):
            return rate
    raise NeverDecodes(f'not decoded even at rate {decoders[-1][0]}')


def min_rate_experiment(
    ladder: CodeLadder,
    p: float,
    couples: int,
    seed: Optional[int] = None,
    config: Optional[DecoderConfig] = None,
    *,
    baseline: bool = False,
) -> list[MinRateResult]:
    """Average smallest grid rate at which each couple decodes exactly.

    Couples that never decode are counted and left out of the average.
    """
    seed = settings.default_seed if seed is None else seed
    config = config or DecoderConfig()
    channel = BscChannel(p=p)
    grid = list(reversed(ladder.grid()))
    n, m1 = ladder.n, ladder.mother.matrix.rows
    ladder_decoders = [
        (level.rate, BeliefPropagationDecoder(level.matrix, config), level.matrix)
        for level in grid
    ]

    schemes: dict[str, list[Optional[Fraction]]] = {LADDER: []}
    ldpca: Optional[LdpcaCode] = None
    ldpca_decoders: list[tuple[Fraction, BeliefPropagationDecoder, int]] = []
    if baseline:
        targets = range(grid[0].matrix.rows, m1 + 1)
        ldpca = ldpca_code(ladder.mother.matrix, targets)
        for target in targets:
            merged, _ = ldpca_merged_code(ldpca.mother, ldpca.schedules[target])
            ldpca_decoders.append(
                (Fraction(target, n), BeliefPropagationDecoder(merged, config), target)
            )
        schemes[LDPCA] = []

    for couple in tqdm(range(couples), leave=False, disable=not sys.stderr.isatty()):
        x, y = draw_couple(frame_rng(seed, couple), n, channel)
        sweep = [(rate, dec, encode_syndrome(H, x)) for rate, dec, H in ladder_decoders]
        schemes[LADDER].append(_attempt(sweep, x, y, p))
        if ldpca is not None:
            accumulated = ldpca_accumulate(encode_syndrome(ldpca.mother, x))
            sweep = []
            for rate, dec, target in ldpca_decoders:
                _, values = ldpca_transmit(accumulated, target)
                sweep.append((rate, dec, ldpca_difference(values)))
            schemes[LDPCA].append(_attempt(sweep, x, y, p))

    results = []
    for scheme, rates in schemes.items():
        decoded = [float(r) for r in rates if r is not None]
        result = MinRateResult(
            code_id=ladder.code_id,
            scheme=scheme,
            p=p,
            entropy=binary_entropy(p),
            couples=couples,
            avg_rate=float(np.mean(decoded)) if decoded else None,
            never_decoded=len(rates) - len(decoded),
            seed=seed,
            couple_rates=[None if r is None else float(r) for r in rates],
        )
        logger.info(
            'Minimum rate measured',
            scheme=scheme,
            p=p,
            entropy=result.entropy,
            avg_rate=result.avg_rate,
            never_decoded=result.never_decoded,
        )
        results.append(result)
    return results


def _attempt(
    sweep: Sequence[tuple[Fraction, BeliefPropagationDecoder, np.ndarray]],
    x: np.ndarray,
    y: np.ndarray,
    p: float,
) -> Optional[Fraction]:
    try:
        return _first_success(sweep, x, y, p)
    except NeverDecodes as e:
        logger.debug('Couple never decoded', error=str(e))
        return None


def cycle_report(ladder: CodeLadder, ldpca: Optional[LdpcaCode] = None) -> list[CycleRow]:
    """N4 of the ladder matrix and of the LDPCA merged matrix at every anchor rate."""
    n, m1 = ladder.n, ladder.mother.matrix.rows
    ldpca = ldpca or ldpca_code(ladder.mother.matrix, [])
    matrices = [ladder.mother.matrix] + [anchor.daughter.matrix for anchor in ladder.anchors]

    rows = []
    for rate, matrix in zip(ladder.anchor_rates, matrices):
        target = _ldpca_target(rate, n, m1)
        if target is None:
            logger.warning('No LDPCA schedule for rate', rate=str(rate))
            continue
        indices = ldpca.schedules.get(target) or ldpca_schedule(m1, target)
        merged, _ = ldpca_merged_code(ldpca.mother, indices)
        row = CycleRow(
            code_id=ladder.code_id,
            rate=Rate.of(rate),
            n4_ladder=count_4cycles(matrix),
            n4_ldpca=count_4cycles(merged),
        )
        logger.info('Cycle count', rate=str(row.rate), ladder=row.n4_ladder, ldpca=row.n4_ldpca)
        rows.append(row)
    return rows


class SimulationService:
    def __init__(self, repository: LadderRepository) -> None:
        self._repository = repository

    def load_ladder(self, spec: ExperimentSpec, manifest: Optional[Path] = None) -> CodeLadder:
        path = manifest or spec.manifest
        if path is None:
            raise ManifestError(f'experiment {spec.code_id} names no ladder manifest')
        ladder = self._repository.load(path)
        if ladder.code_id != spec.code_id:
            logger.warning(
                'Experiment code id differs from ladder',
                spec_code_id=spec.code_id,
                ladder_code_id=ladder.code_id,
            )
        return ladder

    def run(
        self,
        spec: ExperimentSpec,
        manifest: Optional[Path] = None,
        workers: Optional[int] = None,
    ) -> SimResult:
        logger.info('Running experiment', mode=spec.mode, code_id=spec.code_id, seed=spec.seed)
        try:
            ladder = self.load_ladder(spec, manifest)
            if spec.mode == 'ber':
                return simulate_ber(ladder, spec, workers)

            started = time.perf_counter()
            if spec.mode == 'minrate':
                min_rates = []
                for p in spec.p_values:
                    min_rates += min_rate_experiment(
                        ladder,
                        p,
                        spec.couples,
                        spec.seed,
                        spec.decoder,
                        baseline=spec.baseline,
                    )
                return SimResult(
                    mode='minrate',
                    code_id=ladder.code_id,
                    min_rates=min_rates,
                    wall_clock=time.perf_counter() - started,
                    seed=spec.seed,
                    tool_version=__version__,
                )

            return SimResult(
                mode='cycles',
                code_id=ladder.code_id,
                cycles=cycle_report(ladder),
                wall_clock=time.perf_counter() - started,
                seed=spec.seed,
                tool_version=__version__,
            )
        except Exception as e:
            logger.error(
                'Experiment failed',
                mode=spec.mode,
                code_id=spec.code_id,
                error=str(e),
                error_type=type(e).__name__,
                exc_info=True,
            )
            raise
