"""Rate-adaptive code ladders built from intermediate matrices.

A daughter matrix is H2 = H_int·H1 where every row of H_int combines one or
two rows of H1 with disjoint supports. Proto-Circle picks the combined pairs
greedily to keep the number of added length-4 cycles low.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Optional

import numpy as np
import structlog

from app import __version__
from app.config import settings
from app.exceptions import (
    DimensionMismatch,
    EmptyFamily,
    NoDisjointCandidate,
    NotTypeConsistent,
    RateOffGrid,
    Singular,
)
from app.models.ladder import (
    AnchorStep,
    CodeLadder,
    FineStep,
    GridLevel,
    IntermediateMatrix,
    ProtoCircleResult,
)
from app.models.matrix import BinaryMatrix, BitVector, TypedMatrix, as_bits
from app.models.protograph import DensityEvolutionParams, Protograph, Rate, ThresholdReport
from app.services.density_evolution import de_threshold
from app.services.gf2 import mat_vec_gf2, rank_gf2, solve_unique
from app.services.graph_service import added_4cycles, count_4cycles, realized_protograph
from app.services.protograph_service import proto_product

logger = structlog.get_logger(__name__)

U_RESAMPLES = 10
PASS_RESTARTS = 5

# parents of each output row, as row indices of the source matrix
RowParents = tuple[int, ...]


class _RestartPass(Exception):
    pass


def derive_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def enum_intermediate_protos(
    S_m1: int,
    S_m2: int,
    *,
    allow_equal: bool = False,
    canonical: bool = False,
) -> list[Protograph]:
    """All S_m2 x S_m1 0/1 matrices with row sums in {1, 2} and column sums 1.

    With ``canonical`` only one row order per column partition is returned,
    rows sorted by their first column.
    """
    upper_ok = S_m2 <= S_m1 if allow_equal else S_m2 < S_m1
    if not (S_m1 >= 1 and 2 * S_m2 >= S_m1 and upper_ok):
        raise EmptyFamily(f'no intermediate protographs of size {S_m2}x{S_m1}')

    pairs_needed = S_m1 - S_m2
    found: list[Protograph] = []
    for paired in itertools.combinations(itertools.combinations(range(S_m1), 2), pairs_needed):
        used = [c for pair in paired for c in pair]
        if len(set(used)) != len(used):
            continue
        blocks = sorted([*paired, *((c,) for c in range(S_m1) if c not in used)])
        orders = [blocks] if canonical else itertools.permutations(blocks)
        for order in orders:
            entries = np.zeros((S_m2, S_m1), dtype=np.int64)
            for row, block in enumerate(order):
                entries[row, list(block)] = 1
            found.append(Protograph.from_array(entries))
    return found


def merge_protograph(cn_types: int, first: int, second: int) -> Protograph:
    if first == second or not (0 <= first < cn_types and 0 <= second < cn_types):
        raise ValueError(f'invalid type pair ({first}, {second}) for {cn_types} CN types')
    low, high = sorted((first, second))
    blocks = sorted([(low, high), *((c,) for c in range(cn_types) if c not in (low, high))])
    entries = np.zeros((cn_types - 1, cn_types), dtype=np.int64)
    for row, block in enumerate(blocks):
        entries[row, list(block)] = 1
    return Protograph.from_array(entries)


def nested_merge_candidates(groups: Sequence[RowParents]) -> list[Protograph]:
    """Merges of two current rows whose combined mother-type count is smallest.

    ``groups[i]`` lists the mother CN types summed into row i. Two unmerged
    mother types are always combined before a merged row is merged again.
    """
    if len(groups) < 2:
        raise EmptyFamily(f'cannot merge rows of a protograph with {len(groups)} CN types')
    sizes = {
        pair: len(groups[pair[0]]) + len(groups[pair[1]])
        for pair in itertools.combinations(range(len(groups)), 2)
    }
    smallest = min(sizes.values())
    return [
        merge_protograph(len(groups), *pair) for pair, size in sizes.items() if size == smallest
    ]


def merged_pairs(S_int: Protograph) -> tuple[tuple[int, int], ...]:
    return tuple(
        (row.index(1), len(row) - 1 - row[::-1].index(1)) for row in S_int.entries if sum(row) == 2
    )


def merge_groups(groups: Sequence[RowParents], S_int: Protograph) -> list[RowParents]:
    return [
        tuple(sorted(t for c, bit in enumerate(row) if bit for t in groups[c]))
        for row in S_int.entries
    ]


def _tie_key(
    S_int: Protograph, S2: Protograph
) -> tuple[int, tuple[tuple[int, int], ...], tuple[int, ...], tuple[tuple[int, ...], ...]]:
    first_cols = tuple(row.index(1) for row in S_int.entries)
    return S2.edge_count, merged_pairs(S_int), first_cols, S_int.entries


def select_intermediate_proto(
    S1: Protograph,
    candidates: Sequence[Protograph],
    params: Optional[DensityEvolutionParams] = None,
    seed: Optional[int] = None,
) -> tuple[Protograph, Protograph, ThresholdReport]:
    """Candidate whose product with S1 has the highest threshold.

    Thresholds within the bisection tolerance of the best count as ties. Ties
    go to the sparser product, then to the lowest merged CN type pair.
    """
    if not candidates:
        raise EmptyFamily('no intermediate protograph candidates')
    seed = settings.default_seed if seed is None else seed
    params = params or DensityEvolutionParams()

    evaluated: list[tuple[Protograph, Protograph, ThresholdReport]] = []
    for S_int in candidates:
        S2 = proto_product(S_int, S1)
        report = de_threshold(S2, params, seed)
        logger.debug(
            'Evaluated intermediate protograph',
            intermediate=S_int.entries,
            threshold=report.threshold,
        )
        evaluated.append((S_int, S2, report))

    top = max(report.threshold for _, _, report in evaluated)
    tied = [item for item in evaluated if item[2].threshold >= top - params.tolerance]
    best = min(tied, key=lambda item: _tie_key(item[0], item[1]))
    logger.info(
        'Selected intermediate protograph',
        intermediate=best[0].entries,
        merged=merged_pairs(best[0]),
        rate=str(Rate.of(best[1].rate)),
        threshold=best[2].threshold,
        ties=len(tied),
    )
    return best


def _check_intermediate_proto(S_int: Protograph, H1: TypedMatrix) -> None:
    if S_int.vn_types != H1.cn_types:
        raise DimensionMismatch(
            f'intermediate protograph has {S_int.vn_types} columns, matrix has '
            f'{H1.cn_types} CN types'
        )
    entries = S_int.array
    row_sums = entries.sum(axis=1)
    if not np.isin(entries, (0, 1)).all() or ((row_sums < 1) | (row_sums > 2)).any():
        raise ValueError('intermediate protograph rows must hold one or two ones')
    if (entries.sum(axis=0) != 1).any():
        raise ValueError('every intermediate protograph column must hold exactly one 1')


def _proto_circle_pass(
    H1: TypedMatrix,
    S_int: Protograph,
    K: int,
    rng: np.random.Generator,
) -> tuple[list[RowParents], list[tuple[int, int]]]:
    bits = H1.matrix.row_bits
    supports = H1.matrix.supports
    type_rows = {j: H1.rows_of_type(j) for j in range(H1.cn_types)}

    blocks: list[list[RowParents]] = [[] for _ in range(S_int.cn_types)]
    committed: list[tuple[int, int]] = []
    partial: Optional[BinaryMatrix] = None

    def added_cycles(u: int, v: int) -> int:
        combined = np.zeros(H1.matrix.cols, dtype=np.uint8)
        combined[[*supports[u], *supports[v]]] = 1
        return added_4cycles(partial, combined)

    for k, row in enumerate(S_int.entries):
        cols = [j for j, entry in enumerate(row) if entry]
        if len(cols) != 2:
            continue
        unused_u = list(type_rows[cols[0]])
        unused_v = list(type_rows[cols[1]])
        while unused_u:
            for _ in range(1 + U_RESAMPLES):
                u = unused_u[int(rng.integers(len(unused_u)))]
                disjoint = [v for v in unused_v if not bits[u] & bits[v]]
                if disjoint:
                    break
            else:
                raise _RestartPass()

            if len(disjoint) > K:
                picks = rng.choice(len(disjoint), size=K, replace=False)
                disjoint = [disjoint[int(i)] for i in picks]
            v = min(disjoint, key=lambda cand: (added_cycles(u, cand), cand))

            committed.append((u, v))
            partial = BinaryMatrix.from_supports(
                H1.matrix.cols, ((*supports[a], *supports[b]) for a, b in committed)
            )
            blocks[k].append((u, v))
            unused_u.remove(u)
            unused_v.remove(v)

    for k, row in enumerate(S_int.entries):
        cols = [j for j, entry in enumerate(row) if entry]
        if len(cols) == 1:
            blocks[k] = [(r,) for r in type_rows[cols[0]]]

    return [parents for block in blocks for parents in block], committed


def _combine(
    source: BinaryMatrix, rows: Sequence[RowParents]
) -> tuple[BinaryMatrix, BinaryMatrix]:
    """Daughter matrix and intermediate matrix for the given parent sets."""
    supports = source.supports
    daughter = BinaryMatrix.from_supports(
        source.cols,
        (itertools.chain.from_iterable(supports[r] for r in parents) for parents in rows),
    )
    intermediate = BinaryMatrix.from_supports(source.rows, rows)
    return daughter, intermediate


def _run_repeat(
    job: tuple[TypedMatrix, Protograph, int, int, int],
) -> tuple[int, list[RowParents], list[tuple[int, int]]]:
    H1, S_int, K, seed, repeat = job
    for restart in range(PASS_RESTARTS + 1):
        rng = np.random.default_rng(np.random.SeedSequence([seed, repeat, restart]))
        try:
            rows, pairs = _proto_circle_pass(H1, S_int, K, rng)
        except _RestartPass:
            logger.debug('Restarting Proto-Circle pass', repeat=repeat, restart=restart)
            continue
        daughter, _ = _combine(H1.matrix, rows)
        return count_4cycles(daughter), rows, pairs
    raise NoDisjointCandidate(
        f'no disjoint row pair after {PASS_RESTARTS} restarts (repeat {repeat})'
    )


def proto_circle(
    H1: TypedMatrix,
    S_int: Protograph,
    K: Optional[int] = None,
    repeats: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> ProtoCircleResult:
    """Build H2 = H_int·H1 realizing S_int·S1 with few length-4 cycles.

    Pairs are committed one at a time: draw an unused row u of the first
    type, sample up to K unused rows of the second type whose supports are
    disjoint from u, keep the one adding the fewest 4-cycles to the rows
    committed so far. The best of ``repeats`` independent passes wins.
    """
    K = settings.proto_circle_candidates if K is None else K
    repeats = settings.proto_circle_repeats if repeats is None else repeats
    seed = settings.default_seed if seed is None else seed
    workers = settings.workers if workers is None else workers
    if K < 1 or repeats < 1:
        raise ValueError('K and repeats must be >= 1')
    _check_intermediate_proto(S_int, H1)
    S1 = realized_protograph(H1)
    S2 = proto_product(S_int, S1)

    jobs = [(H1, S_int, K, seed, repeat) for repeat in range(repeats)]
    if workers > 1 and repeats > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_repeat, jobs))
    else:
        outcomes = [_run_repeat(job) for job in jobs]

    best = min(range(repeats), key=lambda r: (outcomes[r][0], r))
    n4, rows, pairs = outcomes[best]
    daughter, intermediate = _combine(H1.matrix, rows)
    logger.info(
        'Proto-Circle finished',
        shape=daughter.shape,
        n4=n4,
        repeats=repeats,
        best_repeat=best,
        n4_all=[outcome[0] for outcome in outcomes],
    )
    return ProtoCircleResult(
        daughter=TypedMatrix.contiguous(daughter, H1.lifting, S2.id),
        intermediate=IntermediateMatrix(matrix=intermediate, protograph=S_int),
        n4=n4,
        pairs=tuple(pairs),
        seed=seed,
        repeat=best,
    )


def build_cprime(H_int: IntermediateMatrix) -> tuple[int, ...]:
    """Lower index of every combined pair, in increasing order."""
    return tuple(sorted(support[0] for support in H_int.matrix.supports if len(support) == 2))


def recovery_system(H_int: IntermediateMatrix, cprime: Sequence[int]) -> BinaryMatrix:
    m1 = H_int.matrix.cols
    if not cprime:
        return H_int.matrix
    return BinaryMatrix.vstack([H_int.matrix, BinaryMatrix.selector(cprime, m1)])


def verify_rate_adaptive(
    H1: BinaryMatrix,
    H_int: IntermediateMatrix,
    cprime: Sequence[int],
    seed: Optional[int] = None,
    trials: int = 8,
) -> bool:
    """True when (u, c[C']) determines the mother syndrome c uniquely."""
    m1 = H1.rows
    if H_int.matrix.cols != m1 or len(cprime) != m1 - H_int.matrix.rows:
        return False
    if len(set(cprime)) != len(cprime) or any(not 0 <= c < m1 for c in cprime):
        return False
    system = recovery_system(H_int, cprime)
    if rank_gf2(system) != m1:
        return False

    rng = np.random.default_rng(settings.default_seed if seed is None else seed)
    selected = list(cprime)
    for _ in range(trials):
        x = rng.integers(0, 2, size=H1.cols, dtype=np.uint8)
        c = mat_vec_gf2(H1, x)
        u = mat_vec_gf2(H_int.matrix, c)
        try:
            recovered = solve_unique(system, np.concatenate([u, c[selected]]))
        except Singular:
            return False
        if not np.array_equal(recovered, c):
            return False
    return True


def _chain_levels(
    rows_of_type: dict[int, list[int]],
    S_int: Protograph,
    pairs: Sequence[tuple[int, int]],
    steps: int,
) -> list[list[RowParents]]:
    """Row parent sets after merging the first k committed pairs, k = 1..steps."""
    levels: list[list[RowParents]] = []
    for k in range(1, steps + 1):
        merged = pairs[:k]
        used = {r for pair in merged for r in pair}
        rows: list[RowParents] = []
        for row in S_int.entries:
            cols = [j for j, entry in enumerate(row) if entry]
            if len(cols) == 1:
                rows.extend((r,) for r in rows_of_type[cols[0]])
                continue
            first, second = rows_of_type[cols[0]], rows_of_type[cols[1]]
            rows.extend(pair for pair in merged if pair[0] in first)
            rows.extend((r,) for r in first if r not in used)
            rows.extend((r,) for r in second if r not in used)
        levels.append(rows)
    return levels


def _step_intermediate(
    previous: Sequence[RowParents], current: Sequence[RowParents]
) -> BinaryMatrix:
    owner = {r: index for index, parents in enumerate(previous) for r in parents}
    return BinaryMatrix.from_supports(
        len(previous), (sorted({owner[r] for r in parents}) for parents in current)
    )


def materialize_chain(
    H_prev: TypedMatrix,
    S_int: Protograph,
    pairs: Sequence[tuple[int, int]],
    steps: int,
) -> list[FineStep]:
    """Replay the first ``steps`` committed pairs as single-row rate steps."""
    if steps < 0 or steps > len(pairs):
        raise ValueError(f'cannot take {steps} steps from {len(pairs)} committed pairs')
    source = H_prev.matrix
    rows_of_type = {j: H_prev.rows_of_type(j) for j in range(H_prev.cn_types)}
    n = source.cols

    previous: list[RowParents] = [(r,) for r in range(source.rows)]
    chain: list[FineStep] = []
    for rows in _chain_levels(rows_of_type, S_int, pairs, steps):
        matrix, _ = _combine(source, rows)
        step_matrix = _step_intermediate(previous, rows)
        intermediate = IntermediateMatrix(matrix=step_matrix)
        combined = next(support for support in step_matrix.supports if len(support) == 2)
        chain.append(
            FineStep(
                rate=Rate.of(Fraction(matrix.rows, n)),
                matrix=matrix,
                intermediate=intermediate,
                cprime=build_cprime(intermediate),
                pair=(combined[0], combined[1]),
                n4=count_4cycles(matrix),
            )
        )
        previous = rows
    return chain


def fine_steps(
    H_prev: TypedMatrix,
    type_pair: tuple[int, int],
    steps: int,
    seed: Optional[int] = None,
    K: Optional[int] = None,
) -> list[FineStep]:
    """Chain of single-pair combinations of CN types ``type_pair``.

    Step k has k fewer rows than H_prev; after H_prev.lifting steps the
    matrix realizes the merged protograph.
    """
    if steps > H_prev.lifting:
        raise ValueError(f'at most {H_prev.lifting} fine steps per type pair, got {steps}')
    if steps <= 0:
        return []
    S_int = merge_protograph(H_prev.cn_types, *type_pair)
    result = proto_circle(H_prev, S_int, K=K, repeats=1, seed=seed, workers=1)
    return materialize_chain(H_prev, S_int, result.pairs, steps)


def build_ladder(
    H1: TypedMatrix,
    S1: Protograph,
    K: Optional[int] = None,
    repeats: Optional[int] = None,
    seed: Optional[int] = None,
    *,
    fine: bool = True,
    params: Optional[DensityEvolutionParams] = None,
    workers: Optional[int] = None,
    code_id: Optional[str] = None,
    verify_trials: int = 8,
) -> CodeLadder:
    """Anchors at R_t = R1 - (t-1)R1/S_m1, each merging one CN type pair.

    With ``fine`` every anchor interval is refined into single-row steps that
    replay the anchor's committed pairs, so the last step of an interval is
    the anchor daughter matrix.
    """
    K = settings.proto_circle_candidates if K is None else K
    repeats = settings.proto_circle_repeats if repeats is None else repeats
    seed = settings.default_seed if seed is None else seed

    realized = realized_protograph(H1)
    if realized.entries != S1.entries:
        raise NotTypeConsistent(-1, -1, f'mother matrix does not realize {S1.id}')

    code_id = code_id or f'{S1.id}-z{H1.lifting}-s{seed}'
    logger.info(
        'Building code ladder',
        code_id=code_id,
        shape=H1.matrix.shape,
        anchors=S1.cn_types - 1,
        K=K,
        repeats=repeats,
        seed=seed,
    )

    anchors: list[AnchorStep] = []
    intervals: list[tuple[FineStep, ...]] = []
    H_prev, S_prev = H1, S1
    groups: list[RowParents] = [(j,) for j in range(S1.cn_types)]
    for t in range(2, S1.cn_types + 1):
        anchor_seed = derive_seed(seed, t)
        candidates = nested_merge_candidates(groups)
        S_int, S_next, report = select_intermediate_proto(S_prev, candidates, params, seed)
        result = proto_circle(H_prev, S_int, K, repeats, anchor_seed, workers)
        cprime = build_cprime(result.intermediate)
        verified = verify_rate_adaptive(
            H_prev.matrix, result.intermediate, cprime, anchor_seed, verify_trials
        )
        if not verified:
            raise Singular(f'anchor {t} of {code_id} is not rate-adaptive')

        daughter = result.daughter
        anchor = AnchorStep(
            rate=Rate.of(Fraction(daughter.matrix.rows, daughter.matrix.cols)),
            protograph=S_next,
            intermediate_protograph=S_int,
            intermediate=result.intermediate,
            daughter=daughter,
            cprime=cprime,
            pairs=result.pairs,
            n4=result.n4,
            threshold=report,
            seed=anchor_seed,
        )
        anchors.append(anchor)
        groups = merge_groups(groups, S_int)
        if fine:
            intervals.append(
                tuple(materialize_chain(H_prev, S_int, result.pairs, len(result.pairs)))
            )
        logger.info(
            'Anchor built',
            code_id=code_id,
            rate=str(anchor.rate),
            n4=anchor.n4,
            threshold=report.threshold,
            alpha=str(result.intermediate.alpha),
            mother_types=groups,
        )
        H_prev, S_prev = daughter, S_next

    return CodeLadder(
        code_id=code_id,
        mother=H1,
        mother_protograph=S1,
        anchors=tuple(anchors),
        fine_steps=tuple(intervals),
        seed=seed,
        candidates=K,
        repeats=repeats,
        tool_version=__version__,
    )


def _grid_index(levels: Sequence[GridLevel], rate: Fraction | Rate | str) -> int:
    target = rate.fraction if isinstance(rate, Rate) else Fraction(rate)
    for index, level in enumerate(levels):
        if level.rate == target:
            return index
    raise RateOffGrid(f'rate {target} is not on the ladder grid')


def extract_increment(
    ladder: CodeLadder, rate: Fraction | Rate | str, x: BitVector
) -> BitVector:
    """Bits sent at ``rate``: the lowest-rate syndrome, then every C' increment upward."""
    levels = ladder.grid()
    target = _grid_index(levels, rate)
    x = as_bits(x, ladder.n)

    syndromes = [mat_vec_gf2(levels[0].matrix, x)]
    for level in levels[1:]:
        assert level.intermediate is not None
        syndromes.append(mat_vec_gf2(level.intermediate.matrix, syndromes[-1]))

    parts = [syndromes[-1]]
    for index in range(len(levels) - 1, target, -1):
        parts.append(syndromes[index - 1][list(levels[index].cprime)])
    return np.concatenate(parts).astype(np.uint8)


def reconstruct_syndrome(
    ladder: CodeLadder, rate: Fraction | Rate | str, transmitted: BitVector
) -> BitVector:
    """Decoder-side inverse of extract_increment: the full syndrome at ``rate``."""
    levels = ladder.grid()
    target = _grid_index(levels, rate)
    expected = levels[target].matrix.rows
    bits = as_bits(transmitted, expected)

    position = levels[-1].matrix.rows
    syndrome = bits[:position]
    for index in range(len(levels) - 1, target, -1):
        level = levels[index]
        assert level.intermediate is not None
        increment = bits[position : position + len(level.cprime)]
        position += len(level.cprime)
        system = recovery_system(level.intermediate, level.cprime)
        syndrome = solve_unique(system, np.concatenate([syndrome, increment]))
    return syndrome
