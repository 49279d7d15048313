"""Protograph lifting by progressive edge growth, and short-cycle census."""

from __future__ import annotations

from typing import Optional

import numpy as np
import scipy.sparse as sp
import structlog

from app.config import settings
from app.exceptions import DimensionMismatch, Infeasible, NotTypeConsistent
from app.models.matrix import BinaryMatrix, BitVector, TypedMatrix, as_bits
from app.models.protograph import Protograph

logger = structlog.get_logger(__name__)


class _TannerGraph:
    def __init__(self, rows: int, cols: int) -> None:
        self.row_adj: list[set[int]] = [set() for _ in range(rows)]
        self.col_adj: list[set[int]] = [set() for _ in range(cols)]

    def connect(self, row: int, col: int) -> None:
        self.row_adj[row].add(col)
        self.col_adj[col].add(row)

    def disconnect(self, row: int, col: int) -> None:
        self.row_adj[row].discard(col)
        self.col_adj[col].discard(row)

    def check_depths(self, col: int) -> dict[int, int]:
        depth: dict[int, int] = {}
        seen_cols = {col}
        frontier = {col}
        level = 0
        while frontier:
            reached = {r for c in frontier for r in self.col_adj[c] if r not in depth}
            if not reached:
                break
            for r in reached:
                depth[r] = level
            frontier = {c for r in reached for c in self.row_adj[r] if c not in seen_cols}
            seen_cols |= frontier
            level += 1
        return depth

    def to_matrix(self, cols: int) -> BinaryMatrix:
        return BinaryMatrix.from_supports(cols, self.row_adj)


def peg_lift(S: Protograph, Z: int, seed: Optional[int] = None) -> TypedMatrix:
    """Lift S by Z with a protograph-aware progressive edge growth.

    Every row of CN type i ends with exactly s_ij edges into the columns of
    VN type j. Columns are visited in a seeded random order; each new edge
    goes to the admissible check node farthest from the column's current
    subtree, ties broken by fewest placed edges then lowest index.
    """
    if Z < 1:
        raise ValueError('lifting factor must be >= 1')
    seed = settings.default_seed if seed is None else seed
    entries = S.array
    if (entries > Z).any():
        i, j = (int(v) for v in np.argwhere(entries > Z)[0])
        raise Infeasible(
            f'entry ({i}, {j}) = {entries[i, j]} needs more distinct rows than Z = {Z}'
        )

    rows, cols = Z * S.cn_types, Z * S.vn_types
    graph = _TannerGraph(rows, cols)
    # residual[r, j]: edges row r still owes to VN type j
    residual = np.repeat(entries, Z, axis=0)
    rng = np.random.default_rng(seed)

    for col in rng.permutation(cols):
        col = int(col)
        j = col // Z
        for i in range(S.cn_types):
            for _ in range(int(entries[i, j])):
                row = _pick_check(graph, residual, col, i, j, Z)
                graph.connect(row, col)
                residual[row, j] -= 1

    if residual.any():
        raise Infeasible(f'PEG left {int(residual.sum())} edges unplaced')

    matrix = TypedMatrix.contiguous(graph.to_matrix(cols), Z, S.id)
    logger.debug('Lifted protograph', protograph_id=S.id, lifting=Z, shape=matrix.matrix.shape)
    return matrix


def _pick_check(
    graph: _TannerGraph,
    residual: np.ndarray,
    col: int,
    cn_type: int,
    vn_type: int,
    Z: int,
) -> int:
    block = range(cn_type * Z, (cn_type + 1) * Z)
    candidates = [r for r in block if residual[r, vn_type] > 0 and r not in graph.col_adj[col]]
    if not candidates:
        return _swap_repair(graph, residual, col, cn_type, vn_type, Z)

    depth = graph.check_depths(col)
    unreached = [r for r in candidates if r not in depth]
    if unreached:
        pool = unreached
    else:
        deepest = max(depth[r] for r in candidates)
        pool = [r for r in candidates if depth[r] == deepest]
    return min(pool, key=lambda r: (len(graph.row_adj[r]), r))


def _swap_repair(
    graph: _TannerGraph,
    residual: np.ndarray,
    col: int,
    cn_type: int,
    vn_type: int,
    Z: int,
) -> int:
    """Free a row not yet adjacent to ``col`` by moving one of its edges.

    Only reached when every row of the type with spare capacity already
    touches ``col``. A saturated row ``donor`` hands one of its type-j columns
    to a row ``taker`` with spare capacity, then ``donor`` connects to ``col``.
    """
    block = range(cn_type * Z, (cn_type + 1) * Z)
    takers = [r for r in block if residual[r, vn_type] > 0]
    donors = [r for r in block if r not in graph.col_adj[col]]
    type_cols = range(vn_type * Z, (vn_type + 1) * Z)
    for taker in takers:
        for donor in donors:
            movable = sorted(
                c
                for c in graph.row_adj[donor] - graph.row_adj[taker]
                if c in type_cols and c != col
            )
            if movable:
                moved = movable[0]
                graph.disconnect(donor, moved)
                graph.connect(taker, moved)
                residual[taker, vn_type] -= 1
                residual[donor, vn_type] += 1
                logger.debug('PEG swap repair', column=col, donor=donor, taker=taker, moved=moved)
                return donor
    raise Infeasible(f'no admissible check node of type {cn_type} for column {col}')


def realized_protograph(T: TypedMatrix) -> Protograph:
    """Per-type edge counts of T; every row of a type must agree."""
    vn_types = T.vn_types
    vn_type_of = np.asarray(T.vn_type_of, dtype=np.int64)
    counts = np.full((T.cn_types, vn_types), -1, dtype=np.int64)
    for row, support in enumerate(T.matrix.supports):
        cn_type = T.cn_type_of[row]
        row_counts = np.bincount(vn_type_of[list(support)], minlength=vn_types)
        if counts[cn_type, 0] < 0:
            counts[cn_type] = row_counts
            continue
        mismatch = np.flatnonzero(row_counts != counts[cn_type])
        if mismatch.size:
            raise NotTypeConsistent(row, int(mismatch[0]))
    if (counts < 0).any():
        raise NotTypeConsistent(-1, -1, 'some CN type has no rows')
    return Protograph.from_array(counts)


def count_4cycles(M: BinaryMatrix) -> int:
    """Number of length-4 cycles: sum over row pairs of C(overlap, 2)."""
    csr = M.csr.astype(np.int64)
    overlaps = sp.triu(csr @ csr.T, k=1).tocoo().data
    return int((overlaps * (overlaps - 1) // 2).sum())


def added_4cycles(M_partial: Optional[BinaryMatrix], new_row: BitVector) -> int:
    """4-cycles gained by appending ``new_row`` below ``M_partial``."""
    if M_partial is None or M_partial.rows == 0:
        return 0
    bits = as_bits(new_row)
    if bits.shape[0] != M_partial.cols:
        raise DimensionMismatch(f'row of length {bits.shape[0]} against {M_partial.cols} columns')
    overlaps = np.asarray(M_partial.csr.astype(np.int64) @ bits.astype(np.int64)).ravel()
    return int((overlaps * (overlaps - 1) // 2).sum())
