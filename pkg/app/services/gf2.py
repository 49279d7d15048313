from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from app.exceptions import DimensionMismatch, Singular
from app.models.matrix import BinaryMatrix, BitVector, as_bits


def mul_gf2(A: BinaryMatrix, B: BinaryMatrix) -> BinaryMatrix:
    """A·B over GF(2); zero rows are allowed in the product."""
    if A.cols != B.rows:
        raise DimensionMismatch(f'cannot multiply {A.shape} by {B.shape}')
    product = sp.csr_matrix(A.csr.astype(np.int64) @ B.csr.astype(np.int64))
    product.data %= 2
    product.eliminate_zeros()
    return BinaryMatrix(product, allow_zero_rows=True)


def mat_vec_gf2(A: BinaryMatrix, v: BitVector) -> BitVector:
    bits = as_bits(v, A.cols)
    return ((A.csr @ bits.astype(np.int64)) % 2).astype(np.uint8)


def _reduce(rows: list[int]) -> dict[int, int]:
    # pivot = lowest set bit, i.e. the first nonzero column of the reduced row
    pivots: dict[int, int] = {}
    for row in rows:
        while row:
            low = row & -row
            pivot_row = pivots.get(low)
            if pivot_row is None:
                pivots[low] = row
                break
            row ^= pivot_row
    return pivots


def rank_gf2(A: BinaryMatrix) -> int:
    return len(_reduce(list(A.row_bits)))


def solve_unique(A: BinaryMatrix, b: BitVector) -> BitVector:
    """Unique x with A·x = b; raises Singular when A is rank deficient."""
    m = A.rows
    if A.cols != m:
        raise DimensionMismatch(f'solve_unique needs a square matrix, got {A.shape}')
    rhs = as_bits(b, m)
    rhs_bit = 1 << m
    augmented = [row | (rhs_bit if rhs[i] else 0) for i, row in enumerate(A.row_bits)]
    pivots = _reduce(augmented)
    if rhs_bit in pivots or len(pivots) < m:
        raise Singular(f'matrix of size {m} has rank {len(pivots) - (rhs_bit in pivots)}')

    column_mask = rhs_bit - 1
    solution = 0
    for low in sorted(pivots, reverse=True):
        row = pivots[low]
        others = row & column_mask & ~low
        value = ((row >> m) & 1) ^ ((others & solution).bit_count() & 1)
        if value:
            solution |= low
    return np.array([(solution >> c) & 1 for c in range(m)], dtype=np.uint8)
