from __future__ import annotations

from collections.abc import Iterable, Sequence
from functools import cached_property
from typing import Any, Optional

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, model_validator

from app.exceptions import DimensionMismatch

BitVector = npt.NDArray[np.uint8]


def as_bits(values: Any, length: Optional[int] = None) -> BitVector:
    bits = np.asarray(values)
    if bits.ndim != 1:
        raise DimensionMismatch(f'expected a 1-D bit vector, got shape {bits.shape}')
    if length is not None and bits.shape[0] != length:
        raise DimensionMismatch(f'expected {length} bits, got {bits.shape[0]}')
    if bits.size and not np.isin(bits, (0, 1)).all():
        raise ValueError('bit vectors may only contain 0 and 1')
    return bits.astype(np.uint8, copy=False)


class BinaryMatrix:
    """Sparse matrix over GF(2) stored as CSR with sorted, unique column indices.

    Instances are treated as immutable; the ``csr`` view must not be modified.
    Rows with an empty support are rejected unless ``allow_zero_rows`` is set.
    """

    def __init__(self, csr: sp.csr_matrix, *, allow_zero_rows: bool = False) -> None:
        csr = sp.csr_matrix(csr, dtype=np.uint8, copy=True)
        csr.sum_duplicates()
        csr.eliminate_zeros()
        csr.sort_indices()
        if csr.nnz and not (csr.data == 1).all():
            raise ValueError('binary matrices may only contain 0 and 1')
        if not allow_zero_rows and csr.shape[0] and (np.diff(csr.indptr) == 0).any():
            empty = int(np.flatnonzero(np.diff(csr.indptr) == 0)[0])
            raise ValueError(f'row {empty} is all-zero')
        csr.data.flags.writeable = False
        self._csr = csr

    @classmethod
    def from_supports(
        cls,
        cols: int,
        supports: Iterable[Iterable[int]],
        *,
        allow_zero_rows: bool = False,
    ) -> BinaryMatrix:
        indptr = [0]
        indices: list[int] = []
        for row, support in enumerate(supports):
            ordered = sorted(int(c) for c in support)
            if len(set(ordered)) != len(ordered):
                raise ValueError(f'row {row} repeats a column index')
            if ordered and (ordered[0] < 0 or ordered[-1] >= cols):
                raise ValueError(f'row {row} has a column index outside [0, {cols})')
            indices.extend(ordered)
            indptr.append(len(indices))
        rows = len(indptr) - 1
        csr = sp.csr_matrix(
            (np.ones(len(indices), dtype=np.uint8), np.asarray(indices, dtype=np.int64), indptr),
            shape=(rows, cols),
        )
        return cls(csr, allow_zero_rows=allow_zero_rows)

    @classmethod
    def from_dense(cls, array: Any, *, allow_zero_rows: bool = False) -> BinaryMatrix:
        dense = np.atleast_2d(np.asarray(array))
        if dense.ndim != 2:
            raise DimensionMismatch(f'expected a 2-D array, got shape {dense.shape}')
        if dense.size and not np.isin(dense, (0, 1)).all():
            raise ValueError('binary matrices may only contain 0 and 1')
        return cls(sp.csr_matrix(dense.astype(np.uint8)), allow_zero_rows=allow_zero_rows)

    @classmethod
    def identity(cls, size: int) -> BinaryMatrix:
        return cls(sp.identity(size, dtype=np.uint8, format='csr'))

    @classmethod
    def selector(cls, indices: Sequence[int], cols: int) -> BinaryMatrix:
        """One unit row per index: row k picks column ``indices[k]``."""
        return cls.from_supports(cols, ([int(i)] for i in indices))

    @classmethod
    def vstack(
        cls, blocks: Sequence[BinaryMatrix], *, allow_zero_rows: bool = False
    ) -> BinaryMatrix:
        if not blocks:
            raise ValueError('nothing to stack')
        cols = {block.cols for block in blocks}
        if len(cols) != 1:
            raise DimensionMismatch(f'cannot stack matrices with column counts {sorted(cols)}')
        stacked = sp.vstack([block.csr for block in blocks], format='csr')
        return cls(stacked, allow_zero_rows=allow_zero_rows)

    @property
    def csr(self) -> sp.csr_matrix:
        return self._csr

    @property
    def shape(self) -> tuple[int, int]:
        return int(self._csr.shape[0]), int(self._csr.shape[1])

    @property
    def rows(self) -> int:
        return self.shape[0]

    @property
    def cols(self) -> int:
        return self.shape[1]

    @property
    def nnz(self) -> int:
        return int(self._csr.nnz)

    @cached_property
    def supports(self) -> tuple[tuple[int, ...], ...]:
        indptr, indices = self._csr.indptr, self._csr.indices
        return tuple(
            tuple(int(c) for c in indices[indptr[r] : indptr[r + 1]]) for r in range(self.rows)
        )

    def support(self, row: int) -> tuple[int, ...]:
        return self.supports[row]

    @cached_property
    def row_bits(self) -> tuple[int, ...]:
        """Row supports as Python integers, bit c set when column c is nonzero."""
        return tuple(sum(1 << c for c in support) for support in self.supports)

    def row_weights(self) -> npt.NDArray[np.int64]:
        return np.diff(self._csr.indptr).astype(np.int64)

    def col_weights(self) -> npt.NDArray[np.int64]:
        return np.bincount(self._csr.indices, minlength=self.cols).astype(np.int64)

    def take_rows(self, rows: Sequence[int], *, allow_zero_rows: bool = False) -> BinaryMatrix:
        return BinaryMatrix(self._csr[list(rows)], allow_zero_rows=allow_zero_rows)

    def to_dense(self) -> npt.NDArray[np.uint8]:
        return self._csr.toarray().astype(np.uint8)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryMatrix):
            return NotImplemented
        return self.shape == other.shape and (self._csr != other._csr).nnz == 0

    def __hash__(self) -> int:
        return hash((self.shape, self.supports))

    def __repr__(self) -> str:
        return f'BinaryMatrix(rows={self.rows}, cols={self.cols}, nnz={self.nnz})'


class TypedMatrix(BaseModel):
    """Parity-check matrix lifted from a protograph, with its CN/VN type maps.

    Types occupy contiguous blocks of ``lifting`` rows (columns).
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: BinaryMatrix
    cn_type_of: tuple[int, ...]
    vn_type_of: tuple[int, ...]
    protograph_id: str
    lifting: int

    @model_validator(mode='after')
    def _check_maps(self) -> TypedMatrix:
        if len(self.cn_type_of) != self.matrix.rows:
            raise ValueError('cn_type_of must cover every row')
        if len(self.vn_type_of) != self.matrix.cols:
            raise ValueError('vn_type_of must cover every column')
        if self.lifting < 1:
            raise ValueError('lifting factor must be >= 1')
        return self

    @classmethod
    def contiguous(
        cls, matrix: BinaryMatrix, lifting: int, protograph_id: str
    ) -> TypedMatrix:
        return cls(
            matrix=matrix,
            cn_type_of=tuple(r // lifting for r in range(matrix.rows)),
            vn_type_of=tuple(c // lifting for c in range(matrix.cols)),
            protograph_id=protograph_id,
            lifting=lifting,
        )

    @property
    def cn_types(self) -> int:
        return max(self.cn_type_of, default=-1) + 1

    @property
    def vn_types(self) -> int:
        return max(self.vn_type_of, default=-1) + 1

    def rows_of_type(self, cn_type: int) -> list[int]:
        return [r for r, t in enumerate(self.cn_type_of) if t == cn_type]

    def cols_of_type(self, vn_type: int) -> list[int]:
        return [c for c, t in enumerate(self.vn_type_of) if t == vn_type]
