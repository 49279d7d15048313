from __future__ import annotations

import numpy as np
import structlog

from app.exceptions import DimensionMismatch
from app.models.protograph import Protograph

logger = structlog.get_logger(__name__)

PRESET_PROTOGRAPHS: dict[str, Protograph] = {
    'bsc-2x4': Protograph.from_array(
        [[1, 2, 1, 3], [1, 0, 2, 5]],
        name='bsc-2x4',
    ),
    'bsc-2x4-ext2': Protograph.from_array(
        [
            [1, 1, 1, 2, 0, 1, 0, 1],
            [0, 1, 0, 1, 1, 1, 1, 2],
            [1, 0, 1, 4, 0, 0, 1, 1],
            [0, 0, 1, 1, 1, 0, 1, 4],
        ],
        name='bsc-2x4-ext2',
    ),
    'bsc-4x8-opt': Protograph.from_array(
        [
            [2, 1, 1, 1, 0, 1, 1, 0],
            [1, 2, 1, 1, 1, 0, 1, 1],
            [1, 1, 2, 1, 1, 1, 0, 1],
            [1, 1, 1, 2, 1, 1, 1, 0],
        ],
        name='bsc-4x8-opt',
    ),
}


def proto_product(S_int: Protograph, S1: Protograph) -> Protograph:
    """Integer (not mod 2) product S_int·S1."""
    if S_int.vn_types != S1.cn_types:
        raise DimensionMismatch(
            f'cannot multiply protographs {S_int.cn_types}x{S_int.vn_types} '
            f'and {S1.cn_types}x{S1.vn_types}'
        )
    return Protograph.from_array(S_int.array @ S1.array)


def extend_protograph(S: Protograph, Z_e: int, seed: int) -> Protograph:
    """Lift S by Z_e into a Z_e·S_m x Z_e·S_n protograph.

    Row ``i*Z_e + a`` is copy a of CN type i and column ``b*S_n + j`` is copy b
    of VN type j. Each entry s becomes a Z_e x Z_e block built from s cyclic
    permutations, so every block row and column sums to s.
    """
    if Z_e < 1:
        raise ValueError('extension factor must be >= 1')
    rng = np.random.default_rng(seed)
    base = S.array
    extended = np.zeros((Z_e * S.cn_types, Z_e * S.vn_types), dtype=np.int64)
    identity = np.eye(Z_e, dtype=np.int64)
    for i in range(S.cn_types):
        for j in range(S.vn_types):
            block = np.zeros((Z_e, Z_e), dtype=np.int64)
            for _ in range(int(base[i, j])):
                block += np.roll(identity, int(rng.integers(Z_e)), axis=1)
            extended[i * Z_e : (i + 1) * Z_e, j :: S.vn_types] = block

    logger.debug(
        'Extended protograph',
        protograph_id=S.id,
        factor=Z_e,
        shape=extended.shape,
    )
    name = f'{S.id}-x{Z_e}' if Z_e > 1 else S.name
    return Protograph.from_array(extended, name=name)


def fold_protograph(S_ext: Protograph, Z_e: int, vn_types: int) -> Protograph:
    """Inverse bookkeeping of extend_protograph: sum one block row per type pair.

    Raises ValueError if some block row or column sum differs within a block.
    """
    ext = S_ext.array
    cn_types = S_ext.cn_types // Z_e
    folded = np.zeros((cn_types, vn_types), dtype=np.int64)
    for i in range(cn_types):
        for j in range(vn_types):
            block = ext[i * Z_e : (i + 1) * Z_e, j::vn_types]
            row_sums = block.sum(axis=1)
            col_sums = block.sum(axis=0)
            if (row_sums != row_sums[0]).any() or (col_sums != row_sums[0]).any():
                raise ValueError(f'block ({i}, {j}) is not a sum of permutations')
            folded[i, j] = row_sums[0]
    return Protograph.from_array(folded)
