from __future__ import annotations

import itertools

import numpy as np

from app.models.matrix import BinaryMatrix
from app.models.protograph import DensityEvolutionParams, Protograph

TWO_TYPE = Protograph.from_array([[1, 1, 0, 1], [0, 1, 1, 1]], name='toy-2x4')
THREE_TYPE = Protograph.from_array(
    [[1, 1, 0, 0, 1, 0], [0, 1, 1, 0, 0, 1], [0, 0, 1, 1, 1, 1]],
    name='toy-3x6',
)
FOUR_TYPE = Protograph.from_array(
    [
        [1, 1, 0, 0, 1, 0, 0, 1],
        [0, 1, 1, 0, 0, 1, 0, 1],
        [1, 0, 1, 1, 0, 0, 1, 0],
        [0, 0, 0, 1, 1, 1, 1, 0],
    ],
    name='toy-4x8',
)
FAST_DE = DensityEvolutionParams(samples=400, max_iterations=20, tolerance=0.05)


def dense_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.uint8)
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            total = 0
            for k in range(a.shape[1]):
                total ^= int(a[i, k]) & int(b[k, j])
            out[i, j] = total
    return out


def brute_force_4cycles(dense: np.ndarray) -> int:
    rows, cols = dense.shape
    count = 0
    for r1, r2 in itertools.combinations(range(rows), 2):
        for c1, c2 in itertools.combinations(range(cols), 2):
            if dense[r1, c1] and dense[r1, c2] and dense[r2, c1] and dense[r2, c2]:
                count += 1
    return count


def random_matrix(rng: np.random.Generator, rows: int, cols: int, density: float) -> BinaryMatrix:
    dense = (rng.random((rows, cols)) < density).astype(np.uint8)
    for r in np.flatnonzero(dense.sum(axis=1) == 0):
        dense[r, rng.integers(cols)] = 1
    return BinaryMatrix.from_dense(dense)


def random_lift(S: Protograph, Z: int, rng: np.random.Generator) -> BinaryMatrix:
    """Lift of a 0/1 protograph with an independent random permutation per edge."""
    if S.array.max() > 1:
        raise ValueError('random_lift handles 0/1 protographs only')
    supports: list[list[int]] = [[] for _ in range(S.cn_types * Z)]
    for i, j in zip(*np.nonzero(S.array)):
        for a, b in enumerate(rng.permutation(Z)):
            supports[i * Z + a].append(int(j) * Z + int(b))
    return BinaryMatrix.from_supports(S.vn_types * Z, supports)
