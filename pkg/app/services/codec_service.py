"""Syndrome encoder, sum-product decoder with BSC side information, LDPCA baseline."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from typing import Optional

import numpy as np
import numpy.typing as npt
import structlog

from app.exceptions import DegenerateChannel, DimensionMismatch
from app.models.codec import DecodeResult, DecoderConfig, LdpcaCode
from app.models.matrix import BinaryMatrix, BitVector, as_bits
from app.models.protograph import BscChannel
from app.services.gf2 import mat_vec_gf2

logger = structlog.get_logger(__name__)

_TANH_LIMIT = 1.0 - 1e-15
_LOG_FLOOR = 1e-300


def encode_syndrome(H: BinaryMatrix, x: BitVector) -> BitVector:
    return mat_vec_gf2(H, x)


def channel_llr(y: BitVector, p: float, clamp: float = 30.0) -> npt.NDArray[np.float64]:
    """LLR of each source bit given side information y; positive favours 0."""
    if p < 0.0 or p >= 0.5:
        raise DegenerateChannel(f'crossover probability {p} outside (0, 1/2)')
    magnitude = BscChannel(p=p).llr_magnitude(clamp)
    bits = as_bits(y)
    return (1.0 - 2.0 * bits.astype(np.float64)) * magnitude


class BeliefPropagationDecoder:
    """Flooding sum-product decoder bound to one parity-check matrix.

    The syndrome bit of each check flips the sign of its outgoing messages.
    Instances hold no per-frame state and can decode any number of frames.
    """

    def __init__(self, H: BinaryMatrix, config: Optional[DecoderConfig] = None) -> None:
        self.H = H
        self.config = config or DecoderConfig()
        coo = H.csr.tocoo()
        order = np.lexsort((coo.col, coo.row))
        self._edge_rows = coo.row[order].astype(np.int64)
        self._edge_cols = coo.col[order].astype(np.int64)

    def decode(self, c: BitVector, y: BitVector, p: float) -> DecodeResult:
        m, n = self.H.shape
        c = as_bits(c, m)
        y = as_bits(y, n)
        clamp = self.config.llr_clamp
        rows, cols = self._edge_rows, self._edge_cols
        check_sign = c[rows].astype(np.int64)

        prior = channel_llr(y, p, clamp)
        v2c = prior[cols].copy()
        posterior = prior.copy()
        x_hat = (posterior < 0).astype(np.uint8)
        converged = False
        iterations = 0

        for iterations in range(1, self.config.max_iterations + 1):
            t = np.tanh(0.5 * v2c)
            negative = (t < 0).astype(np.int64)
            log_mag = np.log(np.maximum(np.abs(t), _LOG_FLOOR))
            row_log = np.bincount(rows, weights=log_mag, minlength=m)
            row_neg = np.bincount(rows, weights=negative, minlength=m).astype(np.int64)

            magnitude = np.exp(row_log[rows] - log_mag)
            sign = (row_neg[rows] - negative + check_sign) % 2
            product = np.clip((1.0 - 2.0 * sign) * magnitude, -_TANH_LIMIT, _TANH_LIMIT)
            c2v = np.clip(2.0 * np.arctanh(product), -clamp, clamp)

            posterior = prior + np.bincount(cols, weights=c2v, minlength=n)
            x_hat = (posterior < 0).astype(np.uint8)
            converged = bool(np.array_equal(mat_vec_gf2(self.H, x_hat), c))
            if converged and self.config.early_stop:
                break
            v2c = np.clip(posterior[cols] - c2v, -clamp, clamp)

        return DecodeResult(
            x_hat=x_hat,
            converged=converged,
            iterations=iterations,
            posterior=posterior,
        )


def bp_decode(
    H: BinaryMatrix,
    c: BitVector,
    y: BitVector,
    p: float,
    cfg: Optional[DecoderConfig] = None,
) -> DecodeResult:
    if len(c) != H.rows or len(y) != H.cols:
        raise DimensionMismatch(
            f'syndrome of {len(c)} and side information of {len(y)} bits for a '
            f'{H.rows}x{H.cols} matrix'
        )
    return BeliefPropagationDecoder(H, cfg).decode(c, y, p)


def ldpca_accumulate(c: BitVector) -> BitVector:
    bits = as_bits(c)
    if bits.shape[0] < 1:
        raise ValueError('cannot accumulate an empty syndrome')
    return np.bitwise_xor.accumulate(bits).astype(np.uint8)


def ldpca_deaccumulate(a: BitVector) -> BitVector:
    bits = as_bits(a)
    return np.bitwise_xor(bits, np.concatenate([[0], bits[:-1]]).astype(np.uint8))


def ldpca_schedule(m1: int, target_m: int) -> tuple[int, ...]:
    """1-based indices round(k·m1/target_m), k = 1..target_m, halves rounded up."""
    if not 1 <= target_m <= m1:
        raise ValueError(f'target of {target_m} symbols outside [1, {m1}]')
    return tuple((2 * k * m1 + target_m) // (2 * target_m) for k in range(1, target_m + 1))


def ldpca_transmit(a: BitVector, target_m: int) -> tuple[tuple[int, ...], BitVector]:
    bits = as_bits(a)
    indices = ldpca_schedule(bits.shape[0], target_m)
    return indices, bits[[i - 1 for i in indices]]


def _check_indices(indices: Sequence[int], m1: int) -> None:
    if not indices or indices[0] < 1 or indices[-1] != m1:
        raise ValueError(f'LDPCA indices must start at >= 1 and end at {m1}')
    if any(b <= a for a, b in zip(indices, indices[1:])):
        raise ValueError('LDPCA indices must be strictly increasing')


def ldpca_merged_code(
    H1: BinaryMatrix, indices: Sequence[int]
) -> tuple[BinaryMatrix, tuple[tuple[int, ...], ...]]:
    """Merged matrix whose row k XORs the H1 rows between transmitted symbols k-1 and k.

    ``merge_map`` lists the 0-based H1 rows of each block.
    """
    _check_indices(indices, H1.rows)
    bounds = [0, *indices]
    merge_map = tuple(tuple(range(lo, hi)) for lo, hi in zip(bounds, bounds[1:]))
    supports = []
    for block in merge_map:
        support: set[int] = set()
        for row in block:
            support.symmetric_difference_update(H1.supports[row])
        supports.append(support)
    merged = BinaryMatrix.from_supports(H1.cols, supports, allow_zero_rows=True)
    return merged, merge_map


def ldpca_difference(values: BitVector) -> BitVector:
    """d_k = a_{i_k} + a_{i_{k-1}} with a_{i_0} = 0."""
    return ldpca_deaccumulate(values)


def ldpca_code(H1: BinaryMatrix, targets: Iterable[int]) -> LdpcaCode:
    schedules = {int(t): ldpca_schedule(H1.rows, int(t)) for t in targets}
    return LdpcaCode(mother=H1, schedules=schedules)


def ldpca_decode(
    code: LdpcaCode,
    target_m: int,
    values: BitVector,
    y: BitVector,
    p: float,
    cfg: Optional[DecoderConfig] = None,
    decoder: Optional[BeliefPropagationDecoder] = None,
) -> DecodeResult:
    """Decode from ``target_m`` received accumulated symbols."""
    indices = code.schedules.get(target_m) or ldpca_schedule(code.mother.rows, target_m)
    received = as_bits(values, len(indices))
    if decoder is None:
        merged, _ = ldpca_merged_code(code.mother, indices)
        decoder = BeliefPropagationDecoder(merged, cfg)
    return decoder.decode(ldpca_difference(received), y, p)
