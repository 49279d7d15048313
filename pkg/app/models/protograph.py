from __future__ import annotations

import hashlib
from fractions import Fraction
from typing import Any, Optional

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.config import settings


class Rate(BaseModel):
    """Exact rational coding rate m/n."""

    model_config = ConfigDict(frozen=True)

    num: int = Field(..., ge=0)
    den: int = Field(..., ge=1)

    @classmethod
    def of(cls, value: Fraction | int | str) -> Rate:
        fraction = Fraction(value)
        return cls(num=fraction.numerator, den=fraction.denominator)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def __float__(self) -> float:
        return self.num / self.den

    def __str__(self) -> str:
        return f'{self.fraction.numerator}/{self.fraction.denominator}'


class Protograph(BaseModel):
    model_config = ConfigDict(frozen=True)

    cn_types: int = Field(..., ge=1)
    vn_types: int = Field(..., ge=1)
    entries: tuple[tuple[int, ...], ...]
    name: Optional[str] = None

    @field_validator('entries')
    @classmethod
    def validate_entries(cls, v: tuple[tuple[int, ...], ...]) -> tuple[tuple[int, ...], ...]:
        for row in v:
            if any(entry < 0 for entry in row):
                raise ValueError('protograph entries must be non-negative')
        return v

    @model_validator(mode='after')
    def _check_shape(self) -> Protograph:
        if len(self.entries) != self.cn_types:
            raise ValueError(f'expected {self.cn_types} rows, got {len(self.entries)}')
        if any(len(row) != self.vn_types for row in self.entries):
            raise ValueError(f'every row must have {self.vn_types} entries')
        if self.cn_types > self.vn_types:
            raise ValueError('design rate S_m/S_n must lie in (0, 1]')
        return self

    @classmethod
    def from_array(cls, array: Any, name: Optional[str] = None) -> Protograph:
        matrix = np.atleast_2d(np.asarray(array, dtype=np.int64))
        return cls(
            cn_types=int(matrix.shape[0]),
            vn_types=int(matrix.shape[1]),
            entries=tuple(tuple(int(e) for e in row) for row in matrix),
            name=name,
        )

    @property
    def array(self) -> npt.NDArray[np.int64]:
        return np.asarray(self.entries, dtype=np.int64).reshape(self.cn_types, self.vn_types)

    @property
    def rate(self) -> Fraction:
        return Fraction(self.cn_types, self.vn_types)

    @property
    def edge_count(self) -> int:
        return int(self.array.sum())

    @property
    def id(self) -> str:
        if self.name:
            return self.name
        digest = hashlib.sha1(repr(self.entries).encode()).hexdigest()[:10]
        return f'proto-{self.cn_types}x{self.vn_types}-{digest}'

    def zero_columns(self) -> list[int]:
        return [int(j) for j in np.flatnonzero(self.array.sum(axis=0) == 0)]

    def canonical_key(self) -> tuple[tuple[int, ...], ...]:
        """Row-sorted entries; row order never changes the ensemble."""
        return tuple(sorted(self.entries))


class DensityEvolutionParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    samples: int = Field(default_factory=lambda: settings.de_samples, ge=100)
    max_iterations: int = Field(default_factory=lambda: settings.de_max_iterations, ge=1)
    target_error: float = Field(default_factory=lambda: settings.de_target_error, gt=0, lt=1)
    tolerance: float = Field(default_factory=lambda: settings.de_tolerance, gt=0, lt=0.5)
    llr_clamp: float = Field(default=30.0, gt=0)
    max_bisections: int = Field(default=60, ge=1)


class ThresholdReport(BaseModel):
    protograph_id: str
    entries: tuple[tuple[int, ...], ...]
    threshold: float = Field(..., ge=0.0, le=0.5)
    params: DensityEvolutionParams
    converged: bool
    evaluations: int
    shannon_limit: float
    seed: int
    tool_version: str


class BscChannel(BaseModel):
    """Binary symmetric correlation channel P(Y|X) with crossover p."""

    model_config = ConfigDict(frozen=True)

    p: float = Field(..., ge=0.0, le=0.5)

    @property
    def entropy(self) -> float:
        return binary_entropy(self.p)

    def llr_magnitude(self, clamp: float = 30.0) -> float:
        if self.p == 0.0:
            return clamp
        return float(min(np.log((1.0 - self.p) / self.p), clamp))

    def sample(self, x: npt.NDArray[np.uint8], rng: np.random.Generator) -> npt.NDArray[np.uint8]:
        flips = (rng.random(x.shape[0]) < self.p).astype(np.uint8)
        return np.bitwise_xor(x, flips)


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * np.log2(p) - (1.0 - p) * np.log2(1.0 - p))


def inverse_binary_entropy(h: float, tolerance: float = 1e-12) -> float:
    """Smallest p in [0, 1/2] with H(p) = h."""
    if h <= 0.0:
        return 0.0
    if h >= 1.0:
        return 0.5
    lo, hi = 0.0, 0.5
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < h:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
