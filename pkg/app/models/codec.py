from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.config import settings
from app.models.matrix import BinaryMatrix


class DecoderConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_iterations: int = Field(default_factory=lambda: settings.bp_max_iterations, ge=1)
    early_stop: bool = Field(default_factory=lambda: settings.bp_early_stop)
    llr_clamp: float = Field(default_factory=lambda: settings.bp_llr_clamp, gt=0)


class DecodeResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    x_hat: np.ndarray
    converged: bool
    iterations: int
    posterior: np.ndarray


class LdpcaCode(BaseModel):
    """Accumulated-syndrome baseline built on a mother matrix.

    ``schedules`` maps a transmitted-symbol count to the 1-based indices of
    the accumulated symbols sent at that rate.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mother: BinaryMatrix
    schedules: dict[int, tuple[int, ...]]

    @model_validator(mode='after')
    def _check_schedules(self) -> LdpcaCode:
        m1 = self.mother.rows
        for target, indices in self.schedules.items():
            if len(indices) != target:
                raise ValueError(f'schedule for {target} symbols lists {len(indices)} indices')
            if any(b <= a for a, b in zip(indices, indices[1:])):
                raise ValueError(f'schedule for {target} symbols is not strictly increasing')
            if indices and (indices[0] < 1 or indices[-1] != m1):
                raise ValueError(f'schedule for {target} symbols must end at {m1}')
        if m1 in self.schedules and self.schedules[m1] != tuple(range(1, m1 + 1)):
            raise ValueError('the full-rate schedule must transmit every accumulated symbol')
        return self
