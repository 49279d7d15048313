from __future__ import annotations

from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, Field, field_validator

from app.config import settings
from app.models.codec import DecoderConfig
from app.models.protograph import Rate


def parse_rate(value: Any) -> Any:
    if isinstance(value, str):
        num, _, den = value.partition('/')
        return Rate.of(f'{int(num)}/{int(den or 1)}')
    return value


class ExperimentSpec(BaseModel):
    mode: Literal['ber', 'minrate', 'cycles'] = 'ber'
    code_id: str
    manifest: Optional[Path] = None
    rates: Optional[list[Rate]] = None
    p_values: list[float] = Field(default_factory=list)
    frames: int = Field(default=1000, ge=1)
    couples: int = Field(default=1000, ge=1)
    seed: int = Field(default_factory=lambda: settings.default_seed)
    decoder: DecoderConfig = Field(default_factory=DecoderConfig)
    baseline: bool = True
    max_frame_errors: int = Field(default_factory=lambda: settings.max_frame_errors, ge=1)
    batch_size: int = Field(default=50, ge=1)

    @field_validator('rates', mode='before')
    @classmethod
    def validate_rates(cls, v: Any) -> Any:
        if v is None:
            return v
        return [parse_rate(item) for item in v]

    @field_validator('p_values')
    @classmethod
    def validate_p_values(cls, v: list[float]) -> list[float]:
        for p in v:
            if not 0.0 < p < 0.5:
                raise ValueError(f'crossover probability {p} must lie in (0, 1/2)')
        return v


class PointResult(BaseModel):
    code_id: str
    rate: Rate
    p: float
    frames: int
    bit_errors: int
    frame_errors: int
    ber: float
    fer: float
    ci_low: float
    ci_high: float
    seed: int
    scheme: str = 'ladder'

    def csv_row(self) -> dict[str, Any]:
        return {
            'code_id': self.code_id,
            'rate_num': self.rate.num,
            'rate_den': self.rate.den,
            'p': self.p,
            'frames': self.frames,
            'bit_errors': self.bit_errors,
            'frame_errors': self.frame_errors,
            'ber': self.ber,
            'fer': self.fer,
            'ci_low': self.ci_low,
            'ci_high': self.ci_high,
            'seed': self.seed,
            'scheme': self.scheme,
        }


class MinRateResult(BaseModel):
    code_id: str
    scheme: str
    p: float
    entropy: float
    couples: int
    avg_rate: Optional[float]
    never_decoded: int
    seed: int
    couple_rates: list[Optional[float]] = Field(default_factory=list)

    def csv_row(self) -> dict[str, Any]:
        return {
            'code_id': self.code_id,
            'scheme': self.scheme,
            'p': self.p,
            'entropy': self.entropy,
            'couples': self.couples,
            'avg_rate': '' if self.avg_rate is None else self.avg_rate,
            'never_decoded': self.never_decoded,
            'seed': self.seed,
        }


class CycleRow(BaseModel):
    code_id: str
    rate: Rate
    n4_ladder: int
    n4_ldpca: int

    def csv_row(self) -> dict[str, Any]:
        return {
            'code_id': self.code_id,
            'rate_num': self.rate.num,
            'rate_den': self.rate.den,
            'n4_ladder': self.n4_ladder,
            'n4_ldpca': self.n4_ldpca,
        }


class SimResult(BaseModel):
    mode: Literal['ber', 'minrate', 'cycles']
    code_id: str
    points: list[PointResult] = Field(default_factory=list)
    min_rates: list[MinRateResult] = Field(default_factory=list)
    cycles: list[CycleRow] = Field(default_factory=list)
    wall_clock: float = 0.0
    seed: int
    tool_version: str
