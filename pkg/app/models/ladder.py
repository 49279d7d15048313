from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from pydantic import BaseModel, ConfigDict, model_validator

from app.models.matrix import BinaryMatrix, TypedMatrix
from app.models.protograph import Protograph, Rate, ThresholdReport


class IntermediateMatrix(BaseModel):
    """H_{t-1 -> t}: rows of weight 1 or 2, every column used exactly once."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: BinaryMatrix
    protograph: Optional[Protograph] = None

    @model_validator(mode='after')
    def _check_structure(self) -> IntermediateMatrix:
        row_weights = self.matrix.row_weights()
        if ((row_weights < 1) | (row_weights > 2)).any():
            raise ValueError('intermediate rows must have 1 or 2 nonzero entries')
        if (self.matrix.col_weights() != 1).any():
            raise ValueError('every intermediate column must have exactly one nonzero entry')
        return self

    @property
    def row_degrees(self) -> list[int]:
        return [int(w) for w in self.matrix.row_weights()]

    @property
    def alpha(self) -> Fraction:
        """Share of degree-1 rows, 2 - m1/m2."""
        return Fraction(2) - Fraction(self.matrix.cols, self.matrix.rows)


class AnchorStep(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    rate: Rate
    protograph: Protograph
    intermediate_protograph: Protograph
    intermediate: IntermediateMatrix
    daughter: TypedMatrix
    cprime: tuple[int, ...]
    pairs: tuple[tuple[int, int], ...]
    n4: int
    threshold: Optional[ThresholdReport] = None
    seed: int


class FineStep(BaseModel):
    """One single-pair combination between two anchors.

    ``pair`` indexes rows of the previous grid matrix; the last step of an
    interval carries the anchor daughter matrix itself.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    rate: Rate
    matrix: BinaryMatrix
    intermediate: IntermediateMatrix
    cprime: tuple[int, ...]
    pair: tuple[int, int]
    n4: int


@dataclass(frozen=True)
class GridLevel:
    rate: Fraction
    matrix: BinaryMatrix
    intermediate: Optional[IntermediateMatrix]
    cprime: tuple[int, ...]
    is_anchor: bool


class CodeLadder(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    code_id: str
    mother: TypedMatrix
    mother_protograph: Protograph
    anchors: tuple[AnchorStep, ...] = ()
    fine_steps: tuple[tuple[FineStep, ...], ...] = ()
    seed: int
    candidates: int
    repeats: int
    tool_version: str

    @model_validator(mode='after')
    def _check_rates(self) -> CodeLadder:
        rates = [self.mother_rate] + [anchor.rate.fraction for anchor in self.anchors]
        if any(later >= earlier for earlier, later in zip(rates, rates[1:])):
            raise ValueError('ladder rates must be strictly decreasing')
        if self.fine_steps and len(self.fine_steps) != len(self.anchors):
            raise ValueError('fine steps must be given per anchor interval')
        return self

    @property
    def n(self) -> int:
        return self.mother.matrix.cols

    @property
    def mother_rate(self) -> Fraction:
        return Fraction(self.mother.matrix.rows, self.mother.matrix.cols)

    @property
    def anchor_rates(self) -> list[Fraction]:
        return [self.mother_rate] + [anchor.rate.fraction for anchor in self.anchors]

    def grid(self) -> list[GridLevel]:
        """Every reachable rate, from the mother rate downward.

        Each level carries the intermediate matrix that produces it from the
        level just above it.
        """
        levels = [
            GridLevel(
                rate=self.mother_rate,
                matrix=self.mother.matrix,
                intermediate=None,
                cprime=(),
                is_anchor=True,
            )
        ]
        for index, anchor in enumerate(self.anchors):
            steps = self.fine_steps[index] if self.fine_steps else ()
            if steps:
                for position, step in enumerate(steps):
                    levels.append(
                        GridLevel(
                            rate=step.rate.fraction,
                            matrix=step.matrix,
                            intermediate=step.intermediate,
                            cprime=step.cprime,
                            is_anchor=position == len(steps) - 1,
                        )
                    )
            else:
                levels.append(
                    GridLevel(
                        rate=anchor.rate.fraction,
                        matrix=anchor.daughter.matrix,
                        intermediate=anchor.intermediate,
                        cprime=anchor.cprime,
                        is_anchor=True,
                    )
                )
        return levels

    def grid_rates(self) -> list[Fraction]:
        return [level.rate for level in self.grid()]


class ProtoCircleResult(BaseModel):
    """Outcome of one Proto-Circle construction.

    ``pairs`` lists the combined (u, v) rows of the source matrix in the
    order they were committed.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    daughter: TypedMatrix
    intermediate: IntermediateMatrix
    n4: int
    pairs: tuple[tuple[int, int], ...]
    seed: int
    repeat: int
