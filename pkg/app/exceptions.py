from __future__ import annotations

from typing import Optional


class ProtoladderError(Exception):
    """Base class for construction, coding and artifact errors."""


class DimensionMismatch(ProtoladderError, ValueError):
    pass


class Singular(ProtoladderError):
    """The square system has no unique solution (rank deficient)."""


class Unconnected(ProtoladderError):
    """A protograph has a variable-node type with no edges."""


class Infeasible(ProtoladderError):
    pass


class NotTypeConsistent(ProtoladderError):
    def __init__(self, row: int, vn_type: int, message: Optional[str] = None) -> None:
        self.row = row
        self.vn_type = vn_type
        super().__init__(
            message or f'row {row} has an inconsistent edge count toward VN type {vn_type}'
        )


class EmptyFamily(ProtoladderError):
    pass


class NoDisjointCandidate(ProtoladderError):
    pass


class DegenerateChannel(ProtoladderError, ValueError):
    pass


class RateOffGrid(ProtoladderError):
    pass


class NeverDecodes(ProtoladderError):
    pass


class ManifestError(ProtoladderError):
    """An on-disk artifact could not be resolved or parsed."""
