from __future__ import annotations

from datetime import datetime
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, Field


class ProjectManifest(BaseModel):
    """Index of every artifact written by one pipeline run."""

    protographs: dict[str, Path] = Field(default_factory=dict)
    matrices: dict[str, Path] = Field(default_factory=dict)
    ladder_manifest: Optional[Path] = None
    experiment_specs: list[Path] = Field(default_factory=list)
    results: list[Path] = Field(default_factory=list)
    seed: int
    tool_version: str
    created_at: datetime = Field(default_factory=datetime.now)

    def missing_files(self, root: Path) -> list[Path]:
        paths = [*self.protographs.values(), *self.matrices.values(), *self.experiment_specs]
        paths += self.results
        if self.ladder_manifest is not None:
            paths.append(self.ladder_manifest)
        return [path for path in paths if not (root / path).exists()]
