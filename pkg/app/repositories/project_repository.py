from __future__ import annotations

from pathlib import Path

from pydantic import ValidationError

from app.exceptions import ManifestError
from app.models.project import ProjectManifest

PROJECT_FILE = Path('project.json')


class ProjectRepository:
    def __init__(self, root: Path) -> None:
        self._root = root

    @property
    def path(self) -> Path:
        return self._root / PROJECT_FILE

    def save(self, manifest: ProjectManifest) -> Path:
        self._root.mkdir(parents=True, exist_ok=True)
        with open(self.path, 'w', encoding='utf-8') as f:
            f.write(manifest.model_dump_json(indent=2))
            f.write('\n')
        return self.path

    def load(self) -> ProjectManifest:
        if not self.path.exists():
            raise ManifestError(f'project manifest {self.path} does not exist')
        with open(self.path, 'r', encoding='utf-8') as f:
            try:
                manifest = ProjectManifest.model_validate_json(f.read())
            except ValidationError as e:
                raise ManifestError(f'invalid project manifest {self.path}: {e}') from e
        missing = manifest.missing_files(self._root)
        if missing:
            raise ManifestError(f'project manifest references missing files: {missing}')
        return manifest
