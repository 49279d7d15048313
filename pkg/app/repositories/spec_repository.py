from __future__ import annotations

import json
import tomllib
from pathlib import Path
from typing import Any

import yaml

from app.exceptions import ManifestError
from app.models.experiment import ExperimentSpec


class SpecRepository:
    """Experiment specs in JSON, TOML or YAML, chosen by file suffix.

    Validation errors from ExperimentSpec propagate unchanged; only missing or
    unparsable files become ManifestError.
    """

    def _read_raw(self, path: Path) -> Any:
        suffix = path.suffix.lower()
        with open(path, 'rb') as f:
            if suffix == '.json':
                return json.load(f)
            if suffix == '.toml':
                return tomllib.load(f)
            if suffix in ('.yaml', '.yml'):
                return yaml.safe_load(f)
        raise ManifestError(f'unsupported experiment spec format {suffix!r}')

    def load(self, path: Path) -> ExperimentSpec:
        if not path.exists():
            raise ManifestError(f'experiment spec {path} does not exist')
        try:
            data = self._read_raw(path)
        except (json.JSONDecodeError, tomllib.TOMLDecodeError, yaml.YAMLError) as e:
            raise ManifestError(f'malformed experiment spec {path}: {e}') from e
        if not isinstance(data, dict):
            raise ManifestError(f'experiment spec {path} does not hold a mapping')
        return ExperimentSpec.model_validate(data)

    def save(self, path: Path, spec: ExperimentSpec) -> Path:
        if path.suffix.lower() not in ('.json', '.yaml', '.yml'):
            raise ManifestError(f'experiment specs are saved as JSON or YAML, not {path.suffix!r}')
        path.parent.mkdir(parents=True, exist_ok=True)
        data = spec.model_dump(mode='json', exclude_none=True)
        data['rates'] = [str(rate) for rate in spec.rates] if spec.rates else None
        data = {key: value for key, value in data.items() if value is not None}
        with open(path, 'w', encoding='utf-8') as f:
            if path.suffix.lower() in ('.yaml', '.yml'):
                yaml.dump(data, f, allow_unicode=True, default_flow_style=False, sort_keys=False)
            else:
                json.dump(data, f, indent=2)
                f.write('\n')
        return path
