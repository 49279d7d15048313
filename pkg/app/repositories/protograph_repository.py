from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Optional

from pydantic import ValidationError

from app.exceptions import ManifestError
from app.models.protograph import Protograph, ThresholdReport


class ProtographRepository:
    """Protographs as JSON, optionally carrying the threshold report that produced them."""

    def _protograph_to_dict(
        self, protograph: Protograph, report: Optional[ThresholdReport]
    ) -> dict[str, Any]:
        data: dict[str, Any] = {
            'cn_types': protograph.cn_types,
            'vn_types': protograph.vn_types,
            'entries': [list(row) for row in protograph.entries],
        }
        if protograph.name:
            data['name'] = protograph.name
        if report is not None:
            data['threshold_report'] = report.model_dump(mode='json')
        return data

    def save(
        self, path: Path, protograph: Protograph, report: Optional[ThresholdReport] = None
    ) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self._protograph_to_dict(protograph, report), f, indent=2)
            f.write('\n')
        return path

    def _read(self, path: Path) -> dict[str, Any]:
        if not path.exists():
            raise ManifestError(f'protograph file {path} does not exist')
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ManifestError(f'malformed protograph file {path}: {e}') from e
        if not isinstance(data, dict):
            raise ManifestError(f'protograph file {path} does not hold an object')
        return data

    def load(self, path: Path) -> Protograph:
        data = self._read(path)
        fields = ('cn_types', 'vn_types', 'entries', 'name')
        try:
            return Protograph.model_validate({key: data[key] for key in fields if key in data})
        except ValidationError as e:
            raise ManifestError(f'invalid protograph in {path}: {e}') from e

    def load_report(self, path: Path) -> Optional[ThresholdReport]:
        data = self._read(path)
        if 'threshold_report' not in data:
            return None
        try:
            return ThresholdReport.model_validate(data['threshold_report'])
        except ValidationError as e:
            raise ManifestError(f'invalid threshold report in {path}: {e}') from e
