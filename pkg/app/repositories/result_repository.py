from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any

from app.exceptions import ManifestError
from app.models.experiment import SimResult

BER_COLUMNS = [
    'code_id',
    'rate_num',
    'rate_den',
    'p',
    'frames',
    'bit_errors',
    'frame_errors',
    'ber',
    'fer',
    'ci_low',
    'ci_high',
    'seed',
    'scheme',
]
MINRATE_COLUMNS = [
    'code_id',
    'scheme',
    'p',
    'entropy',
    'couples',
    'avg_rate',
    'never_decoded',
    'seed',
]
CYCLE_COLUMNS = [
    'code_id',
    'rate_num',
    'rate_den',
    'n4_ladder',
    'n4_ldpca',
    'seed',
    'tool_version',
]


class ResultRepository:
    """Plot-ready CSV plus a JSON record of the full SimResult beside it."""

    def _rows(self, result: SimResult) -> tuple[list[str], list[dict[str, Any]]]:
        if result.mode == 'ber':
            return BER_COLUMNS, [point.csv_row() for point in result.points]
        if result.mode == 'minrate':
            return MINRATE_COLUMNS, [row.csv_row() for row in result.min_rates]
        provenance = {'seed': result.seed, 'tool_version': result.tool_version}
        return CYCLE_COLUMNS, [{**row.csv_row(), **provenance} for row in result.cycles]

    @staticmethod
    def record_path(path: Path) -> Path:
        return path.with_suffix('.json')

    def save(self, path: Path, result: SimResult) -> Path:
        columns, rows = self._rows(result)
        self.write_csv(path, columns, rows)
        with open(self.record_path(path), 'w', encoding='utf-8') as f:
            f.write(result.model_dump_json(indent=2))
            f.write('\n')
        return path

    def write_csv(self, path: Path, columns: list[str], rows: list[dict[str, Any]]) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.DictWriter(f, fieldnames=columns)
            writer.writeheader()
            writer.writerows(rows)
        return path

    def read_csv(self, path: Path) -> list[dict[str, str]]:
        if not path.exists():
            raise ManifestError(f'result file {path} does not exist')
        with open(path, 'r', encoding='utf-8', newline='') as f:
            return list(csv.DictReader(f))

    def load(self, path: Path) -> SimResult:
        record = self.record_path(path)
        if not record.exists():
            raise ManifestError(f'result record {record} does not exist')
        with open(record, 'r', encoding='utf-8') as f:
            return SimResult.model_validate(json.load(f))
