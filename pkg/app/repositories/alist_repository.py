from __future__ import annotations

import json
from pathlib import Path

from app.exceptions import ManifestError
from app.models.matrix import BinaryMatrix, TypedMatrix


def _padded(indices: list[int], width: int) -> str:
    return ' '.join(str(i) for i in indices + [0] * (width - len(indices)))


def format_alist(matrix: BinaryMatrix) -> str:
    """Canonical alist text: sorted 1-based indices, zero padded, one trailing newline."""
    m, n = matrix.shape
    row_lists = [[c + 1 for c in support] for support in matrix.supports]
    col_lists: list[list[int]] = [[] for _ in range(n)]
    for r, support in enumerate(matrix.supports):
        for c in support:
            col_lists[c].append(r + 1)
    max_col = max((len(col) for col in col_lists), default=0)
    max_row = max((len(row) for row in row_lists), default=0)

    lines = [
        f'{n} {m}',
        f'{max_col} {max_row}',
        ' '.join(str(len(col)) for col in col_lists),
        ' '.join(str(len(row)) for row in row_lists),
    ]
    lines += [_padded(col, max_col) for col in col_lists]
    lines += [_padded(row, max_row) for row in row_lists]
    return '\n'.join(lines) + '\n'


def parse_alist(text: str) -> BinaryMatrix:
    lines = text.splitlines()
    try:
        n, m = (int(v) for v in lines[0].split())
        col_degrees = [int(v) for v in lines[2].split()]
        row_degrees = [int(v) for v in lines[3].split()]
        col_lines = lines[4 : 4 + n]
        row_lines = lines[4 + n : 4 + n + m]
        if len(col_degrees) != n or len(row_degrees) != m or len(row_lines) != m:
            raise ValueError('degree lists do not match the declared dimensions')
        supports = [
            [int(v) - 1 for v in line.split() if int(v) > 0][: row_degrees[r]]
            for r, line in enumerate(row_lines)
        ]
        columns = [sorted(int(v) - 1 for v in line.split() if int(v) > 0) for line in col_lines]
        matrix = BinaryMatrix.from_supports(n, supports, allow_zero_rows=True)
    except (ValueError, IndexError) as e:
        raise ManifestError(f'malformed alist: {e}') from e

    transposed: list[list[int]] = [[] for _ in range(n)]
    for r, support in enumerate(matrix.supports):
        for c in support:
            transposed[c].append(r)
    if transposed != columns or [len(c) for c in columns] != col_degrees:
        raise ManifestError('alist column lists disagree with its row lists')
    return matrix


class AlistRepository:
    """Parity-check matrices on disk, with an optional ``.types.json`` sidecar."""

    def write(self, path: Path, matrix: BinaryMatrix) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(format_alist(matrix))
        return path

    def read(self, path: Path) -> BinaryMatrix:
        if not path.exists():
            raise ManifestError(f'alist file {path} does not exist')
        with open(path, 'r', encoding='utf-8') as f:
            return parse_alist(f.read())

    @staticmethod
    def sidecar_path(path: Path) -> Path:
        return path.with_suffix('.types.json')

    def write_typed(self, path: Path, typed: TypedMatrix) -> Path:
        self.write(path, typed.matrix)
        sidecar = {
            'protograph_id': typed.protograph_id,
            'lifting': typed.lifting,
            'cn_type_of': list(typed.cn_type_of),
            'vn_type_of': list(typed.vn_type_of),
        }
        with open(self.sidecar_path(path), 'w', encoding='utf-8') as f:
            json.dump(sidecar, f, indent=2)
            f.write('\n')
        return path

    def read_typed(self, path: Path) -> TypedMatrix:
        matrix = self.read(path)
        sidecar_path = self.sidecar_path(path)
        if not sidecar_path.exists():
            raise ManifestError(f'type sidecar {sidecar_path} does not exist')
        with open(sidecar_path, 'r', encoding='utf-8') as f:
            data = json.load(f)
        try:
            return TypedMatrix(
                matrix=matrix,
                cn_type_of=tuple(data['cn_type_of']),
                vn_type_of=tuple(data['vn_type_of']),
                protograph_id=data['protograph_id'],
                lifting=data['lifting'],
            )
        except (KeyError, ValueError) as e:
            raise ManifestError(f'malformed type sidecar {sidecar_path}: {e}') from e
