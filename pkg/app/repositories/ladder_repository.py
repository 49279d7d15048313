from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Optional

from pydantic import ValidationError

from app.exceptions import ManifestError
from app.models.ladder import AnchorStep, CodeLadder, FineStep, IntermediateMatrix
from app.models.protograph import Protograph, Rate, ThresholdReport
from app.repositories.alist_repository import AlistRepository

MANIFEST_NAME = 'ladder.json'


def _protograph_dict(protograph: Protograph) -> dict[str, Any]:
    return protograph.model_dump(mode='json', exclude_none=True)


class LadderRepository:
    """A CodeLadder as a JSON manifest next to one alist file per matrix.

    Paths inside the manifest are relative to the manifest's directory.
    """

    def __init__(self, alists: Optional[AlistRepository] = None) -> None:
        self._alists = alists or AlistRepository()

    def save(self, ladder: CodeLadder, out_dir: Path) -> Path:
        out_dir.mkdir(parents=True, exist_ok=True)
        self._alists.write_typed(out_dir / 'mother.alist', ladder.mother)

        anchors = []
        for t, anchor in enumerate(ladder.anchors, start=2):
            intermediate = f'anchor_{t}_intermediate.alist'
            daughter = f'anchor_{t}_daughter.alist'
            self._alists.write(out_dir / intermediate, anchor.intermediate.matrix)
            self._alists.write_typed(out_dir / daughter, anchor.daughter)
            anchors.append(
                {
                    'rate': anchor.rate.model_dump(),
                    'protograph': _protograph_dict(anchor.protograph),
                    'intermediate_protograph': _protograph_dict(anchor.intermediate_protograph),
                    'intermediate': intermediate,
                    'daughter': daughter,
                    'cprime': list(anchor.cprime),
                    'pairs': [list(pair) for pair in anchor.pairs],
                    'n4': anchor.n4,
                    'threshold': (
                        anchor.threshold.model_dump(mode='json') if anchor.threshold else None
                    ),
                    'seed': anchor.seed,
                }
            )

        intervals = []
        for t, steps in enumerate(ladder.fine_steps, start=2):
            interval = []
            for k, step in enumerate(steps, start=1):
                matrix = f'fine/anchor_{t}_step_{k:04d}.alist'
                intermediate = f'fine/anchor_{t}_step_{k:04d}_intermediate.alist'
                self._alists.write(out_dir / matrix, step.matrix)
                self._alists.write(out_dir / intermediate, step.intermediate.matrix)
                interval.append(
                    {
                        'rate': step.rate.model_dump(),
                        'matrix': matrix,
                        'intermediate': intermediate,
                        'cprime': list(step.cprime),
                        'pair': list(step.pair),
                        'n4': step.n4,
                    }
                )
            intervals.append(interval)

        manifest = {
            'code_id': ladder.code_id,
            'n': ladder.n,
            'mother': 'mother.alist',
            'mother_rate': Rate.of(ladder.mother_rate).model_dump(),
            'mother_protograph': _protograph_dict(ladder.mother_protograph),
            'anchors': anchors,
            'fine_steps': intervals,
            'seed': ladder.seed,
            'candidates': ladder.candidates,
            'repeats': ladder.repeats,
            'tool_version': ladder.tool_version,
        }
        path = out_dir / MANIFEST_NAME
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(manifest, f, indent=2)
            f.write('\n')
        return path

    def _read_manifest(self, path: Path) -> dict[str, Any]:
        if path.is_dir():
            path = path / MANIFEST_NAME
        if not path.exists():
            raise ManifestError(f'ladder manifest {path} does not exist')
        try:
            with open(path, 'r', encoding='utf-8') as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            raise ManifestError(f'malformed ladder manifest {path}: {e}') from e

    def load(self, path: Path) -> CodeLadder:
        root = path if path.is_dir() else path.parent
        data = self._read_manifest(path)
        try:
            anchors = tuple(
                AnchorStep(
                    rate=Rate.model_validate(item['rate']),
                    protograph=Protograph.model_validate(item['protograph']),
                    intermediate_protograph=Protograph.model_validate(
                        item['intermediate_protograph']
                    ),
                    intermediate=IntermediateMatrix(
                        matrix=self._alists.read(root / item['intermediate']),
                        protograph=Protograph.model_validate(item['intermediate_protograph']),
                    ),
                    daughter=self._alists.read_typed(root / item['daughter']),
                    cprime=tuple(item['cprime']),
                    pairs=tuple(tuple(pair) for pair in item['pairs']),
                    n4=item['n4'],
                    threshold=(
                        ThresholdReport.model_validate(item['threshold'])
                        if item.get('threshold')
                        else None
                    ),
                    seed=item['seed'],
                )
                for item in data['anchors']
            )
            fine_steps = tuple(
                tuple(
                    FineStep(
                        rate=Rate.model_validate(item['rate']),
                        matrix=self._alists.read(root / item['matrix']),
                        intermediate=IntermediateMatrix(
                            matrix=self._alists.read(root / item['intermediate'])
                        ),
                        cprime=tuple(item['cprime']),
                        pair=tuple(item['pair']),
                        n4=item['n4'],
                    )
                    for item in interval
                )
                for interval in data.get('fine_steps', [])
            )
            return CodeLadder(
                code_id=data['code_id'],
                mother=self._alists.read_typed(root / data['mother']),
                mother_protograph=Protograph.model_validate(data['mother_protograph']),
                anchors=anchors,
                fine_steps=fine_steps,
                seed=data['seed'],
                candidates=data['candidates'],
                repeats=data['repeats'],
                tool_version=data['tool_version'],
            )
        except (KeyError, TypeError, ValidationError) as e:
            raise ManifestError(f'invalid ladder manifest {path}: {e}') from e

    def matrix_paths(self, path: Path) -> dict[str, Path]:
        """Every alist the manifest references, keyed by a short label."""
        root = path if path.is_dir() else path.parent
        data = self._read_manifest(path)
        paths = {'mother': root / data['mother']}
        for t, item in enumerate(data['anchors'], start=2):
            paths[f'anchor_{t}_intermediate'] = root / item['intermediate']
            paths[f'anchor_{t}_daughter'] = root / item['daughter']
        return paths
