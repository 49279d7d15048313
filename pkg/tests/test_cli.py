from __future__ import annotations

import argparse
import json
from pathlib import Path

import pytest

from app.cli import EXIT_ARTIFACT, EXIT_FAILURE, EXIT_OK, EXIT_USAGE, commands, main
from app.exceptions import DegenerateChannel, DimensionMismatch, ManifestError
from app.repositories import AlistRepository, ProjectRepository, ResultRepository
from tests.helpers import TWO_TYPE

DE_OPTIONS = ['--de-samples', '400', '--de-max-iterations', '20', '--de-tolerance', '0.05']


@pytest.fixture(scope='module')
def built(tmp_path_factory: pytest.TempPathFactory) -> Path:
    root = tmp_path_factory.mktemp('cli')
    protograph = root / 'toy.json'
    entries = [list(row) for row in TWO_TYPE.entries]
    protograph.write_text(json.dumps({'cn_types': 2, 'vn_types': 4, 'entries': entries}))
    out_dir = root / 'family'
    code = main(
        [
            'build',
            '--protograph',
            str(protograph),
            '-Z',
            '16',
            '--out-dir',
            str(out_dir),
            '--K',
            '4',
            '--repeats',
            '2',
            '--seed',
            '5',
            *DE_OPTIONS,
        ]
    )
    assert code == EXIT_OK
    return out_dir


def test_missing_required_option() -> None:
    assert main(['optimize', '--cn', '2', '--out', 'x.json']) == EXIT_USAGE


def test_unknown_command() -> None:
    assert main(['transmogrify']) == EXIT_USAGE


def test_lift_preset(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    out = tmp_path / 'mother.alist'
    assert main(['lift', '--protograph', 'bsc-2x4', '-Z', '8', '--out', str(out)]) == EXIT_OK
    assert 'lifted 16x32' in capsys.readouterr().out
    typed = AlistRepository().read_typed(out)
    assert typed.lifting == 8

    assert main(['inspect', str(out)]) == EXIT_OK
    output = capsys.readouterr().out
    assert '16x32' in output
    assert 'realized protograph' in output
    assert '1 2 1 3' in output


def test_lift_with_too_small_lifting(tmp_path: Path) -> None:
    out = tmp_path / 'mother.alist'
    assert main(['lift', '--protograph', 'bsc-2x4', '-Z', '2', '--out', str(out)]) == EXIT_FAILURE


def test_unknown_protograph_file(tmp_path: Path) -> None:
    out = tmp_path / 'mother.alist'
    code = main(['lift', '--protograph', str(tmp_path / 'nope.json'), '-Z', '8', '--out', str(out)])
    assert code == EXIT_ARTIFACT


def test_inspect_missing_path(tmp_path: Path) -> None:
    assert main(['inspect', str(tmp_path / 'absent.json')]) == EXIT_ARTIFACT


def test_extend_then_inspect(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    out = tmp_path / 'extended.json'
    assert main(['extend', '--protograph', 'bsc-2x4', '--factor', '2', '--out', str(out)]) == 0
    capsys.readouterr()
    assert main(['inspect', str(out)]) == EXIT_OK
    assert '4x8, rate 1/2' in capsys.readouterr().out


def test_build_writes_project(built: Path) -> None:
    manifest = ProjectRepository(built).load()
    assert manifest.ladder_manifest == Path('ladder/ladder.json')
    assert set(manifest.protographs) == {'mother', 'extended', 'anchor_2'}


def test_inspect_ladder(built: Path, capsys: pytest.CaptureFixture[str]) -> None:
    assert main(['inspect', str(built / 'ladder')]) == EXIT_OK
    output = capsys.readouterr().out
    assert '32x64' in output
    assert 'grid levels: 17' in output
    anchor_row = next(line.split() for line in output.splitlines() if line.split()[:1] == ['1/4'])
    assert anchor_row[-1] == '0'


def test_cycles(built: Path, tmp_path: Path) -> None:
    out = tmp_path / 'cycles.csv'
    assert main(['cycles', str(built / 'ladder' / 'ladder.json'), '--out', str(out)]) == EXIT_OK
    rows = ResultRepository().read_csv(out)
    assert [(row['rate_num'], row['rate_den']) for row in rows] == [('1', '2'), ('1', '4')]
    assert rows[0]['n4_ladder'] == rows[0]['n4_ldpca']
    assert {row['seed'] for row in rows} == {'5'}
    assert all(row['tool_version'] for row in rows)


def test_simulate(built: Path, tmp_path: Path) -> None:
    spec = tmp_path / 'ber.json'
    spec.write_text(
        json.dumps(
            {
                'mode': 'ber',
                'code_id': 'toy',
                'p_values': [1e-6],
                'frames': 10,
                'batch_size': 10,
                'baseline': False,
            }
        )
    )
    out = tmp_path / 'ber.csv'
    code = main(
        [
            'simulate',
            '--spec',
            str(spec),
            '--manifest',
            str(built / 'ladder' / 'ladder.json'),
            '--rates',
            '1/2',
            '3/8',
            '--seed',
            '4',
            '--out',
            str(out),
        ]
    )
    assert code == EXIT_OK
    rows = ResultRepository().read_csv(out)
    assert [(row['rate_num'], row['rate_den'], row['bit_errors']) for row in rows] == [
        ('1', '2', '0'),
        ('3', '8', '0'),
    ]
    assert {row['seed'] for row in rows} == {'4'}


def test_simulate_invalid_spec(tmp_path: Path) -> None:
    spec = tmp_path / 'bad.json'
    spec.write_text(json.dumps({'code_id': 'toy', 'p_values': [0.9]}))
    code = main(['simulate', '--spec', str(spec), '--out', str(tmp_path / 'r.csv')])
    assert code == EXIT_USAGE


@pytest.mark.parametrize(
    ('error', 'expected'),
    [
        (DimensionMismatch('3 columns against 4'), EXIT_FAILURE),
        (DegenerateChannel('crossover probability 0.5'), EXIT_FAILURE),
        (ManifestError('unreadable'), EXIT_ARTIFACT),
        (ValueError('bad factor'), EXIT_USAGE),
    ],
)
def test_exit_code_follows_error_type(
    monkeypatch: pytest.MonkeyPatch, tmp_path: Path, error: Exception, expected: int
) -> None:
    def failing(args: argparse.Namespace) -> int:
        raise error

    monkeypatch.setattr(commands, 'cmd_extend', failing)
    argv = ['extend', '--protograph', 'bsc-2x4', '--factor', '2', '--out', str(tmp_path / 'x')]
    assert main(argv) == expected
