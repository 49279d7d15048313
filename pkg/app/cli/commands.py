from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

from app import __version__
from app.config import settings
from app.exceptions import ManifestError
from app.models.experiment import ExperimentSpec, SimResult
from app.models.ladder import CodeLadder
from app.models.protograph import DensityEvolutionParams, Protograph
from app.repositories.alist_repository import AlistRepository
from app.repositories.ladder_repository import LadderRepository
from app.repositories.protograph_repository import ProtographRepository
from app.repositories.result_repository import ResultRepository
from app.repositories.spec_repository import SpecRepository
from app.services.build_service import BuildService
from app.services.graph_service import count_4cycles, peg_lift, realized_protograph
from app.services.ladder_service import build_ladder
from app.services.protograph_optimizer import optimize_protograph
from app.services.protograph_service import PRESET_PROTOGRAPHS, extend_protograph
from app.services.simulation_service import SimulationService, cycle_report


def resolve_protograph(ref: str) -> Protograph:
    """A preset name or a protograph JSON file."""
    if ref in PRESET_PROTOGRAPHS:
        return PRESET_PROTOGRAPHS[ref]
    return ProtographRepository().load(Path(ref))


def de_params(args: argparse.Namespace) -> DensityEvolutionParams:
    overrides = {
        'samples': args.de_samples,
        'max_iterations': args.de_max_iterations,
        'tolerance': args.de_tolerance,
    }
    return DensityEvolutionParams(**{k: v for k, v in overrides.items() if v is not None})


def _print_ladder(ladder: CodeLadder) -> None:
    print(f'code {ladder.code_id}: {ladder.mother.matrix.rows}x{ladder.n}')
    print(f'{"rate":>8} {"rows":>6} {"N4":>8} {"alpha":>6}')
    mother = ladder.mother.matrix
    print(f'{str(ladder.mother_rate):>8} {mother.rows:>6} {count_4cycles(mother):>8} {"-":>6}')
    for anchor in ladder.anchors:
        rows, alpha = anchor.daughter.matrix.rows, str(anchor.intermediate.alpha)
        print(f'{str(anchor.rate):>8} {rows:>6} {anchor.n4:>8} {alpha:>6}')
    print(f'grid levels: {len(ladder.grid())}')


def cmd_optimize(args: argparse.Namespace) -> int:
    protograph, report = optimize_protograph(
        args.cn,
        args.vn,
        args.dmax,
        args.pop,
        args.iters,
        args.seed,
        de_params(args),
        args.workers,
    )
    ProtographRepository().save(args.out, protograph, report)
    print(f'threshold {report.threshold:.4f} (Shannon limit {report.shannon_limit:.4f})')
    for row in protograph.entries:
        print(' '.join(str(e) for e in row))
    return 0


def cmd_extend(args: argparse.Namespace) -> int:
    seed = settings.default_seed if args.seed is None else args.seed
    extended = extend_protograph(resolve_protograph(args.protograph), args.factor, seed)
    ProtographRepository().save(args.out, extended)
    print(f'extended protograph {extended.cn_types}x{extended.vn_types} -> {args.out}')
    return 0


def cmd_lift(args: argparse.Namespace) -> int:
    protograph = resolve_protograph(args.protograph)
    typed = peg_lift(protograph, args.lifting, args.seed)
    AlistRepository().write_typed(args.out, typed)
    print(f'lifted {typed.matrix.rows}x{typed.matrix.cols}, N4 = {count_4cycles(typed.matrix)}')
    return 0


def cmd_ladder(args: argparse.Namespace) -> int:
    mother = AlistRepository().read_typed(args.mother)
    protograph = resolve_protograph(args.protograph)
    ladder = build_ladder(
        mother,
        protograph,
        args.K,
        args.repeats,
        args.seed,
        fine=not args.no_fine,
        params=de_params(args),
        workers=args.workers,
    )
    path = LadderRepository().save(ladder, args.out_dir)
    _print_ladder(ladder)
    print(f'manifest -> {path}')
    return 0


def cmd_build(args: argparse.Namespace) -> int:
    service = BuildService(LadderRepository())
    ladder, _ = service.build(
        resolve_protograph(args.protograph),
        args.out_dir,
        extension=args.extension,
        lifting=args.lifting,
        K=args.K,
        repeats=args.repeats,
        seed=args.seed,
        fine=not args.no_fine,
        params=de_params(args),
        workers=args.workers,
    )
    _print_ladder(ladder)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    spec = SpecRepository().load(args.spec)
    overrides: dict[str, object] = {}
    if args.seed is not None:
        overrides['seed'] = args.seed
    if args.rates:
        overrides['rates'] = args.rates
    if overrides:
        spec = ExperimentSpec.model_validate(spec.model_dump() | overrides)
    result = SimulationService(LadderRepository()).run(spec, args.manifest, args.workers)
    ResultRepository().save(args.out, result)
    print(f'{result.mode} results -> {args.out} ({result.wall_clock:.1f} s)')
    return 0


def cmd_cycles(args: argparse.Namespace) -> int:
    ladder = LadderRepository().load(args.manifest)
    rows = cycle_report(ladder)
    result = SimResult(
        mode='cycles',
        code_id=ladder.code_id,
        cycles=rows,
        seed=ladder.seed,
        tool_version=__version__,
    )
    ResultRepository().save(args.out, result)
    print(f'{"rate":>8} {"ladder":>8} {"ldpca":>8}')
    for row in rows:
        print(f'{str(row.rate):>8} {row.n4_ladder:>8} {row.n4_ldpca:>8}')
    return 0


def _inspect_alist(path: Path) -> None:
    alists = AlistRepository()
    matrix = alists.read(path)
    row_degrees = np.bincount(matrix.row_weights())
    col_degrees = np.bincount(matrix.col_weights())
    print(f'{path}: {matrix.rows}x{matrix.cols}, {matrix.nnz} edges')
    print('row degrees: ' + ', '.join(f'{d}:{k}' for d, k in enumerate(row_degrees) if k))
    print('column degrees: ' + ', '.join(f'{d}:{k}' for d, k in enumerate(col_degrees) if k))
    print(f'N4 = {count_4cycles(matrix)}')
    if alists.sidecar_path(path).exists():
        realized = realized_protograph(alists.read_typed(path))
        print('realized protograph:')
        for row in realized.entries:
            print('  ' + ' '.join(str(e) for e in row))


def _read_json(path: Path) -> dict[str, object]:
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as e:
        raise ManifestError(f'{path} is not valid JSON: {e}') from e
    if not isinstance(data, dict):
        raise ManifestError(f'{path} does not hold a JSON object')
    return data


def cmd_inspect(args: argparse.Namespace) -> int:
    path: Path = args.path
    if path.suffix == '.alist':
        _inspect_alist(path)
        return 0
    if not path.exists():
        raise ManifestError(f'{path} does not exist')

    if path.is_dir() or 'anchors' in _read_json(path):
        ladder = LadderRepository().load(path)
        _print_ladder(ladder)
        return 0

    repository = ProtographRepository()
    protograph = repository.load(path)
    report = repository.load_report(path)
    print(f'{protograph.id}: {protograph.cn_types}x{protograph.vn_types}, rate {protograph.rate}')
    for row in protograph.entries:
        print('  ' + ' '.join(str(e) for e in row))
    if report is not None:
        print(f'threshold {report.threshold:.4f}, converged={report.converged}')
    return 0
