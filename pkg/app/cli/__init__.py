"""Command line entry point: ``protoladder <command> [options]``.

Exit codes: 0 success, 2 usage or invalid input, 3 construction or decoding
failure, 4 missing or unreadable artifact.
"""

from __future__ import annotations

import argparse
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Optional

import structlog
from pydantic import ValidationError

from app import __version__
from app.cli import commands
from app.config import settings
from app.exceptions import ManifestError, ProtoladderError
from app.logging_config import configure_logging

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FAILURE = 3
EXIT_ARTIFACT = 4

Handler = Callable[[argparse.Namespace], int]


def _add_de_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group('density evolution')
    group.add_argument('--de-samples', type=int, default=None)
    group.add_argument('--de-max-iterations', type=int, default=None)
    group.add_argument('--de-tolerance', type=float, default=None)


def _add_ladder_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--K', type=int, default=None, help='Proto-Circle candidates per pair')
    parser.add_argument('--repeats', type=int, default=None, help='Proto-Circle repetitions')
    parser.add_argument('--no-fine', action='store_true', help='anchors only, no fine steps')
    _add_de_options(parser)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--log-level', default=settings.log_level)
    common.add_argument('--workers', type=int, default=settings.workers)
    common.add_argument('--seed', type=int, default=None)

    parser = argparse.ArgumentParser(
        prog='protoladder',
        description='Rate-adaptive protograph LDPC ladders for Slepian-Wolf coding.',
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('optimize', parents=[common], help='search a protograph by threshold')
    p.add_argument('--cn', type=int, required=True)
    p.add_argument('--vn', type=int, required=True)
    p.add_argument('--dmax', type=int, default=10)
    p.add_argument('--pop', type=int, default=60)
    p.add_argument('--iters', type=int, default=100)
    p.add_argument('--out', type=Path, required=True)
    _add_de_options(p)
    p.set_defaults(handler=commands.cmd_optimize)

    p = sub.add_parser('extend', parents=[common], help='lift a protograph by a small factor')
    p.add_argument('--protograph', required=True, help='preset name or protograph JSON')
    p.add_argument('--factor', type=int, required=True)
    p.add_argument('--out', type=Path, required=True)
    p.set_defaults(handler=commands.cmd_extend)

    p = sub.add_parser('lift', parents=[common], help='PEG-lift a protograph into a matrix')
    p.add_argument('--protograph', required=True, help='preset name or protograph JSON')
    p.add_argument('--lifting', '-Z', type=int, required=True)
    p.add_argument('--out', type=Path, required=True)
    p.set_defaults(handler=commands.cmd_lift)

    p = sub.add_parser('ladder', parents=[common], help='build the ladder of a lifted mother')
    p.add_argument('mother', type=Path)
    p.add_argument('--protograph', required=True, help='preset name or protograph JSON')
    p.add_argument('--out-dir', type=Path, required=True)
    _add_ladder_options(p)
    p.set_defaults(handler=commands.cmd_ladder)

    p = sub.add_parser('build', parents=[common], help='extend, lift and build a ladder')
    p.add_argument('--protograph', required=True, help='preset name or protograph JSON')
    p.add_argument('--extension', type=int, default=1)
    p.add_argument('--lifting', '-Z', type=int, required=True)
    p.add_argument('--out-dir', type=Path, required=True)
    _add_ladder_options(p)
    p.set_defaults(handler=commands.cmd_build)

    p = sub.add_parser('simulate', parents=[common], help='run a BER or minimum-rate experiment')
    p.add_argument('--spec', type=Path, required=True)
    p.add_argument('--manifest', type=Path, default=None)
    p.add_argument('--rates', nargs='+', default=None, help='grid rates as num/den')
    p.add_argument('--out', type=Path, required=True)
    p.set_defaults(handler=commands.cmd_simulate)

    p = sub.add_parser('cycles', parents=[common], help='count 4-cycles along a ladder')
    p.add_argument('manifest', type=Path)
    p.add_argument('--out', type=Path, required=True)
    p.set_defaults(handler=commands.cmd_cycles)

    p = sub.add_parser('inspect', parents=[common], help='summarize an alist, protograph or ladder')
    p.add_argument('path', type=Path)
    p.set_defaults(handler=commands.cmd_inspect)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging(args.log_level)
    handler: Handler = args.handler
    try:
        return handler(args)
    except ManifestError as e:
        logger.error('Artifact error', command=args.command, error=str(e))
        return EXIT_ARTIFACT
    except ProtoladderError as e:
        logger.error(
            'Command failed',
            command=args.command,
            error=str(e),
            error_type=type(e).__name__,
        )
        return EXIT_FAILURE
    except (ValidationError, ValueError) as e:
        logger.error('Invalid input', command=args.command, error=str(e))
        return EXIT_USAGE
    except OSError as e:
        logger.error('I/O error', command=args.command, error=str(e), error_type=type(e).__name__)
        return EXIT_ARTIFACT
