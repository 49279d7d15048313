from __future__ import annotations

import shutil
from pathlib import Path
from typing import Optional

import structlog

from app import __version__
from app.config import settings
from app.models.ladder import CodeLadder
from app.models.project import ProjectManifest
from app.models.protograph import DensityEvolutionParams, Protograph
from app.repositories.ladder_repository import LadderRepository
from app.repositories.project_repository import ProjectRepository
from app.repositories.protograph_repository import ProtographRepository
from app.services.graph_service import peg_lift
from app.services.ladder_service import build_ladder, derive_seed
from app.services.protograph_service import extend_protograph

logger = structlog.get_logger(__name__)

EXTEND_STREAM = 1
LIFT_STREAM = 2


class BuildService:
    """extend -> lift -> ladder, with every artifact written under one directory."""

    def __init__(
        self,
        repository: LadderRepository,
        protographs: Optional[ProtographRepository] = None,
    ) -> None:
        self._repository = repository
        self._protographs = protographs or ProtographRepository()

    def build(
        self,
        protograph: Protograph,
        out_dir: Path,
        extension: int = 1,
        lifting: int = 1,
        K: Optional[int] = None,
        repeats: Optional[int] = None,
        seed: Optional[int] = None,
        *,
        fine: bool = True,
        params: Optional[DensityEvolutionParams] = None,
        workers: Optional[int] = None,
    ) -> tuple[CodeLadder, ProjectManifest]:
        seed = settings.default_seed if seed is None else seed
        created = not out_dir.exists()
        logger.info(
            'Building code family',
            protograph_id=protograph.id,
            extension=extension,
            lifting=lifting,
            seed=seed,
            out_dir=str(out_dir),
        )

        try:
            extended = extend_protograph(protograph, extension, derive_seed(seed, EXTEND_STREAM))
            mother = peg_lift(extended, lifting, derive_seed(seed, LIFT_STREAM))
            logger.info('Mother matrix lifted', shape=mother.matrix.shape)
            ladder = build_ladder(
                mother,
                extended,
                K,
                repeats,
                seed,
                fine=fine,
                params=params,
                workers=workers,
            )

            protograph_dir = out_dir / 'protographs'
            protograph_paths = {
                'mother': self._protographs.save(protograph_dir / 'mother.json', protograph),
                'extended': self._protographs.save(protograph_dir / 'extended.json', extended),
            }
            for t, anchor in enumerate(ladder.anchors, start=2):
                protograph_paths[f'anchor_{t}'] = self._protographs.save(
                    protograph_dir / f'anchor_{t}.json',
                    anchor.protograph,
                    anchor.threshold,
                )
            ladder_path = self._repository.save(ladder, out_dir / 'ladder')

            manifest = ProjectManifest(
                protographs={k: p.relative_to(out_dir) for k, p in protograph_paths.items()},
                matrices={
                    k: p.relative_to(out_dir)
                    for k, p in self._repository.matrix_paths(ladder_path).items()
                },
                ladder_manifest=ladder_path.relative_to(out_dir),
                seed=seed,
                tool_version=__version__,
            )
            ProjectRepository(out_dir).save(manifest)
        except Exception as e:
            logger.error(
                'Build failed',
                protograph_id=protograph.id,
                error=str(e),
                error_type=type(e).__name__,
                exc_info=True,
            )
            if created and out_dir.exists():
                shutil.rmtree(out_dir, ignore_errors=True)
                logger.info('Removed partial build output', out_dir=str(out_dir))
            raise

        logger.info(
            'Code family built',
            code_id=ladder.code_id,
            rates=[str(rate) for rate in ladder.anchor_rates],
            grid_levels=len(ladder.grid()),
        )
        return ladder, manifest
