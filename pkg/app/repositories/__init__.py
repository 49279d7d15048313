from app.repositories.alist_repository import AlistRepository
from app.repositories.ladder_repository import LadderRepository
from app.repositories.project_repository import ProjectRepository
from app.repositories.protograph_repository import ProtographRepository
from app.repositories.result_repository import ResultRepository
from app.repositories.spec_repository import SpecRepository

__all__ = [
    'AlistRepository',
    'LadderRepository',
    'ProjectRepository',
    'ProtographRepository',
    'ResultRepository',
    'SpecRepository',
]
