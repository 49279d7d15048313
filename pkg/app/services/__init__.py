from app.services.build_service import BuildService
from app.services.simulation_service import SimulationService

__all__ = ['BuildService', 'SimulationService']
