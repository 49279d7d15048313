from app.models.codec import DecodeResult, DecoderConfig, LdpcaCode
from app.models.experiment import (
    CycleRow,
    ExperimentSpec,
    MinRateResult,
    PointResult,
    SimResult,
)
from app.models.ladder import (
    AnchorStep,
    CodeLadder,
    FineStep,
    GridLevel,
    IntermediateMatrix,
    ProtoCircleResult,
)
from app.models.matrix import BinaryMatrix, BitVector, TypedMatrix, as_bits
from app.models.project import ProjectManifest
from app.models.protograph import (
    BscChannel,
    DensityEvolutionParams,
    Protograph,
    Rate,
    ThresholdReport,
    binary_entropy,
    inverse_binary_entropy,
)

__all__ = [
    'AnchorStep',
    'BinaryMatrix',
    'BitVector',
    'BscChannel',
    'CodeLadder',
    'CycleRow',
    'DecodeResult',
    'DecoderConfig',
    'DensityEvolutionParams',
    'ExperimentSpec',
    'FineStep',
    'GridLevel',
    'IntermediateMatrix',
    'LdpcaCode',
    'MinRateResult',
    'PointResult',
    'ProjectManifest',
    'ProtoCircleResult',
    'Protograph',
    'Rate',
    'SimResult',
    'ThresholdReport',
    'TypedMatrix',
    'as_bits',
    'binary_entropy',
    'inverse_binary_entropy',
]
