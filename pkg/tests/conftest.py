from __future__ import annotations

import numpy as np
import pytest

from app.models.ladder import CodeLadder
from app.models.matrix import TypedMatrix
from app.models.protograph import DensityEvolutionParams
from app.services.graph_service import peg_lift
from app.services.ladder_service import build_ladder
from tests.helpers import FAST_DE, THREE_TYPE, TWO_TYPE


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(2019)


@pytest.fixture(scope='session')
def fast_de() -> DensityEvolutionParams:
    return FAST_DE


@pytest.fixture(scope='session')
def two_type_mother() -> TypedMatrix:
    return peg_lift(TWO_TYPE, 16, seed=3)


@pytest.fixture(scope='session')
def three_type_mother() -> TypedMatrix:
    return peg_lift(THREE_TYPE, 32, seed=11)


@pytest.fixture(scope='session')
def small_ladder(two_type_mother: TypedMatrix) -> CodeLadder:
    return build_ladder(two_type_mother, TWO_TYPE, K=4, repeats=2, seed=5, params=FAST_DE)


@pytest.fixture(scope='session')
def three_type_ladder(three_type_mother: TypedMatrix) -> CodeLadder:
    return build_ladder(three_type_mother, THREE_TYPE, K=4, repeats=2, seed=7, params=FAST_DE)
