from __future__ import annotations

import numpy as np
import pytest

from app.exceptions import Unconnected
from app.models.protograph import DensityEvolutionParams, Protograph
from app.services.density_evolution import de_converges, de_threshold
from app.services.protograph_service import PRESET_PROTOGRAPHS

REGULAR_3_6 = Protograph.from_array([[3, 3]])
PARAMS = DensityEvolutionParams(samples=2000, max_iterations=60, tolerance=0.02)


def test_trivial_crossover_probabilities(rng: np.random.Generator) -> None:
    assert de_converges(REGULAR_3_6, 0.0, PARAMS, rng)[0]
    assert not de_converges(REGULAR_3_6, 0.5, PARAMS, rng)[0]


def test_clean_channel_converges(rng: np.random.Generator) -> None:
    success, iterations, error = de_converges(REGULAR_3_6, 0.02, PARAMS, rng)
    assert success
    assert 1 <= iterations <= PARAMS.max_iterations
    assert error <= PARAMS.target_error


def test_noisy_channel_fails(rng: np.random.Generator) -> None:
    success, iterations, error = de_converges(REGULAR_3_6, 0.2, PARAMS, rng)
    assert not success
    assert iterations == PARAMS.max_iterations
    assert error > 0.01


def test_unconnected_variable_type() -> None:
    with pytest.raises(Unconnected):
        de_threshold(Protograph.from_array([[1, 0, 2], [2, 0, 1]]), PARAMS)


def test_report_fields(fast_de: DensityEvolutionParams) -> None:
    report = de_threshold(REGULAR_3_6, fast_de, seed=4)
    assert 0.0 <= report.threshold <= 0.5
    assert report.converged
    assert report.evaluations >= 1
    assert report.shannon_limit == pytest.approx(0.110, abs=1e-3)
    assert report.entries == REGULAR_3_6.entries
    assert report.seed == 4


def test_row_order_does_not_change_threshold(fast_de: DensityEvolutionParams) -> None:
    S = PRESET_PROTOGRAPHS['bsc-2x4']
    permuted = Protograph.from_array(S.array[::-1])
    assert de_threshold(S, fast_de, seed=1).threshold == de_threshold(
        permuted, fast_de, seed=1
    ).threshold


def test_same_seed_same_threshold(fast_de: DensityEvolutionParams) -> None:
    S = Protograph.from_array([[2, 1, 1], [1, 1, 2]])
    first = de_threshold(S, fast_de, seed=8)
    second = de_threshold(S, fast_de, seed=8)
    assert first.threshold == second.threshold


def test_threshold_below_shannon_limit() -> None:
    report = de_threshold(REGULAR_3_6, PARAMS, seed=2)
    assert 0.04 < report.threshold < report.shannon_limit


@pytest.mark.slow
def test_regular_3_6_threshold() -> None:
    report = de_threshold(REGULAR_3_6, DensityEvolutionParams(), seed=3)
    assert report.threshold == pytest.approx(0.084, abs=0.01)


@pytest.mark.slow
def test_mother_protograph_threshold() -> None:
    report = de_threshold(PRESET_PROTOGRAPHS['bsc-2x4'], DensityEvolutionParams(), seed=3)
    assert report.threshold == pytest.approx(0.094, abs=0.005)


def test_error_is_edge_message_error(rng: np.random.Generator) -> None:
    params = DensityEvolutionParams(samples=2000, max_iterations=1)
    success, iterations, error = de_converges(REGULAR_3_6, 0.2, params, rng)
    assert not success
    assert iterations == 1
    assert 0.1 < error < 0.23
