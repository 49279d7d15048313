from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import pytest

from app.exceptions import ManifestError, RateOffGrid
from app.models.experiment import ExperimentSpec
from app.models.ladder import CodeLadder
from app.repositories.ladder_repository import LadderRepository
from app.services.graph_service import count_4cycles
from app.services.simulation_service import (
    SimulationService,
    cycle_report,
    min_rate_experiment,
    simulate_ber,
    wilson_interval,
)


def ber_spec(ladder: CodeLadder, **overrides: object) -> ExperimentSpec:
    data: dict[str, object] = {
        'mode': 'ber',
        'code_id': ladder.code_id,
        'p_values': [1e-6],
        'frames': 30,
        'batch_size': 10,
        'seed': 17,
    }
    data.update(overrides)
    return ExperimentSpec.model_validate(data)


class TestWilsonInterval:
    def test_no_errors(self) -> None:
        low, high = wilson_interval(0, 100)
        assert low == pytest.approx(0.0, abs=1e-12)
        assert 0.0 < high < 0.05

    def test_symmetric_at_half(self) -> None:
        low, high = wilson_interval(50, 100)
        assert 0.5 - low == pytest.approx(high - 0.5)

    def test_no_trials(self) -> None:
        assert wilson_interval(0, 0) == (0.0, 1.0)

    def test_width_shrinks_with_more_trials(self) -> None:
        low1, high1 = wilson_interval(100, 10_000)
        low2, high2 = wilson_interval(200, 20_000)
        assert (high1 - low1) / (high2 - low2) == pytest.approx(2**0.5, rel=0.05)


class TestSimulateBer:
    def test_clean_channel_has_no_errors(self, small_ladder: CodeLadder) -> None:
        result = simulate_ber(small_ladder, ber_spec(small_ladder), workers=1)
        assert result.mode == 'ber'
        assert {(str(p.rate), p.scheme) for p in result.points} == {
            ('1/2', 'ladder'),
            ('1/2', 'ldpca'),
            ('1/4', 'ladder'),
            ('1/4', 'ldpca'),
        }
        for point in result.points:
            assert point.frames == 30
            assert point.bit_errors == 0
            assert point.ber == 0.0
            assert point.ci_low == pytest.approx(0.0, abs=1e-12)
            assert point.seed == 17

    def test_explicit_fine_rate(self, small_ladder: CodeLadder) -> None:
        spec = ber_spec(small_ladder, rates=['23/64'], baseline=False)
        result = simulate_ber(small_ladder, spec, workers=1)
        assert [(p.rate.fraction, p.scheme) for p in result.points] == [
            (Fraction(23, 64), 'ladder')
        ]

    def test_off_grid_rate(self, small_ladder: CodeLadder) -> None:
        with pytest.raises(RateOffGrid):
            simulate_ber(small_ladder, ber_spec(small_ladder, rates=['1/3']), workers=1)

    def test_same_seed_same_counts(self, small_ladder: CodeLadder) -> None:
        spec = ber_spec(small_ladder, p_values=[0.06], frames=20, max_frame_errors=1000)
        first = simulate_ber(small_ladder, spec, workers=1)
        second = simulate_ber(small_ladder, spec, workers=1)
        assert [p.bit_errors for p in first.points] == [p.bit_errors for p in second.points]
        for point in first.points:
            assert point.ber == point.bit_errors / (point.frames * small_ladder.n)

    def test_stops_after_frame_error_budget(self, small_ladder: CodeLadder) -> None:
        spec = ber_spec(
            small_ladder,
            rates=['1/4'],
            p_values=[0.3],
            frames=200,
            batch_size=10,
            max_frame_errors=5,
            baseline=False,
        )
        (point,) = simulate_ber(small_ladder, spec, workers=1).points
        assert point.frame_errors >= 5
        assert point.frames < 200
        assert point.frames % 10 == 0


class TestMinRate:
    def test_clean_channel_uses_lowest_rate(self, small_ladder: CodeLadder) -> None:
        results = min_rate_experiment(small_ladder, 1e-6, 5, seed=3, baseline=True)
        by_scheme = {result.scheme: result for result in results}
        assert set(by_scheme) == {'ladder', 'ldpca'}
        for result in results:
            assert result.avg_rate == pytest.approx(0.25)
            assert result.never_decoded == 0
            assert len(result.couple_rates) == 5

    def test_hopeless_channel_never_decodes(self, small_ladder: CodeLadder) -> None:
        (result,) = min_rate_experiment(small_ladder, 0.45, 3, seed=3)
        assert result.never_decoded == 3
        assert result.avg_rate is None
        assert result.entropy == pytest.approx(0.9928, abs=1e-3)


class TestCycleReport:
    def test_mother_row_matches(self, small_ladder: CodeLadder) -> None:
        rows = cycle_report(small_ladder)
        assert [str(row.rate) for row in rows] == ['1/2', '1/4']
        mother = count_4cycles(small_ladder.mother.matrix)
        assert rows[0].n4_ladder == rows[0].n4_ldpca == mother
        assert rows[1].n4_ladder == small_ladder.anchors[0].n4


class TestSimulationService:
    def test_runs_from_saved_manifest(self, small_ladder: CodeLadder, tmp_path: Path) -> None:
        repository = LadderRepository()
        manifest = repository.save(small_ladder, tmp_path / 'ladder')
        spec = ber_spec(small_ladder, frames=10, baseline=False)
        result = SimulationService(repository).run(spec, manifest, workers=1)
        assert result.code_id == small_ladder.code_id
        assert all(point.bit_errors == 0 for point in result.points)

    def test_cycles_mode(self, small_ladder: CodeLadder, tmp_path: Path) -> None:
        repository = LadderRepository()
        manifest = repository.save(small_ladder, tmp_path / 'ladder')
        spec = ber_spec(small_ladder, mode='cycles', manifest=str(manifest))
        result = SimulationService(repository).run(spec)
        assert len(result.cycles) == 2

    def test_missing_manifest(self, small_ladder: CodeLadder) -> None:
        with pytest.raises(ManifestError):
            SimulationService(LadderRepository()).run(ber_spec(small_ladder))
