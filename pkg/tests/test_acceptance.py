"""Full-size comparisons of the ladder against the LDPCA baseline."""

from __future__ import annotations

from fractions import Fraction

import pytest

from app.models.experiment import ExperimentSpec
from app.models.ladder import CodeLadder
from app.models.matrix import TypedMatrix
from app.models.protograph import DensityEvolutionParams, inverse_binary_entropy
from app.services.graph_service import peg_lift
from app.services.ladder_service import build_ladder, verify_rate_adaptive
from app.services.protograph_service import PRESET_PROTOGRAPHS
from app.services.simulation_service import cycle_report, min_rate_experiment, simulate_ber

pytestmark = pytest.mark.slow

SELECTION_DE = DensityEvolutionParams(samples=2000, max_iterations=100, tolerance=0.005)
LOW_RATES = (Fraction(1, 4), Fraction(1, 8))


@pytest.fixture(scope='module')
def extended_mother() -> TypedMatrix:
    return peg_lift(PRESET_PROTOGRAPHS['bsc-2x4-ext2'], 62, seed=1)


@pytest.fixture(scope='module')
def extended_ladder(extended_mother: TypedMatrix) -> CodeLadder:
    return build_ladder(
        extended_mother,
        PRESET_PROTOGRAPHS['bsc-2x4-ext2'],
        K=20,
        repeats=10,
        seed=0,
        fine=False,
        params=SELECTION_DE,
    )


@pytest.fixture(scope='module')
def fine_ladder() -> CodeLadder:
    S = PRESET_PROTOGRAPHS['bsc-4x8-opt']
    return build_ladder(
        peg_lift(S, 64, seed=2), S, K=20, repeats=10, seed=0, params=SELECTION_DE
    )


def test_fewer_4cycles_than_ldpca(extended_mother: TypedMatrix) -> None:
    wins = dict.fromkeys(LOW_RATES, 0)
    for seed in range(10):
        ladder = build_ladder(
            extended_mother,
            PRESET_PROTOGRAPHS['bsc-2x4-ext2'],
            K=20,
            repeats=10,
            seed=seed,
            fine=False,
            params=SELECTION_DE,
        )
        for row in cycle_report(ladder):
            if row.rate.fraction in wins:
                wins[row.rate.fraction] += row.n4_ladder < row.n4_ldpca
    assert all(count >= 9 for count in wins.values()), wins


def test_ber_not_above_ldpca(extended_ladder: CodeLadder) -> None:
    rates = [Fraction(3, 8), *LOW_RATES]
    compared = 0
    for rate in rates:
        shannon_p = inverse_binary_entropy(float(rate))
        spec = ExperimentSpec(
            mode='ber',
            code_id=extended_ladder.code_id,
            rates=[f'{rate.numerator}/{rate.denominator}'],
            p_values=[round(shannon_p * share, 5) for share in (0.4, 0.5, 0.6, 0.7, 0.8)],
            frames=10_000,
            seed=11,
        )
        points = simulate_ber(extended_ladder, spec)
        ours = {p.p: p for p in points.points if p.scheme == 'ladder'}
        for theirs in (p for p in points.points if p.scheme == 'ldpca'):
            if not 1e-4 <= theirs.ber <= 1e-1:
                continue
            compared += 1
            point = ours[theirs.p]
            if rate in LOW_RATES:
                assert point.ber <= theirs.ber, (str(rate), theirs.p)
            else:
                assert point.ci_low <= theirs.ci_high, (str(rate), theirs.p)
    assert compared >= len(rates)


@pytest.mark.parametrize('p', [0.02, 0.04, 0.06, 0.08])
def test_minimum_rate_between_entropy_and_ldpca(fine_ladder: CodeLadder, p: float) -> None:
    results = {
        result.scheme: result
        for result in min_rate_experiment(fine_ladder, p, 100, seed=5, baseline=True)
    }
    ours, theirs = results['ladder'], results['ldpca']
    assert ours.avg_rate is not None and theirs.avg_rate is not None
    assert ours.entropy < ours.avg_rate < theirs.avg_rate


def test_fine_grid_of_full_size_mother(fine_ladder: CodeLadder) -> None:
    m1, n = fine_ladder.mother.matrix.shape
    assert (m1, n) == (256, 512)
    levels = fine_ladder.grid()
    assert len(levels) == m1 - m1 // 4 + 1

    pitch = fine_ladder.mother_rate / m1
    assert pitch == Fraction(1, 512)
    rates = [level.rate for level in levels]
    assert all(high - low == pitch for high, low in zip(rates, rates[1:]))

    for upper, level in zip(levels, levels[1:]):
        assert level.intermediate is not None
        assert verify_rate_adaptive(upper.matrix, level.intermediate, level.cprime, seed=4)
