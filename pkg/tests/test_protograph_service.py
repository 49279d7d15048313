from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from app.exceptions import DimensionMismatch
from app.models.protograph import (
    BscChannel,
    DensityEvolutionParams,
    Protograph,
    Rate,
    binary_entropy,
    inverse_binary_entropy,
)
from app.services.density_evolution import de_threshold
from app.services.protograph_service import (
    PRESET_PROTOGRAPHS,
    extend_protograph,
    fold_protograph,
    proto_product,
)


class TestProtographModel:
    def test_rate_and_edges(self) -> None:
        S = PRESET_PROTOGRAPHS['bsc-2x4']
        assert S.rate == Fraction(1, 2)
        assert S.edge_count == 15

    def test_rejects_negative_entries(self) -> None:
        with pytest.raises(ValidationError):
            Protograph.from_array([[1, -1]])

    def test_rejects_rate_above_one(self) -> None:
        with pytest.raises(ValidationError):
            Protograph.from_array([[1], [1]])

    def test_canonical_key_ignores_row_order(self) -> None:
        a = Protograph.from_array([[1, 2, 1, 3], [1, 0, 2, 5]])
        b = Protograph.from_array([[1, 0, 2, 5], [1, 2, 1, 3]])
        assert a.canonical_key() == b.canonical_key()
        assert a.id != b.id

    def test_zero_columns(self) -> None:
        assert Protograph.from_array([[1, 0, 2], [1, 0, 1]]).zero_columns() == [1]


class TestRateAndChannel:
    def test_rate_from_string(self) -> None:
        rate = Rate.of('6/16')
        assert (rate.num, rate.den) == (3, 8)
        assert str(rate) == '3/8'

    def test_binary_entropy(self) -> None:
        assert binary_entropy(0.5) == pytest.approx(1.0)
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(0.11) == pytest.approx(0.4999, abs=1e-3)

    def test_inverse_entropy_at_half_rate(self) -> None:
        assert inverse_binary_entropy(0.5) == pytest.approx(0.110, abs=1e-3)

    def test_channel_sample_flip_rate(self, rng: np.random.Generator) -> None:
        x = np.zeros(20000, dtype=np.uint8)
        y = BscChannel(p=0.1).sample(x, rng)
        assert y.mean() == pytest.approx(0.1, abs=0.01)

    def test_llr_magnitude(self) -> None:
        assert BscChannel(p=0.1).llr_magnitude() == pytest.approx(np.log(9.0))
        assert BscChannel(p=0.0).llr_magnitude(clamp=25.0) == 25.0


class TestProtoProduct:
    def test_identity(self) -> None:
        S1 = PRESET_PROTOGRAPHS['bsc-2x4']
        identity = Protograph.from_array(np.eye(2, dtype=np.int64))
        assert proto_product(identity, S1).entries == S1.entries

    def test_row_sums_of_combined_rows(self) -> None:
        S1 = PRESET_PROTOGRAPHS['bsc-2x4-ext2']
        S_int = Protograph.from_array([[1, 0, 1, 0], [0, 1, 0, 1]])
        product = proto_product(S_int, S1).array
        assert product.tolist() == [
            (S1.array[0] + S1.array[2]).tolist(),
            (S1.array[1] + S1.array[3]).tolist(),
        ]

    def test_dimension_mismatch(self) -> None:
        S_int = Protograph.from_array([[1, 1, 1]])
        with pytest.raises(DimensionMismatch):
            proto_product(S_int, PRESET_PROTOGRAPHS['bsc-2x4'])


class TestExtension:
    def test_factor_one_is_identity(self) -> None:
        S = PRESET_PROTOGRAPHS['bsc-2x4']
        assert extend_protograph(S, 1, seed=0).entries == S.entries

    @pytest.mark.parametrize('factor', [2, 3, 4])
    def test_fold_recovers_base(self, factor: int) -> None:
        S = PRESET_PROTOGRAPHS['bsc-2x4']
        extended = extend_protograph(S, factor, seed=factor)
        assert extended.cn_types == 2 * factor
        assert extended.vn_types == 4 * factor
        assert fold_protograph(extended, factor, S.vn_types).entries == S.entries

    def test_block_sums_of_heaviest_entry(self) -> None:
        S = PRESET_PROTOGRAPHS['bsc-2x4']
        block = extend_protograph(S, 2, seed=9).array[0:2, 3::4]
        assert block.sum(axis=0).tolist() == [3, 3]
        assert block.sum(axis=1).tolist() == [3, 3]

    def test_extended_preset_folds_to_mother(self) -> None:
        folded = fold_protograph(PRESET_PROTOGRAPHS['bsc-2x4-ext2'], 2, 4)
        assert folded.entries == PRESET_PROTOGRAPHS['bsc-2x4'].entries

    def test_fold_rejects_unbalanced_block(self) -> None:
        S_ext = Protograph.from_array([[2, 0], [0, 1]])
        with pytest.raises(ValueError):
            fold_protograph(S_ext, 2, 1)


@pytest.mark.slow
def test_extension_keeps_threshold() -> None:
    params = DensityEvolutionParams()
    S = PRESET_PROTOGRAPHS['bsc-2x4']
    base = de_threshold(S, params, seed=3).threshold
    extended = de_threshold(extend_protograph(S, 2, seed=5), params, seed=3).threshold
    assert extended == pytest.approx(base, abs=2 * params.tolerance)
