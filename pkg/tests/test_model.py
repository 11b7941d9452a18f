"""
model.py のテスト
"""

from fractions import Fraction as F

import numpy as np
import pytest

from common.errors import DimensionMismatchError, ModelFormatError
from backend.model import (PNTS, TAU, Distribution, Label, LabelKind, Partition, Valuation,
                           dirac, embed_mp, embed_nts, expected_value, is_markov_process, is_nts,
                           product_distribution, quotient_distribution, quotient_model)
from backend.random_models import random_pnts
from backend.sample_models import SAMPLE_CHAIN, SAMPLE_NTS, midpoint_model


# ========== Fixtures ==========

@pytest.fixture
def mid_model():
    return midpoint_model()


@pytest.fixture
def ue_partition_mid():
    """midpoint_model の UE 分割 {x,y},{x1},{x2}"""
    return Partition(((0, 1), (2,), (3,)))


# ========== Distribution / Label ==========

class TestDistribution:
    """Distribution の検証"""

    def test_rejects_negative_entry(self):
        with pytest.raises(ModelFormatError, match="負の確率"):
            Distribution((F(3, 2), F(-1, 2)))

    def test_rejects_mass_not_one(self):
        with pytest.raises(ModelFormatError, match="総和が 1"):
            Distribution((F(1, 2), F(1, 3)))

    def test_support_and_dirac(self):
        mu = Distribution((F(0), F(1, 4), F(3, 4)))
        assert mu.support() == (1, 2)
        assert dirac(1, 3).entries == (F(0), F(1), F(0))

    def test_dirac_out_of_range(self):
        with pytest.raises(ModelFormatError, match="範囲外"):
            dirac(3, 3)

    def test_expected_value_is_exact(self):
        mu = Distribution((F(1, 3), F(2, 3)))
        assert expected_value(mu, (F(3), F(6))) == F(5)

    def test_expected_value_dimension(self):
        with pytest.raises(DimensionMismatchError):
            expected_value(Distribution((F(1),)), (F(1), F(2)))


class TestLabel:
    """相補ラベル"""

    def test_complements(self):
        a = Label("a")
        a_bar = Label("a_bar", LabelKind.CO_NAME, "a")
        assert a.complements(a_bar)
        assert a_bar.complements(a)
        assert not a.complements(a)
        assert not a.complements(TAU)
        assert not TAU.complements(TAU)

    def test_plain_base_defaults_to_name(self):
        assert Label("b").base == "b"


# ========== Valuation / Partition ==========

class TestValuation:

    def test_unit_interval_check(self):
        with pytest.raises(ModelFormatError, match=r"\[0,1\]"):
            Valuation((F(1, 2), F(3, 2)), unit_interval=True)

    def test_indicator_and_constant(self):
        assert Valuation.indicator(3, [0, 2]).values == (F(1), F(0), F(1))
        assert Valuation.constant(2, F(1, 2)).values == (F(1, 2), F(1, 2))
        assert Valuation((F(-3), F(2))).sup_norm() == F(3)

    def test_float_mode(self):
        v = Valuation((0.5, 1), exact=False)
        assert v.values == (0.5, 1.0)


class TestPartition:
    """分割の正準形と操作"""

    def test_canonical_order(self):
        p = Partition(((3, 2), (1, 0)))
        assert p.blocks == ((0, 1), (2, 3))
        assert p.block_of == (0, 0, 1, 1)

    def test_equality_ignores_input_order(self):
        assert Partition(((2,), (1, 0))) == Partition(((0, 1), (2,)))

    def test_rejects_non_partition(self):
        with pytest.raises(ModelFormatError, match="分割していません"):
            Partition(((0,), (2,)))
        with pytest.raises(ModelFormatError, match="空のブロック"):
            Partition(((0,), ()))

    def test_from_block_index(self):
        assert Partition.from_block_index([5, 5, 7]).blocks == ((0, 1), (2,))

    def test_from_key(self):
        p = Partition.from_key(4, lambda x: x % 2)
        assert p.blocks == ((0, 2), (1, 3))

    def test_refines_and_merge(self):
        fine = Partition.identity(3)
        coarse = Partition(((0, 1), (2,)))
        assert fine.refines(coarse)
        assert not coarse.refines(fine)
        assert fine.merge(0, 1) == coarse
        assert Partition.total(3).refines(Partition.total(3))

    def test_lift_and_invariance(self, ue_partition_mid):
        lifted = ue_partition_mid.lift([F(7), F(1), F(2)])
        assert lifted == (F(7), F(7), F(1), F(2))
        assert ue_partition_mid.is_invariant(lifted)
        assert not ue_partition_mid.is_invariant((F(0), F(1), F(0), F(0)))


# ========== PNTS ==========

class TestPNTS:
    """モデルの構築と正規化"""

    def test_duplicate_generators_collapse(self):
        model = PNTS.build(["x"], [Label("a")], {(0, "a"): [dirac(0, 1), dirac(0, 1)]})
        assert len(model.successors(0, "a")) == 1

    def test_unknown_label(self):
        with pytest.raises(ModelFormatError, match="未定義のラベル"):
            PNTS.build(["x"], [Label("a")], {(0, "b"): [dirac(0, 1)]})

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            PNTS.build(["x", "y"], [Label("a")], {(0, "a"): [dirac(0, 1)]})

    def test_duplicate_state_names(self):
        with pytest.raises(ModelFormatError, match="重複"):
            PNTS.build(["x", "x"], [Label("a")], {})

    def test_lookup(self, mid_model):
        assert mid_model.state_index("x1") == 2
        assert mid_model.label_names == ("a",)
        assert mid_model.enabled_labels(3) == ()
        assert len(mid_model.successors(1, "a")) == 3
        with pytest.raises(ModelFormatError, match="未定義の状態"):
            mid_model.state_index("z")

    def test_complement_of(self):
        model = PNTS.build(["p"], [Label("a"), Label("a_bar", LabelKind.CO_NAME, "a"), TAU], {})
        assert model.complement_of("a") == "a_bar"
        assert model.complement_of("tau") is None


class TestQuotient:

    def test_quotient_distribution(self, ue_partition_mid):
        mu = Distribution((F(0), F(0), F(1, 5), F(4, 5)))
        assert quotient_distribution(mu, ue_partition_mid).entries == (F(0), F(1, 5), F(4, 5))

    def test_quotient_model(self, mid_model, ue_partition_mid):
        q = quotient_model(mid_model, ue_partition_mid)
        assert q.states == ("{x,y}", "x1", "x2")
        # x の 2 個と y の中点で 3 個
        assert len(q.successors(0, "a")) == 3
        assert q.successors(1, "a") == (dirac(1, 3),)
        assert q.successors(2, "a") == ()


class TestEmbeddings:

    def test_embed_nts(self):
        model = embed_nts(SAMPLE_NTS)
        assert model.states == ("s", "s'", "t", "t'", "u")
        assert is_nts(model)
        assert not is_markov_process(model)
        assert model.successors(4, "a") == ()

    def test_embed_mp(self):
        model = embed_mp(SAMPLE_CHAIN)
        assert model.states == ("heads", "tails", "stop")
        assert is_markov_process(model)
        assert not is_nts(model)
        assert model.successors(1, "a")[0].entries == (F(1, 3), F(2, 3), F(0))

    def test_product_distribution(self):
        mu = Distribution((F(1, 2), F(1, 2)))
        nu = dirac(1, 3)
        product = product_distribution(mu, nu, lambda x, y: x * 3 + y, 6)
        assert product.entries == (F(0), F(1, 2), F(0), F(0), F(1, 2), F(0))


class TestRandomPNTS:
    """乱数モデルは生成元の数と分母の上限を守る"""

    @pytest.mark.parametrize("seed", range(40))
    def test_generator_bounds(self, seed):
        rng = np.random.default_rng(seed)
        model = random_pnts(rng, max_states=4, max_generators=3, max_denominator=6)
        for generators in model.transitions.values():
            assert 1 <= len(generators) <= 3
            for mu in generators:
                assert all(p.denominator <= 6 for p in mu.entries)
                assert sum(mu.entries) == 1
