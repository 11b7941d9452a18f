"""
bisim.py のテスト（分割精錬・検査・区別する実験）
"""

from fractions import Fraction as F

import numpy as np
import pytest

from common import config
from common.errors import ResourceLimitError
from backend.bisim import (BisimKind, all_partitions, bisimilarity, check_experiment,
                           coarsest_bisimulation_bruteforce, convex_bisimilarity,
                           distinguishing_experiment, initial_partition, is_bisimulation,
                           is_ue_bisimulation, nts_bisimilarity, refinement_rounds, selector,
                           union_upper_probabilities)
from backend.convex import GeneratorSet, upper_expectation
from backend.model import Distribution, Partition, Valuation, embed_nts
from backend.model_io import model_from_dict
from backend.random_models import random_nts, random_pnts
from backend.sample_models import SAMPLE_NTS, midpoint_model, hull_gap_model, hull_gap_experiment


# ========== Fixtures ==========

@pytest.fixture
def mid_model():
    return midpoint_model()


@pytest.fixture
def gap_model():
    return hull_gap_model()


# ========== 精錬 ==========

class TestMidpointModel:
    """midpoint_model: 標準双模倣ではないが UE 双模倣"""

    def test_standard_separates(self, mid_model):
        assert bisimilarity(mid_model, BisimKind.STANDARD) == Partition.identity(4)

    def test_ue_merges(self, mid_model):
        assert bisimilarity(mid_model, BisimKind.UE) == Partition(((0, 1), (2,), (3,)))
        assert convex_bisimilarity(mid_model) == bisimilarity(mid_model, BisimKind.UE)

    def test_up_merges(self, mid_model):
        assert bisimilarity(mid_model, BisimKind.UP) == Partition(((0, 1), (2,), (3,)))

    def test_rounds(self, mid_model):
        rounds = refinement_rounds(mid_model, BisimKind.UE)
        assert rounds == [
            Partition.total(4),
            Partition(((0, 1, 2), (3,))),
            Partition(((0, 1), (2,), (3,))),
        ]


class TestHullGapModel:
    """hull_gap_model: UP 双模倣だが UE 双模倣ではない"""

    def test_up_merges(self, gap_model):
        assert bisimilarity(gap_model, BisimKind.UP) == Partition(((0, 1), (2,), (3,), (4,)))

    def test_ue_separates(self, gap_model):
        assert bisimilarity(gap_model, BisimKind.UE) == Partition.identity(5)

    def test_rounds(self, gap_model):
        rounds = refinement_rounds(gap_model, BisimKind.UE)
        assert rounds[1] == Partition(((0, 1, 2), (3,), (4,)))
        assert rounds[-1] == Partition.identity(5)
        assert len(rounds) == 3

    def test_parallel_refinement(self, gap_model):
        assert bisimilarity(gap_model, BisimKind.UE, max_workers=2) == bisimilarity(gap_model, BisimKind.UE)

    def test_up_guard(self, gap_model, monkeypatch):
        monkeypatch.setattr(config, "UP_BLOCK_GUARD", 1)
        with pytest.raises(ResourceLimitError, match="上限"):
            bisimilarity(gap_model, BisimKind.UP)

    def test_up_partition_is_not_ue_bisimulation(self, gap_model):
        check = is_ue_bisimulation(gap_model, Partition(((0, 1), (2,), (3,), (4,))))
        assert check.holds is False
        witness = check.counterexample
        assert (witness.x, witness.y, witness.label) == (0, 1, "a")
        assert witness.gap > 0
        # 実験はブロック {x, y} 上で定数
        assert witness.separator.values[0] == witness.separator.values[1]
        upper = [
            upper_expectation(GeneratorSet.of(gap_model.successors(s, "a"), 5), witness.separator)
            for s in (0, 1)
        ]
        assert abs(upper[0] - upper[1]) == witness.gap


class TestSelector:

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="不明な双模倣"):
            selector.get_splitter("weak")

    def test_initial_partition_uses_props(self):
        model = model_from_dict({
            "states": ["s", "t", "u"],
            "labels": ["a"],
            "props": {"p": {"s": "1", "t": "0", "u": "1"}},
        })
        assert initial_partition(model) == Partition(((0, 2), (1,)))
        assert bisimilarity(model, BisimKind.UE) == Partition(((0, 2), (1,)))


def test_union_upper_probabilities():
    a = GeneratorSet.of([Distribution((F(1, 2), F(1, 2))), Distribution((F(1), F(0)))])
    # 部分集合 ∅, {0}, {1}, {0,1}
    assert union_upper_probabilities(a) == (F(0), F(1), F(1, 2), F(1))


# ========== 検査と実験 ==========

class TestChecks:

    def test_is_ue_bisimulation(self, mid_model):
        assert is_ue_bisimulation(mid_model, Partition(((0, 1), (2,), (3,)))).holds

    def test_counterexample(self, mid_model):
        check = is_ue_bisimulation(mid_model, Partition.total(4))
        assert not check.holds
        c = check.counterexample
        assert (c.x, c.y, c.label) == (0, 3, "a")
        assert c.gap == 1

    def test_prop_counterexample(self):
        model = model_from_dict({
            "states": ["s", "t"],
            "labels": ["a"],
            "props": {"p": {"s": "1", "t": "1/2"}},
        })
        check = is_ue_bisimulation(model, Partition.total(2))
        assert check.counterexample.label is None
        assert check.counterexample.gap == F(1, 2)

    def test_is_bisimulation_standard(self, mid_model):
        partition = Partition(((0, 1), (2,), (3,)))
        assert not is_bisimulation(mid_model, partition, BisimKind.STANDARD)
        assert is_bisimulation(mid_model, partition, BisimKind.UE)


class TestExperiments:
    """区別する実験とその証明書"""

    def test_bisimilar_states(self, mid_model):
        assert distinguishing_experiment(mid_model, 0, 1) is None
        assert distinguishing_experiment(mid_model, 2, 2) is None

    def test_hull_gap_experiment(self, gap_model):
        experiment = distinguishing_experiment(gap_model, 0, 1)
        assert experiment.label == "a"
        assert experiment.gap > 0
        check = check_experiment(gap_model, 0, 1, experiment.label, experiment.f)
        assert check.accepted
        assert check.gap == experiment.gap

    def test_published_experiment(self, gap_model):
        check = check_experiment(gap_model, 0, 1, "a", hull_gap_experiment())
        assert check.accepted
        assert check.gap == 1

    def test_rejects_non_invariant(self, mid_model):
        f = Valuation((F(1), F(0), F(0), F(0)))
        check = check_experiment(mid_model, 0, 3, "a", f)
        assert not check.accepted
        assert "定数" in check.reason

    def test_rejects_zero_gap(self, mid_model):
        f = Valuation((F(0), F(0), F(1), F(1)))
        assert not check_experiment(mid_model, 0, 1, "a", f).accepted


# ========== オラクル ==========

class TestOracles:

    def test_all_partitions_count(self):
        # Bell 数
        assert [sum(1 for _ in all_partitions(n)) for n in range(1, 6)] == [1, 2, 5, 15, 52]

    def test_bruteforce_figures(self, mid_model, gap_model):
        assert coarsest_bisimulation_bruteforce(mid_model, BisimKind.UE) == bisimilarity(mid_model, BisimKind.UE)
        assert coarsest_bisimulation_bruteforce(gap_model, BisimKind.UP) == bisimilarity(gap_model, BisimKind.UP)

    def test_bruteforce_random(self):
        rng = np.random.default_rng(11)
        for _ in range(15):
            model = random_pnts(rng, max_states=3, max_generators=2, max_denominator=4)
            for kind in BisimKind:
                assert coarsest_bisimulation_bruteforce(model, kind) == bisimilarity(model, kind)

    def test_nts_sample(self):
        expected = Partition(((0,), (1,), (2, 3), (4,)))
        assert nts_bisimilarity(SAMPLE_NTS) == expected
        assert bisimilarity(embed_nts(SAMPLE_NTS), BisimKind.STANDARD) == expected

    def test_nts_embedding_random(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            table = random_nts(rng)
            model = embed_nts(table)
            for kind in BisimKind:
                assert bisimilarity(model, kind) == nts_bisimilarity(table)
