"""
metric.py のテスト（Hausdorff 距離と Ł の式による下界）
"""

from fractions import Fraction as F

import pytest

from backend.evaluator import evaluate
from backend.metric import behavioral_metric, formula_metric_estimate, metric_comparison
from backend.model import PNTS, Label, dirac
from backend.sample_models import midpoint_model, hull_gap_model


# ========== Fixtures ==========

@pytest.fixture
def chain_model():
    """s0 -> s1 -> ... -> s8（精錬に 8 段かかる）"""
    n = 9
    return PNTS.build([f"s{i}" for i in range(n)], [Label("a")],
                      {(i, "a"): [dirac(i + 1, n)] for i in range(n - 1)})


class TestBehavioralMetric:

    def test_hull_gap_model(self):
        matrix = behavioral_metric(hull_gap_model(), "a")
        assert matrix.distance(0, 1) == F(1, 15)
        assert matrix.distance(1, 0) == F(1, 15)
        assert matrix.distance(0, 0) == 0

    def test_midpoint_model_on_quotient(self):
        matrix = behavioral_metric(midpoint_model())
        assert matrix.block_names == ("{x,y}", "x1", "x2")
        assert matrix.distance(0, 1) == 0
        assert matrix.block_distance(0, 1) == F(8, 5)
        # x2 は遷移を持たない
        assert matrix.block_distance(0, 2) == 2
        assert matrix.block_distance(1, 2) == 2

    def test_all_labels_take_maximum(self):
        matrix = behavioral_metric(hull_gap_model())
        # x1 は a、x2 は b の自己ループ
        assert matrix.distance(2, 3) == 2
        assert matrix.distance(0, 1) == F(1, 15)


class TestFormulaEstimate:
    """式による下界は ½·距離 を超えない"""

    def test_hull_gap_model_reaches_half_metric(self):
        estimate = formula_metric_estimate(hull_gap_model(), 0, 1, budget=125, label="a")
        assert estimate.value == F(1, 30)
        assert estimate.label == "a"
        values = evaluate(hull_gap_model(), estimate.formula).values
        assert abs(values[0] - values[1]) == F(1, 30)

    def test_monotone_in_budget(self):
        small = formula_metric_estimate(hull_gap_model(), 0, 1, budget=8, label="a")
        large = formula_metric_estimate(hull_gap_model(), 0, 1, budget=40, label="a")
        assert small.value <= large.value <= F(1, 30)
        assert small.evaluated == 8

    def test_bisimilar_states(self):
        estimate = formula_metric_estimate(midpoint_model(), 0, 1, budget=10)
        assert estimate.value == 0
        assert estimate.formula is None

    def test_budget_must_be_positive(self):
        with pytest.raises(ValueError, match="budget"):
            formula_metric_estimate(hull_gap_model(), 0, 1, budget=0)

    def test_long_chain_beyond_synthesis_depth(self, chain_model):
        estimate = formula_metric_estimate(chain_model, 0, 1, budget=10)
        assert estimate.value == 1
        assert behavioral_metric(chain_model).distance(0, 1) == 2


def test_comparison_bound():
    rows = metric_comparison(hull_gap_model(), budget=30, label="a")
    assert len(rows) == 10
    for row in rows:
        assert row.estimate <= row.metric / 2
    first = rows[0]
    assert (first.left, first.right, first.metric) == ("x", "y", F(1, 15))


def test_comparison_on_long_chain(chain_model):
    rows = metric_comparison(chain_model, budget=10)
    assert len(rows) == 36
    for row in rows:
        assert row.estimate <= row.metric / 2
