"""
evaluator.py のテスト（意味論・不動点反復）
"""

from fractions import Fraction as F

import pytest

from common import config
from common.config import FixpointConfig
from common.errors import (DimensionMismatchError, FixpointDivergenceError, LogicKindError,
                           RangeViolationError, UnboundVariableError)
from backend.evaluator import Evaluator, diamond, evaluate
from backend.formula import Diamond, LogicKind, One, Prop, Var
from backend.formula_parser import parse_formula
from backend.model import Valuation
from backend.sample_models import HULL_GAP_EXPERIMENT, midpoint_model, hull_gap_model, hull_gap_experiment


# ========== Fixtures ==========

@pytest.fixture
def mid_model():
    return midpoint_model()


@pytest.fixture
def gap_model():
    return hull_gap_model()


# 1/2 + v/2 は有限回の反復では 1 に届かない
HALVING = "mu v. 1/2*1 (+) 1/2*v"


# ========== 不動点を含まない式 ==========

class TestExactEvaluation:

    def test_hull_gap_experiment_formula(self, gap_model):
        phi = parse_formula(f"<a>({HULL_GAP_EXPERIMENT})")
        values = evaluate(gap_model, phi, kind=LogicKind.R)
        assert values.exact
        assert values.values == (F(38), F(39), F(60), F(0), F(0))

    def test_diamond_operator(self, gap_model):
        assert diamond(gap_model, "a", hull_gap_experiment()).values == (F(38), F(39), F(60), F(0), F(0))

    def test_positive_part(self, gap_model):
        phi = parse_formula("pos (<a>1 + (-1)*<b>1)")
        assert evaluate(gap_model, phi).values == (F(1), F(1), F(1), F(0), F(0))

    def test_unlabelled_diamond(self, mid_model):
        assert evaluate(mid_model, parse_formula("<>~<>1", LogicKind.QL)).values == (
            F(4, 5), F(4, 5), F(0), F(0))

    def test_props(self):
        from backend.model_io import model_from_dict
        model = model_from_dict({
            "states": ["s", "t"],
            "labels": ["a"],
            "props": {"p": {"s": "1/3", "t": "1"}},
        })
        assert evaluate(model, Prop("p")).values == (F(1, 3), F(1))
        with pytest.raises(UnboundVariableError, match="命題"):
            evaluate(model, Prop("q"))


class TestFixpoints:
    """Knaster–Tarski 反復"""

    def test_greatest_fixpoint(self, mid_model):
        evaluator = Evaluator(mid_model, LogicKind.QL_MU)
        values = evaluator.evaluate(parse_formula("nu v. <a>v", LogicKind.QL_MU))
        assert not values.exact
        assert values.values == pytest.approx((0.8, 0.8, 1.0, 0.0))
        trace = evaluator.traces[0]
        assert (trace.fixpoint, trace.iterations, trace.monotone) == ("nu", 3, True)

    def test_least_fixpoint_is_zero(self, mid_model):
        assert evaluate(mid_model, parse_formula("mu v. <a>v", LogicKind.QL_MU)).values == pytest.approx(
            (0.0, 0.0, 0.0, 0.0))

    def test_exact_reachability(self, mid_model):
        phi = parse_formula("mu v. ~<a>1 \\/ <a>v", LogicKind.QL_MU)
        values = evaluate(mid_model, phi, kind=LogicKind.QL_MU, exact_fixpoints=True)
        assert values.exact
        assert values.values == (F(4, 5), F(4, 5), F(0), F(1))

    def test_float_stops_at_epsilon(self, mid_model):
        phi = parse_formula(HALVING, LogicKind.LUK_MU)
        evaluator = Evaluator(mid_model, LogicKind.LUK_MU, FixpointConfig(epsilon=1e-3))
        values = evaluator.evaluate(phi)
        assert evaluator.traces[0].iterations == 10
        assert values.values[0] == pytest.approx(1 - 2 ** -10)

    def test_default_epsilon(self, mid_model):
        values = evaluate(mid_model, parse_formula(HALVING, LogicKind.LUK_MU))
        assert values.values == pytest.approx((1.0, 1.0, 1.0, 1.0), abs=1e-8)

    def test_exact_divergence(self, mid_model, monkeypatch):
        monkeypatch.setattr(config, "EXACT_FIXPOINT_MAX_ITERATIONS", 50)
        with pytest.raises(FixpointDivergenceError) as excinfo:
            evaluate(mid_model, parse_formula(HALVING, LogicKind.LUK_MU), exact_fixpoints=True)
        assert excinfo.value.iterations == 50
        assert excinfo.value.residual > 0

    def test_environment(self, mid_model):
        env = {"w": Valuation((F(0), F(0), F(1, 2), F(1)))}
        values = evaluate(mid_model, Diamond("a", Var("w")), env)
        assert values.values == (F(9, 10), F(9, 10), F(1, 2), F(0))


class TestErrors:

    def test_kind_checked(self, mid_model):
        with pytest.raises(LogicKindError):
            evaluate(mid_model, parse_formula("~1", LogicKind.QL), kind=LogicKind.R)

    def test_unlabelled_diamond_needs_single_label(self, gap_model):
        with pytest.raises(LogicKindError, match="<>"):
            evaluate(gap_model, Diamond(None, One()))

    def test_unknown_label(self, mid_model):
        with pytest.raises(LogicKindError, match="未定義のラベル"):
            evaluate(mid_model, Diamond("c", One()))

    def test_unbound_variable(self, mid_model):
        with pytest.raises(UnboundVariableError):
            evaluate(mid_model, Var("w"))

    def test_range_violation(self, mid_model):
        evaluator = Evaluator(mid_model, LogicKind.QL_MU)
        with pytest.raises(RangeViolationError, match=r"\[0,1\]"):
            evaluator.evaluate(Var("v"), {"v": Valuation((F(2), F(0), F(0), F(0)))})

    def test_environment_dimension(self, mid_model):
        with pytest.raises(DimensionMismatchError):
            evaluate(mid_model, Var("v"), {"v": Valuation((F(1),))})


def test_persistent_cache_reuses_values(gap_model):
    evaluator = Evaluator(gap_model, LogicKind.R, persistent_cache=True)
    phi = parse_formula(f"<a>({HULL_GAP_EXPERIMENT})")
    first = evaluator.evaluate(phi)
    assert evaluator.evaluate(phi) == first
