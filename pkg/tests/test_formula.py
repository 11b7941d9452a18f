"""
formula.py のテスト（構文木・論理の種類・整形表示・翻訳）
"""

from fractions import Fraction as F

import numpy as np
import pytest

from common.errors import LogicKindError
from backend.evaluator import evaluate
from backend.formula import (Diamond, Join, LogicKind, Meet, Minus, Mu, Neg, Nu, One, OPlus, Plus,
                             Prod, Scale, Var, Zero, check_positivity, dag_size, free_variables,
                             has_fixpoints, lukasiewicz_to_riesz, minus_to_oplus, modal_depth,
                             pretty, translate, validate_kind)
from backend.formula_enum import random_formula
from backend.formula_parser import parse_formula
from backend.random_models import random_pnts
from backend.sample_models import midpoint_model


class TestStructure:
    """部分式・深さ・自由変数"""

    def test_dag_size_counts_shared_nodes_once(self):
        shared = Diamond("a", One())
        assert dag_size(Plus(shared, shared)) == 3

    def test_modal_depth(self):
        phi = Plus(Diamond("a", Diamond("b", One())), Diamond("a", One()))
        assert modal_depth(phi) == 2
        assert modal_depth(One()) == 0

    def test_free_variables(self):
        phi = Mu("v", Plus(Var("v"), Var("w")))
        assert free_variables(phi) == frozenset({"w"})
        assert has_fixpoints(phi)
        assert not has_fixpoints(Diamond("a", One()))

    def test_positivity(self):
        assert check_positivity(Mu("v", Neg(Neg(Var("v")))))
        assert not check_positivity(Mu("v", Neg(Var("v"))))
        # 内側で束縛し直した変数は外側の否定の数に関係しない
        assert check_positivity(Neg(Mu("v", Diamond("a", Var("v")))))


class TestValidateKind:

    def test_r_rejects_negation(self):
        with pytest.raises(LogicKindError, match="Neg"):
            validate_kind(Neg(One()), LogicKind.R)

    def test_unit_kinds_reject_large_scalars(self):
        with pytest.raises(LogicKindError, match="スカラー"):
            validate_kind(Scale(F(2), One()), LogicKind.QL)
        validate_kind(Scale(F(2), One()), LogicKind.R)

    def test_connectives_per_kind(self):
        validate_kind(Minus(One(), F(1, 2)), LogicKind.QL_MINUS)
        validate_kind(Prod(One(), Zero()), LogicKind.QL_PROD)
        validate_kind(OPlus(One(), Zero()), LogicKind.LUK)
        with pytest.raises(LogicKindError):
            validate_kind(OPlus(One(), Zero()), LogicKind.QL)
        with pytest.raises(LogicKindError):
            validate_kind(Mu("v", Var("v")), LogicKind.LUK)
        validate_kind(Mu("v", Var("v")), LogicKind.LUK_MU)

    def test_fixpoint_positivity(self):
        with pytest.raises(LogicKindError, match="否定"):
            validate_kind(Nu("v", Neg(Var("v"))), LogicKind.MU)

    def test_kind_properties(self):
        assert not LogicKind.R.unit_interval
        assert LogicKind.QL.unit_interval
        assert LogicKind.MU.has_fixpoints
        assert not LogicKind.LUK.has_fixpoints


class TestPretty:
    """整形表示とパーサの往復"""

    def test_examples(self):
        assert pretty(Scale(F(-1), Diamond("a", One()))) == "(-1)*<a>1"
        assert pretty(Minus(Plus(One(), Zero()), F(1, 2))) == "(1 + 0) (-) 1/2"
        assert pretty(Diamond(None, Neg(One()))) == "<>~1"
        assert pretty(Join(Mu("v", Diamond("a", Var("v"))), One())) == "(mu v. <a>v) \\/ 1"

    def test_right_operand_parenthesized(self):
        phi = Plus(One(), Plus(Zero(), One()))
        assert pretty(phi) == "1 + (0 + 1)"
        assert parse_formula(pretty(phi)) == phi

    def test_precedence_round_trip(self):
        phi = Meet(Join(One(), Zero()), Plus(One(), Scale(F(1, 3), Zero())))
        assert parse_formula(pretty(phi), None) == phi

    @pytest.mark.parametrize("kind", list(LogicKind))
    def test_random_round_trip(self, kind):
        rng = np.random.default_rng(2024)
        for _ in range(30):
            phi = random_formula(rng, kind, ["a", "b"], depth=4, props=["p"])
            assert parse_formula(pretty(phi), kind) == phi


class TestTranslate:
    """論理間の翻訳と評価値の一致"""

    def test_minus_to_oplus(self):
        phi = Minus(Diamond("a", One()), F(1, 2))
        assert minus_to_oplus(phi) == Neg(OPlus(Neg(Diamond("a", One())), Scale(F(1, 2), One())))

    def test_lukasiewicz_to_riesz(self):
        assert lukasiewicz_to_riesz(OPlus(One(), Zero())) == Meet(Plus(One(), Zero()), One())
        assert lukasiewicz_to_riesz(Neg(Zero())) == Plus(One(), Scale(F(-1), Zero()))

    def test_unsupported(self):
        with pytest.raises(LogicKindError):
            translate(Prod(One(), One()), LogicKind.R)
        with pytest.raises(LogicKindError, match="未対応"):
            translate(One(), LogicKind.QL)

    def test_evaluation_agrees(self):
        model = midpoint_model()
        phi = parse_formula("~(<a><a>1 (-) 1/3) \\/ 1/3*<a>1", LogicKind.QL_MINUS)
        luk = translate(phi, LogicKind.LUK)
        riesz = translate(luk, LogicKind.R)
        expected = evaluate(model, phi).values
        assert evaluate(model, luk, kind=LogicKind.LUK).values == expected
        assert evaluate(model, riesz, kind=LogicKind.R).values == expected

    def test_random_agreement(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            model = random_pnts(rng, max_states=3)
            phi = random_formula(rng, LogicKind.LUK, ["a"], depth=3)
            expected = evaluate(model, phi).values
            assert evaluate(model, translate(phi, LogicKind.R)).values == expected
