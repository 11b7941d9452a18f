"""
formula_parser.py のテスト
"""

from fractions import Fraction as F

import pytest

from common.errors import FormulaSyntaxError, LogicKindError
from backend.formula import (Diamond, Join, LogicKind, Meet, Minus, Mu, Neg, Nu, One, OPlus, Plus,
                             PosPart, Prod, Prop, Scale, Var, Zero)
from backend.formula_parser import parse_formula
from backend.sample_models import HULL_GAP_EXPERIMENT


class TestLexing:
    """字句の切り出し（数・ラベル・キーワード）"""

    def test_operators_and_labels(self):
        phi = parse_formula("<a>1 \\/ <>x (-) 1/2", None)
        assert phi == Join(Diamond("a", One()), Minus(Diamond(None, Var("x")), F(1, 2)))

    def test_keywords_are_reserved_prefixes_only(self):
        assert parse_formula("mu v. pos v", None) == Mu("v", PosPart(Var("v")))
        assert parse_formula("mux", None) == Var("mux")
        assert parse_formula("pos'", None) == Var("pos'")

    def test_parenthesized_scalar_with_spaces(self):
        assert parse_formula("( -1/2 ) * <a>1", None) == Scale(F(-1, 2), Diamond("a", One()))

    def test_parenthesized_number_is_constant(self):
        assert parse_formula("(1)", None) == One()
        assert parse_formula("(-1) + 1", None) == Plus(Scale(F(-1), One()), One())


class TestParse:
    """文法と結合の強さ"""

    @pytest.mark.parametrize("text, expected", [
        ("1", One()),
        ("0", Zero()),
        ("1/2", Scale(F(1, 2), One())),
        ("0.25", Scale(F(1, 4), One())),
        ("<a>1 + 2*<b>0", Plus(Diamond("a", One()), Scale(F(2), Diamond("b", Zero())))),
        ("1 \\/ 0 /\\ 1", Join(One(), Meet(Zero(), One()))),
        ("1 + 0 + 1", Plus(Plus(One(), Zero()), One())),
        ("(-1)*<a>1", Scale(F(-1), Diamond("a", One()))),
        ("pos <a>1", PosPart(Diamond("a", One()))),
        ("<>~1", Diamond(None, Neg(One()))),
    ])
    def test_riesz_and_shared_syntax(self, text, expected):
        assert parse_formula(text, None) == expected

    def test_fixpoint_body_extends_right(self):
        phi = parse_formula("mu v. <a>v \\/ prop(p)", LogicKind.QL_MU)
        assert phi == Mu("v", Join(Diamond("a", Var("v")), Prop("p")))

    def test_parenthesized_fixpoint(self):
        phi = parse_formula("(nu v. <a>v) /\\ 1", LogicKind.QL_MU)
        assert phi == Meet(Nu("v", Diamond("a", Var("v"))), One())

    def test_lukasiewicz_connectives(self):
        assert parse_formula("<a>1 (+) ~<a>1", LogicKind.LUK) == OPlus(Diamond("a", One()),
                                                                      Neg(Diamond("a", One())))
        assert parse_formula("<a>1 (-) 1/3", LogicKind.QL_MINUS) == Minus(Diamond("a", One()), F(1, 3))
        assert parse_formula("<a>1 . <b>1", LogicKind.QL_PROD) == Prod(Diamond("a", One()),
                                                                      Diamond("b", One()))

    def test_prod_binds_tighter_than_plus(self):
        phi = parse_formula("1 (+) 0 . 1", LogicKind.MU)
        assert phi == OPlus(One(), Prod(Zero(), One()))

    def test_hull_gap_experiment(self):
        phi = parse_formula(f"<a>({HULL_GAP_EXPERIMENT})")
        assert isinstance(phi, Diamond)
        assert phi.body.left == Scale(F(60), Diamond("a", One()))


class TestErrors:

    @pytest.mark.parametrize("text, position", [
        ("1 +", 3),
        ("1 1", 2),
        ("(1", 2),
        ("mu . 1", 3),
    ])
    def test_syntax_error_positions(self, text, position):
        with pytest.raises(FormulaSyntaxError) as excinfo:
            parse_formula(text, None)
        assert excinfo.value.position == position

    def test_end_of_input_message(self):
        with pytest.raises(FormulaSyntaxError, match="入力の終わり"):
            parse_formula("1 +", None)

    def test_trailing_input(self):
        with pytest.raises(FormulaSyntaxError, match="余分な入力"):
            parse_formula("1 )", None)

    def test_invalid_character(self):
        with pytest.raises(FormulaSyntaxError, match="不正な文字") as excinfo:
            parse_formula("1 $", None)
        assert excinfo.value.position == 2

    def test_zero_denominator(self):
        with pytest.raises(FormulaSyntaxError, match="数として解釈できません") as excinfo:
            parse_formula("<a>1 + 1/0", None)
        assert excinfo.value.position == 7

    def test_missing_paren_at_end(self):
        with pytest.raises(FormulaSyntaxError, match="入力の終わり") as excinfo:
            parse_formula("(<a>1 + 1", None)
        assert excinfo.value.position == 9

    def test_kind_violations(self):
        with pytest.raises(LogicKindError, match="使えません"):
            parse_formula("~1", LogicKind.R)
        with pytest.raises(LogicKindError, match=r"\[0,1\] の有理数"):
            parse_formula("2*1", LogicKind.QL)
        with pytest.raises(LogicKindError, match="奇数個の否定"):
            parse_formula("mu v. ~v", LogicKind.QL_MU)
        with pytest.raises(LogicKindError):
            parse_formula("1 + 1", LogicKind.LUK)

    def test_default_kind_is_riesz(self):
        with pytest.raises(LogicKindError):
            parse_formula("mu v. v")
