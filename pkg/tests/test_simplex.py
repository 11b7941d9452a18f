"""
simplex.py のテスト（厳密有理数 LP）
"""

from fractions import Fraction as F

import pytest

from common.errors import DimensionMismatchError, LPWitnessError
from backend.simplex import Constraint, LPInstance, LPStatus, Relation, Sense, solve_lp, verify_witness


class TestSolveLP:
    """最適・実行不能・非有界の判定"""

    def test_textbook_maximum(self):
        p = LPInstance(
            objective=(F(1), F(1)),
            constraints=(
                Constraint((F(1), F(2)), Relation.LE, F(4)),
                Constraint((F(3), F(1)), Relation.LE, F(6)),
            ),
        )
        result = solve_lp(p)
        assert result.status == LPStatus.OPTIMAL
        assert result.value == F(14, 5)
        assert result.witness == (F(8, 5), F(6, 5))

    def test_equality_constraint(self):
        p = LPInstance(objective=(F(1), F(0)), constraints=(Constraint((F(1), F(1)), Relation.EQ, F(1)),))
        result = solve_lp(p)
        assert result.value == F(1)
        assert result.witness == (F(1), F(0))

    def test_redundant_equalities(self):
        p = LPInstance(
            objective=(F(1), F(0)),
            constraints=(
                Constraint((F(1), F(1)), Relation.EQ, F(1)),
                Constraint((F(2), F(2)), Relation.EQ, F(2)),
            ),
        )
        assert solve_lp(p).value == F(1)

    def test_infeasible(self):
        p = LPInstance(
            objective=(F(1),),
            constraints=(
                Constraint((F(1),), Relation.GE, F(2)),
                Constraint((F(1),), Relation.LE, F(1)),
            ),
        )
        result = solve_lp(p)
        assert result.status == LPStatus.INFEASIBLE
        assert result.witness is None

    def test_crossed_bounds_are_infeasible(self):
        p = LPInstance(objective=(F(1),), lower_bounds=(F(2),), upper_bounds=(F(1),))
        assert solve_lp(p).status == LPStatus.INFEASIBLE

    def test_unbounded(self):
        assert solve_lp(LPInstance(objective=(F(1),))).status == LPStatus.UNBOUNDED

    def test_free_variable_minimum(self):
        p = LPInstance(
            objective=(F(1),),
            sense=Sense.MIN,
            constraints=(Constraint((F(1),), Relation.GE, F(-3)),),
            lower_bounds=(None,),
        )
        result = solve_lp(p)
        assert result.value == F(-3)
        assert result.witness == (F(-3),)

    def test_box_bounds(self):
        p = LPInstance(
            objective=(F(1), F(-1)),
            lower_bounds=(F(-1), F(-1)),
            upper_bounds=(F(5, 2), F(1)),
        )
        result = solve_lp(p)
        assert result.value == F(7, 2)
        assert result.witness == (F(5, 2), F(-1))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            LPInstance(objective=(F(1), F(1)), constraints=(Constraint((F(1),), Relation.LE, F(1)),))


class TestVerifyWitness:

    def test_accepts_feasible_point(self):
        p = LPInstance(objective=(F(1),), constraints=(Constraint((F(1),), Relation.LE, F(1)),))
        verify_witness(p, (F(1, 2),))

    def test_rejects_violated_constraint(self):
        p = LPInstance(objective=(F(1),), constraints=(Constraint((F(1),), Relation.LE, F(1)),))
        with pytest.raises(LPWitnessError, match="制約 0"):
            verify_witness(p, (F(2),))

    def test_rejects_bound_violation(self):
        p = LPInstance(objective=(F(1),))
        with pytest.raises(LPWitnessError, match="上下限"):
            verify_witness(p, (F(-1),))
