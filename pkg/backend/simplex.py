"""
厳密有理数の二段階単体法

- 係数・解はすべて ``fractions.Fraction``（浮動小数点の LP は使わない）
- ピボット規則は Bland の規則（最小添字）なので巡回せず、結果は再現可能
- 実行不能・非有界は例外ではなく ``LPStatus`` の値として返す
"""

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction as Frac
from typing import List, Optional, Sequence, Set, Tuple

from common import config
from common.errors import DimensionMismatchError, LPWitnessError

logger = logging.getLogger(__name__)

ZERO = Frac(0)


class Sense(Enum):
    MAX = "max"
    MIN = "min"


class Relation(Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class LPStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class Constraint:
    coefficients: Tuple[Frac, ...]
    relation: Relation
    rhs: Frac

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficients", tuple(Frac(a) for a in self.coefficients))
        object.__setattr__(self, "rhs", Frac(self.rhs))

    def holds(self, x: Sequence[Frac]) -> bool:
        lhs = sum((a * v for a, v in zip(self.coefficients, x) if a), ZERO)
        if self.relation == Relation.LE:
            return lhs <= self.rhs
        if self.relation == Relation.GE:
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass(frozen=True)
class LPInstance:
    """
    LP 問題

    変数の下限の既定値は 0、上限の既定値は +∞。None は無限を表す。
    """
    objective: Tuple[Frac, ...]
    sense: Sense = Sense.MAX
    constraints: Tuple[Constraint, ...] = ()
    lower_bounds: Optional[Tuple[Optional[Frac], ...]] = None
    upper_bounds: Optional[Tuple[Optional[Frac], ...]] = None

    def __post_init__(self) -> None:
        n = len(self.objective)
        object.__setattr__(self, "objective", tuple(Frac(c) for c in self.objective))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        lower = self.lower_bounds if self.lower_bounds is not None else (ZERO,) * n
        upper = self.upper_bounds if self.upper_bounds is not None else (None,) * n
        if len(lower) != n or len(upper) != n:
            raise DimensionMismatchError("変数の上下限の数が目的関数の次元と一致しません")
        for c in self.constraints:
            if len(c.coefficients) != n:
                raise DimensionMismatchError(
                    f"制約の係数の数 {len(c.coefficients)} が変数の数 {n} と一致しません"
                )
        object.__setattr__(self, "lower_bounds", tuple(None if v is None else Frac(v) for v in lower))
        object.__setattr__(self, "upper_bounds", tuple(None if v is None else Frac(v) for v in upper))

    @property
    def num_variables(self) -> int:
        return len(self.objective)


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    value: Optional[Frac] = None
    witness: Optional[Tuple[Frac, ...]] = None

    @property
    def is_optimal(self) -> bool:
        return self.status == LPStatus.OPTIMAL


class SimplexTableau:
    """
    標準形 max c·y, A y = b, y ≥ 0 の単体表（b ≥ 0、初期基底は与えられる）
    """

    def __init__(self, rows: List[List[Frac]], rhs: List[Frac], basis: List[int]) -> None:
        self.A = rows
        self.b = rhs
        self.basis = basis
        self.m = len(rows)
        self.n = len(rows[0]) if rows else 0
        self.pivots = 0

    def pivot(self, i: int, j: int) -> None:
        piv = self.A[i][j]
        row = [a / piv for a in self.A[i]]
        self.A[i] = row
        self.b[i] /= piv
        for k in range(self.m):
            if k == i:
                continue
            f = self.A[k][j]
            if f:
                self.A[k] = [a - f * r for a, r in zip(self.A[k], row)]
                self.b[k] -= f * self.b[i]
        self.basis[i] = j
        self.pivots += 1

    def reduced_cost(self, cost: Sequence[Frac], j: int) -> Frac:
        return cost[j] - sum((cost[self.basis[i]] * self.A[i][j]
                              for i in range(self.m) if self.A[i][j]), ZERO)

    def bland_primal_step(self, cost: Sequence[Frac], allowed: Set[int]) -> str:
        in_basis = set(self.basis)
        entering = next((j for j in range(self.n)
                         if j in allowed and j not in in_basis
                         and self.reduced_cost(cost, j) > 0), None)
        if entering is None:
            return "optimal"
        try:
            _, _, i = min((self.b[i] / self.A[i][entering], self.basis[i], i)
                          for i in range(self.m)
                          if self.A[i][entering] > 0)
        except ValueError:
            return "unbounded"
        self.pivot(i, entering)
        return "go_on"

    def bland_primal(self, cost: Sequence[Frac], allowed: Set[int]) -> str:
        while True:
            ret = self.bland_primal_step(cost, allowed)
            if ret in ("optimal", "unbounded"):
                return ret

    def objective_value(self, cost: Sequence[Frac]) -> Frac:
        return sum((cost[self.basis[i]] * self.b[i] for i in range(self.m)), ZERO)

    def drop_row(self, i: int) -> None:
        del self.A[i]
        del self.b[i]
        del self.basis[i]
        self.m -= 1

    def solution(self) -> List[Frac]:
        y = [ZERO] * self.n
        for i, j in enumerate(self.basis):
            y[j] = self.b[i]
        return y


def _substitution(p: LPInstance) -> Tuple[List[Tuple[Frac, List[Tuple[int, Frac]]]], List[Tuple[List[Tuple[int, Frac]], Frac]], int]:
    """
    元の変数 x_j を非負変数 y の式 offset + Σ coef·y に置き換える

    Returns:
        (変数ごとの (offset, [(列, 係数)]), 上限由来の追加制約 [(項, 右辺)], y の列数)
    """
    mapping: List[Tuple[Frac, List[Tuple[int, Frac]]]] = []
    bound_rows: List[Tuple[List[Tuple[int, Frac]], Frac]] = []
    cols = 0
    for low, high in zip(p.lower_bounds, p.upper_bounds):
        if low is not None:
            mapping.append((low, [(cols, Frac(1))]))
            if high is not None:
                bound_rows.append(([(cols, Frac(1))], high - low))
            cols += 1
        elif high is not None:
            mapping.append((high, [(cols, Frac(-1))]))
            cols += 1
        else:
            mapping.append((ZERO, [(cols, Frac(1)), (cols + 1, Frac(-1))]))
            cols += 2
    return mapping, bound_rows, cols


def solve_lp(p: LPInstance) -> LPResult:
    """
    LP を厳密に解く

    Returns:
        LPResult: OPTIMAL なら最適値と実行可能解（witness）、それ以外は状態のみ
    """
    if any(low is not None and high is not None and high < low
           for low, high in zip(p.lower_bounds, p.upper_bounds)):
        return LPResult(LPStatus.INFEASIBLE)

    mapping, bound_rows, num_y = _substitution(p)

    # 制約を y の式に変換（右辺は非負に正規化）
    raw_rows: List[Tuple[List[Frac], Relation, Frac]] = []
    for c in p.constraints:
        coeffs = [ZERO] * num_y
        rhs = c.rhs
        for a, (offset, terms) in zip(c.coefficients, mapping):
            if not a:
                continue
            rhs -= a * offset
            for col, coef in terms:
                coeffs[col] += a * coef
        raw_rows.append((coeffs, c.relation, rhs))
    for terms, rhs in bound_rows:
        coeffs = [ZERO] * num_y
        for col, coef in terms:
            coeffs[col] += coef
        raw_rows.append((coeffs, Relation.LE, rhs))

    flip = {Relation.LE: Relation.GE, Relation.GE: Relation.LE, Relation.EQ: Relation.EQ}
    rows_std: List[Tuple[List[Frac], Relation, Frac]] = []
    for coeffs, rel, rhs in raw_rows:
        if rhs < 0:
            rows_std.append(([-a for a in coeffs], flip[rel], -rhs))
        else:
            rows_std.append((coeffs, rel, rhs))

    # 列: y | スラック・余剰 | 人工変数
    num_slack = sum(1 for _, rel, _ in rows_std if rel != Relation.EQ)
    num_art = sum(1 for _, rel, _ in rows_std if rel != Relation.LE)
    total = num_y + num_slack + num_art
    rows: List[List[Frac]] = []
    rhs_list: List[Frac] = []
    basis: List[int] = []
    slack_col = num_y
    art_col = num_y + num_slack
    artificials: Set[int] = set()
    for coeffs, rel, rhs in rows_std:
        row = coeffs + [ZERO] * (num_slack + num_art)
        if rel == Relation.LE:
            row[slack_col] = Frac(1)
            basis.append(slack_col)
            slack_col += 1
        else:
            if rel == Relation.GE:
                row[slack_col] = Frac(-1)
                slack_col += 1
            row[art_col] = Frac(1)
            basis.append(art_col)
            artificials.add(art_col)
            art_col += 1
        rows.append(row)
        rhs_list.append(rhs)

    tableau = SimplexTableau(rows, rhs_list, basis)
    tableau.n = total

    # 第1段階
    if artificials:
        phase1_cost = [Frac(-1) if j in artificials else ZERO for j in range(total)]
        tableau.bland_primal(phase1_cost, set(range(total)))
        if tableau.objective_value(phase1_cost) < 0:
            logger.debug(f"[solve_lp] 実行不能 (ピボット {tableau.pivots} 回)")
            return LPResult(LPStatus.INFEASIBLE)
        # 基底に残った人工変数を追い出す（追い出せない行は冗長なので削除）
        i = 0
        while i < tableau.m:
            if tableau.basis[i] in artificials:
                j = next((j for j in range(total)
                          if j not in artificials and tableau.A[i][j] != 0), None)
                if j is None:
                    tableau.drop_row(i)
                    continue
                tableau.pivot(i, j)
            i += 1

    # 第2段階
    sign = Frac(1) if p.sense == Sense.MAX else Frac(-1)
    cost = [ZERO] * total
    for c, (_, terms) in zip(p.objective, mapping):
        for col, coef in terms:
            cost[col] += sign * c * coef
    allowed = set(range(total)) - artificials
    if tableau.bland_primal(cost, allowed) == "unbounded":
        logger.debug(f"[solve_lp] 非有界 (ピボット {tableau.pivots} 回)")
        return LPResult(LPStatus.UNBOUNDED)

    y = tableau.solution()
    x = tuple(offset + sum((coef * y[col] for col, coef in terms), ZERO)
              for offset, terms in mapping)
    value = sum((c * v for c, v in zip(p.objective, x)), ZERO)
    logger.debug(f"[solve_lp] 最適値 {value} (ピボット {tableau.pivots} 回)")

    if config.LP_VERIFY_WITNESS:
        verify_witness(p, x)
    return LPResult(LPStatus.OPTIMAL, value, x)


def verify_witness(p: LPInstance, x: Sequence[Frac]) -> None:
    """解を元の制約・上下限に代入して検査する"""
    for k, c in enumerate(p.constraints):
        if not c.holds(x):
            raise LPWitnessError(f"制約 {k} を満たしません: {c.relation.value} {c.rhs}")
    for j, (v, low, high) in enumerate(zip(x, p.lower_bounds, p.upper_bounds)):
        if (low is not None and v < low) or (high is not None and v > high):
            raise LPWitnessError(f"変数 {j} = {v} が上下限 [{low}, {high}] の外にあります")
