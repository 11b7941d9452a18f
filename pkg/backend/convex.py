"""
凸幾何の述語（LP による厳密判定）

有限生成集合 A はその凸包 H(A) を表す。有限集合の凸包は閉集合なので、
閉包演算は恒等写像として扱う。

- hull_membership: µ ∈ H(A) の判定（内側なら凸結合の重み、外側なら分離する実験 f）
- hull_equal: H(A) = H(B)
- upper_expectation / lower_expectation / upper_probability
- l1_distance_to_hull / hausdorff_distance（全変動距離）
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from common import config
from common.errors import DimensionMismatchError, EmptyHullError
from backend.model import Distribution, Number, Valuation, expected_value
from backend.simplex import Constraint, LPInstance, Relation, Sense, solve_lp

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)
NEG_ONE = Fraction(-1)


@dataclass(frozen=True)
class GeneratorSet:
    """有限・重複なしの分布集合（凸包の生成元）"""
    generators: Tuple[Distribution, ...]
    dimension: int

    @classmethod
    def of(cls, generators: Iterable[Distribution], dimension: Optional[int] = None) -> "GeneratorSet":
        unique = sorted(set(generators), key=lambda mu: mu.entries)
        if dimension is None:
            if not unique:
                raise DimensionMismatchError("空の生成集合には次元の指定が必要です")
            dimension = unique[0].dimension
        if any(mu.dimension != dimension for mu in unique):
            raise DimensionMismatchError("生成集合の分布の次元が揃っていません")
        return cls(tuple(unique), dimension)

    @property
    def is_empty(self) -> bool:
        return not self.generators

    def __len__(self) -> int:
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)


@dataclass(frozen=True)
class HullMembership:
    """
    所属判定の結果

    inside なら weights が凸結合の重み。外側なら separator f と
    gap = E_µ(f) − max_{ν∈A} E_ν(f) > 0（‖f‖∞ = 1 に正規化済み）。
    """
    inside: bool
    weights: Optional[Tuple[Fraction, ...]] = None
    separator: Optional[Valuation] = None
    gap: Optional[Fraction] = None


def _check_dimension(mu: Distribution, generators: GeneratorSet) -> None:
    if mu.dimension != generators.dimension:
        raise DimensionMismatchError(
            f"分布の次元 {mu.dimension} が生成集合の次元 {generators.dimension} と一致しません"
        )


def hull_separation(mu: Distribution, generators: GeneratorSet) -> Tuple[Valuation, Fraction]:
    """
    分離 LP: max t s.t. Σ_x f(x)(µ(x) − ν(x)) ≥ t (ν ∈ A), −1 ≤ f ≤ 1, t ≤ 1

    µ ∉ H(A) のとき最適値 t > 0。f を ‖f‖∞ = 1 に正規化し、gap を厳密に再計算して返す。
    A = ∅ のときは f = 1, gap = 1。
    """
    _check_dimension(mu, generators)
    n = mu.dimension
    if generators.is_empty:
        return Valuation((ONE,) * n), ONE

    constraints = tuple(
        Constraint(tuple(mu[x] - nu[x] for x in range(n)) + (NEG_ONE,), Relation.GE, ZERO)
        for nu in generators
    )
    p = LPInstance(
        objective=(ZERO,) * n + (ONE,),
        sense=Sense.MAX,
        constraints=constraints,
        lower_bounds=(Fraction(-1),) * n + (None,),
        upper_bounds=(ONE,) * n + (ONE,),
    )
    result = solve_lp(p)
    assert result.witness is not None
    f = result.witness[:n]
    norm = max(abs(v) for v in f)
    if norm == 0:
        return Valuation((ZERO,) * n), ZERO
    f = tuple(v / norm for v in f)
    gap = expected_value(mu, f) - max(expected_value(nu, f) for nu in generators)
    return Valuation(f), gap


def hull_membership(mu: Distribution, generators: GeneratorSet) -> HullMembership:
    """µ が H(A) に属するかを判定する"""
    _check_dimension(mu, generators)
    n = mu.dimension
    if generators.is_empty:
        f, gap = hull_separation(mu, generators)
        return HullMembership(False, separator=f, gap=gap)

    k = len(generators)
    constraints: List[Constraint] = [Constraint((ONE,) * k, Relation.EQ, ONE)]
    for x in range(n):
        constraints.append(Constraint(tuple(nu[x] for nu in generators), Relation.EQ, mu[x]))
    result = solve_lp(LPInstance(objective=(ZERO,) * k, constraints=tuple(constraints)))
    if result.is_optimal:
        assert result.witness is not None
        return HullMembership(True, weights=result.witness)

    f, gap = hull_separation(mu, generators)
    logger.debug(f"[hull_membership] 外側 gap={gap}")
    return HullMembership(False, separator=f, gap=gap)


@dataclass(frozen=True)
class HullDifference:
    """H(A) ≠ H(B) の証拠: side 側の生成元 witness が他方の凸包の外にある"""
    side: str
    witness: Distribution
    separator: Valuation
    gap: Fraction


def hull_difference(a: GeneratorSet, b: GeneratorSet) -> Optional[HullDifference]:
    """凸包が等しければ None、異なれば分離の証拠を返す"""
    if a.dimension != b.dimension:
        raise DimensionMismatchError("生成集合の次元が一致しません")
    for side, source, other in (("left", a, b), ("right", b, a)):
        for mu in source:
            membership = hull_membership(mu, other)
            if not membership.inside:
                assert membership.separator is not None and membership.gap is not None
                return HullDifference(side, mu, membership.separator, membership.gap)
    return None


def hull_equal(a: GeneratorSet, b: GeneratorSet) -> bool:
    """H(A) = H(B)（各生成元が相手の凸包に属するか）"""
    if a.generators == b.generators:
        return True
    return hull_difference(a, b) is None


def upper_expectation(generators: GeneratorSet, f: Union[Valuation, Sequence[Number]]) -> Number:
    """
    ue_A(f) = max_{µ∈A} E_µ(f)。凸包上の上限は生成元で達成される。A = ∅ なら 0
    """
    if generators.is_empty:
        values = f.values if isinstance(f, Valuation) else tuple(f)
        return ZERO if all(isinstance(v, Fraction) for v in values) else 0.0
    return max(expected_value(mu, f) for mu in generators)


def lower_expectation(generators: GeneratorSet, f: Union[Valuation, Sequence[Number]]) -> Number:
    """双対汎関数 −ue_A(−f)（A = ∅ なら 0）"""
    values = f.values if isinstance(f, Valuation) else tuple(f)
    return -upper_expectation(generators, tuple(-v for v in values))


def upper_probability(generators: GeneratorSet, event: Iterable[int]) -> Fraction:
    """up_A(event) = max_{µ∈A} µ(event)。A = ∅ なら 0"""
    members = set(event)
    if generators.is_empty:
        return ZERO
    return max(sum((mu[x] for x in members), ZERO) for mu in generators)


def l1_distance_to_hull(mu: Distribution, generators: GeneratorSet) -> Fraction:
    """
    min_{ν∈H(B)} Σ_x |µ(x) − ν(x)| をスラック変数付き LP で厳密に求める

    Raises:
        EmptyHullError: B = ∅
    """
    _check_dimension(mu, generators)
    if generators.is_empty:
        raise EmptyHullError("空の生成集合への距離は定義されません")
    n = mu.dimension
    k = len(generators)
    constraints: List[Constraint] = [Constraint((ONE,) * k + (ZERO,) * n, Relation.EQ, ONE)]
    for x in range(n):
        unit = tuple(ONE if z == x else ZERO for z in range(n))
        column = tuple(nu[x] for nu in generators)
        # s_x ≥ µ(x) − Σλν(x) と s_x ≥ Σλν(x) − µ(x)
        constraints.append(Constraint(column + unit, Relation.GE, mu[x]))
        constraints.append(Constraint(tuple(-c for c in column) + unit, Relation.GE, -mu[x]))
    result = solve_lp(LPInstance(
        objective=(ZERO,) * k + (ONE,) * n,
        sense=Sense.MIN,
        constraints=tuple(constraints),
    ))
    assert result.value is not None
    return result.value


def directed_distance(a: GeneratorSet, b: GeneratorSet) -> Fraction:
    """max_{µ∈A} d(µ, H(B))（A の生成元で最大値が達成される）"""
    if a.is_empty:
        return ZERO
    if b.is_empty:
        return config.EMPTY_HULL_DISTANCE
    return max(l1_distance_to_hull(mu, b) for mu in a)


def hausdorff_distance(a: GeneratorSet, b: GeneratorSet) -> Fraction:
    """
    凸包間の Hausdorff 距離（全変動距離）

    両方が空なら 0、一方だけが空なら config.EMPTY_HULL_DISTANCE（D(X) の L1 直径 2）。
    """
    if a.is_empty and b.is_empty:
        return ZERO
    if a.is_empty or b.is_empty:
        return config.EMPTY_HULL_DISTANCE
    return max(directed_distance(a, b), directed_distance(b, a))


def sample_hull_point(generators: GeneratorSet, rng: np.random.Generator, max_denominator: int = 12) -> Distribution:
    """凸包内の点を有理数の重みでランダムに生成する"""
    if generators.is_empty:
        raise EmptyHullError("空の生成集合から点は取れません")
    k = len(generators)
    total = int(rng.integers(1, max_denominator + 1))
    counts = rng.multinomial(total, np.full(k, 1.0 / k))
    weights = [Fraction(int(c), total) for c in counts]
    entries = [sum((w * mu[x] for w, mu in zip(weights, generators)), ZERO)
               for x in range(generators.dimension)]
    return Distribution(tuple(entries))
