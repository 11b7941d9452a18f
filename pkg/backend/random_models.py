"""
性質テスト用の乱数モデル生成

すべて numpy の Generator を受け取り、同じシードから同じモデルを作る。
分布の確率は分母が max_denominator 以下の有理数。
"""

import itertools
import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from common import config
from backend.convex import GeneratorSet
from backend.model import PNTS, Distribution, Label, Valuation

logger = logging.getLogger(__name__)


def random_distribution(rng: np.random.Generator, n: int, max_denominator: int = 6) -> Distribution:
    """分母 d ≤ max_denominator の分布（d 個の玉を n 個の箱に投げる）"""
    d = int(rng.integers(1, max_denominator + 1))
    counts = rng.multinomial(d, np.full(n, 1.0 / n))
    return Distribution(tuple(Fraction(int(c), d) for c in counts))


def random_generator_set(
    rng: np.random.Generator,
    dimension: int,
    max_generators: int = 3,
    max_denominator: int = 6,
    allow_empty: bool = False,
) -> GeneratorSet:
    low = 0 if allow_empty else 1
    k = int(rng.integers(low, max_generators + 1))
    return GeneratorSet.of(
        (random_distribution(rng, dimension, max_denominator) for _ in range(k)),
        dimension=dimension,
    )


def _midpoint(mu: Distribution, nu: Distribution) -> Distribution:
    return Distribution(tuple((a + b) / 2 for a, b in zip(mu.entries, nu.entries)))


def _bounded_midpoint(generators: Sequence[Distribution], max_denominator: int) -> Optional[Distribution]:
    """分母が max_denominator 以下に収まる最初の生成元の組の中点（無ければ None）"""
    for mu, nu in itertools.combinations(generators, 2):
        middle = _midpoint(mu, nu)
        if all(p.denominator <= max_denominator for p in middle.entries):
            return middle
    return None


def random_pnts(
    rng: np.random.Generator,
    max_states: int = 4,
    max_generators: int = 3,
    max_denominator: int = 6,
    labels: Sequence[str] = ("a",),
    num_props: int = 0,
    min_states: int = 1,
) -> PNTS:
    """
    乱数 PNTS

    半分の確率で、ある状態の生成集合を別の状態に複製し、生成元の中点を 1 つ加える。
    中点は生成元の数が max_generators 未満で、分母が max_denominator 以下に収まるときだけ加える。
    こうしてできる状態の組は UE 双模倣になりやすいが、標準双模倣とは限らない。
    """
    n = int(rng.integers(min_states, max_states + 1))
    states = [f"s{i}" for i in range(n)]
    transitions: Dict[Tuple[int, str], List[Distribution]] = {}
    for x in range(n):
        for a in labels:
            generators = random_generator_set(rng, n, max_generators, max_denominator, allow_empty=True)
            if not generators.is_empty:
                transitions[(x, a)] = list(generators)

    if n >= 2 and rng.random() < 0.5:
        source, target = (int(v) for v in rng.choice(n, size=2, replace=False))
        for a in labels:
            generators = list(transitions.get((source, a), []))
            if 2 <= len(generators) < max_generators:
                middle = _bounded_midpoint(generators, max_denominator)
                if middle is not None:
                    generators.append(middle)
            if generators:
                transitions[(target, a)] = generators
            else:
                transitions.pop((target, a), None)

    props: Dict[str, Valuation] = {}
    for k in range(num_props):
        values = [Fraction(int(rng.integers(0, 2))) for _ in range(n)]
        props[f"p{k}"] = Valuation(tuple(values), unit_interval=True)

    return PNTS.build(states, [Label(a) for a in labels], transitions, props)


def random_valuation(
    rng: np.random.Generator,
    n: int,
    numerator_range: Optional[int] = None,
    max_denominator: Optional[int] = None,
    unit_interval: bool = False,
) -> Valuation:
    """
    乱数の有理数評価値

    unit_interval=False なら分子は [−numerator_range, numerator_range]、
    True なら [0,1] に入る p/q。
    """
    numerator_range = config.AXIOM_NUMERATOR_RANGE if numerator_range is None else numerator_range
    max_denominator = config.AXIOM_MAX_DENOMINATOR if max_denominator is None else max_denominator
    values = []
    for _ in range(n):
        q = int(rng.integers(1, max_denominator + 1))
        if unit_interval:
            p = int(rng.integers(0, q + 1))
        else:
            p = int(rng.integers(-numerator_range, numerator_range + 1))
        values.append(Fraction(p, q))
    return Valuation(tuple(values), unit_interval=unit_interval)


def random_rational(rng: np.random.Generator, nonnegative: bool = False) -> Fraction:
    q = int(rng.integers(1, config.AXIOM_MAX_DENOMINATOR + 1))
    low = 0 if nonnegative else -config.AXIOM_NUMERATOR_RANGE
    return Fraction(int(rng.integers(low, config.AXIOM_NUMERATOR_RANGE + 1)), q)


def random_nts(rng: np.random.Generator, max_states: int = 4, max_successors: int = 2) -> Dict[str, List[str]]:
    """状態名 → 後続状態名のリスト（embed_nts / nts_bisimilarity 用）"""
    n = int(rng.integers(1, max_states + 1))
    states = [f"n{i}" for i in range(n)]
    table: Dict[str, List[str]] = {}
    for s in states:
        k = int(rng.integers(0, max_successors + 1))
        picks = rng.choice(n, size=min(k, n), replace=False) if k else []
        table[s] = [states[int(i)] for i in picks]
    return table
