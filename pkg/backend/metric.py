"""
振る舞い距離

- behavioral_metric: UE 商モデル上で、ブロックの遷移集合の凸包間の Hausdorff 距離（全変動）
- formula_metric_estimate: Ł の式 φ について |⟦◇φ⟧(x) − ⟦◇φ⟧(y)| の最大値を列挙で下から近似する
- metric_comparison: ブロックの組ごとに両者と比 estimate / (½·metric) を並べる
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Tuple

from common.utils import stern_brocot_levels
from backend.bisim import BisimKind, bisimilarity
from backend.convex import GeneratorSet, hausdorff_distance
from backend.evaluator import Evaluator
from backend.formula import Diamond, Formula, LogicKind, OPlus, Scale, Zero
from backend.model import PNTS, Partition, block_name, quotient_model
from backend.synthesis import FormulaSynthesizer

logger = logging.getLogger(__name__)

ZERO = Fraction(0)


@dataclass(frozen=True)
class MetricMatrix:
    """UE ブロック間の距離行列（対角は 0）"""
    partition: Partition
    block_names: Tuple[str, ...]
    label: Optional[str]
    values: Tuple[Tuple[Fraction, ...], ...]

    def block_distance(self, i: int, j: int) -> Fraction:
        return self.values[i][j]

    def distance(self, x: int, y: int) -> Fraction:
        """状態 x, y の距離（それぞれのブロックの行を使う）"""
        return self.values[self.partition.block_of[x]][self.partition.block_of[y]]


def _label_distance(quotient: PNTS, i: int, j: int, label: str) -> Fraction:
    n = quotient.num_states
    return hausdorff_distance(GeneratorSet.of(quotient.successors(i, label), n),
                              GeneratorSet.of(quotient.successors(j, label), n))


def behavioral_metric(model: PNTS, label: Optional[str] = None) -> MetricMatrix:
    """
    UE 商モデル上の Hausdorff 距離

    label が None のときはラベルごとの距離の最大値（ラベルがなければすべて 0）。
    遷移集合の一方だけが空なら config.EMPTY_HULL_DISTANCE。
    """
    partition = bisimilarity(model, BisimKind.UE)
    quotient = quotient_model(model, partition)
    labels = list(model.label_names) if label is None else [model.label(label).name]
    k = len(partition)
    rows = [[ZERO] * k for _ in range(k)]
    for i in range(k):
        for j in range(i + 1, k):
            d = max((_label_distance(quotient, i, j, a) for a in labels), default=ZERO)
            rows[i][j] = rows[j][i] = d
    logger.debug(f"[behavioral_metric] {k} ブロック, ラベル {labels}")
    return MetricMatrix(
        partition,
        tuple(block_name(model, b) for b in partition.blocks),
        label,
        tuple(tuple(r) for r in rows),
    )


@dataclass(frozen=True)
class MetricEstimate:
    """式による下界と、それを達成した ◇φ"""
    value: Fraction
    formula: Optional[Formula]
    label: Optional[str]
    evaluated: int


def _assignments(size: int) -> Iterator[Tuple[Fraction, ...]]:
    """[0,1] の値の組を Stern–Brocot 木の段の順に（各段で新しく現れる組だけ）列挙する"""
    if size == 0:
        yield ()
        return
    depth = 0
    while True:
        levels = stern_brocot_levels(depth)
        newest = set(levels[-1])
        values = sorted(q for level in levels for q in level)
        for combo in itertools.product(values, repeat=size):
            if depth == 0 or any(q in newest for q in combo):
                yield combo
        depth += 1


def formula_metric_estimate(
    model: PNTS,
    x: int,
    y: int,
    budget: int,
    label: Optional[str] = None,
    synthesizer: Optional[FormulaSynthesizer] = None,
) -> MetricEstimate:
    """
    max |⟦◇_a φ⟧(x) − ⟦◇_a φ⟧(y)|（φ ∈ Ł を budget 個まで）

    φ は α_a(x) ∪ α_a(y) の台に現れる UE ブロック B の指示関数 I_B を使った
    ⊕_B q_B·I_B で、q の組を Stern–Brocot 木の段の順に試す。budget について単調非減少。
    """
    if budget < 1:
        raise ValueError("budget は 1 以上が必要です")
    synthesizer = synthesizer or FormulaSynthesizer(model, LogicKind.LUK, capped=False)
    partition = synthesizer.partition
    if partition.same_block(x, y):
        return MetricEstimate(ZERO, None, label, 0)
    indicators = synthesizer.block_indicators()
    evaluator = Evaluator(model, LogicKind.LUK, persistent_cache=True)
    labels = list(model.label_names) if label is None else [model.label(label).name]

    streams = []
    for a in labels:
        support = sorted({
            partition.block_of[z]
            for s in (x, y) for mu in model.successors(s, a) for z in mu.support()
        })
        streams.append((a, support, _assignments(len(support))))

    best = MetricEstimate(ZERO, None, label, 0)
    evaluated = 0
    exhausted = set()
    while evaluated < budget and len(exhausted) < len(streams):
        for a, support, stream in streams:
            if a in exhausted or evaluated >= budget:
                continue
            combo = next(stream, None)
            if combo is None:
                exhausted.add(a)
                continue
            phi = Diamond(a, _weighted_sum(indicators, support, combo))
            values = evaluator.evaluate(phi).values
            evaluated += 1
            gap = abs(Fraction(values[x]) - Fraction(values[y]))
            if gap > best.value:
                best = MetricEstimate(gap, phi, a, evaluated)
    logger.debug(
        f"[formula_metric_estimate] {model.states[x]} / {model.states[y]}: {best.value} "
        f"(式 {evaluated} 個)"
    )
    return MetricEstimate(best.value, best.formula, best.label, evaluated)


def _weighted_sum(indicators: Sequence[Formula], blocks: Sequence[int], weights: Sequence[Fraction]) -> Formula:
    terms: List[Formula] = []
    for b, q in zip(blocks, weights):
        if q == 0:
            continue
        terms.append(indicators[b] if q == 1 else Scale(q, indicators[b]))
    if not terms:
        return Zero()
    result = terms[0]
    for term in terms[1:]:
        result = OPlus(result, term)
    return result


@dataclass(frozen=True)
class MetricComparison:
    left: str
    right: str
    metric: Fraction
    estimate: Fraction
    ratio: Optional[Fraction]


def metric_comparison(model: PNTS, budget: int, label: Optional[str] = None) -> List[MetricComparison]:
    """ブロックの組ごとの Hausdorff 距離、式による下界、比 estimate / (½·metric)"""
    matrix = behavioral_metric(model, label)
    synthesizer = FormulaSynthesizer(model, LogicKind.LUK, capped=False)
    blocks = matrix.partition.blocks
    rows: List[MetricComparison] = []
    for i in range(len(blocks)):
        for j in range(i + 1, len(blocks)):
            metric = matrix.block_distance(i, j)
            estimate = formula_metric_estimate(model, blocks[i][0], blocks[j][0], budget, label, synthesizer)
            ratio = estimate.value / (metric / 2) if metric > 0 else None
            rows.append(MetricComparison(matrix.block_names[i], matrix.block_names[j],
                                         metric, estimate.value, ratio))
    return rows
