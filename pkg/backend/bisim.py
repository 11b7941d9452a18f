"""
双模倣の判定（分割精錬）

3 種類の同値性を同じ精錬ループで計算する。
- standard: 商分布の集合が等しい
- ue: 商分布の生成集合の凸包が等しい（LP による hull_equal）
- up: ブロックの任意の和集合について上確率が等しい（ブロック数にガードあり）

精錬は命題の値による分割から始め、各ラウンドで全ブロックを再検査する。
ブロックは最小の状態添字で整列するので、分割は正準で差分を取りやすい。
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple

from common import config
from common.errors import ResourceLimitError
from backend.convex import GeneratorSet, hull_difference, hull_equal, upper_expectation
from backend.interfaces import BlockSplitter
from backend.model import PNTS, Partition, Valuation, quotient_distribution

logger = logging.getLogger(__name__)


class BisimKind(Enum):
    """双模倣の種類"""
    STANDARD = "standard"
    UE = "ue"
    UP = "up"


def quotient_generators(model: PNTS, partition: Partition, x: int, label: str) -> GeneratorSet:
    """α_label(x) の各分布を partition で商にした生成集合"""
    return GeneratorSet.of(
        (quotient_distribution(mu, partition) for mu in model.successors(x, label)),
        dimension=len(partition),
    )


class StandardSplitter(BlockSplitter):
    """商分布の集合の一致"""

    def equivalent(self, model: PNTS, partition: Partition, x: int, y: int) -> bool:
        return all(
            quotient_generators(model, partition, x, a).generators
            == quotient_generators(model, partition, y, a).generators
            for a in model.label_names
        )


class UESplitter(BlockSplitter):
    """商分布の凸包の一致"""

    def equivalent(self, model: PNTS, partition: Partition, x: int, y: int) -> bool:
        return all(
            hull_equal(quotient_generators(model, partition, x, a),
                       quotient_generators(model, partition, y, a))
            for a in model.label_names
        )


class UPSplitter(BlockSplitter):
    """ブロックの和集合ごとの上確率の一致"""

    def __init__(self) -> None:
        self._signatures: Dict[int, Tuple[Tuple[Fraction, ...], ...]] = {}

    def begin_round(self, model: PNTS, partition: Partition) -> None:
        if len(partition) > config.UP_BLOCK_GUARD:
            raise ResourceLimitError(
                f"UP 双模倣: ブロック数 {len(partition)} が上限 {config.UP_BLOCK_GUARD} を超えています"
            )
        self._signatures = {}

    def _signature(self, model: PNTS, partition: Partition, x: int) -> Tuple[Tuple[Fraction, ...], ...]:
        if x not in self._signatures:
            self._signatures[x] = tuple(
                union_upper_probabilities(quotient_generators(model, partition, x, a))
                for a in model.label_names
            )
        return self._signatures[x]

    def equivalent(self, model: PNTS, partition: Partition, x: int, y: int) -> bool:
        return self._signature(model, partition, x) == self._signature(model, partition, y)


def union_upper_probabilities(generators: GeneratorSet) -> Tuple[Fraction, ...]:
    """
    ブロック集合の各部分集合 S（ビットマスク）について up(S) を並べたもの

    部分和は最下位ビットを除いた集合の値から 1 項ずつ足して求める。
    """
    k = generators.dimension
    best = [Fraction(0)] * (1 << k)
    for mu in generators:
        sums = [Fraction(0)] * (1 << k)
        for mask in range(1, 1 << k):
            low = (mask & -mask).bit_length() - 1
            sums[mask] = sums[mask & (mask - 1)] + mu[low]
            if sums[mask] > best[mask]:
                best[mask] = sums[mask]
    return tuple(best)


class BisimSelector:
    """
    双模倣の種類ごとの splitter を選択するレイヤー
    """

    def __init__(self) -> None:
        self._splitters = {
            BisimKind.STANDARD: StandardSplitter,
            BisimKind.UE: UESplitter,
            BisimKind.UP: UPSplitter,
        }

    def get_splitter(self, kind: BisimKind) -> BlockSplitter:
        try:
            return self._splitters[BisimKind(kind)]()
        except (KeyError, ValueError):
            raise ValueError(f"不明な双模倣の種類です: {kind}") from None


selector = BisimSelector()


def initial_partition(model: PNTS) -> Partition:
    """命題の値による分割（命題がなければ全体 1 ブロック）"""
    return Partition.from_key(model.num_states, model.prop_signature)


class PartitionRefiner:
    """分割精錬ループ"""

    def __init__(self, model: PNTS, kind: BisimKind, max_workers: Optional[int] = None) -> None:
        self.model = model
        self.kind = BisimKind(kind)
        self.splitter = selector.get_splitter(self.kind)
        self.max_workers = max_workers

    def _split_block(self, partition: Partition, block: Tuple[int, ...]) -> List[List[int]]:
        groups: List[List[int]] = []
        for x in block:
            for group in groups:
                if self.splitter.equivalent(self.model, partition, group[0], x):
                    group.append(x)
                    break
            else:
                groups.append([x])
        return groups

    def refine_once(self, partition: Partition) -> Partition:
        self.splitter.begin_round(self.model, partition)
        if self.max_workers and self.max_workers > 1 and len(partition) > 1:
            with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
                split = list(pool.map(lambda b: self._split_block(partition, b), partition.blocks))
        else:
            split = [self._split_block(partition, b) for b in partition.blocks]
        return Partition(tuple(tuple(g) for groups in split for g in groups))

    def rounds(self) -> List[Partition]:
        """P0 ⊒ P1 ⊒ … ⊒ Pk（Pk が安定した分割）"""
        history = [initial_partition(self.model)]
        while True:
            refined = self.refine_once(history[-1])
            logger.debug(
                f"[PartitionRefiner.rounds] {self.kind.value} ラウンド {len(history)}: "
                f"{len(history[-1])} → {len(refined)} ブロック"
            )
            if len(refined) == len(history[-1]):
                return history
            history.append(refined)


def refinement_rounds(model: PNTS, kind: BisimKind) -> List[Partition]:
    return PartitionRefiner(model, kind).rounds()


def bisimilarity(model: PNTS, kind: BisimKind, max_workers: Optional[int] = None) -> Partition:
    """
    指定した種類の最大双模倣（最も粗い分割）

    Raises:
        ResourceLimitError: kind=up でブロック数が config.UP_BLOCK_GUARD を超えた
    """
    result = PartitionRefiner(model, kind, max_workers).rounds()[-1]
    logger.info(f"[bisimilarity] {BisimKind(kind).value}: {len(result)} ブロック")
    return result


def convex_bisimilarity(model: PNTS) -> Partition:
    """凸双模倣。有限生成集合の凸包は閉集合なので UE 双模倣と一致する"""
    return bisimilarity(model, BisimKind.UE)


def is_bisimulation(model: PNTS, partition: Partition, kind: BisimKind) -> bool:
    """partition が命題を保ち、精錬の不動点になっているか"""
    if not partition.refines(initial_partition(model)):
        return False
    return PartitionRefiner(model, kind).refine_once(partition) == partition


@dataclass(frozen=True)
class Counterexample:
    """
    同じブロックにある x, y を区別する実験

    label が None のときは命題の値で区別されている（separator はその命題）。
    """
    x: int
    y: int
    label: Optional[str]
    separator: Valuation
    gap: Fraction


@dataclass(frozen=True)
class BisimulationCheck:
    holds: bool
    counterexample: Optional[Counterexample] = None


def _ue_gap(model: PNTS, x: int, y: int, label: str, f: Valuation) -> Fraction:
    ux = upper_expectation(GeneratorSet.of(model.successors(x, label), model.num_states), f)
    uy = upper_expectation(GeneratorSet.of(model.successors(y, label), model.num_states), f)
    return abs(ux - uy)


def separate_states(model: PNTS, partition: Partition, x: int, y: int) -> Optional[Counterexample]:
    """partition の下で x, y を区別する実験（区別できなければ None）"""
    for name, valuation in model.props.items():
        if valuation[x] != valuation[y]:
            return Counterexample(x, y, None, valuation, abs(valuation[x] - valuation[y]))
    for a in model.label_names:
        difference = hull_difference(quotient_generators(model, partition, x, a),
                                     quotient_generators(model, partition, y, a))
        if difference is not None:
            f = Valuation(partition.lift(difference.separator.values))
            return Counterexample(x, y, a, f, _ue_gap(model, x, y, a, f))
    return None


def is_ue_bisimulation(model: PNTS, partition: Partition) -> BisimulationCheck:
    """
    partition が UE 双模倣か。失敗時は (x, y, label, 分離する実験 f) を返す

    f は partition の各ブロック上で定数。
    """
    for block in partition.blocks:
        for y in block[1:]:
            counterexample = separate_states(model, partition, block[0], y)
            if counterexample is not None:
                return BisimulationCheck(False, counterexample)
    return BisimulationCheck(True)


@dataclass(frozen=True)
class Experiment:
    """区別する実験: |ue_{α_a(x)}(f) − ue_{α_a(y)}(f)| = gap > 0"""
    label: Optional[str]
    f: Valuation
    gap: Fraction


def distinguishing_experiment(model: PNTS, x: int, y: int) -> Optional[Experiment]:
    """
    x, y が UE 双模倣でなければ区別する実験を返す（同値なら None）

    x, y を初めて分けたラウンドの直前の分割で分離 LP を解き、状態上に持ち上げる。
    得られる f は直前の分割上で定数なので、最終的な UE ブロック上でも定数になる。
    """
    if x == y:
        return None
    history = refinement_rounds(model, BisimKind.UE)
    if history[-1].same_block(x, y):
        return None
    split_round = next(r for r, p in enumerate(history) if not p.same_block(x, y))
    if split_round == 0:
        counterexample = separate_states(model, Partition.total(model.num_states), x, y)
    else:
        counterexample = separate_states(model, history[split_round - 1], x, y)
    assert counterexample is not None
    logger.debug(
        f"[distinguishing_experiment] {model.states[x]} / {model.states[y]}: "
        f"ラウンド {split_round}, ラベル {counterexample.label}, gap {counterexample.gap}"
    )
    return Experiment(counterexample.label, counterexample.separator, counterexample.gap)


@dataclass(frozen=True)
class ExperimentCheck:
    accepted: bool
    gap: Fraction
    reason: str = ""


def check_experiment(
    model: PNTS,
    x: int,
    y: int,
    label: Optional[str],
    f: Valuation,
    partition: Optional[Partition] = None,
) -> ExperimentCheck:
    """
    区別する実験の証明書を検査する

    f が UE ブロック上で定数であり、gap = |ue_{α_a(x)}(f) − ue_{α_a(y)}(f)| > 0 なら受理。
    label が None のときは gap = |f(x) − f(y)|（命題による区別）。
    """
    if partition is None:
        partition = bisimilarity(model, BisimKind.UE)
    if not partition.is_invariant(f.values):
        return ExperimentCheck(False, Fraction(0), "f が UE ブロック上で定数ではありません")
    if label is None:
        gap = abs(Fraction(f[x]) - Fraction(f[y]))
    else:
        gap = _ue_gap(model, x, y, label, f)
    if gap <= 0:
        return ExperimentCheck(False, gap, "gap が 0 です")
    return ExperimentCheck(True, gap)


def all_partitions(n: int) -> Iterator[Partition]:
    """n 状態のすべての分割（制限増加列で列挙）"""
    if n == 0:
        yield Partition(())
        return
    codes = [0] * n

    def extend(i: int, max_code: int) -> Iterator[Partition]:
        if i == n:
            yield Partition.from_block_index(codes)
            return
        for code in range(max_code + 2):
            codes[i] = code
            yield from extend(i + 1, max(max_code, code))

    codes[0] = 0
    yield from extend(1, 0)


def coarsest_bisimulation_bruteforce(model: PNTS, kind: BisimKind) -> Partition:
    """全分割を調べて最もブロック数の少ない双模倣を返す（小さなモデル用のオラクル）"""
    kind = BisimKind(kind)
    best: Optional[Partition] = None
    for candidate in all_partitions(model.num_states):
        if best is not None and len(candidate) >= len(best):
            continue
        if kind == BisimKind.UE:
            valid = is_ue_bisimulation(model, candidate).holds
        else:
            valid = is_bisimulation(model, candidate, kind)
        if valid:
            best = candidate
    assert best is not None
    return best


def nts_bisimilarity(successors: Mapping[str, Iterable[str]]) -> Partition:
    """
    非決定遷移系の (Milner–Park) 双模倣

    状態の順序は embed_nts と同じ（キー順、続いて遷移先の出現順）。
    """
    states: List[str] = list(successors)
    for targets in successors.values():
        for t in targets:
            if t not in states:
                states.append(t)
    succ = [[states.index(t) for t in successors.get(s, ())] for s in states]
    partition = Partition.total(len(states))
    while True:
        refined = Partition.from_key(
            len(states),
            lambda x: (partition.block_of[x], frozenset(partition.block_of[t] for t in succ[x])),
        )
        if len(refined) == len(partition):
            return partition
        partition = refined
