"""
並列合成と合同性の検査

合成状態 (x, y) の遷移は次の規則で作る（i は直積分布を合成状態へ写す押し出し）。
- ||L:    x →a µ1               ⇒ (x, y) →a i(µ1 × δ_y)
- ||R:    y →a µ2               ⇒ (x, y) →a i(δ_x × µ2)
- ||Comm: x →b µ1, y →b̄ µ2     ⇒ (x, y) →τ i(µ1 × µ2)

規則は CompositionRule の実装で、ParallelOperator に差し替え可能な形で渡す。
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from common import config
from common.errors import AlphabetMismatchError
from common.logger import Logger
from common.utils import format_rational
from backend.bisim import BisimKind, bisimilarity, distinguishing_experiment
from backend.interfaces import CompositionRule
from backend.model import PNTS, TAU, Distribution, Label, LabelKind, StateId, dirac, product_distribution

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CompositeState:
    """合成状態: 左右の構成要素の状態と、合成モデルでの添字"""
    left: StateId
    right: StateId
    index: int

    @property
    def name(self) -> str:
        return f"{self.left.name}||{self.right.name}"


class LeftInterleaving(CompositionRule):
    name = "||L"

    def apply(self, left, right, x, y, pairing, size):
        for a in left.label_names:
            for mu in left.successors(x, a):
                yield a, product_distribution(mu, dirac(y, right.num_states), pairing, size)


class RightInterleaving(CompositionRule):
    name = "||R"

    def apply(self, left, right, x, y, pairing, size):
        for a in right.label_names:
            for nu in right.successors(y, a):
                yield a, product_distribution(dirac(x, left.num_states), nu, pairing, size)


class Communication(CompositionRule):
    name = "||Comm"

    def apply(self, left, right, x, y, pairing, size):
        for b in left.labels:
            for c in right.labels:
                if not b.complements(c):
                    continue
                for mu in left.successors(x, b.name):
                    for nu in right.successors(y, c.name):
                        yield TAU.name, product_distribution(mu, nu, pairing, size)


DEFAULT_RULES: Tuple[CompositionRule, ...] = (LeftInterleaving(), RightInterleaving(), Communication())


def merge_alphabets(left: PNTS, right: PNTS) -> List[Label]:
    """
    ラベル表の和集合に tau を加えたもの

    Raises:
        AlphabetMismatchError: 同名のラベルの種類・相補関係が食い違う
    """
    merged: Dict[str, Label] = {}
    for label in list(left.labels) + list(right.labels) + [TAU]:
        existing = merged.get(label.name)
        if existing is not None and existing != label:
            raise AlphabetMismatchError(
                f"ラベル {label.name} の定義が一致しません: {existing} / {label}"
            )
        if label.name == TAU.name and label.kind != LabelKind.TAU:
            raise AlphabetMismatchError("tau は内部動作のラベルとして予約されています")
        merged[label.name] = label
    return list(merged.values())


class ParallelOperator:
    """並列合成演算子（規則の組で定義される）"""

    def __init__(self, rules: Sequence[CompositionRule] = DEFAULT_RULES) -> None:
        self.rules = tuple(rules)

    def compose(self, left: PNTS, right: PNTS) -> Tuple[PNTS, List[CompositeState]]:
        labels = merge_alphabets(left, right)
        width = right.num_states
        size = left.num_states * width

        def pairing(x: int, y: int) -> int:
            return x * width + y

        composite = [
            CompositeState(left.state_id(x), right.state_id(y), pairing(x, y))
            for x in range(left.num_states) for y in range(right.num_states)
        ]
        transitions: Dict[Tuple[int, str], List[Distribution]] = {}
        for state in composite:
            x, y = state.left.index, state.right.index
            for rule in self.rules:
                for label, distribution in rule.apply(left, right, x, y, pairing, size):
                    transitions.setdefault((state.index, label), []).append(distribution)

        model = PNTS.build([s.name for s in composite], labels, transitions)
        logger.debug(
            f"[ParallelOperator.compose] 状態 {size} 個, 遷移 {sum(len(v) for v in transitions.values())} 本"
        )
        return model, composite


def parallel_compose(left: PNTS, right: PNTS) -> PNTS:
    """M1 || M2（状態名は "x||y"、状態 (x, y) の添字は x·|M2| + y）"""
    return ParallelOperator().compose(left, right)[0]


@dataclass(frozen=True)
class CongruenceViolation:
    """x ~ x' なのに合成状態が UE 双模倣でない組"""
    order: str
    x: str
    x_prime: str
    partner: str
    experiment: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "order": self.order,
            "x": self.x,
            "x_prime": self.x_prime,
            "partner": self.partner,
            "experiment": self.experiment,
        }


@dataclass
class CongruenceReport:
    checked: int = 0
    violations: List[CongruenceViolation] = field(default_factory=list)
    log_file: Optional[str] = None

    @property
    def holds(self) -> bool:
        return not self.violations


def _instances(model: PNTS, partner: PNTS) -> List[Tuple[int, int, int]]:
    partition = bisimilarity(model, BisimKind.UE)
    return [
        (block[i], block[j], y)
        for block in partition.blocks
        for i in range(len(block)) for j in range(i + 1, len(block))
        for y in range(partner.num_states)
    ]


def congruence_check(
    left: PNTS,
    right: PNTS,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    log_dir: Optional[str] = None,
) -> CongruenceReport:
    """
    UE 双模倣が並列合成について合同であることを有限の例で確かめる

    x ~ x'（left の UE 双模倣）と right の各状態 y について (x, y) ~ (x', y) を、
    (y, x) ~ (y, x') も同様に検査する。trials を与えると検査する組を乱数で選ぶ。
    違反は区別する実験とともに反例ログに記録する。
    """
    report = CongruenceReport()
    forward, _ = ParallelOperator().compose(left, right)
    backward, _ = ParallelOperator().compose(right, left)
    forward_partition = bisimilarity(forward, BisimKind.UE)
    backward_partition = bisimilarity(backward, BisimKind.UE)

    instances = _instances(left, right)
    if trials is not None and trials < len(instances):
        rng = np.random.default_rng(config.DEFAULT_SEED if seed is None else seed)
        picks = sorted(rng.choice(len(instances), size=trials, replace=False))
        instances = [instances[int(i)] for i in picks]

    width = right.num_states
    log: Optional[Logger] = None
    for x, x_prime, y in instances:
        for order, model, partition, z, z_prime in (
            ("left", forward, forward_partition, x * width + y, x_prime * width + y),
            ("right", backward, backward_partition, y * left.num_states + x, y * left.num_states + x_prime),
        ):
            report.checked += 1
            if partition.same_block(z, z_prime):
                continue
            experiment = distinguishing_experiment(model, z, z_prime)
            violation = CongruenceViolation(
                order, left.states[x], left.states[x_prime], right.states[y],
                None if experiment is None else {
                    "label": experiment.label,
                    "f": [format_rational(v) for v in experiment.f.values],
                    "gap": format_rational(experiment.gap),
                },
            )
            report.violations.append(violation)
            logger.error(
                f"[congruence_check] 合同性の違反: {violation.x} ~ {violation.x_prime} ({order}, {violation.partner})"
            )
            if log is None:
                log = Logger(log_dir)
            report.log_file = log.log_congruence_violation(violation.to_dict())
    logger.info(f"[congruence_check] {report.checked} 組を検査, 違反 {len(report.violations)} 件")
    return report
