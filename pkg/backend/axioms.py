"""
モーダル Riesz 空間の公理検査

◇_a を乱数の有理数評価値に適用し、次の公理を厳密に確かめる。
- monotone: f ≤ f' ⇒ ◇f ≤ ◇f'
- sublinear: ◇(f + g) ≤ ◇f + ◇g
- affine: ◇(λ1 f + λ2 1) = λ1 ◇f + λ2 ◇1（λ1 ≥ 0）
- boolean: ◇1 の値は 0 か 1（◇1 ⊕ ◇1 = ◇1）
- linear（MP のみ）: ◇(f + g) = ◇f + ◇g かつ ◇(−f) = −◇f
- sup_preserving（NTS のみ）: ◇(f ⊔ g) = ◇f ⊔ ◇g
"""

import logging
import operator
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from common import config
from common.utils import format_rational
from backend.evaluator import Evaluator
from backend.model import PNTS, Valuation, is_markov_process, is_nts
from backend.random_models import random_rational, random_valuation

logger = logging.getLogger(__name__)


class ModelType(Enum):
    PNTS = "pnts"
    MP = "mp"
    NTS = "nts"


BASE_AXIOMS = ("monotone", "sublinear", "affine", "boolean")
EXTRA_AXIOMS = {ModelType.PNTS: (), ModelType.MP: ("linear",), ModelType.NTS: ("sup_preserving",)}


@dataclass
class AxiomResult:
    """
    公理 1 つの検査結果

    witness は最初に見つかった反例（状態名、f, g, λ と両辺の値）。
    """
    name: str
    passed: bool = True
    checked: int = 0
    witness: Optional[Dict[str, Any]] = None


@dataclass
class AxiomReport:
    claimed: ModelType
    label: str
    samples: int
    results: List[AxiomResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> List[AxiomResult]:
        return [r for r in self.results if not r.passed]

    def result(self, name: str) -> AxiomResult:
        return next(r for r in self.results if r.name == name)


def model_types(model: PNTS) -> List[ModelType]:
    """モデルの形が満たす種類（PNTS は常に含む）"""
    types = [ModelType.PNTS]
    if is_markov_process(model):
        types.append(ModelType.MP)
    if is_nts(model):
        types.append(ModelType.NTS)
    return types


def _values(f: Valuation) -> List[str]:
    return [format_rational(v) for v in f.values]


class AxiomChecker:
    """1 つのラベルの ◇ について公理を検査する"""

    def __init__(self, model: PNTS, label: Optional[str] = None) -> None:
        self.model = model
        self.evaluator = Evaluator(model)
        self.label = self.evaluator.resolve_label(label)
        n = model.num_states
        self.one = Valuation.constant(n, Fraction(1))
        self.diamond_one = self.box(self.one)

    def box(self, f: Valuation) -> Valuation:
        """◇_label f"""
        return self.evaluator.diamond(self.label, f)

    def _pointwise(self, op: Callable, *args: Valuation) -> Valuation:
        return Valuation(tuple(op(*vs) for vs in zip(*(a.values for a in args))))

    def _first_violation(self, holds: Callable[[Fraction, Fraction], bool],
                         lhs: Valuation, rhs: Valuation) -> Optional[Tuple[int, Fraction, Fraction]]:
        for x, (left, right) in enumerate(zip(lhs.values, rhs.values)):
            if not holds(left, right):
                return x, left, right
        return None

    def check_sample(
        self,
        name: str,
        f: Valuation,
        g: Valuation,
        lam1: Fraction,
        lam2: Fraction,
    ) -> Optional[Dict[str, Any]]:
        """1 サンプルで公理 name を検査し、違反があれば証拠を返す"""
        if name == "monotone":
            upper = self._pointwise(lambda a, b: a + abs(b), f, g)
            found = self._first_violation(operator.le, self.box(f), self.box(upper))
        elif name == "sublinear":
            found = self._first_violation(operator.le, self.box(self._pointwise(operator.add, f, g)),
                                          self._pointwise(operator.add, self.box(f), self.box(g)))
        elif name == "affine":
            shifted = self._pointwise(lambda a: lam1 * a + lam2, f)
            rhs = self._pointwise(lambda a, b: lam1 * a + lam2 * b, self.box(f), self.diamond_one)
            found = self._first_violation(operator.eq, self.box(shifted), rhs)
        elif name == "boolean":
            found = self._first_violation(lambda a, _: a in (0, 1), self.diamond_one, self.diamond_one)
        elif name == "linear":
            found = self._first_violation(operator.eq, self.box(self._pointwise(operator.add, f, g)),
                                          self._pointwise(operator.add, self.box(f), self.box(g)))
            if found is None:
                found = self._first_violation(operator.eq, self.box(self._pointwise(lambda a: -a, f)),
                                              self._pointwise(lambda a: -a, self.box(f)))
        elif name == "sup_preserving":
            found = self._first_violation(operator.eq, self.box(self._pointwise(max, f, g)),
                                          self._pointwise(max, self.box(f), self.box(g)))
        else:
            raise ValueError(f"未知の公理です: {name}")

        if found is None:
            return None
        x, left, right = found
        return {
            "state": self.model.states[x],
            "f": _values(f),
            "g": _values(g),
            "lambda1": format_rational(lam1),
            "lambda2": format_rational(lam2),
            "lhs": format_rational(left),
            "rhs": format_rational(right),
        }


def check_modal_riesz_axioms(
    model: PNTS,
    label: Optional[str] = None,
    samples: int = 100,
    claimed: ModelType = ModelType.PNTS,
    seed: Optional[int] = None,
) -> AxiomReport:
    """
    乱数サンプルで公理を検査する（失敗は例外ではなくレポートの項目）

    Args:
        label: 検査する ◇ のラベル（None はモデルの唯一のラベル）
        samples: サンプル数（1 以上）
        claimed: 主張するモデルの種類。MP なら linear、NTS なら sup_preserving を追加で検査
    """
    if samples < 1:
        raise ValueError("samples は 1 以上が必要です")
    claimed = ModelType(claimed)
    checker = AxiomChecker(model, label)
    rng = np.random.default_rng(config.DEFAULT_SEED if seed is None else seed)
    names = BASE_AXIOMS + EXTRA_AXIOMS[claimed]
    report = AxiomReport(claimed, checker.label, samples, [AxiomResult(name) for name in names])
    n = model.num_states

    for _ in range(samples):
        f = random_valuation(rng, n)
        g = random_valuation(rng, n)
        lam1 = random_rational(rng, nonnegative=True)
        lam2 = random_rational(rng)
        for result in report.results:
            if not result.passed:
                continue
            result.checked += 1
            witness = checker.check_sample(result.name, f, g, lam1, lam2)
            if witness is not None:
                result.passed = False
                result.witness = witness
                logger.info(
                    f"[check_modal_riesz_axioms] {result.name} の反例: 状態 {witness['state']}"
                )
    return report
