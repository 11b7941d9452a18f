"""
論理式の列挙と乱数生成

- enumerate_formulas: 深さ（構成の段数）ごとの幅優先列挙。有理定数は Stern–Brocot 木から取る
- semantic_kernel: 列挙した式の値が一致する状態をまとめた分割（ker(R) への近似）
- random_formula: 論理の種類を守る乱数式（不動点の本体は正）
"""

import logging
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

import numpy as np

from common import config
from common.errors import FixpointDivergenceError
from common.utils import stern_brocot_prefix
from backend.evaluator import Evaluator
from backend.formula import (Diamond, Formula, Join, LogicKind, Meet, Minus, Mu, Neg, Nu, One,
                             OPlus, Plus, PosPart, Prod, Prop, Scale, Var, Zero)
from backend.model import PNTS, Partition

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)


def _constants(kind: LogicKind) -> List[Formula]:
    result: List[Formula] = [One(), Zero()]
    for q in stern_brocot_prefix(config.STERN_BROCOT_DEPTH):
        if q not in (0, 1):
            result.append(Scale(q, One()))
    if not kind.unit_interval:
        result.append(Scale(Fraction(-1), One()))
    return result


def _unary(kind: LogicKind, labels: Sequence[str], phi: Formula) -> Iterator[Formula]:
    allowed = kind.constructors
    for a in labels:
        yield Diamond(a, phi)
    if kind.unit_interval:
        yield Neg(phi)
        yield Scale(HALF, phi)
        if Minus in allowed:
            yield Minus(phi, HALF)
    else:
        yield Scale(Fraction(-1), phi)
        yield PosPart(phi)
    if kind.has_fixpoints:
        for a in labels:
            yield Mu("v", Join(phi, Diamond(a, Var("v"))))
            yield Nu("v", Meet(phi, Diamond(a, Var("v"))))


def _binary(kind: LogicKind, left: Formula, right: Formula) -> Iterator[Formula]:
    allowed = kind.constructors
    if Plus in allowed:
        yield Plus(left, right)
    yield Join(left, right)
    yield Meet(left, right)
    if Prod in allowed:
        yield Prod(left, right)
    if OPlus in allowed:
        yield OPlus(left, right)


def enumerate_formulas(
    labels: Sequence[str],
    kind: LogicKind = LogicKind.R,
    props: Sequence[str] = (),
    max_depth: Optional[int] = None,
    evaluator: Optional[Evaluator] = None,
) -> Iterator[Formula]:
    """
    閉じた式を段ごとに列挙する

    段 0 は定数と命題。段 k+1 は段 k の式への単項演算と、少なくとも一方が段 k の
    式の組への二項演算。evaluator を渡すと、既出の式と同じ値を取る式を捨てる。
    """
    kind = LogicKind(kind)
    seen_values: Set[Tuple] = set()
    seen_formulas: Set[Formula] = set()
    levels: List[List[Formula]] = []

    def accept(phi: Formula) -> bool:
        if phi in seen_formulas:
            return False
        seen_formulas.add(phi)
        if evaluator is not None:
            try:
                key = tuple(evaluator.evaluate(phi).values)
            except FixpointDivergenceError:
                return False
            if key in seen_values:
                return False
            seen_values.add(key)
        return True

    current: List[Formula] = []
    for phi in _constants(kind) + [Prop(p) for p in props]:
        if accept(phi):
            current.append(phi)
            yield phi
    levels.append(current)

    depth = 0
    while max_depth is None or depth < max_depth:
        previous = levels[-1]
        if not previous:
            return
        older = [phi for level in levels for phi in level]
        current = []
        for phi in previous:
            for candidate in _unary(kind, labels, phi):
                if accept(candidate):
                    current.append(candidate)
                    yield candidate
        for phi in previous:
            for psi in older:
                for candidate in _binary(kind, phi, psi):
                    if accept(candidate):
                        current.append(candidate)
                        yield candidate
        levels.append(current)
        depth += 1


def semantic_kernel(
    model: PNTS,
    budget: int,
    seeds: Sequence[Formula] = (),
    kind: LogicKind = LogicKind.R,
) -> Partition:
    """
    seeds と列挙した式（合わせて budget 個まで）の値がすべて等しい状態をまとめる

    浮動小数点で評価される不動点式の値は 1e-8 の桁で丸めて比較する。
    結果は UE 双模倣より粗い分割で、budget が小さいと UE 双模倣でない状態が同じブロックに残る
    （hull_gap_model の x, y は列挙だけでは budget 200 でも分かれず、区別する実験を seeds に渡す必要がある）。
    """
    if budget < 1:
        raise ValueError("budget は 1 以上が必要です")
    kind = LogicKind(kind)
    evaluator = Evaluator(model, kind, persistent_cache=True)
    signatures: List[List] = [[] for _ in range(model.num_states)]

    def record(phi: Formula) -> None:
        valuation = evaluator.evaluate(phi)
        for x, v in enumerate(valuation.values):
            signatures[x].append(v if valuation.exact else round(float(v), 8))

    count = 0
    for phi in seeds:
        if count >= budget:
            break
        record(phi)
        count += 1
    for phi in enumerate_formulas(model.label_names, kind, tuple(model.props), evaluator=evaluator):
        if count >= budget:
            break
        record(phi)
        count += 1

    partition = Partition.from_key(model.num_states, lambda x: tuple(signatures[x]))
    logger.debug(f"[semantic_kernel] 式 {count} 個で {len(partition)} ブロック")
    return partition


def random_formula(
    rng: np.random.Generator,
    kind: LogicKind,
    labels: Sequence[str],
    depth: int = 4,
    props: Sequence[str] = (),
) -> Formula:
    """
    論理 kind の乱数式（深さ depth 以下）

    束縛変数は偶数個の ¬ の下にあるときだけ葉として選ばれる。
    """
    kind = LogicKind(kind)
    allowed = kind.constructors
    constants = stern_brocot_prefix(2)

    def scalar() -> Fraction:
        if kind.unit_interval:
            return constants[int(rng.integers(len(constants)))]
        return Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 5)))

    def leaf(scope: Dict[str, int]) -> Formula:
        options: List[Formula] = [One(), Zero(), Scale(scalar(), One())]
        options.extend(Prop(p) for p in props)
        options.extend(Var(v) for v, parity in scope.items() if parity % 2 == 0)
        return options[int(rng.integers(len(options)))]

    def build(d: int, scope: Dict[str, int]) -> Formula:
        if d == 0 or rng.random() < 0.2:
            return leaf(scope)
        choices = [c for c in (Scale, Plus, Join, Meet, PosPart, Diamond, Neg, Prod,
                               Minus, OPlus, Mu, Nu) if c in allowed]
        if not labels:
            choices.remove(Diamond)
        constructor = choices[int(rng.integers(len(choices)))]
        if constructor is Scale:
            return Scale(scalar(), build(d - 1, scope))
        if constructor is Diamond:
            return Diamond(labels[int(rng.integers(len(labels)))], build(d - 1, scope))
        if constructor is PosPart:
            return PosPart(build(d - 1, scope))
        if constructor is Neg:
            return Neg(build(d - 1, {v: p + 1 for v, p in scope.items()}))
        if constructor is Minus:
            return Minus(build(d - 1, scope), constants[int(rng.integers(len(constants)))])
        if constructor in (Mu, Nu):
            name = f"v{len(scope)}"
            return constructor(name, build(d - 1, {**scope, name: 0}))
        return constructor(build(d - 1, scope), build(d - 1, scope))

    return build(depth, {})
