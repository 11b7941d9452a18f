"""
論理式の抽象構文木と論理の種類

R（Riesz 様相論理）と [0,1] 値論理 qL / qL⊖ / qL⊙ / Ł、およびそれらの不動点拡張を扱う。
構文木のノードは不変の dataclass。論理の種類ごとに許される構成子を
``LogicKind`` が持ち、``validate_kind`` が検査する。
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Iterator, Optional, Set, Tuple, Type

from common.errors import LogicKindError
from common.utils import format_rational


class Formula:
    """論理式の基底クラス"""

    def children(self) -> Tuple["Formula", ...]:
        return ()

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True, eq=True)
class One(Formula):
    pass


@dataclass(frozen=True, eq=True)
class Zero(Formula):
    pass


@dataclass(frozen=True, eq=True)
class Scale(Formula):
    q: Fraction
    body: Formula

    def children(self) -> Tuple[Formula, ...]:
        return (self.body,)


@dataclass(frozen=True, eq=True)
class Plus(Formula):
    left: Formula
    right: Formula

    def children(self) -> Tuple[Formula, ...]:
        return (self.left, self.right)


@dataclass(frozen=True, eq=True)
class Join(Formula):
    left: Formula
    right: Formula

    def children(self) -> Tuple[Formula, ...]:
        return (self.left, self.right)


@dataclass(frozen=True, eq=True)
class Meet(Formula):
    left: Formula
    right: Formula

    def children(self) -> Tuple[Formula, ...]:
        return (self.left, self.right)


@dataclass(frozen=True, eq=True)
class PosPart(Formula):
    body: Formula

    def children(self) -> Tuple[Formula, ...]:
        return (self.body,)


@dataclass(frozen=True, eq=True)
class Diamond(Formula):
    """◇_label φ。label が None のときはモデルの唯一のラベル（``<>`` 記法）"""
    label: Optional[str]
    body: Formula

    def children(self) -> Tuple[Formula, ...]:
        return (self.body,)


@dataclass(frozen=True, eq=True)
class Neg(Formula):
    """¬φ = 1 − φ"""
    body: Formula

    def children(self) -> Tuple[Formula, ...]:
        return (self.body,)


@dataclass(frozen=True, eq=True)
class Prod(Formula):
    """φ ⊙ ψ = φ·ψ"""
    left: Formula
    right: Formula

    def children(self) -> Tuple[Formula, ...]:
        return (self.left, self.right)


@dataclass(frozen=True, eq=True)
class Minus(Formula):
    """φ ⊖ q = max(φ − q, 0)"""
    body: Formula
    q: Fraction

    def children(self) -> Tuple[Formula, ...]:
        return (self.body,)


@dataclass(frozen=True, eq=True)
class OPlus(Formula):
    """φ ⊕ ψ = min(φ + ψ, 1)"""
    left: Formula
    right: Formula

    def children(self) -> Tuple[Formula, ...]:
        return (self.left, self.right)


@dataclass(frozen=True, eq=True)
class Var(Formula):
    name: str


@dataclass(frozen=True, eq=True)
class Mu(Formula):
    var: str
    body: Formula

    def children(self) -> Tuple[Formula, ...]:
        return (self.body,)


@dataclass(frozen=True, eq=True)
class Nu(Formula):
    var: str
    body: Formula

    def children(self) -> Tuple[Formula, ...]:
        return (self.body,)


@dataclass(frozen=True, eq=True)
class Prop(Formula):
    name: str


_UNIT_BASE: FrozenSet[Type[Formula]] = frozenset({One, Zero, Scale, Join, Meet, Neg, Diamond, Prop})
_FIXPOINT: FrozenSet[Type[Formula]] = frozenset({Var, Mu, Nu})


class LogicKind(Enum):
    """論理の種類（CLI の --logic の値）"""
    R = "r"
    QL = "ql"
    QL_MINUS = "ql-minus"
    QL_PROD = "ql-prod"
    LUK = "luk"
    QL_MU = "ql-mu"
    QL_MINUS_MU = "ql-minus-mu"
    QL_PROD_MU = "ql-prod-mu"
    LUK_MU = "luk-mu"
    MU = "mu"

    @property
    def constructors(self) -> FrozenSet[Type[Formula]]:
        return _CONSTRUCTORS[self]

    @property
    def unit_interval(self) -> bool:
        """[0,1] 値の論理か（R 以外）"""
        return self != LogicKind.R

    @property
    def has_fixpoints(self) -> bool:
        return Mu in self.constructors


_CONSTRUCTORS: Dict[LogicKind, FrozenSet[Type[Formula]]] = {
    LogicKind.R: frozenset({One, Zero, Scale, Plus, Join, Meet, PosPart, Diamond, Prop}),
    LogicKind.QL: _UNIT_BASE,
    LogicKind.QL_MINUS: _UNIT_BASE | {Minus},
    LogicKind.QL_PROD: _UNIT_BASE | {Prod},
    LogicKind.LUK: _UNIT_BASE | {OPlus},
    LogicKind.QL_MU: _UNIT_BASE | _FIXPOINT,
    LogicKind.QL_MINUS_MU: _UNIT_BASE | {Minus} | _FIXPOINT,
    LogicKind.QL_PROD_MU: _UNIT_BASE | {Prod} | _FIXPOINT,
    LogicKind.LUK_MU: _UNIT_BASE | {OPlus} | _FIXPOINT,
    LogicKind.MU: _UNIT_BASE | {Minus, Prod, OPlus} | _FIXPOINT,
}


def subformulas(phi: Formula) -> Iterator[Formula]:
    """前順で部分式を列挙する（共有された同一オブジェクトは 1 回だけ返す）"""
    seen: Set[int] = set()
    stack = [phi]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        yield node
        stack.extend(reversed(node.children()))


def has_fixpoints(phi: Formula) -> bool:
    return any(isinstance(node, (Mu, Nu)) for node in subformulas(phi))


def free_variables(phi: Formula) -> FrozenSet[str]:
    match phi:
        case Var(name=name):
            return frozenset({name})
        case Mu(var=v, body=body) | Nu(var=v, body=body):
            return free_variables(body) - {v}
        case _:
            result: Set[str] = set()
            for child in phi.children():
                result |= free_variables(child)
            return frozenset(result)


def modal_depth(phi: Formula) -> int:
    """◇ の入れ子の深さ"""
    memo: Dict[int, int] = {}

    def depth(node: Formula) -> int:
        if id(node) not in memo:
            inner = max((depth(c) for c in node.children()), default=0)
            memo[id(node)] = inner + 1 if isinstance(node, Diamond) else inner
        return memo[id(node)]

    return depth(phi)


def dag_size(phi: Formula) -> int:
    """共有を考慮した構文木のノード数"""
    return sum(1 for _ in subformulas(phi))


def check_positivity(phi: Formula) -> bool:
    """束縛変数の各出現が偶数個の ¬ の下にあるか"""

    def walk(node: Formula, parity: Dict[str, int]) -> bool:
        match node:
            case Var(name=name):
                return parity.get(name, 0) % 2 == 0
            case Neg(body=body):
                return walk(body, {v: p + 1 for v, p in parity.items()})
            case Mu(var=v, body=body) | Nu(var=v, body=body):
                return walk(body, {**parity, v: 0})
            case _:
                return all(walk(c, parity) for c in node.children())

    return walk(phi, {})


def validate_kind(phi: Formula, kind: LogicKind) -> None:
    """
    phi が論理 kind の式かを検査する

    Raises:
        LogicKindError: 許可されない構成子、[0,1] 外のスカラー、正でない不動点の本体
    """
    kind = LogicKind(kind)
    allowed = kind.constructors
    for node in subformulas(phi):
        if type(node) not in allowed:
            raise LogicKindError(f"論理 {kind.value} では {type(node).__name__} を使えません")
        if kind.unit_interval and isinstance(node, (Scale, Minus)) and not 0 <= node.q <= 1:
            raise LogicKindError(f"論理 {kind.value} のスカラーは [0,1] の有理数に限られます: {node.q}")
    if kind.has_fixpoints and not check_positivity(phi):
        raise LogicKindError("不動点の本体で束縛変数が奇数個の否定の下に現れます")


# ---------------------------------------------------------------------------
# 整形表示（パーサと往復可能）

_LEVEL = {"join": 0, "meet": 1, "plus": 2, "prod": 3, "unary": 4, "atom": 5}


def _level(phi: Formula) -> int:
    match phi:
        case Join():
            return _LEVEL["join"]
        case Meet():
            return _LEVEL["meet"]
        case Plus() | OPlus():
            return _LEVEL["plus"]
        case Prod() | Minus():
            return _LEVEL["prod"]
        case Mu() | Nu():
            # 本体が右端まで伸びるので、被演算子の位置では常に括弧で閉じる
            return -1
        case Scale() | Neg() | Diamond() | PosPart():
            return _LEVEL["unary"]
        case _:
            return _LEVEL["atom"]


def _number(q: Fraction) -> str:
    text = format_rational(q)
    return f"({text})" if q < 0 else text


def pretty(phi: Formula) -> str:
    """ASCII 文法での表示。左結合の二項演算子は右辺だけ括弧で囲む"""

    def wrap(child: Formula, minimum: int) -> str:
        text = pretty(child)
        return f"({text})" if _level(child) < minimum else text

    def binary(node: Formula, op: str) -> str:
        level = _level(node)
        left, right = node.children()
        return f"{wrap(left, level)} {op} {wrap(right, level + 1)}"

    def prefix_body(body: Formula) -> str:
        return wrap(body, _LEVEL["unary"])

    match phi:
        case One():
            return "1"
        case Zero():
            return "0"
        case Prop(name=name):
            return f"prop({name})"
        case Var(name=name):
            return name
        case Scale(q=q, body=body):
            return f"{_number(q)}*{prefix_body(body)}"
        case Neg(body=body):
            return f"~{prefix_body(body)}"
        case PosPart(body=body):
            return f"pos {prefix_body(body)}"
        case Diamond(label=label, body=body):
            return f"<{label or ''}>{prefix_body(body)}"
        case Mu(var=v, body=body):
            return f"mu {v}. {pretty(body)}"
        case Nu(var=v, body=body):
            return f"nu {v}. {pretty(body)}"
        case Minus(body=body, q=q):
            return f"{wrap(body, _LEVEL['prod'])} (-) {format_rational(q)}"
        case Plus():
            return binary(phi, "+")
        case OPlus():
            return binary(phi, "(+)")
        case Join():
            return binary(phi, "\\/")
        case Meet():
            return binary(phi, "/\\")
        case Prod():
            return binary(phi, ".")
    raise TypeError(f"未知の式です: {phi!r}")


# ---------------------------------------------------------------------------
# 論理間の翻訳

def minus_to_oplus(phi: Formula) -> Formula:
    """φ ⊖ q を ¬(¬φ ⊕ q·1) に置き換える（qL⊖ → Ł）"""
    match phi:
        case Minus(body=body, q=q):
            return Neg(OPlus(Neg(minus_to_oplus(body)), Scale(q, One())))
    return _map_children(phi, minus_to_oplus)


def lukasiewicz_to_riesz(phi: Formula) -> Formula:
    """
    Ł の式を R の式に翻訳する: φ ⊕ ψ = (φ + ψ) ⊓ 1, ¬φ = 1 + (−1)φ

    Raises:
        LogicKindError: 不動点・積など R で表せない構成子を含む
    """
    match phi:
        case OPlus(left=left, right=right):
            return Meet(Plus(lukasiewicz_to_riesz(left), lukasiewicz_to_riesz(right)), One())
        case Neg(body=body):
            return Plus(One(), Scale(Fraction(-1), lukasiewicz_to_riesz(body)))
        case Minus():
            return lukasiewicz_to_riesz(minus_to_oplus(phi))
        case Prod() | Mu() | Nu() | Var():
            raise LogicKindError(f"{type(phi).__name__} は R に翻訳できません")
    return _map_children(phi, lukasiewicz_to_riesz)


def translate(phi: Formula, target: LogicKind) -> Formula:
    """phi を target の式に翻訳する（luk / luk-mu と r のみ対応）"""
    target = LogicKind(target)
    if target in (LogicKind.LUK, LogicKind.LUK_MU):
        result = minus_to_oplus(phi)
    elif target == LogicKind.R:
        result = lukasiewicz_to_riesz(phi)
    else:
        raise LogicKindError(f"論理 {target.value} への翻訳は未対応です")
    validate_kind(result, target)
    return result


def _map_children(phi: Formula, fn) -> Formula:
    match phi:
        case Scale(q=q, body=body):
            return Scale(q, fn(body))
        case Minus(body=body, q=q):
            return Minus(fn(body), q)
        case Diamond(label=label, body=body):
            return Diamond(label, fn(body))
        case Mu(var=v, body=body):
            return Mu(v, fn(body))
        case Nu(var=v, body=body):
            return Nu(v, fn(body))
        case Neg(body=body):
            return Neg(fn(body))
        case PosPart(body=body):
            return PosPart(fn(body))
        case Plus(left=l, right=r):
            return Plus(fn(l), fn(r))
        case Join(left=l, right=r):
            return Join(fn(l), fn(r))
        case Meet(left=l, right=r):
            return Meet(fn(l), fn(r))
        case Prod(left=l, right=r):
            return Prod(fn(l), fn(r))
        case OPlus(left=l, right=r):
            return OPlus(fn(l), fn(r))
    return phi
