"""
Model core
==========

有限ラベル付き確率的非決定遷移系（PNTS）の厳密有理数表現。

- 確率はすべて ``fractions.Fraction`` で保持し、丸めを一切行わない
- 遷移集合は有限の生成分布リストとして保持する（凸包は実体化しない）
- 生成分布は構築時に重複除去・辞書式整列され、モデルの等価性が正準になる
- モデル・分割は構築後に変更されない
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from types import MappingProxyType
from typing import (Callable, Dict, Iterable, List, Mapping, Optional, Sequence,
                    Tuple, Union)

import numpy as np

from common.errors import DimensionMismatchError, ModelFormatError
from common.utils import parse_rational

logger = logging.getLogger(__name__)

Rational = Fraction
Number = Union[Fraction, float]


@dataclass(frozen=True)
class StateId:
    """状態表への添字と表示名"""
    index: int
    name: str


class LabelKind(Enum):
    """ラベルの種別"""
    PLAIN = "plain"
    CO_NAME = "co"
    TAU = "tau"


@dataclass(frozen=True)
class Label:
    """
    ラベル

    ``base`` は相補関係の基底名。plain ラベルでは自身の名前、
    co-name ラベルでは相補の plain ラベル名、tau では空文字列。
    """
    name: str
    kind: LabelKind = LabelKind.PLAIN
    base: str = ""

    def __post_init__(self) -> None:
        if self.kind == LabelKind.PLAIN and not self.base:
            object.__setattr__(self, "base", self.name)

    def complements(self, other: "Label") -> bool:
        """self と other が相補ラベルの組かどうか"""
        if LabelKind.TAU in (self.kind, other.kind) or self.kind == other.kind:
            return False
        return self.base == other.base


TAU = Label("tau", LabelKind.TAU)


@dataclass(frozen=True)
class Distribution:
    """状態上の有限確率分布（密ベクトル）"""
    entries: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        entries = tuple(Fraction(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        if any(e < 0 for e in entries):
            raise ModelFormatError(f"負の確率を含む分布です: {self.describe()}")
        if sum(entries, Fraction(0)) != 1:
            raise ModelFormatError(f"確率の総和が 1 ではありません: {self.describe()}")

    @property
    def dimension(self) -> int:
        return len(self.entries)

    def __getitem__(self, index: int) -> Fraction:
        return self.entries[index]

    def support(self) -> Tuple[int, ...]:
        return tuple(i for i, e in enumerate(self.entries) if e != 0)

    def as_floats(self) -> np.ndarray:
        return np.array([float(e) for e in self.entries], dtype=np.float64)

    def describe(self) -> str:
        return "(" + ", ".join(str(e) for e in self.entries) + ")"


@dataclass(frozen=True)
class Valuation:
    """
    状態上の実数値関数

    ``exact`` が True のとき値はすべて Fraction。
    ``unit_interval`` が True のときすべての値が [0,1] に入ることを構築時に検査する。
    """
    values: Tuple[Number, ...]
    exact: bool = True
    unit_interval: bool = False

    def __post_init__(self) -> None:
        if self.exact:
            values: Tuple[Number, ...] = tuple(Fraction(v) for v in self.values)
        else:
            values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if self.unit_interval and any(v < 0 or v > 1 for v in values):
            raise ModelFormatError(f"[0,1] の範囲外の値を含みます: {list(values)}")

    @classmethod
    def constant(cls, n: int, value: Number = Fraction(1)) -> "Valuation":
        return cls(tuple(value for _ in range(n)), exact=isinstance(value, (Fraction, int)))

    @classmethod
    def indicator(cls, n: int, states: Iterable[int]) -> "Valuation":
        members = set(states)
        return cls(tuple(Fraction(1 if i in members else 0) for i in range(n)), unit_interval=True)

    @property
    def dimension(self) -> int:
        return len(self.values)

    def __getitem__(self, index: int) -> Number:
        return self.values[index]

    def as_floats(self) -> np.ndarray:
        return np.array([float(v) for v in self.values], dtype=np.float64)

    def sup_norm(self) -> Number:
        return max((abs(v) for v in self.values), default=Fraction(0))


@dataclass(frozen=True)
class Partition:
    """
    状態集合の分割

    ブロックは最小の状態添字で整列し、各ブロック内も昇順に保つ（正準形）。
    """
    blocks: Tuple[Tuple[int, ...], ...]
    block_of: Tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        blocks = tuple(sorted((tuple(sorted(b)) for b in self.blocks), key=lambda b: b[0] if b else -1))
        if any(not b for b in blocks):
            raise ModelFormatError("空のブロックを含む分割です")
        states = [x for b in blocks for x in b]
        n = len(states)
        if sorted(states) != list(range(n)):
            raise ModelFormatError(f"ブロックが状態集合を分割していません: {blocks}")
        block_of = [0] * n
        for i, b in enumerate(blocks):
            for x in b:
                block_of[x] = i
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "block_of", tuple(block_of))

    @classmethod
    def from_block_index(cls, indices: Sequence[int]) -> "Partition":
        """状態ごとのブロック番号（任意の整数ラベル）から分割を作る"""
        groups: Dict[int, List[int]] = {}
        for x, key in enumerate(indices):
            groups.setdefault(key, []).append(x)
        return cls(tuple(tuple(g) for g in groups.values()))

    @classmethod
    def from_key(cls, n: int, key: Callable[[int], object]) -> "Partition":
        """key(x) が等しい状態を同じブロックにまとめる"""
        groups: Dict[object, List[int]] = {}
        for x in range(n):
            groups.setdefault(key(x), []).append(x)
        return cls(tuple(tuple(g) for g in groups.values()))

    @classmethod
    def identity(cls, n: int) -> "Partition":
        return cls(tuple((x,) for x in range(n)))

    @classmethod
    def total(cls, n: int) -> "Partition":
        return cls((tuple(range(n)),))

    @property
    def size(self) -> int:
        return len(self.block_of)

    def __len__(self) -> int:
        return len(self.blocks)

    def same_block(self, x: int, y: int) -> bool:
        return self.block_of[x] == self.block_of[y]

    def refines(self, other: "Partition") -> bool:
        """self の各ブロックが other のいずれかのブロックに含まれるか"""
        return all(len({other.block_of[x] for x in b}) == 1 for b in self.blocks)

    def merge(self, i: int, j: int) -> "Partition":
        """ブロック i と j を併合した分割"""
        if i == j:
            return self
        merged = [b for k, b in enumerate(self.blocks) if k not in (i, j)]
        merged.append(self.blocks[i] + self.blocks[j])
        return Partition(tuple(merged))

    def lift(self, block_values: Sequence[Number]) -> Tuple[Number, ...]:
        """ブロック上の値を状態上の値に持ち上げる"""
        return tuple(block_values[self.block_of[x]] for x in range(self.size))

    def is_invariant(self, values: Sequence[Number], tolerance: float = 0.0) -> bool:
        """values が各ブロック上で定数か"""
        for b in self.blocks:
            first = values[b[0]]
            if any(abs(values[x] - first) > tolerance for x in b[1:]):
                return False
        return True


Transitions = Mapping[Tuple[int, str], Tuple[Distribution, ...]]


@dataclass(frozen=True)
class PNTS:
    """
    ラベル付き PNTS

    transitions は (状態添字, ラベル名) → 生成分布の組。遷移がない組はキーを持たない。
    """
    states: Tuple[str, ...]
    labels: Tuple[Label, ...]
    transitions: Transitions
    props: Mapping[str, Valuation] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        states: Sequence[str],
        labels: Sequence[Label],
        transitions: Mapping[Tuple[int, str], Iterable[Distribution]],
        props: Optional[Mapping[str, Valuation]] = None,
    ) -> "PNTS":
        """
        検証・正規化を行ってモデルを構築する

        Raises:
            ModelFormatError: 状態名・ラベル名の重複、未定義ラベル
            DimensionMismatchError: 分布・命題の次元不一致
        """
        states = tuple(states)
        n = len(states)
        if len(set(states)) != n:
            raise ModelFormatError(f"状態名が重複しています: {states}")
        labels = tuple(sorted(labels, key=lambda lab: lab.name))
        names = [lab.name for lab in labels]
        if len(set(names)) != len(names):
            raise ModelFormatError(f"ラベル名が重複しています: {names}")

        normalized: Dict[Tuple[int, str], Tuple[Distribution, ...]] = {}
        for (x, a), generators in transitions.items():
            if not 0 <= x < n:
                raise ModelFormatError(f"状態添字が範囲外です: {x}")
            if a not in names:
                raise ModelFormatError(f"未定義のラベルです: {a}")
            unique = set()
            for mu in generators:
                if mu.dimension != n:
                    raise DimensionMismatchError(
                        f"分布の次元 {mu.dimension} が状態数 {n} と一致しません"
                    )
                unique.add(mu)
            if unique:
                normalized[(x, a)] = tuple(sorted(unique, key=lambda mu: mu.entries))

        checked_props: Dict[str, Valuation] = {}
        for name, valuation in (props or {}).items():
            if valuation.dimension != n:
                raise DimensionMismatchError(f"命題 {name} の次元が状態数と一致しません")
            checked_props[name] = Valuation(valuation.values, exact=valuation.exact, unit_interval=True)

        return cls(
            states=states,
            labels=labels,
            transitions=MappingProxyType(dict(sorted(normalized.items()))),
            props=MappingProxyType(dict(sorted(checked_props.items()))),
        )

    @property
    def num_states(self) -> int:
        return len(self.states)

    @property
    def label_names(self) -> Tuple[str, ...]:
        return tuple(lab.name for lab in self.labels)

    def state_index(self, name: str) -> int:
        try:
            return self.states.index(name)
        except ValueError:
            raise ModelFormatError(f"未定義の状態です: {name}") from None

    def state_id(self, index: int) -> StateId:
        return StateId(index, self.states[index])

    def label(self, name: str) -> Label:
        for lab in self.labels:
            if lab.name == name:
                return lab
        raise ModelFormatError(f"未定義のラベルです: {name}")

    def complement_of(self, name: str) -> Optional[str]:
        """相補ラベルの名前（ラベル表にない、または tau なら None）"""
        label = self.label(name)
        for other in self.labels:
            if label.complements(other):
                return other.name
        return None

    def successors(self, x: int, label: str) -> Tuple[Distribution, ...]:
        return self.transitions.get((x, label), ())

    def enabled_labels(self, x: int) -> Tuple[str, ...]:
        return tuple(a for a in self.label_names if (x, a) in self.transitions)

    def prop_signature(self, x: int) -> Tuple[Number, ...]:
        return tuple(v[x] for v in self.props.values())


def dirac(x: int, n: int) -> Distribution:
    """状態 x の Dirac 分布"""
    if not 0 <= x < n:
        raise ModelFormatError(f"状態添字 {x} が範囲外です（状態数 {n}）")
    return Distribution(tuple(Fraction(1 if i == x else 0) for i in range(n)))


def expected_value(mu: Distribution, f: Union[Valuation, Sequence[Number]]) -> Number:
    """E_µ(f) = Σ_x µ(x)·f(x)。f が有理数なら厳密値"""
    values = f.values if isinstance(f, Valuation) else tuple(f)
    if len(values) != mu.dimension:
        raise DimensionMismatchError(
            f"評価値の次元 {len(values)} が分布の次元 {mu.dimension} と一致しません"
        )
    return sum((p * v for p, v in zip(mu.entries, values) if p != 0), Fraction(0))


def quotient_distribution(mu: Distribution, partition: Partition) -> Distribution:
    """ブロック b に Σ_{x∈b} µ(x) を割り当てたブロック上の分布"""
    if partition.size != mu.dimension:
        raise DimensionMismatchError(
            f"分割の状態数 {partition.size} が分布の次元 {mu.dimension} と一致しません"
        )
    mass = [Fraction(0)] * len(partition)
    for x, p in enumerate(mu.entries):
        mass[partition.block_of[x]] += p
    return Distribution(tuple(mass))


def block_name(model: PNTS, block: Sequence[int]) -> str:
    if len(block) == 1:
        return model.states[block[0]]
    return "{" + ",".join(model.states[x] for x in block) + "}"


def quotient_model(model: PNTS, partition: Partition) -> PNTS:
    """
    分割による商モデル

    ブロック b のラベル a の遷移は b の各状態の遷移を商分布にしたものの和集合。
    命題はブロックの代表元（最小添字）の値を使う。
    """
    if partition.size != model.num_states:
        raise DimensionMismatchError("分割の状態数がモデルと一致しません")
    transitions: Dict[Tuple[int, str], List[Distribution]] = {}
    for i, block in enumerate(partition.blocks):
        for a in model.label_names:
            generators = [quotient_distribution(mu, partition)
                          for x in block for mu in model.successors(x, a)]
            if generators:
                transitions[(i, a)] = generators

    props: Dict[str, Valuation] = {}
    for name, valuation in model.props.items():
        if not partition.is_invariant(valuation.values):
            logger.warning(f"[quotient_model] 命題 {name} がブロック上で定数ではありません")
        props[name] = Valuation(tuple(valuation[b[0]] for b in partition.blocks),
                                exact=valuation.exact)

    return PNTS.build(
        states=[block_name(model, b) for b in partition.blocks],
        labels=model.labels,
        transitions=transitions,
        props=props,
    )


def product_distribution(
    mu: Distribution,
    nu: Distribution,
    pairing: Callable[[int, int], int],
    size: int,
) -> Distribution:
    """
    直積分布の押し出し: z に Σ_{pairing(x,y)=z} µ(x)ν(y)

    Args:
        pairing: (左状態, 右状態) → 合成状態の添字
        size: 合成状態の数
    """
    mass = [Fraction(0)] * size
    for x in mu.support():
        for y in nu.support():
            z = pairing(x, y)
            if not 0 <= z < size:
                raise ModelFormatError(f"pairing の値 {z} が範囲外です（状態数 {size}）")
            mass[z] += mu[x] * nu[y]
    return Distribution(tuple(mass))


def _ordered_states(table: Mapping[str, Iterable[str]]) -> List[str]:
    states = list(table)
    for targets in table.values():
        for t in targets:
            if t not in states:
                states.append(t)
    return states


def embed_nts(successors: Mapping[str, Iterable[str]], label: str = "a") -> PNTS:
    """
    非決定遷移系の埋め込み: α(x) = {δ_y | y ∈ successors(x)}

    状態の順序は辞書のキー順、続いてキーに現れない遷移先の出現順。
    """
    states = _ordered_states(successors)
    n = len(states)
    transitions = {
        (states.index(x), label): [dirac(states.index(y), n) for y in targets]
        for x, targets in successors.items()
    }
    return PNTS.build(states, [Label(label)], transitions)


def embed_mp(
    chain: Mapping[str, Optional[Mapping[str, Union[Fraction, int, str]]]],
    label: str = "a",
) -> PNTS:
    """
    マルコフ過程の埋め込み: 終端状態は ∅、それ以外は {µ}
    """
    table = {x: list(mu) if mu is not None else [] for x, mu in chain.items()}
    states = _ordered_states(table)
    n = len(states)
    transitions: Dict[Tuple[int, str], List[Distribution]] = {}
    for x, mu in chain.items():
        if mu is None:
            continue
        entries = [Fraction(0)] * n
        for y, p in mu.items():
            entries[states.index(y)] = parse_rational(p)
        transitions[(states.index(x), label)] = [Distribution(tuple(entries))]
    return PNTS.build(states, [Label(label)], transitions)


def is_markov_process(model: PNTS) -> bool:
    """各 (状態, ラベル) の生成分布が高々 1 個か"""
    return all(len(generators) <= 1 for generators in model.transitions.values())


def is_nts(model: PNTS) -> bool:
    """すべての生成分布が Dirac 分布か"""
    return all(len(mu.support()) == 1
               for generators in model.transitions.values() for mu in generators)
