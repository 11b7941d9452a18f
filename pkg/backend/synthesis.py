"""
論理式の合成

UE ブロック上で定数な有理数評価値 target に対し、⟦φ⟧ = target となる式 φ を構成する。

精錬の履歴 P0 ⊒ P1 ⊒ … ⊒ Pk を使い、段 r の各ブロックの指示関数を段 r−1 の式から作る。
- 段 r の 2 ブロック B, C が段 r−1 で別ブロックにあるなら、B の親ブロックの指示関数で分離する
- 同じ親ブロックにあるなら、段 r−1 の分割で分離 LP が返す実験 f に対し ◇_a(f を表す式) で分離する
- 段 0 は命題で分離する

分離する式 s から、B で 1、C で 0、それ以外で [0,1] の値を取る式を
R では線形変換と (· ⊓ 1) ⊔ 0 で、Ł では ⊖ と切り詰めた和で作り、C について ⊓ を取る。
式は部分式を共有する DAG として組み立てる。
"""

import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from common import config
from common.errors import LogicKindError, ModelFormatError, SynthesisError, TargetNotInvariantError
from backend.bisim import BisimKind, refinement_rounds, separate_states
from backend.evaluator import Evaluator
from backend.formula import (Diamond, Formula, Join, LogicKind, Meet, Neg, One, OPlus, Plus,
                             Prop, Scale, Zero)
from backend.model import PNTS, Partition, Valuation

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)

SUPPORTED_KINDS = (LogicKind.R, LogicKind.LUK)


class FormulaSynthesizer:
    """
    1 つのモデルに対する式の合成器

    指示関数と表現式は (段, ブロック) / (段, 値) ごとに記憶し、同じ部分式を使い回す。
    capped=False なら精錬の段数に config.SYNTHESIS_MAX_DEPTH の上限を課さない。
    """

    def __init__(self, model: PNTS, kind: LogicKind = LogicKind.R,
                 rounds: Optional[List[Partition]] = None, capped: bool = True) -> None:
        self.model = model
        self.kind = LogicKind(kind)
        if self.kind not in SUPPORTED_KINDS:
            raise LogicKindError(f"論理 {self.kind.value} の式合成は未対応です（r, luk のみ）")
        self.rounds = rounds if rounds is not None else refinement_rounds(model, BisimKind.UE)
        self.depth = len(self.rounds) - 1
        if capped and self.depth > config.SYNTHESIS_MAX_DEPTH:
            raise SynthesisError(
                f"UE 分割の安定に {self.depth} ラウンド必要で、上限 {config.SYNTHESIS_MAX_DEPTH} を超えています",
                config.SYNTHESIS_MAX_DEPTH,
            )
        self._indicators: Dict[Tuple[int, int], Formula] = {}
        self._representations: Dict[Tuple[int, Tuple[Fraction, ...]], Formula] = {}
        self._separators: Dict[Tuple[int, int, int], Tuple[Formula, Fraction, Fraction]] = {}

    @property
    def partition(self) -> Partition:
        return self.rounds[-1]

    # -- 値の扱い ------------------------------------------------------------

    def block_values(self, level: int, valuation: Valuation) -> Tuple[Fraction, ...]:
        """valuation を段 level の各ブロックの値にする（ブロック上で定数であること）"""
        partition = self.rounds[level]
        if not partition.is_invariant(valuation.values):
            raise TargetNotInvariantError("目標値が UE ブロック上で定数ではありません")
        return tuple(Fraction(valuation[b[0]]) for b in partition.blocks)

    # -- 分離する式 ----------------------------------------------------------

    def _separator(self, level: int, b: int, c: int) -> Tuple[Formula, Fraction, Fraction]:
        """段 level のブロック b, c を分離する式と、b, c での値"""
        key = (level, b, c)
        if key in self._separators:
            return self._separators[key]
        partition = self.rounds[level]
        x, y = partition.blocks[b][0], partition.blocks[c][0]

        if level == 0:
            name = next(p for p, v in self.model.props.items() if v[x] != v[y])
            valuation = self.model.props[name]
            result = (Prop(name), Fraction(valuation[x]), Fraction(valuation[y]))
        else:
            parent = self.rounds[level - 1]
            if not parent.same_block(x, y):
                formula = self.indicator(level - 1, parent.block_of[x])
                result = (formula, ONE, ZERO)
            else:
                counterexample = separate_states(self.model, parent, x, y)
                if counterexample is None or counterexample.label is None:
                    raise SynthesisError("分離する実験が見つかりません", level)
                f = counterexample.separator
                values = self.block_values(level - 1, f)
                if self.kind == LogicKind.LUK:
                    values = tuple(HALF * v + HALF for v in values)
                body = self.represent(level - 1, values)
                formula = Diamond(counterexample.label, body)
                lifted = Valuation(parent.lift(values))
                ue = Evaluator(self.model).diamond(counterexample.label, lifted)
                result = (formula, Fraction(ue[x]), Fraction(ue[y]))
        if result[1] == result[2]:
            raise SynthesisError(f"段 {level} のブロック {b}, {c} を分離できません", level)
        self._separators[key] = result
        return result

    # -- 指示関数 ------------------------------------------------------------

    def _riesz_unit(self, s: Formula, at_b: Fraction, at_c: Fraction) -> Formula:
        """R: b で 1、c で 0 になる clamp((s − s(c)) / (s(b) − s(c)))"""
        shifted = s if at_c == 0 else Plus(s, Scale(-at_c, One()))
        scaled = Scale(ONE / (at_b - at_c), shifted)
        return Join(Meet(scaled, One()), Zero())

    def _luk_truncated_multiple(self, u: Formula, k: Fraction) -> Formula:
        """min(k·u, 1)（k ≥ 1）。整数部は ⊕ の倍加で、端数は q·u で足す"""
        whole = int(k)
        remainder = k - whole
        powers: List[Formula] = [u]
        while (1 << len(powers)) <= whole:
            powers.append(OPlus(powers[-1], powers[-1]))
        result: Optional[Formula] = None
        for bit, term in enumerate(powers):
            if whole >> bit & 1:
                result = term if result is None else OPlus(result, term)
        assert result is not None
        if remainder:
            result = OPlus(result, Scale(remainder, u))
        return result

    def _luk_unit(self, s: Formula, at_b: Fraction, at_c: Fraction) -> Formula:
        """Ł: b で 1、c で 0 になる min((s ⊖ s(c)) / (s(b) − s(c)), 1)"""
        if at_b < at_c:
            s, at_b, at_c = Neg(s), ONE - at_b, ONE - at_c
        # s ⊖ c = ¬(¬s ⊕ c·1)
        shifted = s if at_c == 0 else Neg(OPlus(Neg(s), Scale(at_c, One())))
        return self._luk_truncated_multiple(shifted, ONE / (at_b - at_c))

    def indicator(self, level: int, b: int) -> Formula:
        """段 level のブロック b の指示関数"""
        key = (level, b)
        if key in self._indicators:
            return self._indicators[key]
        partition = self.rounds[level]
        units: List[Formula] = []
        for c in range(len(partition)):
            if c == b:
                continue
            s, at_b, at_c = self._separator(level, b, c)
            if self.kind == LogicKind.LUK:
                units.append(self._luk_unit(s, at_b, at_c))
            else:
                units.append(self._riesz_unit(s, at_b, at_c))
        result = _balanced(Meet, units) if units else One()
        self._indicators[key] = result
        return result

    def represent(self, level: int, values: Sequence[Fraction]) -> Formula:
        """段 level のブロック値 values をとる式"""
        values = tuple(Fraction(v) for v in values)
        key = (level, values)
        if key in self._representations:
            return self._representations[key]
        if len(set(values)) == 1:
            result = _constant(values[0])
        else:
            combine = OPlus if self.kind == LogicKind.LUK else Plus
            terms: List[Formula] = []
            for b, v in enumerate(values):
                if v == 0:
                    continue
                unit = self.indicator(level, b)
                terms.append(unit if v == 1 else Scale(v, unit))
            result = _balanced(combine, terms)
        self._representations[key] = result
        return result

    def block_indicators(self) -> List[Formula]:
        """最終的な UE 分割の各ブロックの指示関数"""
        return [self.indicator(self.depth, b) for b in range(len(self.partition))]

    def synthesize(self, target: Valuation) -> Formula:
        if not target.exact:
            raise ModelFormatError("目標値は有理数で与えてください")
        if target.dimension != self.model.num_states:
            raise ModelFormatError("目標値の次元が状態数と一致しません")
        values = self.block_values(self.depth, target)
        if self.kind == LogicKind.LUK and any(v < 0 or v > 1 for v in values):
            raise LogicKindError("Ł の式の値は [0,1] に限られます")
        phi = self.represent(self.depth, values)

        check = Evaluator(self.model, self.kind, persistent_cache=True).evaluate(phi)
        if tuple(check.values) != tuple(target.values):
            raise SynthesisError("合成した式の値が目標値と一致しません", self.depth)
        logger.info(f"[FormulaSynthesizer.synthesize] 深さ {self.depth} の式を合成しました")
        return phi


def _balanced(op, terms: Sequence[Formula]) -> Formula:
    """二項演算子で項を平衡木に畳み込む（入れ子の深さを log に抑える）"""
    if len(terms) == 1:
        return terms[0]
    middle = len(terms) // 2
    return op(_balanced(op, terms[:middle]), _balanced(op, terms[middle:]))


def _constant(c: Fraction) -> Formula:
    if c == 1:
        return One()
    if c == 0:
        return Zero()
    return Scale(c, One())


def synthesize_formula(model: PNTS, target: Valuation, kind: LogicKind = LogicKind.R) -> Formula:
    """
    ⟦φ⟧ = target となる式を合成する（kind は r または luk）

    Raises:
        TargetNotInvariantError: target が UE ブロック上で定数でない
        SynthesisError: 精錬の段数が config.SYNTHESIS_MAX_DEPTH を超える、自己検査の不一致
        LogicKindError: 未対応の論理、luk で [0,1] 外の目標値
    """
    return FormulaSynthesizer(model, kind).synthesize(target)


def block_indicators(model: PNTS, kind: LogicKind = LogicKind.LUK) -> Tuple[Partition, List[Formula]]:
    """UE 分割とその各ブロックの指示関数"""
    synthesizer = FormulaSynthesizer(model, kind)
    return synthesizer.partition, synthesizer.block_indicators()
