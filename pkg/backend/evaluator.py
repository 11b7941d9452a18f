"""
論理式の意味論

⟦φ⟧ は状態上の評価値。◇_a は ue_{α_a(x)} を各状態で取る演算子で、遷移がない状態では 0。

- 不動点を含まない式は Fraction の object 配列で厳密に評価する
- 不動点を含む式は既定で float64 配列を使い、連続する反復値の sup ノルム差が ε 未満で停止する
- exact=True の FixpointConfig では有理数のまま反復し、値が完全に一致した時点で停止する
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from common import config
from common.config import FixpointConfig
from common.errors import (DimensionMismatchError, FixpointDivergenceError, LogicKindError,
                           RangeViolationError, UnboundVariableError)
from backend.formula import (Diamond, Formula, Join, LogicKind, Meet, Minus, Mu, Neg, Nu, One,
                             OPlus, Plus, PosPart, Prod, Prop, Scale, Var, Zero, has_fixpoints,
                             validate_kind)
from backend.model import PNTS, Valuation

logger = logging.getLogger(__name__)

Environment = Mapping[str, Valuation]


@dataclass(frozen=True)
class FixpointTrace:
    """不動点反復 1 回分の記録"""
    var: str
    fixpoint: str
    iterations: int
    residual: float
    monotone: bool
    exact: bool


@dataclass
class _DiamondTable:
    matrix: np.ndarray
    ranges: Dict[int, Tuple[int, int]]


class Evaluator:
    """
    モデル 1 つに対する評価器

    persistent_cache=True のとき、自由変数のない位置で評価した部分式の値を
    オブジェクトの id で記憶し、呼び出しをまたいで再利用する（合成・列挙用）。
    """

    def __init__(
        self,
        model: PNTS,
        kind: Optional[LogicKind] = None,
        fixpoint_config: Optional[FixpointConfig] = None,
        persistent_cache: bool = False,
    ) -> None:
        self.model = model
        self.kind = LogicKind(kind) if kind is not None else None
        self.fixpoint_config = fixpoint_config or FixpointConfig(
            epsilon=config.FIXPOINT_EPSILON,
            max_iterations=config.FIXPOINT_MAX_ITERATIONS,
            exact_max_iterations=config.EXACT_FIXPOINT_MAX_ITERATIONS,
        )
        self.persistent_cache = persistent_cache
        self.traces: List[FixpointTrace] = []
        self._tables: Dict[Tuple[str, bool], _DiamondTable] = {}
        self._cache: Dict[Tuple[int, bool], Tuple[Formula, np.ndarray]] = {}
        self._exact = True

    # -- 公開 API ------------------------------------------------------------

    def evaluate(self, phi: Formula, env: Optional[Environment] = None) -> Valuation:
        """
        ⟦phi⟧_ρ を計算する

        Raises:
            LogicKindError: 論理の種類の違反、未知のラベル
            UnboundVariableError: 未束縛の変数・未定義の命題
            FixpointDivergenceError: 反復が上限回数内に収束しない
            RangeViolationError: [0,1] 値論理で部分式が範囲外の値を取った
        """
        if self.kind is not None:
            validate_kind(phi, self.kind)
        self._exact = self.fixpoint_config.exact or not has_fixpoints(phi)
        self.traces = []
        if not self.persistent_cache:
            self._cache = {}

        arrays: Dict[str, np.ndarray] = {}
        for name, valuation in (env or {}).items():
            if valuation.dimension != self.model.num_states:
                raise DimensionMismatchError(f"変数 {name} の評価値の次元が状態数と一致しません")
            arrays[name] = self._array(valuation.values)

        values = self._eval(phi, arrays)
        return Valuation(tuple(values.tolist()), exact=self._exact)

    def diamond(self, label: Optional[str], f: Valuation) -> Valuation:
        """◇_label を評価値 f に適用する"""
        if f.dimension != self.model.num_states:
            raise DimensionMismatchError("評価値の次元が状態数と一致しません")
        self._exact = f.exact
        values = self._diamond(self.resolve_label(label), self._array(f.values))
        return Valuation(tuple(values.tolist()), exact=f.exact)

    # -- 配列の補助 ------------------------------------------------------------

    def _array(self, values) -> np.ndarray:
        if self._exact:
            return np.array([Fraction(v) for v in values], dtype=object)
        return np.array([float(v) for v in values], dtype=np.float64)

    def _constant(self, value: Fraction) -> np.ndarray:
        return self._array([value] * self.model.num_states)

    def _scalar(self, q: Fraction):
        return Fraction(q) if self._exact else float(q)

    def resolve_label(self, label: Optional[str]) -> str:
        names = self.model.label_names
        if label is None:
            if len(names) != 1:
                raise LogicKindError(f"<> はラベルが 1 つのモデルでのみ使えます（ラベル: {list(names)}）")
            return names[0]
        if label not in names:
            raise LogicKindError(f"未定義のラベルです: {label}")
        return label

    def _table(self, label: str) -> _DiamondTable:
        key = (label, self._exact)
        if key not in self._tables:
            rows: List[Tuple[Fraction, ...]] = []
            ranges: Dict[int, Tuple[int, int]] = {}
            for x in range(self.model.num_states):
                generators = self.model.successors(x, label)
                if generators:
                    ranges[x] = (len(rows), len(rows) + len(generators))
                    rows.extend(mu.entries for mu in generators)
            n = self.model.num_states
            if self._exact:
                matrix = np.array(rows, dtype=object).reshape(len(rows), n)
            else:
                matrix = np.array([[float(p) for p in row] for row in rows],
                                  dtype=np.float64).reshape(len(rows), n)
            self._tables[key] = _DiamondTable(matrix, ranges)
        return self._tables[key]

    def _diamond(self, label: str, f: np.ndarray) -> np.ndarray:
        table = self._table(label)
        out = self._constant(Fraction(0))
        if not table.ranges:
            return out
        expectations = table.matrix.dot(f)
        for x, (start, stop) in table.ranges.items():
            out[x] = expectations[start:stop].max()
        return out

    # -- 評価本体 --------------------------------------------------------------

    def _eval(self, phi: Formula, env: Dict[str, np.ndarray]) -> np.ndarray:
        key = (id(phi), self._exact)
        if not env and key in self._cache:
            return self._cache[key][1]
        values = self._eval_node(phi, env)
        if self.kind is not None and self.kind.unit_interval:
            self._check_range(phi, values)
        if not env:
            self._cache[key] = (phi, values)
        return values

    def _eval_node(self, phi: Formula, env: Dict[str, np.ndarray]) -> np.ndarray:
        zero = self._scalar(Fraction(0))
        one = self._scalar(Fraction(1))
        match phi:
            case One():
                return self._constant(Fraction(1))
            case Zero():
                return self._constant(Fraction(0))
            case Scale(q=q, body=body):
                return self._scalar(q) * self._eval(body, env)
            case Plus(left=left, right=right):
                return self._eval(left, env) + self._eval(right, env)
            case Join(left=left, right=right):
                return np.maximum(self._eval(left, env), self._eval(right, env))
            case Meet(left=left, right=right):
                return np.minimum(self._eval(left, env), self._eval(right, env))
            case PosPart(body=body):
                return np.maximum(self._eval(body, env), zero)
            case Neg(body=body):
                return one - self._eval(body, env)
            case Prod(left=left, right=right):
                return self._eval(left, env) * self._eval(right, env)
            case Minus(body=body, q=q):
                return np.maximum(self._eval(body, env) - self._scalar(q), zero)
            case OPlus(left=left, right=right):
                return np.minimum(self._eval(left, env) + self._eval(right, env), one)
            case Diamond(label=label, body=body):
                return self._diamond(self.resolve_label(label), self._eval(body, env))
            case Prop(name=name):
                if name not in self.model.props:
                    raise UnboundVariableError(f"未定義の命題です: {name}")
                return self._array(self.model.props[name].values)
            case Var(name=name):
                if name not in env:
                    raise UnboundVariableError(f"束縛されていない変数です: {name}")
                return env[name]
            case Mu(var=v, body=body):
                return self._fixpoint(v, body, env, least=True)
            case Nu(var=v, body=body):
                return self._fixpoint(v, body, env, least=False)
        raise TypeError(f"未知の式です: {phi!r}")

    def _fixpoint(self, var: str, body: Formula, env: Dict[str, np.ndarray], least: bool) -> np.ndarray:
        """Knaster–Tarski 反復（µ は全 0、ν は全 1 から）"""
        cfg = self.fixpoint_config
        exact = self._exact
        limit = cfg.exact_max_iterations if exact else cfg.max_iterations
        tolerance = config.fixpoint_tolerance(exact)
        current = self._constant(Fraction(0) if least else Fraction(1))
        monotone = True
        residual = float("inf")
        for iteration in range(1, limit + 1):
            following = self._eval(body, {**env, var: current})
            step = following - current
            residual = float(max(abs(d) for d in step)) if step.size else 0.0
            if least:
                monotone = monotone and all(d >= -tolerance for d in step)
            else:
                monotone = monotone and all(d <= tolerance for d in step)
            converged = residual == 0 if exact else residual < cfg.epsilon
            current = following
            if converged:
                self.traces.append(FixpointTrace(var, "mu" if least else "nu", iteration,
                                                 residual, monotone, exact))
                logger.debug(
                    f"[Evaluator._fixpoint] {'mu' if least else 'nu'} {var}: "
                    f"{iteration} 回で収束 (残差 {residual})"
                )
                return current
        raise FixpointDivergenceError(
            f"不動点 {var} の反復が {limit} 回以内に収束しませんでした", residual, limit
        )

    def _check_range(self, phi: Formula, values: np.ndarray) -> None:
        tolerance = 0 if self._exact else config.RANGE_TOLERANCE
        for v in values:
            if v < -tolerance or v > 1 + tolerance:
                raise RangeViolationError(f"部分式 {phi} の値 {v} が [0,1] の外にあります")


def evaluate(
    model: PNTS,
    phi: Formula,
    env: Optional[Environment] = None,
    kind: Optional[LogicKind] = None,
    exact_fixpoints: bool = False,
    epsilon: Optional[float] = None,
) -> Valuation:
    """
    ⟦phi⟧ を 1 回だけ評価する

    Args:
        kind: 指定すると式の種類と [0,1] の値域を検査する
        exact_fixpoints: 不動点も有理数で反復する
        epsilon: 浮動小数点モードの停止条件（既定は config.FIXPOINT_EPSILON）
    """
    fixpoint_config = FixpointConfig(
        epsilon=config.FIXPOINT_EPSILON if epsilon is None else epsilon,
        max_iterations=config.FIXPOINT_MAX_ITERATIONS,
        exact=exact_fixpoints,
        exact_max_iterations=config.EXACT_FIXPOINT_MAX_ITERATIONS,
    )
    return Evaluator(model, kind, fixpoint_config).evaluate(phi, env)


def diamond(model: PNTS, label: Optional[str], f: Valuation) -> Valuation:
    """◇_α 演算子: x ↦ max_{µ∈α_label(x)} E_µ(f)（遷移がなければ 0）"""
    return Evaluator(model).diamond(label, f)
