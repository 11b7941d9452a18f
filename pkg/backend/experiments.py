"""
モンテカルロによる試験の意味論

状態 x でボタン a を押す試行を繰り返し、スケジューラが選んだ生成分布から後続状態を引いて
実験 f の値を記録する。平均は選ばれた分布の E(f) に、生成分布ごとの平均の最大値は
ue_{α_a(x)}(f) に収束する。

- 乱数は numpy の Generator（ビットジェネレータは config.MONTE_CARLO_RNG、既定は Philox）
- 有理数の分布からは、分母の最小公倍数 L について [0, L) の整数を引き、
  整数化した累積重みを二分探索する逆 CDF 法で厳密に標本を取る
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from common import config
from common.errors import ModelFormatError, NoTransitionError
from common.utils import format_rational, lcm_of_denominators, parse_rational
from backend.model import PNTS, Valuation

logger = logging.getLogger(__name__)

Choice = Union[int, Tuple[Fraction, ...]]

_BIT_GENERATORS = {
    "philox": np.random.Philox,
    "pcg64": np.random.PCG64,
    "sfc64": np.random.SFC64,
}


def make_rng(seed: Union[int, np.random.SeedSequence, None]) -> np.random.Generator:
    """config.MONTE_CARLO_RNG のビットジェネレータで Generator を作る"""
    try:
        bit_generator = _BIT_GENERATORS[config.MONTE_CARLO_RNG]
    except KeyError:
        raise ValueError(f"未知の乱数アルゴリズムです: {config.MONTE_CARLO_RNG}") from None
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(config.DEFAULT_SEED if seed is None else seed)
    return np.random.Generator(bit_generator(seed))


class ExactSampler:
    """有理数の重みベクトルからの厳密な逆 CDF 標本化"""

    def __init__(self, weights: Sequence[Fraction]) -> None:
        weights = [Fraction(w) for w in weights]
        if any(w < 0 for w in weights) or sum(weights, Fraction(0)) != 1:
            raise ModelFormatError(f"重みは非負で総和 1 である必要があります: {[str(w) for w in weights]}")
        self.scale = lcm_of_denominators(weights)
        self.cumulative = np.cumsum([int(w * self.scale) for w in weights])

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        draws = rng.integers(0, self.scale, size=size)
        return np.searchsorted(self.cumulative, draws, side="right")


@dataclass
class Scheduler:
    """
    スケジューラ

    choices の値が整数なら生成分布の添字（決定的）、重みの組なら確率的に選ぶ。
    指定のない (状態, ラベル) では default（整数の添字、または "uniform"）に従う。
    """
    choices: Dict[Tuple[int, str], Choice] = field(default_factory=dict)
    default: Union[int, str] = 0

    def __post_init__(self) -> None:
        for key, choice in self.choices.items():
            if not isinstance(choice, int):
                self.choices[key] = tuple(Fraction(w) for w in choice)
                ExactSampler(self.choices[key])

    @classmethod
    def always(cls, index: int) -> "Scheduler":
        return cls(default=index)

    @classmethod
    def uniform(cls) -> "Scheduler":
        return cls(default="uniform")

    def choice(self, x: int, label: str, count: int) -> Choice:
        choice = self.choices.get((x, label), self.default)
        if choice == "uniform":
            return tuple(Fraction(1, count) for _ in range(count))
        if isinstance(choice, int):
            if not 0 <= choice < count:
                raise ModelFormatError(f"生成分布の添字 {choice} が範囲外です（{count} 個）")
            return choice
        if len(choice) != count:
            raise ModelFormatError(f"重みの数 {len(choice)} が生成分布の数 {count} と一致しません")
        return choice

    def pick(self, rng: np.random.Generator, x: int, label: str, count: int, size: int) -> np.ndarray:
        choice = self.choice(x, label, count)
        if isinstance(choice, int):
            return np.full(size, choice, dtype=np.int64)
        return ExactSampler(choice).sample(rng, size)


def scheduler_from_document(data: Mapping[str, Union[int, Sequence]], model: PNTS) -> Scheduler:
    """{"状態/ラベル": 添字 または 重みのリスト} からスケジューラを作る"""
    choices: Dict[Tuple[int, str], Choice] = {}
    for key, value in data.items():
        state, _, label = key.partition("/")
        if not label:
            raise ModelFormatError(f"スケジューラのキーは 状態/ラベル 形式です: {key}")
        index = model.state_index(state)
        model.label(label)
        choices[(index, label)] = value if isinstance(value, int) else tuple(parse_rational(w) for w in value)
    return Scheduler(choices)


@dataclass(frozen=True)
class TrialLog:
    """試行の記録。average = (1/n) Σ values"""
    seed: int
    state: str
    label: str
    generators: Tuple[int, ...]
    successors: Tuple[int, ...]
    values: Tuple[Fraction, ...]

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def average(self) -> Fraction:
        return sum(self.values, Fraction(0)) / self.n

    def to_json_lines(self, model: Optional[PNTS] = None) -> str:
        """見出し 1 行と試行ごとの 1 行（値と累積平均は厳密な有理数）"""
        header = {
            "seed": self.seed,
            "rng": config.MONTE_CARLO_RNG,
            "state": self.state,
            "label": self.label,
            "n": self.n,
            "average": format_rational(self.average),
        }
        lines = [json.dumps(header, ensure_ascii=False)]
        total = Fraction(0)
        for i, (g, s, v) in enumerate(zip(self.generators, self.successors, self.values), start=1):
            total += v
            record = {
                "trial": i,
                "generator": g,
                "successor": model.states[s] if model is not None else s,
                "value": format_rational(v),
                "average": format_rational(total / i),
            }
            lines.append(json.dumps(record, ensure_ascii=False))
        return "\n".join(lines) + "\n"


class MonteCarloSimulator:
    """1 つのモデルに対する試行の実行器"""

    def __init__(self, model: PNTS, seed: Optional[int] = None, max_workers: Optional[int] = None) -> None:
        self.model = model
        self.seed = config.DEFAULT_SEED if seed is None else seed
        self.max_workers = max_workers

    def _run(self, rng: np.random.Generator, seed: int, x: int, label: str,
             scheduler: Scheduler, f: Valuation, n: int) -> TrialLog:
        generators = self.model.successors(x, label)
        if not generators:
            raise NoTransitionError(f"状態 {self.model.states[x]} にラベル {label} の遷移がありません")
        if n < 1:
            raise ValueError("試行回数 n は 1 以上が必要です")
        picks = scheduler.pick(rng, x, label, len(generators), n)
        successors = np.zeros(n, dtype=np.int64)
        for g in range(len(generators)):
            positions = np.flatnonzero(picks == g)
            if positions.size:
                successors[positions] = ExactSampler(generators[g].entries).sample(rng, positions.size)
        values = tuple(Fraction(f[int(s)]) for s in successors)
        log = TrialLog(seed, self.model.states[x], label,
                       tuple(int(g) for g in picks), tuple(int(s) for s in successors), values)
        logger.debug(f"[MonteCarloSimulator._run] {log.state}/{label}: n={n}, 平均 {float(log.average):.6f}")
        return log

    def run_trials(self, x: int, label: str, scheduler: Scheduler, f: Valuation, n: int) -> TrialLog:
        return self._run(make_rng(self.seed), self.seed, x, label, scheduler, f, n)

    def estimate_upper_expectation(self, x: int, label: str, f: Valuation, n: int) -> float:
        """
        生成分布ごとに n 回ずつ試行し、平均の最大値を返す（遷移がなければ 0）

        生成分布 i の試行はシードから spawn した i 番目の独立な乱数列を使う。
        """
        generators = self.model.successors(x, label)
        if not generators:
            return 0.0
        streams = np.random.SeedSequence(self.seed).spawn(len(generators))

        def trial(i: int) -> TrialLog:
            return self._run(make_rng(streams[i]), self.seed, x, label, Scheduler.always(i), f, n)

        if self.max_workers and self.max_workers > 1:
            with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
                logs = list(pool.map(trial, range(len(generators))))
        else:
            logs = [trial(i) for i in range(len(generators))]
        return max(float(log.average) for log in logs)


def run_trials(
    model: PNTS,
    x: int,
    label: str,
    scheduler: Scheduler,
    f: Valuation,
    n: int,
    seed: Optional[int] = None,
) -> TrialLog:
    """
    Raises:
        NoTransitionError: α_label(x) が空
    """
    return MonteCarloSimulator(model, seed).run_trials(x, label, scheduler, f, n)


def estimate_upper_expectation(
    model: PNTS,
    x: int,
    label: str,
    f: Valuation,
    n: int,
    seed: Optional[int] = None,
    max_workers: Optional[int] = None,
) -> float:
    return MonteCarloSimulator(model, seed, max_workers).estimate_upper_expectation(x, label, f, n)


def hoeffding_radius(n: int, spread: float, delta: float = 0.05) -> float:
    """値域の幅 spread の n 個の平均が、確率 1 − delta 以上で入る真値からの半径"""
    if n < 1 or not 0 < delta < 1:
        raise ValueError("n ≥ 1, 0 < delta < 1 が必要です")
    return spread * math.sqrt(math.log(2 / delta) / (2 * n))
