"""
サンプルモデル

midpoint_model: 標準双模倣ではないが UE 双模倣な x, y（y だけが中点の分布 (1/2, 1/2) を持つ）
hull_gap_model: UP 双模倣だが UE 双模倣ではない x, y（実験 g = (60, 0, 50) で区別できる）
"""

from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from backend.model import PNTS, Distribution, Label, LabelKind, TAU, Valuation, dirac

F = Fraction


def _dist(n: int, mass: Dict[int, Fraction]) -> Distribution:
    entries = [F(0)] * n
    for x, p in mass.items():
        entries[x] = p
    return Distribution(tuple(entries))


def midpoint_model() -> PNTS:
    """状態 x, y, x1, x2（x1 は a の自己ループ、x2 は終端）"""
    states = ["x", "y", "x1", "x2"]
    n = len(states)
    mu1 = _dist(n, {2: F(1, 5), 3: F(4, 5)})
    mu2 = _dist(n, {2: F(4, 5), 3: F(1, 5)})
    middle = _dist(n, {2: F(1, 2), 3: F(1, 2)})
    transitions = {
        (0, "a"): [mu1, mu2],
        (1, "a"): [mu1, mu2, middle],
        (2, "a"): [dirac(2, n)],
    }
    return PNTS.build(states, [Label("a")], transitions)


HULL_GAP_EXPERIMENT = "60*<a>1 + 50*(1 + (-1)*<a>1 + (-1)*<b>1)"


def hull_gap_model() -> PNTS:
    """
    状態 x, y, x1, x2, x3（x1 は a、x2 は b の自己ループ、x3 は終端）

    α_a(x) = {µ1, µ2}, α_a(y) = {µ1, µ2, µ3}。µ3 は H({µ1, µ2}) の外にある。
    """
    states = ["x", "y", "x1", "x2", "x3"]
    n = len(states)
    mu1 = _dist(n, {2: F(3, 10), 3: F(3, 10), 4: F(2, 5)})
    mu2 = _dist(n, {2: F(1, 2), 3: F(2, 5), 4: F(1, 10)})
    mu3 = _dist(n, {2: F(2, 5), 3: F(3, 10), 4: F(3, 10)})
    transitions = {
        (0, "a"): [mu1, mu2],
        (1, "a"): [mu1, mu2, mu3],
        (2, "a"): [dirac(2, n)],
        (3, "b"): [dirac(3, n)],
    }
    return PNTS.build(states, [Label("a"), Label("b")], transitions)


def hull_gap_experiment() -> Valuation:
    """g = (60, 0, 50) を葉 x1, x2, x3 に置いた実験（x, y では 0）"""
    return Valuation((F(0), F(0), F(60), F(0), F(50)))


def ccs_alphabet() -> List[Label]:
    return [Label("a"), Label("a_bar", LabelKind.CO_NAME, "a"), TAU]


def ccs_pair() -> Tuple[PNTS, PNTS]:
    """p →a δ_p' と q →ā δ_q'（共通のラベル表 a, a_bar, tau）"""
    left = PNTS.build(["p", "p'"], ccs_alphabet(), {(0, "a"): [dirac(1, 2)]})
    right = PNTS.build(["q", "q'"], ccs_alphabet(), {(0, "a_bar"): [dirac(1, 2)]})
    return left, right


def terminal_model(labels: Optional[List[Label]] = None) -> PNTS:
    """遷移のない 1 状態 t"""
    return PNTS.build(["t"], labels or [Label("a")], {})


SAMPLE_NTS: Dict[str, List[str]] = {
    "s": ["t", "u"],
    "s'": ["t'"],
    "t": ["t"],
    "t'": ["t'"],
    "u": [],
}

SAMPLE_CHAIN: Dict[str, Optional[Dict[str, str]]] = {
    "heads": {"heads": "1/2", "tails": "1/2"},
    "tails": {"heads": "1/3", "tails": "2/3"},
    "stop": None,
}
