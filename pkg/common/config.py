# common/config.py
"""
共通設定ファイル

- 不動点反復の許容誤差と反復上限
- 分割精錬・式合成・式列挙の計算量ガード
- 公理検査とモンテカルロ実験の乱数設定
- 反例ログの保存先

【参照方法】
各モジュールは ``from common import config`` として呼び出し時に値を読む。
テストでは monkeypatch で値を差し替えられる。
"""

from dataclasses import dataclass
from fractions import Fraction

# 浮動小数点モードの不動点反復: 連続する反復値の sup ノルム差がこの値未満で停止
FIXPOINT_EPSILON = 1e-9
FIXPOINT_MAX_ITERATIONS = 1_000_000

# 厳密（有理数）モードの不動点反復の上限
EXACT_FIXPOINT_MAX_ITERATIONS = 10_000

# UP 双模倣でブロックの和集合を列挙する際の最大ブロック数
UP_BLOCK_GUARD = 20

# 空集合と非空集合の Hausdorff 距離（D(X) の L1 直径）
EMPTY_HULL_DISTANCE = Fraction(2)

# [0,1] 値論理の値域検査の許容差（浮動小数点モード）
RANGE_TOLERANCE = 1e-12

# 式合成で許す ◇ の入れ子の深さ
SYNTHESIS_MAX_DEPTH = 6

# 式列挙で使う有理定数（Stern–Brocot 木の深さ）
STERN_BROCOT_DEPTH = 4

# 公理検査で生成する乱数有理数の範囲
AXIOM_NUMERATOR_RANGE = 10
AXIOM_MAX_DENOMINATOR = 6

# 乱数の既定シードとモンテカルロ用ビットジェネレータ名（numpy Philox, カウンタベース）
DEFAULT_SEED = 20240601
MONTE_CARLO_RNG = "philox"

# True のとき LP の解をすべて元の制約に代入し直して検証する（テストセッションで有効化）
LP_VERIFY_WITNESS = False

# 反例ログ
COUNTEREXAMPLE_LOG_DIR = "CounterexampleLogs"
CONGRUENCE_LOG_NAME = "congruence_violations.json"
PROPERTY_LOG_NAME = "property_violations.json"


def fixpoint_tolerance(exact: bool) -> float:
    """
    ブロック内で評価値が一致しているとみなす許容差を返します。
    厳密モードでは 0、浮動小数点モードでは 2ε。

    Args:
        exact: 厳密モードかどうか

    Returns:
        許容差
    """
    if exact:
        return 0.0
    return 2 * FIXPOINT_EPSILON


@dataclass
class FixpointConfig:
    """不動点反復の設定"""
    epsilon: float = FIXPOINT_EPSILON
    max_iterations: int = FIXPOINT_MAX_ITERATIONS
    exact: bool = False
    exact_max_iterations: int = EXACT_FIXPOINT_MAX_ITERATIONS


# CLI で式をテキスト表示する上限（木として展開したノード数）。超える場合は DAG のノード表のみ出力
RENDER_MAX_FORMULA_TEXT = 5_000
