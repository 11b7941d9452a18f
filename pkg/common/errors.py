# common/errors.py
"""
例外クラス定義

入力の不備（ファイル形式・式の構文・論理の種類違反など）は ValueError の派生、
計算資源や反復の限界に関するものは RuntimeError の派生として扱う。
CLI は ValueError 系を終了コード 2 に対応付ける。
"""

from typing import List, Optional


class RieszError(Exception):
    """本パッケージの例外の基底クラス"""


class ModelFormatError(RieszError, ValueError):
    """モデル・分割・評価値ファイルの形式エラー"""

    def __init__(self, message: str, messages: Optional[List[str]] = None) -> None:
        super().__init__(message)
        self.messages: List[str] = list(messages or [])


class DimensionMismatchError(RieszError, ValueError):
    """分布・評価値の次元が状態数と一致しない"""


class FormulaSyntaxError(RieszError, ValueError):
    """論理式の構文エラー（位置情報付き）"""

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} (位置 {position})")
        self.position = position


class LogicKindError(RieszError, ValueError):
    """論理の種類で許可されていない構成子・スカラー"""


class UnboundVariableError(RieszError, ValueError):
    """環境に束縛されていない変数・未定義の命題"""


class EmptyHullError(RieszError, ValueError):
    """空の生成集合に対して距離が定義できない"""


class AlphabetMismatchError(RieszError, ValueError):
    """並列合成でラベル表が整合しない"""


class NoTransitionError(RieszError, ValueError):
    """指定ラベルの遷移が存在しない状態でシミュレーションを要求した"""


class TargetNotInvariantError(RieszError, ValueError):
    """合成対象の評価値が UE ブロック上で定数になっていない"""


class ResourceLimitError(RieszError, RuntimeError):
    """列挙ガード（UP 双模倣のブロック数上限など）を超えた"""


class FixpointDivergenceError(RieszError, RuntimeError):
    """不動点反復が上限回数内に収束しなかった"""

    def __init__(self, message: str, residual: float, iterations: int) -> None:
        super().__init__(f"{message} (残差 {residual}, 反復 {iterations} 回)")
        self.residual = residual
        self.iterations = iterations


class SynthesisError(RieszError, RuntimeError):
    """式の合成に失敗した（探索深さの上限超過・自己検査の不一致）"""

    def __init__(self, message: str, depth: int) -> None:
        super().__init__(f"{message} (到達した深さ {depth})")
        self.depth = depth


class RangeViolationError(RieszError, RuntimeError):
    """[0,1] 値論理の部分式が範囲外の値を取った"""


class LPWitnessError(RieszError, RuntimeError):
    """LP の解が制約を満たさない（検証モードでのみ送出）"""
