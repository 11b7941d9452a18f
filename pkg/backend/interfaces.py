"""
Backend Interfaces
==================

抽象インターフェースを定義し、分割精錬の種類や合成規則を差し替え可能にします。
"""

from abc import ABC, abstractmethod
from typing import Callable, Iterable, Tuple

from backend.model import PNTS, Distribution, Partition


class BlockSplitter(ABC):
    """分割精錬の 1 ラウンドで 2 状態が同じブロックに残るかを判定するインターフェース"""

    def begin_round(self, model: PNTS, partition: Partition) -> None:
        """ラウンド開始時の前処理（キャッシュの初期化など）"""

    @abstractmethod
    def equivalent(self, model: PNTS, partition: Partition, x: int, y: int) -> bool:
        """partition の下で x と y を区別できないか"""
        pass


class CompositionRule(ABC):
    """合成状態の遷移を構成要素の遷移から生成する規則のインターフェース"""

    name: str = ""

    @abstractmethod
    def apply(
        self,
        left: PNTS,
        right: PNTS,
        x: int,
        y: int,
        pairing: Callable[[int, int], int],
        size: int,
    ) -> Iterable[Tuple[str, Distribution]]:
        """合成状態 (x, y) の (ラベル, 生成分布) を列挙する"""
        pass
