# utils.py
"""
共通ユーティリティ関数群
"""

import json
import logging
import math
import os
import re
from fractions import Fraction
from typing import Any, Iterable, List, Union

from common.errors import ModelFormatError

logger = logging.getLogger(__name__)

RationalLike = Union[Fraction, int, str, float]

_RATIONAL_PATTERN = re.compile(r"^\s*[+-]?(\d+(\.\d*)?|\.\d+)(\s*/\s*\d+)?\s*$")


def load_json_file(file_path: str) -> Any:
    """
    JSONファイルを読み込む
    Args:
        file_path (str): 読み込むファイルパス
    Returns:
        Any: ファイル内容
    Raises:
        ModelFormatError: ファイルが存在しない・JSON として解析できない
    """
    if not os.path.exists(file_path):
        raise ModelFormatError(f"ファイルが見つかりません: {file_path}")
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        logger.error(f"[load_json_file] JSON読み込みエラー: {e}")
        raise ModelFormatError(f"JSON として解析できません: {file_path}: {e}") from e


def save_json_file(file_path: str, data: Any) -> bool:
    """
    JSONファイルを保存する
    Args:
        file_path (str): 保存するファイルパス
        data (Any): 保存するデータ
    Returns:
        bool: 保存成功時にTrueを返す
    """
    try:
        # ディレクトリが存在しない場合は作成
        dir_path = os.path.dirname(file_path)
        if dir_path and not os.path.exists(dir_path):
            os.makedirs(dir_path)

        with open(file_path, "w", encoding="utf-8") as f:
            json.dump(data, f, ensure_ascii=False, indent=4)
        return True
    except OSError as e:
        logger.error(f"[save_json_file] JSON保存エラー: {e}")
        return False


def parse_rational(value: RationalLike) -> Fraction:
    """
    有理数表記を厳密な Fraction に変換する
    "p/q" 形式と十進表記（"0.25"）を受け付ける。十進表記は丸めずに変換する。
    Args:
        value: 文字列・整数・Fraction・JSON 由来の float
    Returns:
        Fraction: 既約分数
    Raises:
        ModelFormatError: 解釈できない表記
    """
    if isinstance(value, bool):
        raise ModelFormatError(f"有理数として解釈できません: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # JSON の数値リテラルは十進表記として扱う
        if not math.isfinite(value):
            raise ModelFormatError(f"有限の値ではありません: {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str) and _RATIONAL_PATTERN.match(value):
        text = value.replace(" ", "")
        if "/" in text:
            numerator, denominator = text.split("/")
            if int(denominator) == 0:
                raise ModelFormatError(f"分母が 0 です: {value!r}")
            return Fraction(numerator) / int(denominator)
        return Fraction(text)
    raise ModelFormatError(f"有理数として解釈できません: {value!r}")


def format_rational(value: Union[Fraction, float]) -> str:
    """Fraction を "p/q"（整数なら "n"）形式の文字列にする"""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    return repr(float(value))


def lcm_of_denominators(values: Iterable[Fraction]) -> int:
    """分母の最小公倍数"""
    result = 1
    for v in values:
        result = result * v.denominator // math.gcd(result, v.denominator)
    return result


def stern_brocot_levels(depth: int) -> List[List[Fraction]]:
    """
    [0,1] の Stern–Brocot 木を深さ順に返す
    例: depth=2 → [[0, 1], [1/2], [1/3, 2/3]]
    Args:
        depth: 追加する中間数の段数
    Returns:
        List[List[Fraction]]: 段ごとの有理数（各段は昇順）
    """
    sequence = [Fraction(0), Fraction(1)]
    levels: List[List[Fraction]] = [list(sequence)]
    for _ in range(depth):
        new_level: List[Fraction] = []
        merged: List[Fraction] = [sequence[0]]
        for left, right in zip(sequence, sequence[1:]):
            mediant = Fraction(left.numerator + right.numerator,
                               left.denominator + right.denominator)
            new_level.append(mediant)
            merged.extend([mediant, right])
        levels.append(new_level)
        sequence = merged
    return levels


def stern_brocot_prefix(depth: int) -> List[Fraction]:
    """Stern–Brocot 木の深さ depth までの有理数を段の順に平坦化して返す"""
    return [q for level in stern_brocot_levels(depth) for q in level]
