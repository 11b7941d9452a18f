# common/validation.py
"""
モデル・分割・評価値ファイルのバリデーションユーティリティ

いずれの関数も (is_ok, messages) を返す。is_ok が False のとき
messages に問題点が格納される。分布の総和などの意味的な検査は
backend.model 側で行う。
"""

from typing import Any, List, Sequence, Tuple

from common.errors import ModelFormatError
from common.utils import parse_rational

LABEL_KINDS = ("plain", "co", "tau")


def _is_rational(value: Any) -> bool:
    try:
        parse_rational(value)
        return True
    except ModelFormatError:
        return False


def check_model_document(data: Any) -> Tuple[bool, List[str]]:
    """
    モデル文書（JSON）の構造を検証する。
    Returns:
        (is_ok, messages)
    """
    msgs: List[str] = []
    ok = True

    if not isinstance(data, dict):
        return False, ["モデル文書はオブジェクトである必要があります。"]

    # 状態
    states = data.get("states")
    if not isinstance(states, list) or not states:
        ok = False; msgs.append("states が空、またはリストではありません。")
        states = []
    elif not all(isinstance(s, str) for s in states):
        ok = False; msgs.append("状態名は文字列である必要があります。")
    elif len(set(states)) != len(states):
        ok = False; msgs.append("状態名が重複しています。")
    state_set = set(s for s in states if isinstance(s, str))

    # ラベル
    labels = data.get("labels", [])
    label_names: List[str] = []
    if not isinstance(labels, list):
        ok = False; msgs.append("labels はリストである必要があります。")
        labels = []
    for entry in labels:
        if isinstance(entry, str):
            label_names.append(entry)
            continue
        if not isinstance(entry, dict) or not isinstance(entry.get("name"), str):
            ok = False; msgs.append(f"ラベル定義が不正です: {entry!r}")
            continue
        label_names.append(entry["name"])
        kind = entry.get("kind")
        if kind is not None and kind not in LABEL_KINDS:
            ok = False; msgs.append(f"ラベル種別が不正です: {kind!r}")
        co = entry.get("co")
        if co is not None and not isinstance(co, str):
            ok = False; msgs.append(f"co は相補ラベル名（文字列）である必要があります: {entry!r}")
    if len(set(label_names)) != len(label_names):
        ok = False; msgs.append("ラベル名が重複しています。")
    label_set = set(label_names)

    # 遷移
    transitions = data.get("transitions", [])
    if not isinstance(transitions, list):
        ok = False; msgs.append("transitions はリストである必要があります。")
        transitions = []
    for i, tr in enumerate(transitions):
        if not isinstance(tr, dict):
            ok = False; msgs.append(f"遷移 {i} がオブジェクトではありません。")
            continue
        if tr.get("from") not in state_set:
            ok = False; msgs.append(f"遷移 {i} の from が未定義の状態です: {tr.get('from')!r}")
        if tr.get("label") not in label_set:
            ok = False; msgs.append(f"遷移 {i} のラベルが未定義です: {tr.get('label')!r}")
        dist = tr.get("dist")
        if not isinstance(dist, dict) or not dist:
            ok = False; msgs.append(f"遷移 {i} の dist が空、またはオブジェクトではありません。")
            continue
        for target, prob in dist.items():
            if target not in state_set:
                ok = False; msgs.append(f"遷移 {i} の遷移先が未定義の状態です: {target!r}")
            if not _is_rational(prob):
                ok = False; msgs.append(f"遷移 {i} の確率が有理数ではありません: {prob!r}")

    # 命題
    props = data.get("props", {})
    if not isinstance(props, dict):
        ok = False; msgs.append("props はオブジェクトである必要があります。")
        props = {}
    for name, values in props.items():
        if not isinstance(values, dict):
            ok = False; msgs.append(f"命題 {name} の値はオブジェクトである必要があります。")
            continue
        for state, value in values.items():
            if state not in state_set:
                ok = False; msgs.append(f"命題 {name} に未定義の状態があります: {state!r}")
            elif not _is_rational(value):
                ok = False; msgs.append(f"命題 {name} の値が有理数ではありません: {value!r}")

    return ok, msgs


def check_partition_document(data: Any, state_names: Sequence[str]) -> Tuple[bool, List[str]]:
    """
    分割文書（状態名リストのリスト）を検証する。
    Returns:
        (is_ok, messages)
    """
    msgs: List[str] = []
    ok = True
    if not isinstance(data, list) or not all(isinstance(b, list) for b in data):
        return False, ["分割は状態名リストのリストである必要があります。"]

    seen: List[str] = []
    for block in data:
        if not block:
            ok = False; msgs.append("空のブロックがあります。")
        for name in block:
            if name not in state_names:
                ok = False; msgs.append(f"未定義の状態があります: {name!r}")
            elif name in seen:
                ok = False; msgs.append(f"状態が複数のブロックに現れます: {name!r}")
            else:
                seen.append(name)
    missing = [s for s in state_names if s not in seen]
    if missing:
        ok = False; msgs.append(f"どのブロックにも含まれない状態があります: {missing}")
    return ok, msgs


def check_valuation_document(data: Any, state_names: Sequence[str]) -> Tuple[bool, List[str]]:
    """
    評価値文書（状態名 → 有理数）を検証する。
    Returns:
        (is_ok, messages)
    """
    msgs: List[str] = []
    ok = True
    if not isinstance(data, dict):
        return False, ["評価値は状態名から値へのオブジェクトである必要があります。"]
    for name, value in data.items():
        if name not in state_names:
            ok = False; msgs.append(f"未定義の状態があります: {name!r}")
        elif not _is_rational(value):
            ok = False; msgs.append(f"値が有理数ではありません: {name}={value!r}")
    missing = [s for s in state_names if s not in data]
    if missing:
        ok = False; msgs.append(f"値が与えられていない状態があります: {missing}")
    return ok, msgs
