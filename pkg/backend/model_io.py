"""
モデル・分割・評価値ファイルの入出力

【モデル形式（UTF-8 JSON）】
{
  "states": ["x", "y", ...],
  "labels": [{"name": "a"}, {"name": "a_bar", "co": "a"}, {"name": "tau", "kind": "tau"}],
  "transitions": [{"from": "x", "label": "a", "dist": {"x1": "1/5", "x2": "4/5"}}, ...],
  "props": {"p": {"x": "1/2", ...}}
}

確率・値は "p/q" 形式または十進表記（丸めずに変換）。
分割は状態名リストのリスト、評価値は状態名 → 有理数のオブジェクト。
"""

import json
import logging
import os
from fractions import Fraction
from typing import Any, Dict, List, Sequence, Tuple

from graphviz import Digraph

from common.errors import ModelFormatError
from common.utils import format_rational, load_json_file, parse_rational, save_json_file
from common.validation import (check_model_document, check_partition_document,
                               check_valuation_document)
from backend.model import PNTS, Distribution, Label, LabelKind, Partition, Valuation

logger = logging.getLogger(__name__)


def _parse_label(entry: Any) -> Label:
    if isinstance(entry, str):
        return Label(entry)
    name = entry["name"]
    kind = entry.get("kind")
    if kind == "tau":
        return Label(name, LabelKind.TAU)
    if entry.get("co") is not None:
        return Label(name, LabelKind.CO_NAME, entry["co"])
    if kind == "co":
        raise ModelFormatError(f"co-name ラベル {name} に相補ラベル名 co がありません")
    return Label(name)


def model_from_dict(data: Any) -> PNTS:
    """
    モデル文書からモデルを構築する

    Raises:
        ModelFormatError: 構造の検証に失敗した場合（messages に詳細）
    """
    ok, messages = check_model_document(data)
    if not ok:
        for msg in messages:
            logger.error(f"[model_from_dict] {msg}")
        raise ModelFormatError("モデル文書の検証に失敗しました: " + "; ".join(messages), messages)

    states: List[str] = list(data["states"])
    n = len(states)
    labels = [_parse_label(entry) for entry in data.get("labels", [])]

    transitions: Dict[Tuple[int, str], List[Distribution]] = {}
    for tr in data.get("transitions", []):
        entries = [Fraction(0)] * n
        for target, prob in tr["dist"].items():
            entries[states.index(target)] += parse_rational(prob)
        x = states.index(tr["from"])
        transitions.setdefault((x, tr["label"]), []).append(Distribution(tuple(entries)))

    props: Dict[str, Valuation] = {}
    for name, values in data.get("props", {}).items():
        vector = [Fraction(0)] * n
        for state, value in values.items():
            vector[states.index(state)] = parse_rational(value)
        props[name] = Valuation(tuple(vector), unit_interval=True)

    model = PNTS.build(states, labels, transitions, props)
    logger.debug(f"[model_from_dict] 状態 {n} 個, ラベル {len(labels)} 個, 遷移 {len(transitions)} 組")
    return model


def model_to_dict(model: PNTS) -> Dict[str, Any]:
    """モデルをモデル文書に変換する（状態・ラベル・遷移の順序は正準）"""
    labels: List[Dict[str, Any]] = []
    for label in model.labels:
        if label.kind == LabelKind.TAU:
            labels.append({"name": label.name, "kind": "tau"})
        elif label.kind == LabelKind.CO_NAME:
            labels.append({"name": label.name, "co": label.base})
        else:
            labels.append({"name": label.name})

    transitions: List[Dict[str, Any]] = []
    for (x, a), generators in model.transitions.items():
        for mu in generators:
            transitions.append({
                "from": model.states[x],
                "label": a,
                "dist": {model.states[y]: format_rational(mu[y]) for y in mu.support()},
            })

    document: Dict[str, Any] = {
        "states": list(model.states),
        "labels": labels,
        "transitions": transitions,
    }
    if model.props:
        document["props"] = {
            name: {model.states[x]: format_rational(v) for x, v in enumerate(valuation.values)}
            for name, valuation in model.props.items()
        }
    return document


def load_model(file_path: str) -> PNTS:
    return model_from_dict(load_json_file(file_path))


def save_model(model: PNTS, file_path: str) -> bool:
    return save_json_file(file_path, model_to_dict(model))


def load_document(source: str) -> Any:
    """ファイルパス、またはインライン JSON 文字列を読み込む"""
    if os.path.exists(source):
        return load_json_file(source)
    try:
        return json.loads(source)
    except json.JSONDecodeError:
        raise ModelFormatError(f"ファイルが見つからず、JSON としても解析できません: {source}") from None


def partition_from_document(data: Any, model: PNTS) -> Partition:
    ok, messages = check_partition_document(data, model.states)
    if not ok:
        raise ModelFormatError("分割の検証に失敗しました: " + "; ".join(messages), messages)
    return Partition(tuple(tuple(model.state_index(name) for name in block) for block in data))


def load_partition(source: str, model: PNTS) -> Partition:
    return partition_from_document(load_document(source), model)


def partition_to_document(partition: Partition, model: PNTS) -> List[List[str]]:
    return [[model.states[x] for x in block] for block in partition.blocks]


def valuation_from_document(data: Any, model: PNTS) -> Valuation:
    ok, messages = check_valuation_document(data, model.states)
    if not ok:
        raise ModelFormatError("評価値の検証に失敗しました: " + "; ".join(messages), messages)
    return Valuation(tuple(parse_rational(data[name]) for name in model.states))


def load_valuation(source: str, model: PNTS) -> Valuation:
    return valuation_from_document(load_document(source), model)


def valuation_to_document(valuation: Valuation, model: PNTS, as_float: bool = False) -> Dict[str, Any]:
    if as_float or not valuation.exact:
        return {name: float(v) for name, v in zip(model.states, valuation.values)}
    return {name: format_rational(v) for name, v in zip(model.states, valuation.values)}


def to_dot(model: PNTS, name: str = "pnts") -> str:
    """
    graphviz.Digraph による DOT 形式の出力

    状態は s<添字> のノード（ラベルは状態名）、生成分布は点ノード d<状態>_<ラベル>_<番号> として描き、
    確率を破線の辺のラベルにする。
    """
    dot = Digraph(name=name)
    dot.attr(rankdir="LR")
    for x, state in enumerate(model.states):
        dot.node(f"s{x}", label=state, shape="circle")
    label_index = {a: i for i, a in enumerate(model.label_names)}
    for (x, a), generators in model.transitions.items():
        for k, mu in enumerate(generators):
            node = f"d{x}_{label_index[a]}_{k}"
            dot.node(node, shape="point")
            dot.edge(f"s{x}", node, label=a)
            for y in mu.support():
                dot.edge(node, f"s{y}", label=format_rational(mu[y]), style="dashed")
    return dot.source


def state_names(model: PNTS, indices: Sequence[int]) -> List[str]:
    return [model.states[x] for x in indices]
