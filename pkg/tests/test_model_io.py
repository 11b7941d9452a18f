"""
model_io.py のテスト（モデル・分割・評価値ファイル）
"""

import json
import os
from fractions import Fraction as F

import pytest

from common.errors import ModelFormatError
from backend.model import LabelKind, Partition
from backend.model_io import (load_model, load_partition, load_valuation, model_from_dict,
                              model_to_dict, partition_to_document, save_model, to_dot,
                              valuation_to_document)
from backend.sample_models import midpoint_model, hull_gap_model

MODELS_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "models")


class TestModelFiles:
    """同梱のモデルファイル"""

    def test_midpoint_file_matches_sample(self):
        assert model_to_dict(load_model(os.path.join(MODELS_DIR, "midpoint.json"))) == model_to_dict(midpoint_model())

    def test_hull_gap_file_matches_sample(self):
        assert model_to_dict(load_model(os.path.join(MODELS_DIR, "hull_gap.json"))) == model_to_dict(hull_gap_model())

    def test_save_and_load(self, tmp_path):
        path = str(tmp_path / "sub" / "hull_gap.json")
        assert save_model(hull_gap_model(), path)
        assert model_to_dict(load_model(path)) == model_to_dict(hull_gap_model())

    def test_missing_file(self, tmp_path):
        with pytest.raises(ModelFormatError, match="見つかりません"):
            load_model(str(tmp_path / "none.json"))


class TestModelDocument:
    """モデル文書の検証と変換"""

    def test_decimal_probabilities_are_exact(self):
        model = model_from_dict({
            "states": ["s", "t"],
            "labels": ["a"],
            "transitions": [{"from": "s", "label": "a", "dist": {"s": "0.2", "t": 0.8}}],
        })
        assert model.successors(0, "a")[0].entries == (F(1, 5), F(4, 5))

    def test_invalid_document_collects_messages(self):
        with pytest.raises(ModelFormatError) as excinfo:
            model_from_dict({
                "states": ["s"],
                "labels": ["a"],
                "transitions": [{"from": "q", "label": "b", "dist": {"s": "x"}}],
            })
        assert len(excinfo.value.messages) == 3

    def test_co_name_labels(self):
        model = model_from_dict({
            "states": ["p"],
            "labels": [{"name": "a"}, {"name": "a_bar", "co": "a"}, {"name": "tau", "kind": "tau"}],
        })
        assert model.label("a_bar").kind == LabelKind.CO_NAME
        assert model.label("tau").kind == LabelKind.TAU
        document = model_to_dict(model)
        assert {"name": "a_bar", "co": "a"} in document["labels"]

    def test_props_round_trip(self):
        data = {
            "states": ["s", "t"],
            "labels": ["a"],
            "props": {"p": {"s": "1/2", "t": "1"}},
        }
        model = model_from_dict(data)
        assert model.props["p"].values == (F(1, 2), F(1))
        assert model_to_dict(model)["props"] == {"p": {"s": "1/2", "t": "1"}}


class TestPartitionAndValuation:

    def test_inline_partition(self):
        model = midpoint_model()
        partition = load_partition('[["y", "x"], ["x2"], ["x1"]]', model)
        assert partition == Partition(((0, 1), (2,), (3,)))
        assert partition_to_document(partition, model) == [["x", "y"], ["x1"], ["x2"]]

    def test_partition_file(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(json.dumps([["x", "y", "x1", "x2"]]), encoding="utf-8")
        assert load_partition(str(path), midpoint_model()) == Partition.total(4)

    def test_partition_missing_state(self):
        with pytest.raises(ModelFormatError, match="含まれない状態"):
            load_partition('[["x", "y"], ["x1"]]', midpoint_model())

    def test_not_json(self):
        with pytest.raises(ModelFormatError, match="JSON"):
            load_partition("not-a-file", midpoint_model())

    def test_valuation(self):
        model = midpoint_model()
        f = load_valuation('{"x": 0, "y": "1/3", "x1": "0.5", "x2": -2}', model)
        assert f.values == (F(0), F(1, 3), F(1, 2), F(-2))
        assert valuation_to_document(f, model) == {"x": "0", "y": "1/3", "x1": "1/2", "x2": "-2"}
        assert valuation_to_document(f, model, as_float=True)["x1"] == 0.5

    def test_valuation_missing_state(self):
        with pytest.raises(ModelFormatError, match="与えられていない"):
            load_valuation('{"x": 0}', midpoint_model())


def test_to_dot():
    dot = to_dot(midpoint_model(), "mid_model")
    assert dot.startswith("digraph mid_model {")
    assert "rankdir=LR" in dot
    # x の a 遷移の 1 番目の生成分布、x1 の自己ループ
    assert "s0 -> d0_0_0 [label=a]" in dot
    assert "d2_0_0 -> s2" in dot
    assert 'label="4/5"' in dot
    assert dot.count("shape=point") == 6
    assert dot.count("style=dashed") == 11
