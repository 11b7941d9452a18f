"""
synthesis.py のテスト（目標値を取る式の合成）
"""

from fractions import Fraction as F

import numpy as np
import pytest

from common import config
from common.errors import LogicKindError, ModelFormatError, SynthesisError, TargetNotInvariantError
from backend.bisim import BisimKind, bisimilarity
from backend.evaluator import evaluate
from backend.formula import LogicKind, dag_size, validate_kind
from backend.model import Valuation
from backend.model_io import model_from_dict
from backend.random_models import random_pnts
from backend.sample_models import midpoint_model, hull_gap_model, hull_gap_experiment
from backend.synthesis import FormulaSynthesizer, block_indicators, synthesize_formula


# ========== Fixtures ==========

@pytest.fixture
def mid_model():
    return midpoint_model()


@pytest.fixture
def gap_model():
    return hull_gap_model()


# ========== Tests ==========

class TestSynthesizeRiesz:

    def test_hull_gap_experiment(self, gap_model):
        target = hull_gap_experiment()
        phi = synthesize_formula(gap_model, target)
        validate_kind(phi, LogicKind.R)
        assert evaluate(gap_model, phi).values == target.values

    def test_shared_subformulas(self, gap_model):
        phi = synthesize_formula(gap_model, Valuation((F(1), F(-2), F(3, 7), F(0), F(5))))
        assert dag_size(phi) < 1000

    def test_midpoint_model_block_constant_target(self, mid_model):
        target = Valuation((F(1, 2), F(1, 2), F(1), F(0)))
        assert evaluate(mid_model, synthesize_formula(mid_model, target)).values == target.values

    def test_props_separate_at_first_round(self):
        model = model_from_dict({
            "states": ["s", "t"],
            "labels": ["a"],
            "props": {"p": {"s": "1", "t": "1/4"}},
        })
        target = Valuation((F(3), F(-1)))
        assert evaluate(model, synthesize_formula(model, target)).values == target.values

    def test_random_models(self):
        rng = np.random.default_rng(23)
        for _ in range(8):
            model = random_pnts(rng, max_states=3, max_generators=2, max_denominator=4)
            partition = bisimilarity(model, BisimKind.UE)
            values = [F(int(rng.integers(-6, 7)), int(rng.integers(1, 4))) for _ in partition.blocks]
            target = Valuation(partition.lift(values))
            assert evaluate(model, synthesize_formula(model, target)).values == target.values


class TestSynthesizeLukasiewicz:

    def test_hull_gap_model(self, gap_model):
        target = Valuation((F(1, 2), F(0), F(1), F(1, 3), F(0)))
        phi = synthesize_formula(gap_model, target, LogicKind.LUK)
        validate_kind(phi, LogicKind.LUK)
        assert evaluate(gap_model, phi, kind=LogicKind.LUK).values == target.values

    def test_block_indicators(self, mid_model):
        partition, indicators = block_indicators(mid_model)
        assert partition == bisimilarity(mid_model, BisimKind.UE)
        for block, phi in zip(partition.blocks, indicators):
            expected = Valuation.indicator(mid_model.num_states, block)
            assert evaluate(mid_model, phi, kind=LogicKind.LUK).values == expected.values

    def test_out_of_range_target(self, gap_model):
        with pytest.raises(LogicKindError, match=r"\[0,1\]"):
            synthesize_formula(gap_model, Valuation((F(2), F(0), F(0), F(0), F(0))), LogicKind.LUK)


class TestErrors:

    def test_target_not_invariant(self, mid_model):
        with pytest.raises(TargetNotInvariantError):
            synthesize_formula(mid_model, Valuation((F(1), F(0), F(0), F(0))))

    def test_unsupported_kind(self, mid_model):
        with pytest.raises(LogicKindError, match="未対応"):
            FormulaSynthesizer(mid_model, LogicKind.QL_PROD)

    def test_depth_limit(self, gap_model, monkeypatch):
        monkeypatch.setattr(config, "SYNTHESIS_MAX_DEPTH", 1)
        with pytest.raises(SynthesisError) as excinfo:
            synthesize_formula(gap_model, hull_gap_experiment())
        assert excinfo.value.depth == 1

    def test_float_target_rejected(self, mid_model):
        with pytest.raises(ModelFormatError):
            synthesize_formula(mid_model, Valuation((0.5, 0.5, 1.0, 0.0), exact=False))

    def test_dimension(self, mid_model):
        with pytest.raises(ModelFormatError, match="次元"):
            synthesize_formula(mid_model, Valuation((F(1),)))
