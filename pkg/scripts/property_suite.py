"""
Acceptance-size property sweeps over random models.

Every sweep takes a numpy ``Generator`` and a count, and returns a ``SweepResult``
whose ``violations`` are plain dicts. ``main`` stores each violation through
``common.logger.Logger`` and exits with status 1 when any sweep found one.

Usage::

    python scripts/property_suite.py [--seed N] [--scale F] [--only NAME ...] [--log-dir DIR]
"""

import argparse
import logging
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from common import config  # noqa: E402
from common.errors import RieszError  # noqa: E402
from common.logger import Logger, configure_logging  # noqa: E402
from common.utils import format_rational  # noqa: E402
from backend.axioms import ModelType, check_modal_riesz_axioms  # noqa: E402
from backend.bisim import BisimKind, bisimilarity, coarsest_bisimulation_bruteforce  # noqa: E402
from backend.convex import GeneratorSet, hull_difference, hull_equal, upper_expectation  # noqa: E402
from backend.evaluator import evaluate  # noqa: E402
from backend.experiments import estimate_upper_expectation, run_trials, Scheduler  # noqa: E402
from backend.formula import LogicKind, has_fixpoints, pretty  # noqa: E402
from backend.formula_enum import random_formula  # noqa: E402
from backend.metric import behavioral_metric, formula_metric_estimate  # noqa: E402
from backend.model import PNTS, Distribution, Valuation, embed_nts  # noqa: E402
from backend.model_io import model_to_dict, partition_to_document  # noqa: E402
from backend.process_algebra import congruence_check  # noqa: E402
from backend.random_models import (random_generator_set, random_nts, random_pnts,  # noqa: E402
                                   random_valuation)
from backend.sample_models import (ccs_alphabet, hull_gap_experiment, hull_gap_model,  # noqa: E402
                                   midpoint_model, terminal_model)
from backend.synthesis import synthesize_formula  # noqa: E402

logger = logging.getLogger(__name__)


@dataclass
class SweepResult:
    name: str
    checked: int = 0
    violations: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def fail(self, **detail: Any) -> None:
        self.violations.append({"suite": self.name, **detail})


def _seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**31 - 1))


def _midpoint(mu: Distribution, nu: Distribution) -> Distribution:
    return Distribution(tuple((a + b) / 2 for a, b in zip(mu.entries, nu.entries)))


def _generators_text(generators: GeneratorSet) -> List[List[str]]:
    return [[format_rational(p) for p in mu.entries] for mu in generators]


# ========== Sweeps ==========

def bisim_oracle(rng: np.random.Generator, count: int = 500) -> SweepResult:
    """Partition refinement against the brute-force coarsest bisimulation."""
    result = SweepResult("bisim_oracle")
    for _ in range(count):
        model = random_pnts(rng, max_states=4, max_generators=3, max_denominator=6)
        for kind in BisimKind:
            result.checked += 1
            refined = bisimilarity(model, kind)
            expected = coarsest_bisimulation_bruteforce(model, kind)
            if refined != expected:
                result.fail(kind=kind.value, model=model_to_dict(model),
                            refined=partition_to_document(refined, model),
                            expected=partition_to_document(expected, model))
    return result


def hull_equality(rng: np.random.Generator, count: int = 500, directions: int = 500) -> SweepResult:
    """Equal hulls agree on every direction; unequal hulls differ on the separator."""
    result = SweepResult("hull_equality")
    for _ in range(count):
        n = int(rng.integers(2, 5))
        a = random_generator_set(rng, n)
        if rng.random() < 0.5:
            b = random_generator_set(rng, n)
        else:
            extra = list(a)
            if len(extra) >= 2:
                extra.append(_midpoint(extra[0], extra[1]))
            b = GeneratorSet.of(extra, dimension=n)
        result.checked += 1
        equal = hull_equal(a, b)
        if equal:
            for _ in range(directions):
                f = random_valuation(rng, n)
                if upper_expectation(a, f) != upper_expectation(b, f):
                    result.fail(a=_generators_text(a), b=_generators_text(b),
                                f=[format_rational(v) for v in f.values])
                    break
        else:
            difference = hull_difference(a, b)
            separator = difference.separator if difference is not None else None
            if separator is None or upper_expectation(a, separator) == upper_expectation(b, separator):
                result.fail(a=_generators_text(a), b=_generators_text(b), separator=None if separator is None
                            else [format_rational(v) for v in separator.values])
    return result


def representation(rng: np.random.Generator, count: int = 1000, per_model: int = 50) -> SweepResult:
    """
    Modal Riesz axioms on random models, sup-preservation on NTS embeddings,
    and a sup-preservation counterexample on the hull-gap model (label a).
    """
    result = SweepResult("representation")
    remaining = count
    while remaining > 0:
        samples = min(per_model, remaining)
        remaining -= samples
        model = random_pnts(rng, max_states=4, max_generators=3, max_denominator=6)
        report = check_modal_riesz_axioms(model, samples=samples, seed=_seed(rng))
        result.checked += samples
        for failure in report.failures():
            result.fail(axiom=failure.name, model=model_to_dict(model), witness=failure.witness)

        table = random_nts(rng)
        nts_report = check_modal_riesz_axioms(embed_nts(table), samples=samples, claimed=ModelType.NTS,
                                              seed=_seed(rng))
        for failure in nts_report.failures():
            result.fail(axiom=failure.name, nts=table, witness=failure.witness)

    report = check_modal_riesz_axioms(hull_gap_model(), "a", samples=count, claimed=ModelType.NTS, seed=_seed(rng))
    result.checked += 1
    if report.result("sup_preserving").passed:
        result.fail(axiom="sup_preserving", model="hull_gap_model", witness=None)
    return result


def soundness(rng: np.random.Generator, count: int = 200, formulas: int = 50,
              kinds: Optional[Sequence[LogicKind]] = None) -> SweepResult:
    """Formula values are constant on UE blocks (exact, or 2e-9 with iterated fixpoints)."""
    result = SweepResult("soundness")
    kinds = list(LogicKind) if kinds is None else list(kinds)
    for _ in range(count):
        model = random_pnts(rng, max_states=4, max_generators=3, max_denominator=6, num_props=1)
        partition = bisimilarity(model, BisimKind.UE)
        props = list(model.props)
        for kind in kinds:
            for _ in range(formulas):
                phi = random_formula(rng, kind, model.label_names, depth=4, props=props)
                result.checked += 1
                values = evaluate(model, phi).values
                tolerance = config.fixpoint_tolerance(not has_fixpoints(phi))
                if not partition.is_invariant(values, tolerance):
                    result.fail(kind=kind.value, formula=pretty(phi), model=model_to_dict(model),
                                values=[format_rational(v) for v in values])
    return result


def completeness(rng: np.random.Generator, count: int = 100) -> SweepResult:
    """Synthesized formulas re-evaluate exactly to random block-constant targets."""
    result = SweepResult("completeness")
    for i in range(count):
        model = random_pnts(rng, max_states=6, max_generators=2, max_denominator=4)
        partition = bisimilarity(model, BisimKind.UE)
        if i % 2 == 0:
            kind = LogicKind.R
            values = [Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 4))) for _ in partition.blocks]
        else:
            kind = LogicKind.LUK
            values = [Fraction(int(rng.integers(0, 4)), 3) for _ in partition.blocks]
        target = Valuation(partition.lift(values), unit_interval=kind.unit_interval)
        result.checked += 1
        try:
            phi = synthesize_formula(model, target, kind)
            matches = evaluate(model, phi).values == target.values
        except RieszError as e:
            matches = False
            logger.warning(f"[completeness] 合成に失敗しました: {e}")
        if not matches:
            result.fail(kind=kind.value, model=model_to_dict(model),
                        target=[format_rational(v) for v in target.values])
    return result


def metric(rng: np.random.Generator, count: int = 100, budget: int = 500,
           pair_budget: int = 20) -> SweepResult:
    """Hausdorff metric axioms, the ½·metric bound on estimates, and the hull-gap estimate."""
    result = SweepResult("metric")
    for _ in range(count):
        model = random_pnts(rng, max_states=4, max_generators=3, max_denominator=6)
        matrix = behavioral_metric(model, "a")
        blocks = matrix.partition.blocks
        k = len(blocks)
        for i in range(k):
            for j in range(k):
                result.checked += 1
                if matrix.block_distance(i, j) != matrix.block_distance(j, i):
                    result.fail(check="symmetry", model=model_to_dict(model), blocks=[i, j])
                for m in range(k):
                    if matrix.block_distance(i, m) > matrix.block_distance(i, j) + matrix.block_distance(j, m):
                        result.fail(check="triangle", model=model_to_dict(model), blocks=[i, j, m])
                if i < j:
                    estimate = formula_metric_estimate(model, blocks[i][0], blocks[j][0], pair_budget, "a")
                    if estimate.value > matrix.block_distance(i, j) / 2:
                        result.fail(check="estimate_bound", model=model_to_dict(model), blocks=[i, j],
                                    estimate=format_rational(estimate.value))

    gap_model = hull_gap_model()
    half = behavioral_metric(gap_model, "a").distance(0, 1) / 2
    estimate = formula_metric_estimate(gap_model, 0, 1, budget, "a").value
    result.checked += 1
    if not (Fraction(9, 10) * half <= estimate <= half):
        result.fail(check="hull_gap_model_estimate", estimate=format_rational(estimate), half=format_rational(half))
    return result


def _ccs_model(rng: np.random.Generator) -> PNTS:
    """random_pnts over a, a_bar with the CCS label table (co-names and tau)"""
    base = random_pnts(rng, max_states=3, max_generators=2, max_denominator=4, labels=("a", "a_bar"))
    transitions = {
        (x, a): list(base.successors(x, a))
        for x in range(base.num_states) for a in base.label_names
        if base.successors(x, a)
    }
    return PNTS.build(list(base.states), ccs_alphabet(), transitions)


def congruence(rng: np.random.Generator, count: int = 100, log_dir: Optional[str] = None) -> SweepResult:
    """UE bisimilarity is preserved by parallel composition."""
    result = SweepResult("congruence")
    pairs = [(midpoint_model(), terminal_model())]
    pairs.extend((_ccs_model(rng), _ccs_model(rng)) for _ in range(count))
    for left, right in pairs:
        report = congruence_check(left, right, log_dir=log_dir)
        result.checked += report.checked
        for violation in report.violations:
            result.fail(left=model_to_dict(left), right=model_to_dict(right), **violation.to_dict())
    return result


def monte_carlo(rng: np.random.Generator, count: int = 100_000) -> SweepResult:
    """The hull-gap state y lands within 0.5 of 39; equal seeds give byte-identical logs."""
    result = SweepResult("monte_carlo")
    gap_model = hull_gap_model()
    g = hull_gap_experiment()
    seed = _seed(rng)
    estimate = estimate_upper_expectation(gap_model, 1, "a", g, count, seed=seed)
    result.checked += 1
    if abs(estimate - 39) > 0.5:
        result.fail(check="estimate", seed=seed, estimate=estimate)

    trials = min(count, 1000)
    first = run_trials(gap_model, 1, "a", Scheduler.uniform(), g, trials, seed=seed).to_json_lines(gap_model)
    second = run_trials(gap_model, 1, "a", Scheduler.uniform(), g, trials, seed=seed).to_json_lines(gap_model)
    result.checked += 1
    if first != second:
        result.fail(check="reproducible", seed=seed)
    return result


SWEEPS: Dict[str, Callable[..., SweepResult]] = {
    "bisim_oracle": bisim_oracle,
    "hull_equality": hull_equality,
    "representation": representation,
    "soundness": soundness,
    "completeness": completeness,
    "metric": metric,
    "congruence": congruence,
    "monte_carlo": monte_carlo,
}

DEFAULT_COUNTS = {
    "bisim_oracle": 500,
    "hull_equality": 500,
    "representation": 1000,
    "soundness": 200,
    "completeness": 100,
    "metric": 100,
    "congruence": 100,
    "monte_carlo": 100_000,
}


def run_suite(names: Sequence[str], seed: int, scale: float = 1.0,
              log_dir: Optional[str] = None) -> List[SweepResult]:
    """
    Run the named sweeps, each from its own child seed, and store violations.

    Violations go to ``config.PROPERTY_LOG_NAME`` under ``log_dir``.
    """
    children = np.random.SeedSequence(seed).spawn(len(SWEEPS))
    child_of = dict(zip(SWEEPS, children))
    log: Optional[Logger] = None
    results = []
    for name in names:
        rng = np.random.default_rng(child_of[name])
        count = max(1, int(DEFAULT_COUNTS[name] * scale))
        if name == "congruence":
            result = congruence(rng, count, log_dir=log_dir)
        else:
            result = SWEEPS[name](rng, count)
        logger.info(f"[run_suite] {name}: {result.checked} 件を検査, 違反 {len(result.violations)} 件")
        for violation in result.violations:
            if log is None:
                log = Logger(log_dir)
            log.log_property_violation({"seed": seed, **violation})
        results.append(result)
    return results


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Run the acceptance-size property sweeps.")
    parser.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    parser.add_argument("--scale", type=float, default=1.0, help="multiplier for every sweep size")
    parser.add_argument("--only", nargs="+", choices=list(SWEEPS), default=list(SWEEPS))
    parser.add_argument("--log-dir", default=None)
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    results = run_suite(args.only, args.seed, args.scale, args.log_dir)
    for result in results:
        status = "ok" if result.passed else f"{len(result.violations)} violations"
        print(f"{result.name:<16} {result.checked:>8} checked  {status}")
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
