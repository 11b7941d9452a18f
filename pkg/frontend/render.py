"""
CLI の出力を JSON 文書に変換する

有理数は "p/q" 文字列（--float 指定時は float）で出力する。
式は木として展開した大きさが config.RENDER_MAX_FORMULA_TEXT 以下ならテキストも付ける。
共有部分式を持つ合成式は DAG のノード表（子はノード番号で参照）で表す。
"""

import json
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Union

from common import config
from common.utils import format_rational
from backend.axioms import AxiomReport
from backend.bisim import BisimulationCheck, Experiment, ExperimentCheck
from backend.evaluator import FixpointTrace
from backend.formula import Diamond, Formula, Minus, Mu, Nu, Prop, Scale, Var, pretty
from backend.metric import MetricComparison, MetricEstimate, MetricMatrix
from backend.model import PNTS, Partition, Valuation
from backend.model_io import partition_to_document, valuation_to_document
from backend.process_algebra import CongruenceReport


def _post_order(phi: Formula) -> List[Formula]:
    """子が親より先に並ぶ、重複のない部分式の列（id で判定）"""
    order: List[Formula] = []
    seen = set()
    stack = [(phi, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in seen:
            continue
        if expanded:
            seen.add(id(node))
            order.append(node)
            continue
        stack.append((node, True))
        for child in reversed(node.children()):
            if id(child) not in seen:
                stack.append((child, False))
    return order


def tree_size(phi: Formula) -> int:
    """共有を展開した木のノード数"""
    sizes: Dict[int, int] = {}
    for node in _post_order(phi):
        sizes[id(node)] = 1 + sum(sizes[id(c)] for c in node.children())
    return sizes[id(phi)]


class JsonRenderer:
    """as_float が True のとき有理数を float で出力する"""

    def __init__(self, as_float: bool = False) -> None:
        self.as_float = as_float

    def rational(self, value: Union[Fraction, float, None]) -> Union[str, float, None]:
        if value is None:
            return None
        if self.as_float or not isinstance(value, Fraction):
            return float(value)
        return format_rational(value)

    def partition(self, partition: Partition, model: PNTS) -> List[List[str]]:
        return partition_to_document(partition, model)

    def valuation(self, valuation: Valuation, model: PNTS) -> Dict[str, Any]:
        return valuation_to_document(valuation, model, as_float=self.as_float)

    def formula_nodes(self, phi: Formula) -> List[Dict[str, Any]]:
        order = _post_order(phi)
        index = {id(node): k for k, node in enumerate(order)}
        nodes: List[Dict[str, Any]] = []
        for k, node in enumerate(order):
            entry: Dict[str, Any] = {"id": k, "op": type(node).__name__.lower()}
            match node:
                case Scale(q=q) | Minus(q=q):
                    entry["q"] = self.rational(q)
                case Diamond(label=label):
                    entry["label"] = label
                case Prop(name=name) | Var(name=name):
                    entry["name"] = name
                case Mu(var=v) | Nu(var=v):
                    entry["var"] = v
            children = node.children()
            if children:
                entry["args"] = [index[id(c)] for c in children]
            nodes.append(entry)
        return nodes

    def formula(self, phi: Formula) -> Dict[str, Any]:
        size = tree_size(phi)
        document: Dict[str, Any] = {"tree_size": size}
        if size <= config.RENDER_MAX_FORMULA_TEXT:
            document["text"] = pretty(phi)
        nodes = self.formula_nodes(phi)
        document["dag_size"] = len(nodes)
        document["root"] = len(nodes) - 1
        document["nodes"] = nodes
        return document

    def traces(self, traces: Sequence[FixpointTrace]) -> List[Dict[str, Any]]:
        return [
            {
                "var": t.var,
                "fixpoint": t.fixpoint,
                "iterations": t.iterations,
                "residual": t.residual,
                "monotone": t.monotone,
                "exact": t.exact,
            }
            for t in traces
        ]

    def bisimulation_check(self, check: BisimulationCheck, model: PNTS) -> Dict[str, Any]:
        document: Dict[str, Any] = {"holds": check.holds}
        c = check.counterexample
        if c is not None:
            document["counterexample"] = {
                "x": model.states[c.x],
                "y": model.states[c.y],
                "label": c.label,
                "f": self.valuation(c.separator, model),
                "gap": self.rational(c.gap),
            }
        return document

    def experiment(self, experiment: Optional[Experiment], check: Optional[ExperimentCheck],
                   model: PNTS) -> Optional[Dict[str, Any]]:
        if experiment is None:
            return None
        document = {
            "label": experiment.label,
            "f": self.valuation(experiment.f, model),
            "gap": self.rational(experiment.gap),
        }
        if check is not None:
            document["accepted"] = check.accepted
        return document

    def axiom_report(self, report: AxiomReport) -> Dict[str, Any]:
        return {
            "claim": report.claimed.value,
            "label": report.label,
            "samples": report.samples,
            "passed": report.passed,
            "axioms": [
                {"name": r.name, "passed": r.passed, "checked": r.checked, "witness": r.witness}
                for r in report.results
            ],
        }

    def metric_matrix(self, matrix: MetricMatrix, model: PNTS) -> Dict[str, Any]:
        return {
            "label": matrix.label,
            "blocks": self.partition(matrix.partition, model),
            "names": list(matrix.block_names),
            "distances": [[self.rational(v) for v in row] for row in matrix.values],
        }

    def metric_estimate(self, estimate: MetricEstimate) -> Dict[str, Any]:
        return {
            "value": self.rational(estimate.value),
            "label": estimate.label,
            "evaluated": estimate.evaluated,
            "formula": None if estimate.formula is None else self.formula(estimate.formula),
        }

    def metric_comparisons(self, rows: Sequence[MetricComparison]) -> List[Dict[str, Any]]:
        return [
            {
                "left": r.left,
                "right": r.right,
                "metric": self.rational(r.metric),
                "estimate": self.rational(r.estimate),
                "ratio": self.rational(r.ratio),
            }
            for r in rows
        ]

    def congruence_report(self, report: CongruenceReport) -> Dict[str, Any]:
        return {
            "holds": report.holds,
            "checked": report.checked,
            "violations": [v.to_dict() for v in report.violations],
            "log_file": report.log_file,
        }


def dumps(document: Any) -> str:
    """標準出力用の JSON（キーの順序は挿入順で固定）"""
    return json.dumps(document, ensure_ascii=False, indent=2)
