"""
コマンドライン・フロントエンド

すべてのサブコマンドは JSON を標準出力へ、診断メッセージを標準エラー出力へ書く。

終了コード:
    0  成功
    1  性質の違反を検出した（check-bisim の失敗、公理の反例、合同性の違反、合成の失敗など）
    2  使い方・入力の誤り（argparse のエラー、ValueError 系の RieszError）
"""

import argparse
import logging
import sys
from typing import Callable, Dict, List, Optional

from common import config
from common.config import FixpointConfig
from common.errors import RieszError
from common.logger import configure_logging
from backend.axioms import ModelType, check_modal_riesz_axioms
from backend.bisim import (BisimKind, bisimilarity, check_experiment, distinguishing_experiment,
                           is_bisimulation, is_ue_bisimulation, refinement_rounds)
from backend.evaluator import Evaluator
from backend.experiments import (MonteCarloSimulator, Scheduler, hoeffding_radius,
                                 scheduler_from_document)
from backend.formula import LogicKind
from backend.formula_parser import parse_formula
from backend.metric import behavioral_metric, metric_comparison
from backend.model import PNTS, quotient_model
from backend.model_io import (load_document, load_model, load_partition, load_valuation,
                              model_to_dict, save_model, to_dot)
from backend.process_algebra import congruence_check, parallel_compose
from backend.synthesis import synthesize_formula
from frontend.render import JsonRenderer, dumps

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2


def _emit(document) -> None:
    sys.stdout.write(dumps(document) + "\n")


def _label(model: PNTS, label: Optional[str]) -> str:
    """--label の解決（省略時はモデルの唯一のラベル）"""
    if label is not None:
        return model.label(label).name
    if len(model.label_names) != 1:
        raise ValueError(f"ラベルを --label で指定してください（ラベル: {list(model.label_names)}）")
    return model.label_names[0]


# -- サブコマンド ------------------------------------------------------------------

def cmd_bisim(args: argparse.Namespace, renderer: JsonRenderer) -> int:
    model = load_model(args.model)
    kind = BisimKind(args.kind)
    document: Dict = {"kind": kind.value}
    if args.rounds:
        history = refinement_rounds(model, kind)
        document["rounds"] = [renderer.partition(p, model) for p in history]
        partition = history[-1]
    else:
        partition = bisimilarity(model, kind, args.workers)
    document["blocks"] = renderer.partition(partition, model)
    _emit(document)
    return EXIT_OK


def cmd_check_bisim(args: argparse.Namespace, renderer: JsonRenderer) -> int:
    model = load_model(args.model)
    partition = load_partition(args.partition, model)
    kind = BisimKind(args.kind)
    if kind == BisimKind.UE:
        check = is_ue_bisimulation(model, partition)
        document = renderer.bisimulation_check(check, model)
        holds = check.holds
    else:
        holds = is_bisimulation(model, partition, kind)
        document = {"holds": holds}
    document["kind"] = kind.value
    _emit(document)
    return EXIT_OK if holds else EXIT_VIOLATION


def cmd_distinguish(args: argparse.Namespace, renderer: JsonRenderer) -> int:
    model = load_model(args.model)
    x, y = model.state_index(args.x), model.state_index(args.y)
    experiment = distinguishing_experiment(model, x, y)
    check = None
    if experiment is not None:
        check = check_experiment(model, x, y, experiment.label, experiment.f)
    _emit({
        "x": args.x,
        "y": args.y,
        "bisimilar": experiment is None,
        "experiment": renderer.experiment(experiment, check, model),
    })
    return EXIT_OK


def cmd_eval(args: argparse.Namespace, renderer: JsonRenderer) -> int:
    model = load_model(args.model)
    kind = LogicKind(args.logic)
    phi = parse_formula(args.formula, kind)
    fixpoint_config = FixpointConfig(
        epsilon=config.FIXPOINT_EPSILON if args.epsilon is None else args.epsilon,
        max_iterations=config.FIXPOINT_MAX_ITERATIONS,
        exact=args.exact_fixpoints,
        exact_max_iterations=config.EXACT_FIXPOINT_MAX_ITERATIONS,
    )
    evaluator = Evaluator(model, kind, fixpoint_config)
    values = evaluator.evaluate(phi)
    _emit({
        "logic": kind.value,
        "formula": renderer.formula(phi),
        "exact": values.exact,
        "values": renderer.valuation(values, model),
        "fixpoints": renderer.traces(evaluator.traces),
    })
    return EXIT_OK


def cmd_synthesize(args: argparse.Namespace, renderer: JsonRenderer) -> int:
    model = load_model(args.model)
    target = load_valuation(args.target, model)
    kind = LogicKind(args.logic)
    phi = synthesize_formula(model, target, kind)
    _emit({
        "logic": kind.value,
        "target": renderer.valuation(target, model),
        "formula": renderer.formula(phi),
    })
    return EXIT_OK


def cmd_axioms(args: argparse.Namespace, renderer: JsonRenderer) -> int:
    model = load_model(args.model)
    report = check_modal_riesz_axioms(model, args.label, args.samples, ModelType(args.claim), args.seed)
    _emit(renderer.axiom_report(report))
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_metric(args: argparse.Namespace, renderer: JsonRenderer) -> int:
    model = load_model(args.model)
    document = {"metric": renderer.metric_matrix(behavioral_metric(model, args.label), model)}
    if args.estimate is not None:
        document["estimates"] = renderer.metric_comparisons(
            metric_comparison(model, args.estimate, args.label)
        )
    _emit(document)
    return EXIT_OK


def cmd_compose(args: argparse.Namespace, renderer: JsonRenderer) -> int:
    composed = parallel_compose(load_model(args.left), load_model(args.right))
    if args.output:
        if not save_model(composed, args.output):
            raise ValueError(f"合成モデルを保存できませんでした: {args.output}")
    _emit(model_to_dict(composed))
    return EXIT_OK


def cmd_congruence(args: argparse.Namespace, renderer: JsonRenderer) -> int:
    report = congruence_check(load_model(args.left), load_model(args.right),
                              args.trials, args.seed, args.log_dir)
    _emit(renderer.congruence_report(report))
    return EXIT_OK if report.holds else EXIT_VIOLATION


def cmd_simulate(args: argparse.Namespace, renderer: JsonRenderer) -> int:
    model = load_model(args.model)
    x = model.state_index(args.state)
    label = _label(model, args.label)
    f = load_valuation(args.f, model)
    simulator = MonteCarloSimulator(model, args.seed)
    if args.upper:
        estimate = simulator.estimate_upper_expectation(x, label, f, args.n)
        spread = float(max(f.values) - min(f.values))
        _emit({
            "state": args.state,
            "label": label,
            "n": args.n,
            "seed": simulator.seed,
            "estimate": estimate,
            "radius": hoeffding_radius(args.n, spread),
        })
        return EXIT_OK
    if args.scheduler:
        scheduler = scheduler_from_document(load_document(args.scheduler), model)
    else:
        scheduler = Scheduler()
    log = simulator.run_trials(x, label, scheduler, f, args.n)
    sys.stdout.write(log.to_json_lines(model))
    return EXIT_OK


def cmd_quotient(args: argparse.Namespace, renderer: JsonRenderer) -> int:
    model = load_model(args.model)
    partition = bisimilarity(model, BisimKind(args.kind))
    _emit(model_to_dict(quotient_model(model, partition)))
    return EXIT_OK


def cmd_dot(args: argparse.Namespace, renderer: JsonRenderer) -> int:
    sys.stdout.write(to_dot(load_model(args.model), args.name))
    return EXIT_OK


# -- 引数の定義 ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riesz",
        description="PNTS の双模倣・実数値様相論理・振る舞い距離のツール",
    )
    parser.add_argument("--float", dest="as_float", action="store_true",
                        help="有理数を float で出力する")
    parser.add_argument("--verbose", action="store_true", help="DEBUG ログを標準エラー出力へ")
    sub = parser.add_subparsers(dest="command", required=True)
    kinds = [k.value for k in BisimKind]

    p = sub.add_parser("bisim", help="最大双模倣の計算")
    p.add_argument("--kind", choices=kinds, default=BisimKind.UE.value)
    p.add_argument("--rounds", action="store_true", help="精錬の各ラウンドの分割も出力する")
    p.add_argument("--workers", type=int, default=None, help="ブロック検査のスレッド数")
    p.add_argument("model")
    p.set_defaults(handler=cmd_bisim)

    p = sub.add_parser("check-bisim", help="分割が双模倣かを検査する")
    p.add_argument("--kind", choices=kinds, default=BisimKind.UE.value)
    p.add_argument("model")
    p.add_argument("partition", help="分割ファイル、またはインライン JSON")
    p.set_defaults(handler=cmd_check_bisim)

    p = sub.add_parser("distinguish", help="2 状態を区別する実験を求める")
    p.add_argument("model")
    p.add_argument("x")
    p.add_argument("y")
    p.set_defaults(handler=cmd_distinguish)

    p = sub.add_parser("eval", help="式を評価する")
    p.add_argument("--logic", choices=[k.value for k in LogicKind], default=LogicKind.R.value)
    p.add_argument("--exact-fixpoints", action="store_true", help="不動点も有理数で反復する")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("model")
    p.add_argument("formula")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("synthesize", help="目標値を表す式を合成する")
    p.add_argument("--logic", choices=[LogicKind.R.value, LogicKind.LUK.value], default=LogicKind.R.value)
    p.add_argument("model")
    p.add_argument("target", help="評価値ファイル、またはインライン JSON")
    p.set_defaults(handler=cmd_synthesize)

    p = sub.add_parser("axioms", help="モーダル Riesz 空間の公理を検査する")
    p.add_argument("--claim", choices=[t.value for t in ModelType], default=ModelType.PNTS.value)
    p.add_argument("--label", default=None)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("model")
    p.set_defaults(handler=cmd_axioms)

    p = sub.add_parser("metric", help="Hausdorff 振る舞い距離")
    p.add_argument("--estimate", type=int, default=None, metavar="BUDGET",
                   help="Ł の式による下界も求める（式の個数）")
    p.add_argument("--label", default=None)
    p.add_argument("model")
    p.set_defaults(handler=cmd_metric)

    p = sub.add_parser("compose", help="並列合成")
    p.add_argument("--output", default=None, help="合成モデルの保存先")
    p.add_argument("left")
    p.add_argument("right")
    p.set_defaults(handler=cmd_compose)

    p = sub.add_parser("congruence", help="並列合成に対する合同性の検査")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--log-dir", default=None)
    p.add_argument("left")
    p.add_argument("right")
    p.set_defaults(handler=cmd_congruence)

    p = sub.add_parser("simulate", help="モンテカルロ試行")
    p.add_argument("--f", required=True, help="評価値ファイル、またはインライン JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--label", default=None)
    p.add_argument("--scheduler", default=None, help='{"状態/ラベル": 添字 または 重み} の JSON')
    p.add_argument("--upper", action="store_true", help="生成分布ごとの平均の最大値を出力する")
    p.add_argument("model")
    p.add_argument("state")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("quotient", help="双模倣による商モデル")
    p.add_argument("--kind", choices=kinds, default=BisimKind.UE.value)
    p.add_argument("model")
    p.set_defaults(handler=cmd_quotient)

    p = sub.add_parser("dot", help="Graphviz DOT 形式で出力する")
    p.add_argument("--name", default="pnts")
    p.add_argument("model")
    p.set_defaults(handler=cmd_dot)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """CLI のエントリポイント。終了コードを返す"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    configure_logging(args.verbose)
    renderer = JsonRenderer(args.as_float)
    handler: Callable[[argparse.Namespace, JsonRenderer], int] = args.handler
    try:
        return handler(args, renderer)
    except RieszError as e:
        logger.error(f"[main] {args.command}: {e}")
        return EXIT_USAGE if isinstance(e, ValueError) else EXIT_VIOLATION
    except ValueError as e:
        logger.error(f"[main] {args.command}: {e}")
        return EXIT_USAGE
