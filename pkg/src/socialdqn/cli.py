"""Command-line interface: run, sweep, analyze, plot, compare.

Configuration resolution, lowest to highest precedence: dataclass
defaults, ``--preset``, ``--config`` file (a YAML or JSON mapping of
config field names), then explicit flags. Every config field has a
flag. Exit codes: 0 on success, 1 when any trial failed or a replay
check found a mismatch, 2 on bad usage or unreadable inputs.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import yaml

from .report import (
    plot_comparison_bars,
    plot_sweep_heatmap,
    summary_table,
    write_report,
    CURVE_METRICS,
)
from .runner import (
    DTYPES,
    PRESETS,
    SUMMARY_METRICS,
    SWEEP_BATCH_LENGTHS,
    SWEEP_SHARE_PROBS,
    TASKS,
    TOPOLOGIES,
    ExperimentConfig,
    compare_experiments,
    comparison_table,
    load_summary,
    run_experiment,
    run_sweep,
    verify_trial,
    write_comparison,
)
from .sharing import MODES

logger = logging.getLogger(__name__)


def _json_mapping(text: str) -> dict:
    try:
        value = json.loads(text)
    except json.JSONDecodeError as error:
        raise argparse.ArgumentTypeError(f"not valid JSON: {error}") from error
    if not isinstance(value, dict):
        raise argparse.ArgumentTypeError("expected a JSON object")
    return value


def _int_list(text: str) -> List[int]:
    return [int(part) for part in text.split(",") if part]


def _float_list(text: str) -> List[float]:
    return [float(part) for part in text.split(",") if part]


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", choices=sorted(PRESETS),
                        help="named starting configuration")
    parser.add_argument("--config", type=Path, metavar="FILE",
                        help="YAML or JSON mapping of config fields")
    parser.add_argument("--task", choices=TASKS)
    parser.add_argument("--task-params", type=_json_mapping, metavar="JSON",
                        help='task builder arguments, e.g. \'{"length": 4}\'')
    parser.add_argument("--topology", choices=TOPOLOGIES)
    parser.add_argument("--topology-params", type=_json_mapping, metavar="JSON")
    parser.add_argument("--n-agents", type=int)
    parser.add_argument("--share-prob", type=float)
    parser.add_argument("--batch-length", type=int)
    parser.add_argument("--share-mode", choices=MODES)
    parser.add_argument("--hidden", type=int)
    parser.add_argument("--lr", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--batch-size", type=int)
    parser.add_argument("--buffer-capacity", type=int)
    parser.add_argument("--target-interval", type=int)
    parser.add_argument("--prioritized", action=argparse.BooleanOptionalAction,
                        default=None)
    parser.add_argument("--priority-alpha", type=float)
    parser.add_argument("--priority-beta", type=float)
    parser.add_argument("--dtype", choices=sorted(DTYPES))
    parser.add_argument("--t-train", type=int)
    parser.add_argument("--eval-interval", type=int)
    parser.add_argument("--n-trials", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--mnemonic-metrics",
                        action=argparse.BooleanOptionalAction, default=None)
    parser.add_argument("--store-snapshots",
                        action=argparse.BooleanOptionalAction, default=None)
    parser.add_argument("--output-dir")
    parser.add_argument("--label")


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    merged: dict = {}
    if args.preset:
        merged.update(PRESETS[args.preset])
    if args.config:
        with open(args.config) as handle:
            data = yaml.safe_load(handle)
        if not isinstance(data, dict):
            raise ValueError(f"{args.config} must hold a mapping of config fields")
        merged.update(data)
    for name in ExperimentConfig.__dataclass_fields__:
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = value
    return ExperimentConfig.from_dict(merged)


def _cmd_run(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    summary = run_experiment(config)
    print(f"experiment {summary['config_hash']} ({summary['label']}):"
          f" {summary['complete_trials']}/{summary['n_trials']} trials complete")
    if summary["final"]:
        success = summary["final"]["group_success"]
        print(f"  group success rate {success['mean']:.2f}"
              f" +- {success['ci_half']:.2f} (95% CI, n={success['n']})")
    print(f"  outputs in {config.output_dir}")
    if not summary["complete"]:
        print(f"  FAILED trials: {summary['failed_trials']}", file=sys.stderr)
        return 1
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    sweep = run_sweep(config, batch_lengths=args.batch_lengths,
                      share_probs=args.share_probs)
    path = plot_sweep_heatmap(sweep, Path(config.output_dir) / "sweep_heatmap.svg")
    cells = len(sweep["cells"])
    print(f"swept {cells} cells into {config.output_dir}")
    if path is not None:
        print(f"  heat map at {path}")
    return 0 if sweep["complete"] else 1


def _trial_dirs(experiment_dir: Path) -> List[Path]:
    return sorted(p for p in Path(experiment_dir).glob("trial_*") if p.is_dir())


def _cmd_analyze(args: argparse.Namespace) -> int:
    failures = 0
    summaries = []
    for experiment_dir in args.experiment_dirs:
        trials = _trial_dirs(experiment_dir)
        if not trials:
            print(f"{experiment_dir}: no trial directories", file=sys.stderr)
            failures += 1
            continue
        for trial_dir in trials:
            ok = verify_trial(trial_dir)
            print(f"{trial_dir}: {'ok' if ok else 'MISMATCH'}")
            failures += 0 if ok else 1
        try:
            summaries.append(load_summary(experiment_dir))
        except OSError:
            pass
    if summaries:
        print()
        print(summary_table(summaries), end="")
    return 1 if failures else 0


def _cmd_plot(args: argparse.Namespace) -> int:
    out_dir = args.out or Path(args.experiment_dirs[0]) / "report"
    written = write_report(args.experiment_dirs, out_dir, metrics=args.metrics)
    for path in written:
        print(path)
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    summaries = [load_summary(d) for d in args.experiment_dirs]
    for summary in summaries:
        if not summary["complete"]:
            print(f"note: {summary['label']} has failed trials;"
                  " comparing the complete ones", file=sys.stderr)
    comparison = compare_experiments(summaries, metric=args.metric,
                                     alpha=args.alpha)
    out_dir = Path(args.out or Path(args.experiment_dirs[0]) / "comparison")
    write_comparison(comparison, out_dir)
    plot_comparison_bars(comparison, out_dir / "comparison_bars.svg")
    print(comparison_table(comparison), end="")
    print(f"outputs in {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="socialdqn",
        description="Distributed deep Q-learning with replay sharing over"
                    " social-network topologies",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="run one experiment")
    _add_config_flags(run_parser)
    run_parser.set_defaults(handler=_cmd_run)

    sweep_parser = commands.add_parser(
        "sweep", help="grid over shared batch length and share probability")
    _add_config_flags(sweep_parser)
    sweep_parser.add_argument("--batch-lengths", type=_int_list,
                              default=list(SWEEP_BATCH_LENGTHS), metavar="L,L,...")
    sweep_parser.add_argument("--share-probs", type=_float_list,
                              default=list(SWEEP_SHARE_PROBS), metavar="P,P,...")
    sweep_parser.set_defaults(handler=_cmd_sweep)

    analyze_parser = commands.add_parser(
        "analyze", help="replay stored records and verify metric files")
    analyze_parser.add_argument("experiment_dirs", nargs="+", type=Path)
    analyze_parser.set_defaults(handler=_cmd_analyze)

    plot_parser = commands.add_parser("plot", help="render metric curves")
    plot_parser.add_argument("experiment_dirs", nargs="+", type=Path)
    plot_parser.add_argument("--out", type=Path)
    plot_parser.add_argument("--metrics", type=lambda t: t.split(","),
                             default=list(CURVE_METRICS), metavar="M,M,...")
    plot_parser.set_defaults(handler=_cmd_plot)

    compare_parser = commands.add_parser(
        "compare", help="ANOVA and pairwise tests across experiments")
    compare_parser.add_argument("experiment_dirs", nargs="+", type=Path)
    compare_parser.add_argument("--metric", choices=SUMMARY_METRICS,
                                default="group_success")
    compare_parser.add_argument("--alpha", type=float, default=0.05)
    compare_parser.add_argument("--out", type=Path)
    compare_parser.set_defaults(handler=_cmd_compare)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (OSError, ValueError) as error:
        print(f"error: {error}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
