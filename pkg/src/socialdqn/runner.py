"""Seeded experiment runner: configs, trials, persistence, aggregation.

One experiment is ``n_trials`` independent trials of the same
configuration. The master seed fully determines every random stream:

    root = SeedSequence(seed)
    trial i       <- root.spawn(n_trials)[i]
    per trial     <- trial.spawn(3) = (learner, sharing, topology)
    learner       <- one child per agent, each split into
                     (init, action, sampling) streams

so results are independent of worker count and of which trials run, and
two experiments with different master seeds never overlap streams.

Each trial writes its own directory::

    trial_000/
      config.json     resolved configuration + hash
      evals.csv       one row per (evaluation step, agent)
      share_log.csv   one row per delivery at an episode barrier
      metrics.csv     long-format metric rows derived from the above
      snapshots/      step_*.npz buffer fingerprints (optional)
      record.json     completion flag and wall-clock metadata

metrics.csv is recomputable offline from evals.csv plus the snapshots;
``verify_trial`` does exactly that and is the replay check for the
experiment-level determinism guarantee. All CSVs use ``repr`` for floats
so equal runs are byte-identical; record.json holds the only volatile
fields (timing) and is excluded from that guarantee.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .cohort import GroupTrainer, TrainResult
from .coins import OBSERVATION_SIZE as COINS_OBSERVATION_SIZE
from .coins import VectorCoins
from .dqn import CohortDqn, DqnConfig
from .metrics import (
    BufferSnapshot,
    EvalRecord,
    conformity,
    diversity,
    group_diversity,
    group_success,
    intra_alignment,
    reward_curves,
    success_times,
    volatility,
)
from .recipes import build_best_of_n, build_merging_paths, build_single_path
from .sharing import SharingConfig
from .stats import mean_ci, one_way_anova, significance_stars, tukey_hsd
from .topology import topology_scheduler
from .wordcraft import VectorWordcraft, WordcraftEnv

logger = logging.getLogger(__name__)

TASKS = ("merging_paths", "single_path", "best_of_n", "coins")
TOPOLOGIES = ("fully_connected", "small_world", "ring", "dynamic_pairs",
              "periodic", "no_sharing")
DTYPES = {"float32": np.float32, "float64": np.float64}

# final-step scalars exposed per trial for experiment-level comparisons
SUMMARY_METRICS = ("group_success", "t_first", "t_all", "t_spread",
                   "r_max_final", "r_mean_final")


@dataclass
class ExperimentConfig:
    """Everything one experiment needs; every field has a usable default."""

    task: str = "merging_paths"
    task_params: dict = field(default_factory=dict)
    topology: str = "fully_connected"
    topology_params: dict = field(default_factory=dict)
    n_agents: int = 10
    share_prob: float = 1.0
    batch_length: int = 6
    share_mode: str = "uniform"
    hidden: int = 64
    lr: float = 0.001
    gamma: float = 0.9
    epsilon: float = 0.01
    batch_size: int = 32
    buffer_capacity: int = 5000
    target_interval: int = 1000
    prioritized: bool = False
    priority_alpha: float = 0.6
    priority_beta: float = 0.4
    dtype: str = "float32"
    t_train: int = 20000
    eval_interval: int = 2000
    n_trials: int = 5
    seed: int = 0
    workers: int = 1
    mnemonic_metrics: bool = True
    store_snapshots: bool = True
    output_dir: str = "runs/experiment"
    label: str = ""

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.topology not in TOPOLOGIES:
            raise ValueError(
                f"topology must be one of {TOPOLOGIES}, got {self.topology!r}")
        if self.dtype not in DTYPES:
            raise ValueError(f"dtype must be one of {tuple(DTYPES)}")
        if self.n_agents < 1:
            raise ValueError("n_agents must be >= 1")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.t_train < 1 or self.eval_interval < 1:
            raise ValueError("t_train and eval_interval must be >= 1")
        if self.t_train % self.eval_interval != 0:
            raise ValueError("t_train must be a multiple of eval_interval")
        if self.store_snapshots and not self.mnemonic_metrics:
            raise ValueError("store_snapshots requires mnemonic_metrics")
        # fail fast on bad sharing parameters instead of inside a worker
        SharingConfig(self.share_prob, self.batch_length, self.share_mode)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def config_hash(self) -> str:
        """Hash of every field that affects trial content.

        Output location, worker count, and the display label cannot change
        any result byte, so they are excluded; everything else is in.
        """
        payload = self.to_dict()
        for volatile in ("output_dir", "workers", "label"):
            payload.pop(volatile)
        canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:12]


# the eight studied conditions minus the out-of-scope distributed baselines
PRESETS: Dict[str, dict] = {
    "fully_connected": {"topology": "fully_connected"},
    "small_world": {"topology": "small_world"},
    "ring": {"topology": "ring"},
    "dynamic_pairs": {"topology": "dynamic_pairs"},
    "periodic": {"topology": "periodic"},
    "no_sharing": {"topology": "no_sharing"},
    "single": {"topology": "no_sharing", "n_agents": 1},
}


def preset_config(name: str, **overrides) -> ExperimentConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    merged = dict(PRESETS[name])
    merged.update(overrides)
    return ExperimentConfig(**merged)


# ---------------------------------------------------------------------------
# task adapters


@dataclass(frozen=True)
class TaskBundle:
    name: str
    env_factory: Callable[[int], Callable[[], object]]
    obs_size: int
    n_actions: int
    optimal_return: float


def build_task_bundle(config: ExperimentConfig) -> TaskBundle:
    params = dict(config.task_params)
    if config.task == "coins":
        if params:
            raise ValueError("the coins task takes no parameters")
        return TaskBundle(
            "coins",
            lambda k: (lambda: VectorCoins(k)),
            COINS_OBSERVATION_SIZE,
            2,
            5.0,
        )
    builder = {
        "single_path": build_single_path,
        "merging_paths": build_merging_paths,
        "best_of_n": build_best_of_n,
    }[config.task]
    task = builder(**params)
    probe = WordcraftEnv(task)
    return TaskBundle(
        task.name,
        lambda k: (lambda: VectorWordcraft(task, k)),
        probe.observation_size,
        probe.n_actions,
        task.optimal_return,
    )


# ---------------------------------------------------------------------------
# one trial


@dataclass
class TrialRecord:
    trial: int
    directory: str
    config_hash: str
    complete: bool
    error: Optional[str]
    wall_seconds: float


def trial_streams(config: ExperimentConfig, trial: int):
    """The documented seed split for one trial."""
    root = np.random.SeedSequence(config.seed)
    trial_seq = root.spawn(config.n_trials)[trial]
    learner_seq, sharing_seq, topology_seq = trial_seq.spawn(3)
    return learner_seq, sharing_seq, topology_seq


def build_trainer(config: ExperimentConfig, trial: int) -> GroupTrainer:
    bundle = build_task_bundle(config)
    learner_seq, sharing_seq, topology_seq = trial_streams(config, trial)
    dqn_config = DqnConfig(
        obs_size=bundle.obs_size,
        n_actions=bundle.n_actions,
        hidden=config.hidden,
        lr=config.lr,
        gamma=config.gamma,
        epsilon=config.epsilon,
        batch_size=config.batch_size,
        buffer_capacity=config.buffer_capacity,
        target_interval=config.target_interval,
        prioritized=config.prioritized,
        priority_alpha=config.priority_alpha,
        priority_beta=config.priority_beta,
        store_fingerprints=config.mnemonic_metrics,
        dtype=DTYPES[config.dtype],
    )
    scheduler = topology_scheduler(
        config.topology,
        config.n_agents,
        rng=np.random.default_rng(topology_seq),
        **config.topology_params,
    )
    return GroupTrainer(
        bundle.env_factory(config.n_agents),
        CohortDqn(dqn_config, config.n_agents, seed=learner_seq),
        scheduler,
        SharingConfig(config.share_prob, config.batch_length, config.share_mode),
        np.random.default_rng(sharing_seq),
        config.t_train,
        config.eval_interval,
        bundle.optimal_return,
        collect_mnemonics=config.mnemonic_metrics,
    )


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _eval_rows(trial: int, records: Sequence[EvalRecord]):
    for r in records:
        yield (trial, r.step, r.agent, repr(r.episode_return), r.final_element,
               ";".join(str(e) for e in r.trajectory))


def metric_rows(records: Sequence[EvalRecord],
                snapshots: Sequence[BufferSnapshot],
                t_train: int,
                n_agents: int) -> List[Tuple[int, str, str, float]]:
    """Long-format metric rows derived from evaluation records and snapshots.

    Per evaluation step: group max/mean return and conformity; per-agent
    volatility whenever at least two evaluations exist; per-agent and
    group diversity plus intra-group alignment at steps with a snapshot.
    A final block at ``t_train`` holds group success and success times.
    """
    rows: List[Tuple[int, str, str, float]] = []
    steps, r_max, r_mean = reward_curves(records)
    by_step = {step: [r for r in records if r.step == step] for step in steps}
    by_agent = {
        a: sorted((r for r in records if r.agent == a), key=lambda r: r.step)
        for a in range(n_agents)
    }
    vol = None
    if len(steps) >= 2:
        vol = {a: volatility([r.trajectory for r in by_agent[a]])
               for a in range(n_agents)}
    snap_at = {s.step: s for s in snapshots}
    for i, step in enumerate(int(s) for s in steps):
        rows.append((step, "r_max", "group", float(r_max[i])))
        rows.append((step, "r_mean", "group", float(r_mean[i])))
        rows.append((step, "conformity", "group", conformity(by_step[step])))
        if vol is not None:
            for a in range(n_agents):
                rows.append((step, "volatility", f"agent_{a}", float(vol[a][i])))
        if step in snap_at:
            snapshot = snap_at[step]
            for a in range(n_agents):
                rows.append((step, "diversity", f"agent_{a}",
                             float(diversity(snapshot, a))))
            rows.append((step, "group_diversity", "group",
                         float(group_diversity(snapshot))))
            if n_agents >= 2:
                rows.append((step, "intra_alignment", "group",
                             intra_alignment(snapshot)))
    t_first, t_all, t_spread = success_times(records, t_train)
    rows.append((t_train, "group_success", "group", float(group_success(records))))
    rows.append((t_train, "t_first", "group", float(t_first)))
    rows.append((t_train, "t_all", "group", float(t_all)))
    rows.append((t_train, "t_spread", "group", float(t_spread)))
    return rows


def _metric_csv_rows(trial: int, rows):
    for step, metric, scope, value in rows:
        yield (trial, step, metric, scope, repr(float(value)))


def run_trial(config: ExperimentConfig, trial: int) -> TrialRecord:
    """Run one seeded trial and persist its record directory.

    Any failure is caught, written into ``record.json`` with
    ``complete: false`` alongside whatever was already persisted, and
    reported in the returned record rather than raised.
    """
    if not 0 <= trial < config.n_trials:
        raise ValueError("trial index out of range")
    started = time.time()
    directory = Path(config.output_dir) / f"trial_{trial:03d}"
    directory.mkdir(parents=True, exist_ok=True)
    record = TrialRecord(trial, str(directory), config.config_hash(),
                         False, None, 0.0)
    try:
        trainer = build_trainer(config, trial)
        result = trainer.run()
        _persist_trial(config, trial, result, directory)
        record.complete = True
    except Exception:
        record.error = traceback.format_exc()
        logger.error("trial %d failed:\n%s", trial, record.error)
    record.wall_seconds = time.time() - started
    _write_record_json(config, record, directory)
    return record


def _persist_trial(config: ExperimentConfig, trial: int, result: TrainResult,
                   directory: Path) -> None:
    with open(directory / "config.json", "w") as handle:
        json.dump({"config": config.to_dict(),
                   "config_hash": config.config_hash(),
                   "trial": trial},
                  handle, indent=2, sort_keys=True)
        handle.write("\n")
    _write_csv(directory / "evals.csv",
               ("trial", "step", "agent", "episode_return", "final_element",
                "trajectory"),
               _eval_rows(trial, result.eval_records))
    _write_csv(directory / "share_log.csv",
               ("trial", "episode", "step", "sender", "receiver", "count"),
               ((trial,) + tuple(e) for e in result.share_events))
    rows = metric_rows(result.eval_records, result.snapshots,
                       config.t_train, config.n_agents)
    _write_csv(directory / "metrics.csv",
               ("trial", "step", "metric", "scope", "value"),
               _metric_csv_rows(trial, rows))
    if config.store_snapshots:
        snap_dir = directory / "snapshots"
        snap_dir.mkdir(exist_ok=True)
        for snapshot in result.snapshots:
            arrays = {f"agent_{a}": snapshot.fingerprints[a]
                      for a in range(snapshot.n_agents)}
            np.savez(snap_dir / f"step_{snapshot.step:08d}.npz", **arrays)


def _write_record_json(config: ExperimentConfig, record: TrialRecord,
                       directory: Path) -> None:
    payload = {
        "config_hash": record.config_hash,
        "trial": record.trial,
        "seed": config.seed,
        "complete": record.complete,
        "error": record.error,
        "wall_seconds": record.wall_seconds,
    }
    with open(directory / "record.json", "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _trial_worker(payload: Tuple[dict, int]) -> dict:
    config_dict, trial = payload
    record = run_trial(ExperimentConfig.from_dict(config_dict), trial)
    return asdict(record)


# ---------------------------------------------------------------------------
# experiment level


def load_metrics_csv(path: Path) -> List[Tuple[int, int, str, str, float]]:
    rows = []
    with open(path, newline="") as handle:
        for row in csv.DictReader(handle):
            rows.append((int(row["trial"]), int(row["step"]), row["metric"],
                         row["scope"], float(row["value"])))
    return rows


def load_eval_records(path: Path) -> List[EvalRecord]:
    records = []
    with open(path, newline="") as handle:
        for row in csv.DictReader(handle):
            raw = row["trajectory"]
            trajectory = tuple(int(e) for e in raw.split(";")) if raw else ()
            records.append(EvalRecord(
                step=int(row["step"]),
                agent=int(row["agent"]),
                episode_return=float(row["episode_return"]),
                final_element=int(row["final_element"]),
                trajectory=trajectory,
            ))
    return records


def load_snapshots(directory: Path) -> List[BufferSnapshot]:
    snapshots = []
    if not directory.is_dir():
        return snapshots
    for path in sorted(directory.glob("step_*.npz")):
        step = int(path.stem.split("_")[1])
        with np.load(path) as data:
            arrays = tuple(data[f"agent_{a}"] for a in range(len(data.files)))
        snapshots.append(BufferSnapshot(step=step, fingerprints=arrays))
    return snapshots


def verify_trial(trial_dir: Path) -> bool:
    """Recompute metrics.csv from evals.csv and any stored snapshots.

    Returns True when every stored metric row is reproduced exactly.
    Mnemonic rows cannot be checked without snapshots on disk; they are
    skipped with a notice in that case.
    """
    trial_dir = Path(trial_dir)
    with open(trial_dir / "config.json") as handle:
        payload = json.load(handle)
    config = ExperimentConfig.from_dict(payload["config"])
    trial = payload["trial"]
    records = load_eval_records(trial_dir / "evals.csv")
    snapshots = load_snapshots(trial_dir / "snapshots")
    recomputed = metric_rows(records, snapshots, config.t_train, config.n_agents)
    expected = [(trial, step, metric, scope, repr(float(value)))
                for trial, step, metric, scope, value
                in _metric_csv_rows(trial, recomputed)]
    stored = [(int(r[0]), int(r[1]), r[2], r[3], r[4])
              for r in _raw_csv_rows(trial_dir / "metrics.csv")]
    if config.mnemonic_metrics and not snapshots:
        mnemonic = {"diversity", "group_diversity", "intra_alignment"}
        logger.info("no snapshots in %s; skipping mnemonic rows", trial_dir)
        stored = [r for r in stored if r[2] not in mnemonic]
    mismatch = stored != expected
    if mismatch:
        logger.error("metric mismatch in %s", trial_dir)
    return not mismatch


def _raw_csv_rows(path: Path):
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        next(reader)
        yield from reader


def final_scalars(metrics: Sequence[Tuple[int, int, str, str, float]],
                  t_train: int) -> Dict[str, float]:
    """The per-trial summary scalars used for cross-experiment comparisons."""
    out: Dict[str, float] = {}
    for _, step, metric, scope, value in metrics:
        if scope != "group":
            continue
        if metric in ("group_success", "t_first", "t_all", "t_spread"):
            out[metric] = value
        elif metric in ("r_max", "r_mean") and step == t_train:
            out[metric + "_final"] = value
    return out


def _ci(values: Sequence[float]) -> Tuple[float, float, float]:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 1:
        return float(arr[0]), 0.0, 0.0
    mean, half = mean_ci(arr)
    return mean, float(arr.std(ddof=1)), half


def run_experiment(config: ExperimentConfig) -> dict:
    """Run all trials, then aggregate; returns the experiment summary.

    Trials are independent work units; with ``workers > 1`` they are
    distributed over a process pool, which cannot change any output byte
    because every stream is derived from (seed, trial index) alone.
    """
    out_root = Path(config.output_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    payloads = [(config.to_dict(), t) for t in range(config.n_trials)]
    if config.workers == 1:
        records = [_trial_worker(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(_trial_worker, payloads))
    summary = summarize_experiment(config, records)
    write_summary(config, summary)
    return summary


def summarize_experiment(config: ExperimentConfig,
                         records: Sequence[dict]) -> dict:
    complete = [r for r in records if r["complete"]]
    failed = [r for r in records if not r["complete"]]
    per_trial: Dict[str, List[float]] = {m: [] for m in SUMMARY_METRICS}
    all_metrics: List[Tuple[int, int, str, str, float]] = []
    for record in complete:
        metrics = load_metrics_csv(Path(record["directory"]) / "metrics.csv")
        all_metrics.extend(metrics)
        scalars = final_scalars(metrics, config.t_train)
        for name in SUMMARY_METRICS:
            per_trial[name].append(scalars[name])
    summary = {
        "config": config.to_dict(),
        "config_hash": config.config_hash(),
        "label": config.label or config.topology,
        "n_trials": config.n_trials,
        "complete_trials": len(complete),
        "failed_trials": [r["trial"] for r in failed],
        "complete": not failed,
        "per_trial": per_trial,
        "final": {},
    }
    if complete:
        for name, values in per_trial.items():
            mean, std, half = _ci(values)
            summary["final"][name] = {"mean": mean, "std": std,
                                      "ci_half": half, "n": len(values)}
        summary["aggregate_rows"] = aggregate_metric_rows(all_metrics)
    return summary


def aggregate_metric_rows(
    metrics: Sequence[Tuple[int, int, str, str, float]],
) -> List[Tuple[str, str, int, int, float, float, float]]:
    """Mean, sample std, and 95% CI half-width per (metric, scope, step)."""
    grouped: Dict[Tuple[str, str, int], List[float]] = {}
    for _, step, metric, scope, value in metrics:
        grouped.setdefault((metric, scope, step), []).append(value)
    rows = []
    for (metric, scope, step), values in sorted(grouped.items()):
        mean, std, half = _ci(values)
        rows.append((metric, scope, step, len(values), mean, std, half))
    return rows


def write_summary(config: ExperimentConfig, summary: dict) -> None:
    out_root = Path(config.output_dir)
    rows = summary.pop("aggregate_rows", [])
    _write_csv(out_root / "aggregate.csv",
               ("metric", "scope", "step", "n", "mean", "std", "ci_half"),
               ((m, sc, st, n, repr(mean), repr(std), repr(half))
                for m, sc, st, n, mean, std, half in rows))
    with open(out_root / "summary.json", "w") as handle:
        json.dump(summary, handle, indent=2, sort_keys=True)
        handle.write("\n")
    summary["aggregate_rows"] = rows


# ---------------------------------------------------------------------------
# sweeps and comparisons

SWEEP_BATCH_LENGTHS = (1, 6, 36)
SWEEP_SHARE_PROBS = (0.35, 0.7, 1.0)


def run_sweep(config: ExperimentConfig,
              batch_lengths: Sequence[int] = SWEEP_BATCH_LENGTHS,
              share_probs: Sequence[float] = SWEEP_SHARE_PROBS) -> dict:
    """Grid of experiments over (batch_length, share_prob); one heat map.

    Every cell reruns the base configuration with the two fields replaced
    and its own subdirectory; the sweep summary holds the grid of group
    success rates plus each cell's summary.
    """
    root = Path(config.output_dir)
    cells = []
    for length in batch_lengths:
        for prob in share_probs:
            cell_dir = root / f"cell_L{length}_p{prob:g}"
            cell_config = replace(config, batch_length=int(length),
                                  share_prob=float(prob),
                                  output_dir=str(cell_dir))
            summary = run_experiment(cell_config)
            cells.append({"batch_length": int(length),
                          "share_prob": float(prob),
                          "summary": summary})
    _write_csv(root / "sweep.csv",
               ("batch_length", "share_prob", "group_success_rate",
                "r_mean_final", "complete_trials"),
               ((c["batch_length"], repr(c["share_prob"]),
                 repr(c["summary"]["final"]["group_success"]["mean"]),
                 repr(c["summary"]["final"]["r_mean_final"]["mean"]),
                 c["summary"]["complete_trials"])
                for c in cells if c["summary"]["final"]))
    sweep = {
        "batch_lengths": [int(b) for b in batch_lengths],
        "share_probs": [float(p) for p in share_probs],
        "cells": cells,
        "complete": all(c["summary"]["complete"] for c in cells),
    }
    with open(root / "sweep.json", "w") as handle:
        json.dump(sweep, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return sweep


def load_summary(experiment_dir: Path) -> dict:
    with open(Path(experiment_dir) / "summary.json") as handle:
        return json.load(handle)


def compare_experiments(summaries: Sequence[dict],
                        metric: str = "group_success",
                        alpha: float = 0.05) -> dict:
    """ANOVA plus all-pairs comparison of one per-trial summary metric."""
    if len(summaries) < 2:
        raise ValueError("need at least two experiments to compare")
    if metric not in SUMMARY_METRICS:
        raise ValueError(f"metric must be one of {SUMMARY_METRICS}")
    samples: Dict[str, List[float]] = {}
    for summary in summaries:
        label = summary.get("label") or summary["config_hash"]
        if label in samples:
            label = f"{label}#{summary['config_hash']}"
        values = summary["per_trial"][metric]
        if len(values) < 2:
            raise ValueError(
                f"experiment {label!r} has {len(values)} complete trials;"
                " comparisons need at least two")
        samples[label] = values
    anova = one_way_anova(samples)
    pairs = tukey_hsd(samples, alpha=alpha)
    return {
        "metric": metric,
        "labels": list(samples),
        "groups": {label: {"values": values, "mean": float(np.mean(values)),
                           "std": float(np.std(values, ddof=1))}
                   for label, values in samples.items()},
        "anova": {"f_statistic": anova.f_statistic, "p_value": anova.p_value,
                  "degenerate": anova.degenerate,
                  "stars": significance_stars(anova.p_value)},
        "pairwise": [
            {"a": p.group_a, "b": p.group_b,
             "mean_difference": p.mean_difference, "q": p.q_statistic,
             "p_value": p.p_value, "significant": p.significant,
             "stars": significance_stars(p.p_value)}
            for p in pairs
        ],
    }


def write_comparison(comparison: dict, output_dir: Path) -> Path:
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    path = output_dir / "comparison.csv"
    _write_csv(path,
               ("group_a", "group_b", "mean_difference", "q", "p_value",
                "significant", "stars"),
               ((p["a"], p["b"], repr(p["mean_difference"]), repr(p["q"]),
                 repr(p["p_value"]), int(p["significant"]), p["stars"])
                for p in comparison["pairwise"]))
    with open(output_dir / "comparison.json", "w") as handle:
        json.dump(comparison, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path


def comparison_table(comparison: dict) -> str:
    """Plain-text table of an experiment comparison."""
    buffer = io.StringIO()
    anova = comparison["anova"]
    buffer.write(f"metric: {comparison['metric']}\n")
    for label in comparison["labels"]:
        group = comparison["groups"][label]
        buffer.write(f"  {label}: ({group['mean']:.2f}, {group['std']:.2f})"
                     f" over {len(group['values'])} trials\n")
    buffer.write(f"ANOVA F={anova['f_statistic']:.4g}"
                 f" p={anova['p_value']:.4g} {anova['stars']}\n")
    for pair in comparison["pairwise"]:
        buffer.write(f"  {pair['a']} vs {pair['b']}:"
                     f" diff={pair['mean_difference']:.4g}"
                     f" p={pair['p_value']:.4g} {pair['stars']}\n")
    return buffer.getvalue()
