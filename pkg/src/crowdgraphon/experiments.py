"""Monte Carlo harness for the accuracy-versus-budget experiments.

Each trial derives its own seed from the master seed, so trials are
order-independent and a fixed config reproduces the record stream exactly.
The seed recorded with each trial is h(master, trial) = the first 64-bit
word of numpy's SeedSequence((master, trial)); every random stream inside
the trial is keyed by (that seed, purpose index).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import IO

import numpy as np

from .assignment import (
    InsufficientClusterError,
    TwoStageDesign,
    queries_per_task,
    stage1_assignment,
    stage2_assignment,
    uniform_assignment,
)
from .estimators import (
    ClusterPartition,
    cluster_workers,
    error_rate,
    majority_vote_all,
    two_stage_estimate_all,
)
from .model import CrowdModel, DType, bernoulli_answers, sample_responses, uniform_types
from .theory import two_stage_schedule

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "TrialRecord",
    "CSV_HEADER",
    "derived_seed",
    "wilson_interval",
    "run_tradeoff_experiment",
    "run_clustering_recovery_experiment",
    "records_to_csv",
    "aggregate_task_error",
]

CSV_HEADER = ("trial", "method", "queries_per_task", "error", "recovered", "C", "seed")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters for one experiment run.

    kind "tradeoff" compares the two-stage pipeline against majority vote;
    kind "clustering" sweeps the calibration batch size and records exact
    type recovery. schedule "target" derives (R, L, xi) from the accuracy
    target alpha and runs the full pipeline; schedule "budget" fixes the
    per-task budget, splits it evenly over the true type partition
    (partition_mode "oracle"), and matches majority vote to the same budget.
    """

    kind: str
    d: int
    p: float
    num_tasks: int
    num_workers: int
    trials: int
    seed: int
    alpha: float = 0.1
    schedule: str = "target"
    budget: int | None = None
    partition_mode: str = "estimated"
    r_grid: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("tradeoff", "clustering"):
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.d < 1:
            raise ConfigError("d must be a positive integer")
        if not (0.5 < self.p <= 1.0):
            raise ConfigError("p must lie in (1/2, 1]")
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError("alpha must lie in (0, 1)")
        if self.num_tasks < 1 or self.num_workers < 1:
            raise ConfigError("num_tasks and num_workers must be positive")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.kind == "tradeoff":
            if self.schedule not in ("target", "budget"):
                raise ConfigError(f"unknown schedule {self.schedule!r}")
            if self.schedule == "target" and self.partition_mode != "estimated":
                raise ConfigError("the target schedule runs the estimated partition")
            if self.schedule == "budget":
                if self.partition_mode != "oracle":
                    raise ConfigError("the budget schedule requires the oracle partition")
                if self.budget is None:
                    raise ConfigError("the budget schedule requires a budget")
                if not (self.d <= self.budget <= self.num_workers):
                    raise ConfigError("budget must lie in d..num_workers")
                if self.budget % self.d != 0:
                    raise ConfigError("budget must be divisible by d to split over clusters")
        if self.kind == "clustering" and self.r_grid is not None:
            grid = tuple(int(r) for r in self.r_grid)
            if any(r < 0 or r > self.num_tasks for r in grid):
                raise ConfigError("r_grid entries must lie in 0..num_tasks")
            object.__setattr__(self, "r_grid", grid)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            kwargs = dict(data)
            if "r_grid" in kwargs and kwargs["r_grid"] is not None:
                kwargs["r_grid"] = tuple(kwargs["r_grid"])
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "d": self.d,
            "p": self.p,
            "num_tasks": self.num_tasks,
            "num_workers": self.num_workers,
            "trials": self.trials,
            "seed": self.seed,
            "alpha": self.alpha,
            "schedule": self.schedule,
            "partition_mode": self.partition_mode,
        }
        if self.budget is not None:
            out["budget"] = self.budget
        if self.r_grid is not None:
            out["r_grid"] = list(self.r_grid)
        return out


@dataclass(frozen=True)
class TrialRecord:
    """One method's outcome on one trial."""

    trial: int
    method: str
    queries_per_task: Fraction
    error: Fraction
    recovered: bool | None
    num_clusters: int | None
    seed: int


def derived_seed(*parts: int) -> int:
    """Deterministic 64-bit seed from integer parts via SeedSequence."""
    ss = np.random.SeedSequence(tuple(int(x) for x in parts))
    return int(ss.generate_state(1, np.uint64)[0])


def wilson_interval(successes: float, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson 95% score interval for a proportion (fractional counts allowed)."""
    if n <= 0:
        raise ValueError("n must be positive")
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = (z / denom) * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n))
    return (max(0.0, center - half), min(1.0, center + half))


def _fresh_model(cfg: ExperimentConfig, s: int) -> tuple[CrowdModel, np.ndarray]:
    task_types = uniform_types(cfg.num_tasks, cfg.d, (s, 0))
    worker_types = uniform_types(cfg.num_workers, cfg.d, (s, 1))
    answers = bernoulli_answers(cfg.num_tasks, 0.5, (s, 2))
    model = CrowdModel(DType(cfg.d, cfg.p, task_types, worker_types), answers)
    return model, worker_types


def _two_stage_scheduled_trial(cfg: ExperimentConfig, params, trial: int) -> TrialRecord:
    s = derived_seed(cfg.seed, trial)
    model, worker_types = _fresh_model(cfg, s)
    truth_partition = ClusterPartition.from_labels(worker_types)

    s1_tasks, a1 = stage1_assignment(cfg.num_tasks, cfg.num_workers, params.r, (s, 3))
    design = TwoStageDesign(tuple(int(i) for i in s1_tasks), params.l)
    m1 = sample_responses(model, a1, (s, 4))
    partition = cluster_workers(m1, params.xi)
    recovered = partition.matches(truth_partition)
    c = partition.num_clusters

    rest = design.stage2_tasks(cfg.num_tasks)
    try:
        a2 = stage2_assignment(
            rest, partition, design.workers_per_cluster, (s, 5), num_tasks=cfg.num_tasks
        )
    except InsufficientClusterError:
        # conservative: the trial counts as fully wrong; only stage 1 was paid for
        return TrialRecord(
            trial=trial,
            method="two_stage",
            queries_per_task=Fraction(len(a1), cfg.num_tasks),
            error=Fraction(1),
            recovered=recovered,
            num_clusters=c,
            seed=s,
        )
    m2 = sample_responses(model, a2, (s, 6))
    merged = m1.merge(m2)
    estimates = two_stage_estimate_all(merged, partition, tie_seed=derived_seed(s, 7))
    qpt = queries_per_task(a1, a2, cfg.num_tasks)
    # audited budget never exceeds L*C + W*R/T (exact rational comparison)
    bound = Fraction(params.l * c) + Fraction(cfg.num_workers * params.r, cfg.num_tasks)
    assert qpt <= bound, f"budget audit failed: {qpt} > {bound}"
    return TrialRecord(
        trial=trial,
        method="two_stage",
        queries_per_task=qpt,
        error=error_rate(estimates, model.answers),
        recovered=recovered,
        num_clusters=c,
        seed=s,
    )


def _two_stage_budget_trial(cfg: ExperimentConfig, trial: int) -> TrialRecord:
    s = derived_seed(cfg.seed, trial)
    model, worker_types = _fresh_model(cfg, s)
    partition = ClusterPartition.from_labels(worker_types)
    l = cfg.budget // cfg.d
    try:
        a2 = stage2_assignment(
            np.arange(cfg.num_tasks), partition, l, (s, 5), num_tasks=cfg.num_tasks
        )
    except InsufficientClusterError:
        return TrialRecord(
            trial=trial,
            method="two_stage",
            queries_per_task=Fraction(0),
            error=Fraction(1),
            recovered=True,
            num_clusters=partition.num_clusters,
            seed=s,
        )
    m2 = sample_responses(model, a2, (s, 6))
    estimates = two_stage_estimate_all(m2, partition, tie_seed=derived_seed(s, 7))
    return TrialRecord(
        trial=trial,
        method="two_stage",
        queries_per_task=Fraction(len(a2), cfg.num_tasks),
        error=error_rate(estimates, model.answers),
        recovered=True,
        num_clusters=partition.num_clusters,
        seed=s,
    )


def _majority_trial(cfg: ExperimentConfig, k: int, trial: int) -> TrialRecord:
    s = derived_seed(cfg.seed, trial)
    model, _ = _fresh_model(cfg, s)
    a_mv = uniform_assignment(cfg.num_tasks, cfg.num_workers, k, (s, 8))
    m_mv = sample_responses(model, a_mv, (s, 9))
    estimates = majority_vote_all(m_mv, tie_seed=derived_seed(s, 10))
    return TrialRecord(
        trial=trial,
        method="majority_vote",
        queries_per_task=Fraction(len(a_mv), cfg.num_tasks),
        error=error_rate(estimates, model.answers),
        recovered=None,
        num_clusters=None,
        seed=s,
    )


def run_tradeoff_experiment(cfg: ExperimentConfig) -> list[TrialRecord]:
    """Two-stage pipeline versus majority vote at a matched per-task budget.

    Every trial draws a fresh uniformly typed specialization model and runs
    both methods on it with independent response draws. With the target
    schedule, majority vote receives the design's intended per-task budget
    rounded to an integer.
    """
    if cfg.kind != "tradeoff":
        raise ConfigError("config kind must be 'tradeoff'")
    if cfg.schedule == "target":
        params = two_stage_schedule(cfg.d, cfg.p, cfg.alpha, cfg.num_workers, cfg.num_tasks)
        if not params.t_ok:
            raise ConfigError(
                f"target schedule needs num_tasks >= R = {params.r}, got {cfg.num_tasks}"
            )
        if not params.w_ok:
            raise ConfigError(
                f"target schedule needs num_workers >= {params.w_min}, got {cfg.num_workers}"
            )
        intended = (
            cfg.num_workers * params.r + params.l * cfg.d * (cfg.num_tasks - params.r)
        ) / cfg.num_tasks
        k_mv = min(cfg.num_workers, round(intended))
    else:
        params = None
        k_mv = int(cfg.budget)  # type: ignore[arg-type]

    records: list[TrialRecord] = []
    for trial in range(cfg.trials):
        if cfg.schedule == "target":
            records.append(_two_stage_scheduled_trial(cfg, params, trial))
        else:
            records.append(_two_stage_budget_trial(cfg, trial))
        records.append(_majority_trial(cfg, k_mv, trial))
    return records


def run_clustering_recovery_experiment(cfg: ExperimentConfig) -> list[TrialRecord]:
    """Exact-recovery frequency of agreement clustering over a batch-size grid.

    The threshold xi comes from the schedule at the config's accuracy
    target. Method names carry the swept batch size as "clustering_R=<r>";
    the error column is 1 - recovered.
    """
    if cfg.kind != "clustering":
        raise ConfigError("config kind must be 'clustering'")
    params = two_stage_schedule(cfg.d, cfg.p, cfg.alpha, cfg.num_workers, cfg.num_tasks)
    if cfg.r_grid is not None:
        grid = cfg.r_grid
    else:
        r = min(params.r, cfg.num_tasks)
        grid = tuple(sorted({0, r // 8, r // 4, r // 2, (3 * r) // 4, r}))
    records: list[TrialRecord] = []
    for gi, r in enumerate(grid):
        if r > cfg.num_tasks:
            raise ConfigError(f"grid point R={r} exceeds num_tasks={cfg.num_tasks}")
        for trial in range(cfg.trials):
            s = derived_seed(cfg.seed, gi, trial)
            model, worker_types = _fresh_model(cfg, s)
            truth_partition = ClusterPartition.from_labels(worker_types)
            _, a1 = stage1_assignment(cfg.num_tasks, cfg.num_workers, r, (s, 3))
            m1 = sample_responses(model, a1, (s, 4))
            partition = cluster_workers(m1, params.xi)
            recovered = partition.matches(truth_partition)
            records.append(
                TrialRecord(
                    trial=trial,
                    method=f"clustering_R={r}",
                    queries_per_task=Fraction(len(a1), cfg.num_tasks),
                    error=Fraction(0 if recovered else 1),
                    recovered=recovered,
                    num_clusters=partition.num_clusters,
                    seed=s,
                )
            )
    return records


def records_to_csv(records: list[TrialRecord], out: IO[str]) -> None:
    """Write records under the fixed header, one row per (trial, method)."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow(
            [
                rec.trial,
                rec.method,
                repr(float(rec.queries_per_task)),
                repr(float(rec.error)),
                "" if rec.recovered is None else int(rec.recovered),
                "" if rec.num_clusters is None else rec.num_clusters,
                rec.seed,
            ]
        )


def aggregate_task_error(records: list[TrialRecord], method: str, num_tasks: int) -> tuple[float, float, float]:
    """Task-level mean error for a method with its Wilson 95% interval."""
    errors = [rec.error for rec in records if rec.method == method]
    if not errors:
        raise ValueError(f"no records for method {method!r}")
    mistakes = float(sum(e * num_tasks for e in errors))
    n = len(errors) * num_tasks
    lo, hi = wilson_interval(mistakes, n)
    return mistakes / n, lo, hi
