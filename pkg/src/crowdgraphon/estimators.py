"""Inference procedures for binary task answers.

Includes the per-task baselines (majority vote, likelihood-weighted oracle
vote), the two-stage procedure (agreement clustering of workers followed by
a best-cluster vote), plug-in estimators driven by an externally supplied
estimate of E[M], and the error metric.

Sign ties are broken by a fair coin drawn from an explicit seed; the coin
for task i is generated from (tie_seed, i) so per-task calls and the
vectorized batch paths agree exactly. Argmax ties (clusters, columns) go to
the lowest index.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Iterable

import numpy as np

from .model import ResponseMatrix, TrueAnswers

__all__ = [
    "ClusterPartition",
    "majority_vote",
    "majority_vote_all",
    "ml_oracle",
    "cluster_workers",
    "two_stage_estimate",
    "two_stage_estimate_all",
    "plugin_column_sum",
    "plugin_max_entry",
    "error_rate",
    "zero_imputed_matrix",
    "estimates_to_csv",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ClusterPartition:
    """Disjoint, covering, nonempty clusters of worker indices."""

    num_workers: int
    clusters: tuple[np.ndarray, ...]

    def __post_init__(self):
        clusters = tuple(np.sort(np.asarray(c, dtype=np.int64)) for c in self.clusters)
        labels = np.full(self.num_workers, -1, dtype=np.int64)
        total = 0
        for z, members in enumerate(clusters):
            if members.size == 0:
                raise ValueError("empty cluster")
            if members.min() < 0 or members.max() >= self.num_workers:
                raise ValueError("worker index out of range")
            if np.any(labels[members] != -1):
                raise ValueError("clusters must be disjoint")
            labels[members] = z
            total += members.size
        if total != self.num_workers:
            raise ValueError("clusters must cover every worker")
        object.__setattr__(self, "clusters", tuple(_readonly(c) for c in clusters))
        object.__setattr__(self, "labels", _readonly(labels))

    @classmethod
    def from_labels(cls, labels) -> "ClusterPartition":
        """Clusters ordered by label value; labels without members are skipped."""
        labels = np.asarray(labels, dtype=np.int64)
        clusters = [np.flatnonzero(labels == z) for z in np.unique(labels)]
        return cls(labels.size, tuple(clusters))

    @classmethod
    def singletons(cls, num_workers: int) -> "ClusterPartition":
        return cls(num_workers, tuple(np.array([j]) for j in range(num_workers)))

    @property
    def num_clusters(self) -> int:
        return len(self.clusters)

    def matches(self, other: "ClusterPartition") -> bool:
        """Equality up to relabeling of clusters."""
        mine = {frozenset(int(j) for j in c) for c in self.clusters}
        theirs = {frozenset(int(j) for j in c) for c in other.clusters}
        return self.num_workers == other.num_workers and mine == theirs

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ClusterPartition)
            and self.num_workers == other.num_workers
            and len(self.clusters) == len(other.clusters)
            and all(np.array_equal(a, b) for a, b in zip(self.clusters, other.clusters))
        )


def _tie_coin(tie_seed: int, task: int) -> int:
    # Keyed per task so batch and per-task code paths draw the same coin.
    return 1 if np.random.default_rng((int(tie_seed), int(task))).random() < 0.5 else -1


def _sign_or_coin(total: float, tie_seed: int, task: int) -> int:
    if total > 0:
        return 1
    if total < 0:
        return -1
    return _tie_coin(tie_seed, task)


def majority_vote(m: ResponseMatrix, i: int, tie_seed: int = 0) -> int:
    """Sign of the response sum for task i; exact ties fall to a fair coin."""
    _, values = m.responses_for_task(i)
    if values.size == 0:
        raise ValueError(f"task {i} has no responses")
    return _sign_or_coin(int(values.sum(dtype=np.int64)), tie_seed, i)


def majority_vote_all(m: ResponseMatrix, tie_seed: int = 0) -> np.ndarray:
    """majority_vote for every task; requires all tasks to have responses."""
    counts = np.bincount(m.tasks, minlength=m.num_tasks)
    if np.any(counts == 0):
        missing = int(np.flatnonzero(counts == 0)[0])
        raise ValueError(f"task {missing} has no responses")
    sums = np.bincount(m.tasks, weights=m.values, minlength=m.num_tasks)
    out = np.sign(sums).astype(np.int8)
    for i in np.flatnonzero(out == 0):
        out[i] = _tie_coin(tie_seed, int(i))
    return out


def ml_oracle(m: ResponseMatrix, i: int, skills_row: np.ndarray, tie_seed: int = 0) -> int:
    """Likelihood-weighted vote given the task's true skill row.

    Weights are log(F/(1-F)). Workers with F exactly 0 or 1 carry infinite
    weight: their sign-corrected responses alone decide the estimate.
    """
    workers, values = m.responses_for_task(i)
    if values.size == 0:
        raise ValueError(f"task {i} has no responses")
    f = np.asarray(skills_row, dtype=float)[workers]
    if np.any(f < 0) or np.any(f > 1):
        raise ValueError("skills must lie in [0, 1]")
    sure = (f == 0.0) | (f == 1.0)
    if np.any(sure):
        corrected = np.where(f[sure] == 1.0, values[sure], -values[sure])
        return _sign_or_coin(int(corrected.sum(dtype=np.int64)), tie_seed, i)
    weights = np.log(f / (1.0 - f))
    return _sign_or_coin(float(weights @ values), tie_seed, i)


def _dense_stage1(m: ResponseMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Rows of a calibration response set as a dense (R, W) +-1 matrix."""
    counts = np.bincount(m.tasks, minlength=m.num_tasks)
    present = np.flatnonzero(counts > 0)
    if np.any(counts[present] != m.num_workers):
        bad = int(present[np.argmax(counts[present] != m.num_workers)])
        raise ValueError(f"task {bad} is missing responses from some workers")
    # Entries are task-major and worker-sorted, so rows reshape directly.
    dense = m.values.reshape(present.size, m.num_workers).astype(np.float64)
    return present, dense


def cluster_workers(m_s: ResponseMatrix, xi: float) -> ClusterPartition:
    """Greedy agreement clustering of workers from calibration responses.

    Workers are processed in index order. Worker j joins the lowest-index
    existing cluster in which its fraction of matching responses strictly
    exceeds xi against every current member, and opens a new singleton
    cluster otherwise. With no calibration tasks at all, every worker is a
    singleton.
    """
    if not (0.5 < xi < 1.0):
        raise ValueError("xi must lie in (1/2, 1)")
    w = m_s.num_workers
    if len(m_s) == 0:
        return ClusterPartition.singletons(w)
    _, dense = _dense_stage1(m_s)
    r = dense.shape[0]
    # responses match iff their product is +1, so counts come from one matmul
    agreement = (r + dense.T @ dense) / (2.0 * r)
    clusters: list[list[int]] = []
    for j in range(w):
        for members in clusters:
            if np.all(agreement[j, members] > xi):
                members.append(j)
                break
        else:
            clusters.append([j])
    return ClusterPartition(w, tuple(np.array(c) for c in clusters))


def _cluster_sums_for_task(m: ResponseMatrix, partition: ClusterPartition, i: int) -> np.ndarray:
    workers, values = m.responses_for_task(i)
    if values.size == 0:
        raise ValueError(f"task {i} has no responses")
    labels = partition.labels[workers]
    return np.bincount(labels, weights=values, minlength=partition.num_clusters)


def two_stage_estimate(m: ResponseMatrix, partition: ClusterPartition, i: int, tie_seed: int = 0) -> int:
    """Vote within the cluster whose response sum has the largest magnitude.

    The winning cluster is the lowest index among magnitude ties; a zero
    winning sum falls to the fair coin.
    """
    sums = _cluster_sums_for_task(m, partition, i)
    z_star = int(np.argmax(np.abs(sums)))
    return _sign_or_coin(float(sums[z_star]), tie_seed, i)


def two_stage_estimate_all(m: ResponseMatrix, partition: ClusterPartition, tie_seed: int = 0) -> np.ndarray:
    """two_stage_estimate for every task; requires all tasks to have responses."""
    counts = np.bincount(m.tasks, minlength=m.num_tasks)
    if np.any(counts == 0):
        missing = int(np.flatnonzero(counts == 0)[0])
        raise ValueError(f"task {missing} has no responses")
    labels = partition.labels[m.workers]
    c = partition.num_clusters
    flat = labels * m.num_tasks + m.tasks
    sums = np.bincount(flat, weights=m.values, minlength=c * m.num_tasks)
    sums = sums.reshape(c, m.num_tasks)
    z_star = np.argmax(np.abs(sums), axis=0)
    winning = sums[z_star, np.arange(m.num_tasks)]
    out = np.sign(winning).astype(np.int8)
    for i in np.flatnonzero(out == 0):
        out[i] = _tie_coin(tie_seed, int(i))
    return out


def plugin_column_sum(mhat: np.ndarray, i: int, tie_seed: int = 0) -> int:
    """Sign of row i's sum of the matrix estimate; tie falls to the coin."""
    return _sign_or_coin(float(np.asarray(mhat)[i].sum()), tie_seed, i)


def plugin_max_entry(mhat: np.ndarray, i: int, tie_seed: int = 0) -> int:
    """Sign of row i's largest-magnitude entry.

    Magnitude ties go to the lowest column; an exactly zero selected entry
    falls to the coin.
    """
    row = np.asarray(mhat)[i]
    j_star = int(np.argmax(np.abs(row)))
    return _sign_or_coin(float(row[j_star]), tie_seed, i)


def error_rate(estimates, truths) -> Fraction:
    """Exact fraction of mismatched answers."""
    a_hat = estimates.values if isinstance(estimates, TrueAnswers) else np.asarray(estimates)
    a = truths.values if isinstance(truths, TrueAnswers) else np.asarray(truths)
    if a_hat.shape != a.shape:
        raise ValueError("estimate and truth vectors must have equal length")
    return Fraction(int(np.count_nonzero(a_hat != a)), int(a.size))


def zero_imputed_matrix(m: ResponseMatrix, density: float) -> np.ndarray:
    """Baseline dense estimate of E[M]: observed entries copied, missing
    entries zero, everything scaled by 1/density."""
    if not (0.0 < density <= 1.0):
        raise ValueError("density must lie in (0, 1]")
    dense = np.zeros((m.num_tasks, m.num_workers))
    dense[m.tasks, m.workers] = m.values
    return dense / density


def estimates_to_csv(out: IO[str], estimates: Iterable[int], truths: Iterable[int]) -> None:
    """Write task,estimate,truth,correct rows."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["task", "estimate", "truth", "correct"])
    for i, (e, a) in enumerate(zip(estimates, truths)):
        writer.writerow([i, int(e), int(a), int(e == a)])
