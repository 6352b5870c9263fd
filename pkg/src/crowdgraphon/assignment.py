"""Query-set construction: which worker answers which task.

Supports the uniform random design (k workers per task) and the two-stage
design (a batch of calibration tasks answered by every worker, then L
workers per cluster for the remaining tasks), plus exact per-task budget
accounting.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Iterable

import numpy as np

__all__ = [
    "Assignment",
    "TwoStageDesign",
    "InsufficientClusterError",
    "uniform_assignment",
    "stage1_assignment",
    "stage2_assignment",
    "queries_per_task",
    "assignment_to_csv",
]


class InsufficientClusterError(ValueError):
    """A cluster has fewer members than the per-cluster quota L."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Assignment:
    """A duplicate-free set of (task, worker) pairs, stored task-major sorted."""

    num_tasks: int
    num_workers: int
    tasks: np.ndarray
    workers: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.tasks, dtype=np.int64)
        w = np.asarray(self.workers, dtype=np.int64)
        if t.shape != w.shape or t.ndim != 1:
            raise ValueError("tasks and workers must be equal-length 1-d arrays")
        if t.size:
            if t.min() < 0 or t.max() >= self.num_tasks:
                raise ValueError("task index out of range")
            if w.min() < 0 or w.max() >= self.num_workers:
                raise ValueError("worker index out of range")
            key = t * self.num_workers + w
            if np.any(np.diff(key) <= 0):
                raise ValueError("pairs must be task-major sorted without duplicates")
        object.__setattr__(self, "tasks", _readonly(t))
        object.__setattr__(self, "workers", _readonly(w))

    @classmethod
    def from_pairs(cls, num_tasks: int, num_workers: int, pairs: Iterable[tuple[int, int]]) -> "Assignment":
        pairs = sorted(set(pairs))
        t = np.array([p[0] for p in pairs], dtype=np.int64)
        w = np.array([p[1] for p in pairs], dtype=np.int64)
        return cls(num_tasks, num_workers, t, w)

    def __len__(self) -> int:
        return self.tasks.size

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Assignment)
            and self.num_tasks == other.num_tasks
            and self.num_workers == other.num_workers
            and np.array_equal(self.tasks, other.tasks)
            and np.array_equal(self.workers, other.workers)
        )

    def pairs(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in zip(self.tasks, self.workers)}

    def task_degrees(self) -> np.ndarray:
        return np.bincount(self.tasks, minlength=self.num_tasks)

    def worker_loads(self) -> np.ndarray:
        return np.bincount(self.workers, minlength=self.num_workers)


@dataclass(frozen=True)
class TwoStageDesign:
    """Stage-1 task set plus the per-cluster quota used in stage 2."""

    stage1_tasks: tuple[int, ...]
    workers_per_cluster: int

    def __post_init__(self):
        tasks = tuple(int(i) for i in self.stage1_tasks)
        if len(set(tasks)) != len(tasks) or any(i < 0 for i in tasks):
            raise ValueError("stage1_tasks must be distinct nonnegative indices")
        if self.workers_per_cluster < 1:
            raise ValueError("workers_per_cluster must be >= 1")
        object.__setattr__(self, "stage1_tasks", tasks)

    @property
    def num_stage1_tasks(self) -> int:
        return len(self.stage1_tasks)

    def stage2_tasks(self, num_tasks: int) -> np.ndarray:
        """Tasks outside the calibration batch."""
        return np.setdiff1d(np.arange(num_tasks), np.asarray(self.stage1_tasks, dtype=np.int64))


def _sorted_pairs(t: np.ndarray, w: np.ndarray, num_workers: int) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(t * num_workers + w, kind="stable")
    return t[order], w[order]


def uniform_assignment(num_tasks: int, num_workers: int, k: int, seed: int) -> Assignment:
    """Assign each task to k distinct workers chosen uniformly at random,
    independently across tasks."""
    if not (0 <= k <= num_workers):
        raise ValueError(f"k={k} must lie in 0..num_workers={num_workers}")
    if k == 0 or num_tasks == 0:
        empty = np.array([], dtype=np.int64)
        return Assignment(num_tasks, num_workers, empty, empty)
    rng = np.random.default_rng(seed)
    # Per task, the k smallest of W iid uniforms index a uniform k-subset.
    scores = rng.random((num_tasks, num_workers))
    chosen = np.argpartition(scores, k - 1, axis=1)[:, :k]
    chosen.sort(axis=1)
    t = np.repeat(np.arange(num_tasks, dtype=np.int64), k)
    w = chosen.ravel().astype(np.int64)
    return Assignment(num_tasks, num_workers, t, w)


def stage1_assignment(num_tasks: int, num_workers: int, r: int, seed: int) -> tuple[np.ndarray, Assignment]:
    """Pick a uniformly random batch of r tasks and assign all workers to them.

    Returns the sorted stage-1 task indices and the assignment S x [W].
    """
    if not (0 <= r <= num_tasks):
        raise ValueError(f"r={r} must lie in 0..num_tasks={num_tasks}")
    rng = np.random.default_rng(seed)
    s = np.sort(rng.choice(num_tasks, size=r, replace=False)).astype(np.int64)
    t = np.repeat(s, num_workers)
    w = np.tile(np.arange(num_workers, dtype=np.int64), r)
    return s, Assignment(num_tasks, num_workers, t, w)


def stage2_assignment(tasks, partition, l: int, seed: int, *, num_tasks: int) -> Assignment:
    """Assign every given task to l distinct workers from each cluster.

    Per-task degree is exactly l * C. Raises InsufficientClusterError if
    any cluster has fewer than l members.
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    task_arr = np.sort(np.asarray(sorted(set(int(i) for i in tasks)), dtype=np.int64))
    if task_arr.size and (task_arr[0] < 0 or task_arr[-1] >= num_tasks):
        raise ValueError("task index out of range")
    for z, members in enumerate(partition.clusters):
        if members.size < l:
            raise InsufficientClusterError(
                f"cluster {z} has {members.size} workers, fewer than l={l}"
            )
    rng = np.random.default_rng(seed)
    n = task_arr.size
    if n == 0:
        empty = np.array([], dtype=np.int64)
        return Assignment(num_tasks, partition.num_workers, empty, empty)
    t_parts, w_parts = [], []
    for members in partition.clusters:
        scores = rng.random((n, members.size))
        chosen = np.argpartition(scores, l - 1, axis=1)[:, :l]
        t_parts.append(np.repeat(task_arr, l))
        w_parts.append(members[chosen].ravel())
    t = np.concatenate(t_parts)
    w = np.concatenate(w_parts)
    t, w = _sorted_pairs(t, w, partition.num_workers)
    return Assignment(num_tasks, partition.num_workers, t, w)


def queries_per_task(stage1: Assignment, stage2: Assignment, num_tasks: int) -> Fraction:
    """Exact average number of queries per task, (|E1| + |E2|) / T."""
    if num_tasks == 0:
        raise ValueError("num_tasks must be positive")
    if (stage1.num_tasks, stage1.num_workers) != (stage2.num_tasks, stage2.num_workers):
        raise ValueError("assignments must share dimensions")
    return Fraction(len(stage1) + len(stage2), num_tasks)


def assignment_to_csv(assignment: Assignment, out: IO[str]) -> None:
    """Write the sorted pair list as task,worker rows."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["task", "worker"])
    for i, j in zip(assignment.tasks, assignment.workers):
        writer.writerow([int(i), int(j)])
