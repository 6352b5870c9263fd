"""Generative models for binary crowdsourcing tasks.

A model pairs a skill matrix F (probability that worker j answers task i
correctly) with the true answer vector a in {-1,+1}^T. Observed responses
are M_ij = a_i with probability F_ij and -a_i otherwise, independently
across all queried (i, j) pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TrueAnswers",
    "DawidSkene",
    "Difficulty",
    "Monotone",
    "DType",
    "SpammerHammer",
    "CrowdModel",
    "ResponseMatrix",
    "skill",
    "skill_matrix",
    "expected_response",
    "expected_response_matrix",
    "sample_responses",
    "uniform_types",
    "bernoulli_answers",
    "bernoulli_hammers",
    "model_to_dict",
    "model_from_dict",
    "model_to_json",
    "model_from_json",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TrueAnswers:
    """True answer vector with entries in {-1, +1}."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.int8)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("answers must be a nonempty 1-d vector")
        if not np.all(np.abs(v) == 1):
            raise ValueError("answers must be exactly -1 or +1")
        object.__setattr__(self, "values", _readonly(v))

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        return isinstance(other, TrueAnswers) and np.array_equal(self.values, other.values)


def _check_prob(a: np.ndarray, name: str, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.size < 1:
        raise ValueError(f"{name} must be a nonempty 1-d vector")
    if np.any(a < lo) or np.any(a > hi):
        raise ValueError(f"{name} entries must lie in [{lo}, {hi}]")
    return a


@dataclass(frozen=True, eq=False)
class DawidSkene:
    """Homogeneous tasks: F_ij = w_j for a per-worker reliability w_j."""

    reliabilities: np.ndarray

    def __post_init__(self):
        w = _check_prob(self.reliabilities, "reliabilities")
        object.__setattr__(self, "reliabilities", _readonly(w))

    @property
    def num_workers(self) -> int:
        return self.reliabilities.size

    def num_tasks(self) -> int | None:
        return None

    def skills(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        return self.reliabilities[j] * np.ones_like(np.asarray(i), dtype=float)


@dataclass(frozen=True, eq=False)
class Difficulty:
    """Task difficulty t_i in [1/2, 1] and worker reliability w_j:
    F_ij = t_i w_j + (1 - t_i)(1 - w_j)."""

    difficulties: np.ndarray
    reliabilities: np.ndarray

    def __post_init__(self):
        t = _check_prob(self.difficulties, "difficulties", lo=0.5)
        w = _check_prob(self.reliabilities, "reliabilities")
        object.__setattr__(self, "difficulties", _readonly(t))
        object.__setattr__(self, "reliabilities", _readonly(w))

    @property
    def num_workers(self) -> int:
        return self.reliabilities.size

    def num_tasks(self) -> int | None:
        return self.difficulties.size

    def skills(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        t = self.difficulties[i]
        w = self.reliabilities[j]
        return t * w + (1.0 - t) * (1.0 - w)


@dataclass(frozen=True, eq=False)
class Monotone:
    """Monotone skill model: F_ij = w_j (1 - t_i) + t_i / 2."""

    difficulties: np.ndarray
    reliabilities: np.ndarray

    def __post_init__(self):
        t = _check_prob(self.difficulties, "difficulties")
        w = _check_prob(self.reliabilities, "reliabilities")
        object.__setattr__(self, "difficulties", _readonly(t))
        object.__setattr__(self, "reliabilities", _readonly(w))

    @property
    def num_workers(self) -> int:
        return self.reliabilities.size

    def num_tasks(self) -> int | None:
        return self.difficulties.size

    def skills(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        t = self.difficulties[i]
        w = self.reliabilities[j]
        return w * (1.0 - t) + 0.5 * t


@dataclass(frozen=True, eq=False)
class DType:
    """Specialization model with d task/worker types: F_ij = p when the
    task and worker types match, 1/2 otherwise."""

    d: int
    p: float
    task_types: np.ndarray
    worker_types: np.ndarray

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be a positive integer")
        if not (0.5 <= self.p <= 1.0):
            raise ValueError("p must lie in [1/2, 1]")
        tt = np.asarray(self.task_types, dtype=np.int64)
        wt = np.asarray(self.worker_types, dtype=np.int64)
        for name, types in (("task_types", tt), ("worker_types", wt)):
            if types.ndim != 1 or types.size < 1:
                raise ValueError(f"{name} must be a nonempty 1-d vector")
            if np.any(types < 0) or np.any(types >= self.d):
                raise ValueError(f"{name} entries must lie in 0..d-1")
        object.__setattr__(self, "task_types", _readonly(tt))
        object.__setattr__(self, "worker_types", _readonly(wt))

    @property
    def num_workers(self) -> int:
        return self.worker_types.size

    def num_tasks(self) -> int | None:
        return self.task_types.size

    def skills(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        match = self.task_types[i] == self.worker_types[j]
        return np.where(match, self.p, 0.5)


@dataclass(frozen=True, eq=False)
class SpammerHammer:
    """Each worker is a hammer (F = 1) or a spammer (F = 1/2).

    sigma2 records the hammer frequency used to draw the worker population;
    the realized hammer indicator vector is explicit.
    """

    sigma2: float
    hammers: np.ndarray

    def __post_init__(self):
        if not (0.0 <= self.sigma2 <= 1.0):
            raise ValueError("sigma2 must lie in [0, 1]")
        h = np.asarray(self.hammers, dtype=bool)
        if h.ndim != 1 or h.size < 1:
            raise ValueError("hammers must be a nonempty 1-d vector")
        object.__setattr__(self, "hammers", _readonly(h))

    @property
    def num_workers(self) -> int:
        return self.hammers.size

    def num_tasks(self) -> int | None:
        return None

    def skills(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        return np.where(self.hammers[j], 1.0, 0.5) * np.ones_like(np.asarray(i), dtype=float)


Variant = DawidSkene | Difficulty | Monotone | DType | SpammerHammer


@dataclass(frozen=True, eq=False)
class CrowdModel:
    """A skill-matrix variant together with the true answers.

    Immutable after construction; sampling takes explicit seeds, so one
    model instance can be shared across concurrent trials.
    """

    variant: Variant
    answers: TrueAnswers

    def __post_init__(self):
        vt = self.variant.num_tasks()
        if vt is not None and vt != len(self.answers):
            raise ValueError(
                f"variant defines {vt} tasks but answers has length {len(self.answers)}"
            )

    @property
    def num_tasks(self) -> int:
        return len(self.answers)

    @property
    def num_workers(self) -> int:
        return self.variant.num_workers

    def _check_index(self, i: int, j: int) -> None:
        if not (0 <= i < self.num_tasks):
            raise IndexError(f"task index {i} out of range [0, {self.num_tasks})")
        if not (0 <= j < self.num_workers):
            raise IndexError(f"worker index {j} out of range [0, {self.num_workers})")


@dataclass(frozen=True, eq=False)
class ResponseMatrix:
    """Sparse set of observed responses M_ij in {-1,+1}.

    Entries are stored task-major sorted, which fixes the order in which
    samplers consume random draws and makes equal seeds reproduce equal
    matrices bit for bit.
    """

    num_tasks: int
    num_workers: int
    tasks: np.ndarray
    workers: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.tasks, dtype=np.int64)
        w = np.asarray(self.workers, dtype=np.int64)
        v = np.asarray(self.values, dtype=np.int8)
        if not (t.shape == w.shape == v.shape) or t.ndim != 1:
            raise ValueError("tasks, workers, values must be equal-length 1-d arrays")
        if t.size:
            if t.min() < 0 or t.max() >= self.num_tasks:
                raise ValueError("task index out of range")
            if w.min() < 0 or w.max() >= self.num_workers:
                raise ValueError("worker index out of range")
            if not np.all(np.abs(v) == 1):
                raise ValueError("response values must be exactly -1 or +1")
            key = t * self.num_workers + w
            if np.any(np.diff(key) <= 0):
                raise ValueError("entries must be task-major sorted without duplicates")
        object.__setattr__(self, "tasks", _readonly(t))
        object.__setattr__(self, "workers", _readonly(w))
        object.__setattr__(self, "values", _readonly(v))
        row_ptr = np.zeros(self.num_tasks + 1, dtype=np.int64)
        np.cumsum(np.bincount(t, minlength=self.num_tasks), out=row_ptr[1:])
        row_ptr.setflags(write=False)
        object.__setattr__(self, "_row_ptr", row_ptr)

    @classmethod
    def from_entries(cls, num_tasks: int, num_workers: int, entries: dict) -> "ResponseMatrix":
        """Build from a {(task, worker): value} mapping."""
        if entries:
            keys = sorted(entries)
            t = np.array([k[0] for k in keys])
            w = np.array([k[1] for k in keys])
            v = np.array([entries[k] for k in keys])
        else:
            t = w = v = np.array([], dtype=np.int64)
        return cls(num_tasks, num_workers, t, w, v)

    def __len__(self) -> int:
        return self.tasks.size

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ResponseMatrix)
            and self.num_tasks == other.num_tasks
            and self.num_workers == other.num_workers
            and np.array_equal(self.tasks, other.tasks)
            and np.array_equal(self.workers, other.workers)
            and np.array_equal(self.values, other.values)
        )

    def responses_for_task(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Workers and values observed for task i, worker-sorted."""
        if not (0 <= i < self.num_tasks):
            raise IndexError(f"task index {i} out of range")
        lo, hi = self._row_ptr[i], self._row_ptr[i + 1]
        return self.workers[lo:hi], self.values[lo:hi]

    def get(self, i: int, j: int) -> int:
        workers, values = self.responses_for_task(i)
        pos = np.searchsorted(workers, j)
        if pos == workers.size or workers[pos] != j:
            raise KeyError(f"no response recorded for ({i}, {j})")
        return int(values[pos])

    def items(self):
        for i, j, v in zip(self.tasks, self.workers, self.values):
            yield (int(i), int(j)), int(v)

    def merge(self, other: "ResponseMatrix") -> "ResponseMatrix":
        """Union of two response sets over the same dimensions (disjoint keys)."""
        if (self.num_tasks, self.num_workers) != (other.num_tasks, other.num_workers):
            raise ValueError("dimension mismatch")
        t = np.concatenate([self.tasks, other.tasks])
        w = np.concatenate([self.workers, other.workers])
        v = np.concatenate([self.values, other.values])
        order = np.argsort(t * self.num_workers + w, kind="stable")
        return ResponseMatrix(self.num_tasks, self.num_workers, t[order], w[order], v[order])


def skill(model: CrowdModel, i: int, j: int) -> float:
    """F_ij for the model's variant; deterministic."""
    model._check_index(i, j)
    return float(model.variant.skills(np.asarray([i]), np.asarray([j]))[0])


def skill_matrix(model: CrowdModel) -> np.ndarray:
    """Dense (T, W) matrix of F_ij values."""
    ii, jj = np.indices((model.num_tasks, model.num_workers))
    return model.variant.skills(ii.ravel(), jj.ravel()).reshape(ii.shape)


def expected_response(model: CrowdModel, i: int, j: int) -> float:
    """E[M_ij] = a_i (2 F_ij - 1)."""
    model._check_index(i, j)
    return float(model.answers.values[i]) * (2.0 * skill(model, i, j) - 1.0)


def expected_response_matrix(model: CrowdModel) -> np.ndarray:
    """Dense (T, W) matrix of E[M_ij]."""
    return model.answers.values[:, None] * (2.0 * skill_matrix(model) - 1.0)


def sample_responses(model: CrowdModel, assignment, seed: int) -> ResponseMatrix:
    """Draw one response per assigned (task, worker) pair.

    Each response is a_i with probability F_ij and -a_i otherwise,
    independently. Draws are consumed in the assignment's canonical
    task-major order, so a fixed (assignment, seed) pair reproduces the
    same matrix exactly.
    """
    t, w = assignment.tasks, assignment.workers
    if assignment.num_tasks > model.num_tasks or assignment.num_workers > model.num_workers:
        raise IndexError("assignment dimensions exceed the model's")
    f = model.variant.skills(t, w)
    rng = np.random.default_rng(seed)
    correct = rng.random(t.size) < f
    a = model.answers.values[t]
    v = np.where(correct, a, -a).astype(np.int8)
    return ResponseMatrix(assignment.num_tasks, assignment.num_workers, t, w, v)


def uniform_types(count: int, d: int, seed: int) -> np.ndarray:
    """count type labels drawn uniformly from 0..d-1."""
    if d < 1:
        raise ValueError("d must be positive")
    return np.random.default_rng(seed).integers(0, d, size=count)


def bernoulli_answers(count: int, alpha: float, seed: int) -> TrueAnswers:
    """Answer vector with +1 entries drawn independently with probability alpha."""
    if not (0.0 <= alpha <= 1.0):
        raise ValueError("alpha must lie in [0, 1]")
    plus = np.random.default_rng(seed).random(count) < alpha
    return TrueAnswers(np.where(plus, 1, -1))


def bernoulli_hammers(count: int, sigma2: float, seed: int) -> np.ndarray:
    """Hammer indicator vector where each worker is a hammer with probability sigma2."""
    if not (0.0 <= sigma2 <= 1.0):
        raise ValueError("sigma2 must lie in [0, 1]")
    return np.random.default_rng(seed).random(count) < sigma2


_VARIANT_TAGS = {
    DawidSkene: "dawid_skene",
    Difficulty: "difficulty",
    Monotone: "monotone",
    DType: "d_type",
    SpammerHammer: "spammer_hammer",
}


def model_to_dict(model: CrowdModel) -> dict:
    v = model.variant
    out: dict = {"variant": _VARIANT_TAGS[type(v)], "answers": model.answers.values.tolist()}
    if isinstance(v, DawidSkene):
        out["reliabilities"] = v.reliabilities.tolist()
    elif isinstance(v, (Difficulty, Monotone)):
        out["difficulties"] = v.difficulties.tolist()
        out["reliabilities"] = v.reliabilities.tolist()
    elif isinstance(v, DType):
        out["d"] = v.d
        out["p"] = v.p
        out["task_types"] = v.task_types.tolist()
        out["worker_types"] = v.worker_types.tolist()
    elif isinstance(v, SpammerHammer):
        out["sigma2"] = v.sigma2
        out["hammers"] = [bool(h) for h in v.hammers]
    return out


def model_from_dict(data: dict) -> CrowdModel:
    tag = data["variant"]
    answers = TrueAnswers(np.asarray(data["answers"]))
    if tag == "dawid_skene":
        variant: Variant = DawidSkene(np.asarray(data["reliabilities"]))
    elif tag == "difficulty":
        variant = Difficulty(np.asarray(data["difficulties"]), np.asarray(data["reliabilities"]))
    elif tag == "monotone":
        variant = Monotone(np.asarray(data["difficulties"]), np.asarray(data["reliabilities"]))
    elif tag == "d_type":
        variant = DType(
            int(data["d"]),
            float(data["p"]),
            np.asarray(data["task_types"]),
            np.asarray(data["worker_types"]),
        )
    elif tag == "spammer_hammer":
        variant = SpammerHammer(float(data["sigma2"]), np.asarray(data["hammers"]))
    else:
        raise ValueError(f"unknown variant tag {tag!r}")
    return CrowdModel(variant, answers)


def model_to_json(model: CrowdModel) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True)


def model_from_json(text: str) -> CrowdModel:
    return model_from_dict(json.loads(text))
