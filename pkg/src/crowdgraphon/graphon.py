"""Piecewise-constant latent function linking crowdsourcing to matrix estimation.

The unit interval is split into four bands: tasks with +1 answers, tasks
with -1 answers, spammer workers, and hammer workers, with masses governed
by (alpha, beta, sigma2). The induced kernel f on [0,1]^2 takes values in
{-1, 0, +1}, has exact rank 2, and its eigensystem is available in closed
form. This module evaluates f, builds the eigensystem, samples centered
+-1 data matrices from it, and embeds a fully observed crowdsourcing
response matrix into the equivalent symmetric matrix.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import IO

import numpy as np

from .model import ResponseMatrix

__all__ = [
    "GraphonSpec",
    "EigenSystem",
    "GraphonSample",
    "SpectralCheck",
    "build_graphon",
    "eval_f",
    "f_values",
    "f_matrix",
    "eigensystem",
    "verify_spectral",
    "sample_graphon_matrix",
    "embed_crowd_matrix",
    "mse",
    "centered_from_binary",
    "binary_from_centered",
    "sample_to_csv",
    "spec_to_dict",
    "spec_from_dict",
    "spec_to_json",
    "spec_from_json",
]


@dataclass(frozen=True)
class GraphonSpec:
    """Interval construction for the latent function.

    Bands are half-open [lo, hi) except the last, which includes 1. The
    point alpha*beta therefore belongs to the second band and maps to -1
    under the sign rule.
    """

    alpha: float
    beta: float
    sigma2: float

    def __post_init__(self):
        # alpha = 1 is allowed and empties the second band (all answers +1)
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha={self.alpha} must lie in (0, 1]")
        for name, v in (("beta", self.beta), ("sigma2", self.sigma2)):
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name}={v} must lie in (0, 1)")

    @property
    def boundaries(self) -> tuple[float, float, float]:
        """Right endpoints of the first three bands."""
        return (
            self.alpha * self.beta,
            self.beta,
            1.0 - self.sigma2 * (1.0 - self.beta),
        )

    @property
    def intervals(self) -> tuple[tuple[float, float], ...]:
        b1, b2, b3 = self.boundaries
        return ((0.0, b1), (b1, b2), (b2, b3), (b3, 1.0))

    @property
    def interval_lengths(self) -> np.ndarray:
        b1, b2, b3 = self.boundaries
        return np.array([b1, b2 - b1, b3 - b2, 1.0 - b3])

    def interval_of(self, theta) -> np.ndarray:
        """Band index 0..3 for each coordinate; vectorized."""
        t = np.asarray(theta, dtype=float)
        if np.any(t < 0.0) or np.any(t > 1.0):
            raise ValueError("coordinates must lie in [0, 1]")
        return np.searchsorted(np.asarray(self.boundaries), t, side="right")


def build_graphon(alpha: float, beta: float, sigma2: float) -> GraphonSpec:
    """Spec with interval boundaries alpha*beta, beta, 1 - sigma2*(1-beta)."""
    return GraphonSpec(alpha=alpha, beta=beta, sigma2=sigma2)


def _task_sign(spec: GraphonSpec, band: np.ndarray) -> np.ndarray:
    # +1 on the first band, -1 on the second, 0 off the task bands
    return np.where(band == 0, 1, np.where(band == 1, -1, 0))


def f_values(spec: GraphonSpec, x, y) -> np.ndarray:
    """Elementwise f(x, y); symmetric, values in {-1, 0, +1}."""
    bx = spec.interval_of(x)
    by = spec.interval_of(y)
    sx = _task_sign(spec, bx)
    sy = _task_sign(spec, by)
    out = np.where((bx <= 1) & (by == 3), sx, 0)
    out = np.where((by <= 1) & (bx == 3), sy, out)
    return out


def eval_f(spec: GraphonSpec, x: float, y: float) -> int:
    """f at a single point."""
    return int(f_values(spec, np.asarray([x]), np.asarray([y]))[0])


def f_matrix(spec: GraphonSpec, thetas) -> np.ndarray:
    """Kernel matrix [f(theta_i, theta_j)] for a coordinate vector."""
    t = np.asarray(thetas, dtype=float)
    return f_values(spec, t[:, None], t[None, :])


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Closed-form rank-2 spectrum of the kernel.

    q1_values / q2_values hold the constant eigenfunction value on each of
    the four bands; amplitude is the supremum of |q_k| over [0,1].
    """

    spec: GraphonSpec
    lambda1: float
    lambda2: float
    q1_values: np.ndarray
    q2_values: np.ndarray
    amplitude: float

    def q1_at(self, theta) -> np.ndarray:
        return self.q1_values[self.spec.interval_of(theta)]

    def q2_at(self, theta) -> np.ndarray:
        return self.q2_values[self.spec.interval_of(theta)]


def eigensystem(spec: GraphonSpec) -> EigenSystem:
    """Eigenvalues +-sqrt(sigma2 beta (1-beta)) with their band-wise constant
    eigenfunctions, and the amplitude supremum (2 min(beta, sigma2(1-beta)))^(-1/2)."""
    product = spec.sigma2 * spec.beta * (1.0 - spec.beta)
    if product <= 0.0:
        raise ValueError("degenerate spectrum: sigma2 * beta * (1 - beta) must be positive")
    lam = math.sqrt(product)
    task_amp = 1.0 / math.sqrt(2.0 * spec.beta)
    hammer_amp = 1.0 / math.sqrt(2.0 * spec.sigma2 * (1.0 - spec.beta))
    q1 = np.array([task_amp, -task_amp, 0.0, hammer_amp])
    q2 = np.array([task_amp, -task_amp, 0.0, -hammer_amp])
    b = 1.0 / math.sqrt(2.0 * min(spec.beta, spec.sigma2 * (1.0 - spec.beta)))
    return EigenSystem(spec=spec, lambda1=lam, lambda2=-lam, q1_values=q1, q2_values=q2, amplitude=b)


@dataclass(frozen=True)
class SpectralCheck:
    """Residuals of the spectral identity and the exact Gram integrals."""

    max_pointwise_residual: float
    gram_residual: float


def verify_spectral(spec: GraphonSpec, grid_points: int = 201) -> SpectralCheck:
    """Check f = lambda1 q1 q1' + lambda2 q2 q2' on a midpoint grid and the
    orthonormality of q1, q2 under exact piecewise-constant integration."""
    es = eigensystem(spec)
    grid = (np.arange(grid_points) + 0.5) / grid_points
    q1 = es.q1_at(grid)
    q2 = es.q2_at(grid)
    reconstructed = es.lambda1 * np.outer(q1, q1) + es.lambda2 * np.outer(q2, q2)
    f = f_matrix(spec, grid)
    max_pointwise = float(np.max(np.abs(f - reconstructed)))
    lengths = spec.interval_lengths
    g11 = float(np.sum(lengths * es.q1_values**2))
    g22 = float(np.sum(lengths * es.q2_values**2))
    g12 = float(np.sum(lengths * es.q1_values * es.q2_values))
    gram = max(abs(g11 - 1.0), abs(g22 - 1.0), abs(g12))
    return SpectralCheck(max_pointwise_residual=max_pointwise, gram_residual=gram)


@dataclass(frozen=True, eq=False)
class GraphonSample:
    """Symmetric partially observed +-1 matrix with its latent coordinates.

    Observed entries are stored once with row <= col; lookups accept either
    orientation.
    """

    n: int
    theta: np.ndarray
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        r = np.asarray(self.rows, dtype=np.int64)
        c = np.asarray(self.cols, dtype=np.int64)
        v = np.asarray(self.values, dtype=np.int8)
        if theta.shape != (self.n,):
            raise ValueError("theta must have length n")
        if np.any(theta < 0.0) or np.any(theta > 1.0):
            raise ValueError("theta entries must lie in [0, 1]")
        if not (r.shape == c.shape == v.shape) or r.ndim != 1:
            raise ValueError("rows, cols, values must be equal-length 1-d arrays")
        if r.size:
            if r.min() < 0 or c.max() >= self.n:
                raise ValueError("index out of range")
            if np.any(r > c):
                raise ValueError("entries must be stored with row <= col")
            if not np.all(np.abs(v) == 1):
                raise ValueError("values must be exactly -1 or +1")
            if np.any(np.diff(r * self.n + c) <= 0):
                raise ValueError("entries must be sorted row-major without duplicates")
        for name, arr in (("theta", theta), ("rows", r), ("cols", c), ("values", v)):
            arr = np.array(arr, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.rows.size

    def get(self, i: int, j: int) -> int:
        a, b = (i, j) if i <= j else (j, i)
        key = a * self.n + b
        keys = self.rows * self.n + self.cols
        pos = np.searchsorted(keys, key)
        if pos == keys.size or keys[pos] != key:
            raise KeyError(f"entry ({i}, {j}) not observed")
        return int(self.values[pos])

    def entries(self):
        for i, j, v in zip(self.rows, self.cols, self.values):
            yield (int(i), int(j)), int(v)

    def dense(self, fill: float = 0.0) -> np.ndarray:
        out = np.full((self.n, self.n), fill, dtype=float)
        out[self.rows, self.cols] = self.values
        out[self.cols, self.rows] = self.values
        return out


def sample_graphon_matrix(spec: GraphonSpec, n: int, density: float, seed: int) -> GraphonSample:
    """Draw latent coordinates uniformly, observe each unordered pair
    (including the diagonal) with the given density, and sample each
    observed entry as +1 with probability (1 + f)/2."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0.0 <= density <= 1.0):
        raise ValueError("density must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    theta = rng.random(n)
    iu, ju = np.triu_indices(n)
    keep = rng.random(iu.size) < density
    iu, ju = iu[keep], ju[keep]
    f = f_values(spec, theta[iu], theta[ju])
    plus = rng.random(iu.size) < (1.0 + f) / 2.0
    values = np.where(plus, 1, -1).astype(np.int8)
    return GraphonSample(n=n, theta=theta, rows=iu, cols=ju, values=values)


def embed_crowd_matrix(m: ResponseMatrix, seed: int) -> np.ndarray:
    """Symmetric (T+W) x (T+W) +-1 matrix whose off-diagonal blocks are the
    fully observed response matrix and its transpose; the diagonal blocks
    are symmetric fair-coin fill."""
    t, w = m.num_tasks, m.num_workers
    if len(m) != t * w:
        raise ValueError("embedding requires a fully observed response matrix")
    dense_m = m.values.reshape(t, w)
    rng = np.random.default_rng(seed)

    def coin_block(size: int) -> np.ndarray:
        block = np.zeros((size, size), dtype=np.int8)
        iu, ju = np.triu_indices(size)
        vals = (rng.integers(0, 2, iu.size) * 2 - 1).astype(np.int8)
        block[iu, ju] = vals
        block[ju, iu] = vals
        return block

    q = coin_block(t)
    q_prime = coin_block(w)
    out = np.empty((t + w, t + w), dtype=np.int8)
    out[:t, :t] = q
    out[:t, t:] = dense_m
    out[t:, :t] = dense_m.T
    out[t:, t:] = q_prime
    return out


def mse(y_hat: np.ndarray, e_y: np.ndarray) -> float:
    """Mean squared deviation over all entries of equally shaped matrices."""
    a = np.asarray(y_hat, dtype=float)
    b = np.asarray(e_y, dtype=float)
    if a.shape != b.shape:
        raise ValueError("shape mismatch")
    return float(np.mean((a - b) ** 2))


def centered_from_binary(y01: np.ndarray) -> np.ndarray:
    """Map {0,1} data to the centered {-1,+1} convention."""
    return 2 * np.asarray(y01) - 1


def binary_from_centered(ypm: np.ndarray) -> np.ndarray:
    """Map centered {-1,+1} data back to {0,1}."""
    return (np.asarray(ypm) + 1) // 2


def sample_to_csv(sample: GraphonSample, out: IO[str]) -> None:
    """Write the observed entries as i,j,value rows (canonical orientation)."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["i", "j", "value"])
    for (i, j), v in sample.entries():
        writer.writerow([i, j, v])


def spec_to_dict(spec: GraphonSpec) -> dict:
    return {"alpha": spec.alpha, "beta": spec.beta, "sigma2": spec.sigma2}


def spec_from_dict(data: dict) -> GraphonSpec:
    return GraphonSpec(float(data["alpha"]), float(data["beta"]), float(data["sigma2"]))


def spec_to_json(spec: GraphonSpec) -> str:
    return json.dumps(spec_to_dict(spec), sort_keys=True)


def spec_from_json(text: str) -> GraphonSpec:
    return spec_from_dict(json.loads(text))
