"""Closed-form bound and parameter calculators.

Pure, stateless evaluations of the guarantees the simulators check:
the majority-vote concentration bound, the two-stage parameter schedule,
and the spammer-hammer / spectral minimax lower bounds.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

__all__ = [
    "TwoStageSchedule",
    "BoundReport",
    "mv_chernoff_bound",
    "mv_queries_needed",
    "two_stage_schedule",
    "spammer_hammer_lower_bounds",
    "amplitude_lower_bounds",
    "eigenvalue_lower_bounds",
    "same_type_match_prob",
    "clustering_recovery_bound",
    "cluster_undersize_bound",
]


@dataclass(frozen=True)
class TwoStageSchedule:
    """Parameter schedule for the two-stage design at target accuracy alpha.

    Integer fields are ceilings of the real-valued formulas (kept alongside);
    budget is the per-task query budget 16 d / (2p-1)^2 * ln(6 d / alpha).
    """

    xi: float
    r: int
    l: int
    w_min: int
    budget: float
    r_real: float
    l_real: float
    w_min_real: float
    ld_term: float
    wr_over_t_term: float
    w_ok: bool
    t_ok: bool

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BoundReport:
    """An evaluated lower bound pair with the inputs that produced it."""

    inputs: dict
    probability_lower_bound: float
    mse_lower_bound: float

    def __post_init__(self):
        for name, v in (
            ("probability_lower_bound", self.probability_lower_bound),
            ("mse_lower_bound", self.mse_lower_bound),
        ):
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name}={v} outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "inputs": dict(self.inputs),
            "probability_lower_bound": self.probability_lower_bound,
            "mse_lower_bound": self.mse_lower_bound,
        }


def mv_chernoff_bound(skills_row) -> float:
    """Majority-vote error bound exp(-(n/2) (sum(2F-1)/n)^2).

    Requires a strictly positive mean margin sum(2F - 1) > 0.
    """
    f = np.asarray(skills_row, dtype=float)
    if f.ndim != 1 or f.size == 0:
        raise ValueError("skills_row must be a nonempty vector")
    margin = float(np.sum(2.0 * f - 1.0))
    if margin <= 0:
        raise ValueError(f"nonpositive margin {margin}; bound requires sum(2F-1) > 0")
    n = f.size
    return math.exp(-(n / 2.0) * (margin / n) ** 2)


def mv_queries_needed(d: int, p: float, alpha: float) -> float:
    """Queries per task for majority vote to reach accuracy alpha under the
    d-type specialization model: 2 d^2 ln(1/alpha) / (2p-1)^2."""
    if not (0.5 < p <= 1.0):
        raise ValueError("p must lie in (1/2, 1]")
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    if d < 1:
        raise ValueError("d must be positive")
    return 2.0 * d * d * math.log(1.0 / alpha) / (2.0 * p - 1.0) ** 2


def two_stage_schedule(d: int, p: float, alpha: float, num_workers: int, num_tasks: int) -> TwoStageSchedule:
    """Two-stage schedule: threshold xi, calibration batch size R, per-cluster
    quota L, minimum worker count, and the per-task budget decomposition.

    Feasibility of the supplied W and T is flagged, not enforced.
    """
    if not (0.5 < p <= 1.0):
        raise ValueError("p must lie in (1/2, 1]")
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    if d < 1:
        raise ValueError("d must be positive")
    g = 2.0 * p - 1.0
    xi = 0.5 + g * g / (4.0 * d)
    r_real = (8.0 * d * d / g**4) * math.log(3.0 * num_workers * (num_workers - 1) / (2.0 * alpha))
    l_real = (8.0 / g**2) * math.log(6.0 * d / alpha)
    w_min_real = (16.0 * d / g**2) * math.log(6.0 * d / alpha)
    budget = w_min_real
    r = max(1, math.ceil(r_real))
    l = max(1, math.ceil(l_real))
    w_min = max(1, math.ceil(w_min_real))
    ld_term = float(l * d)
    wr_over_t_term = num_workers * r / num_tasks
    return TwoStageSchedule(
        xi=xi,
        r=r,
        l=l,
        w_min=w_min,
        budget=budget,
        r_real=r_real,
        l_real=l_real,
        w_min_real=w_min_real,
        ld_term=ld_term,
        wr_over_t_term=wr_over_t_term,
        w_ok=num_workers >= w_min,
        t_ok=num_tasks >= r,
    )


def spammer_hammer_lower_bounds(sigma2: float, density: float, num_workers: float) -> BoundReport:
    """Spammer-hammer lower bounds at hammer frequency sigma2 and sampling
    density: error probability >= (1/2) e^{-(s+s^2) p W} with s = sigma2,
    and MSE >= (1/(8W)) e^{-(s+s^2) p W}.

    sigma2 may not exceed 2/3: the exponential comparison behind the bound
    fails beyond that point.
    """
    if not (0.0 <= sigma2 <= 2.0 / 3.0):
        raise ValueError("sigma2 must lie in [0, 2/3]")
    if not (0.0 <= density <= 1.0):
        raise ValueError("density must lie in [0, 1]")
    if num_workers < 1:
        raise ValueError("num_workers must be >= 1")
    expo = math.exp(-(sigma2 + sigma2 * sigma2) * density * num_workers)
    return BoundReport(
        inputs={"sigma2": sigma2, "density": density, "num_workers": num_workers},
        probability_lower_bound=0.5 * expo,
        mse_lower_bound=expo / (8.0 * num_workers),
    )


def amplitude_lower_bounds(b: float, density: float, n: int) -> BoundReport:
    """Minimax lower bounds over latent-variable models whose eigenfunction
    amplitude supremum is b: probability >= (1/2) e^{-pn/(2b^2-1)} and
    MSE >= b^2 e^{-pn/(2b^2-1)} / (4 (2b^2-1) n)."""
    if b < 1.0:
        raise ValueError("b must be >= 1")
    if not (0.0 <= density <= 1.0):
        raise ValueError("density must lie in [0, 1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    denom = 2.0 * b * b - 1.0
    expo = math.exp(-density * n / denom)
    return BoundReport(
        inputs={"b": b, "density": density, "n": n},
        probability_lower_bound=0.5 * expo,
        mse_lower_bound=b * b * expo / (4.0 * denom * n),
    )


def eigenvalue_lower_bounds(lam: float, density: float, n: int) -> BoundReport:
    """Minimax lower bounds over latent-variable models whose smallest
    nonzero eigenvalue magnitude is lam in [0, 1/2]: probability >=
    (1/2) e^{-2 lam^2 (4 lam^2 + 1) pn}, MSE >= the same exponential over 4n."""
    if not (0.0 <= lam <= 0.5):
        raise ValueError("lam must lie in [0, 1/2]")
    if not (0.0 <= density <= 1.0):
        raise ValueError("density must lie in [0, 1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    expo = math.exp(-2.0 * lam * lam * (4.0 * lam * lam + 1.0) * density * n)
    return BoundReport(
        inputs={"lam": lam, "density": density, "n": n},
        probability_lower_bound=0.5 * expo,
        mse_lower_bound=expo / (4.0 * n),
    )


def same_type_match_prob(p: float, d: int) -> float:
    """Probability that two same-type workers give matching responses on a
    uniformly typed task: 1/2 + (2p-1)^2 / (2d)."""
    if not (0.0 <= p <= 1.0):
        raise ValueError("p must lie in [0, 1]")
    if d < 1:
        raise ValueError("d must be positive")
    return 0.5 + (2.0 * p - 1.0) ** 2 / (2.0 * d)


def clustering_recovery_bound(num_workers: int, r: int, p: float, d: int) -> float:
    """Lower bound on the probability that agreement clustering with the
    schedule's threshold exactly recovers the worker types:
    1 - C(W,2) exp(-R (2p-1)^4 / (8 d^2)), floored at 0."""
    if num_workers < 1 or r < 0 or d < 1:
        raise ValueError("invalid arguments")
    pairs = num_workers * (num_workers - 1) / 2.0
    value = 1.0 - pairs * math.exp(-r * (2.0 * p - 1.0) ** 4 / (8.0 * d * d))
    return max(0.0, value)


def cluster_undersize_bound(d: int, l: int, num_workers: int) -> float:
    """Upper bound on the probability that some worker type has fewer than
    l members: d exp(-2 (1/d - l/W)^2 W). Requires l/W < 1/d."""
    if d < 1 or l < 1 or num_workers < 1:
        raise ValueError("invalid arguments")
    if l / num_workers >= 1.0 / d:
        raise ValueError("requires l/W < 1/d")
    gap = 1.0 / d - l / num_workers
    return d * math.exp(-2.0 * gap * gap * num_workers)
