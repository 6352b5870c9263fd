"""Figure construction from experiment record CSVs.

Three kinds are supported:

  tradeoff  - error vs queries-per-task, one curve per method, from the
              harness record schema (trial,method,queries_per_task,error,
              recovered,C,seed)
  recovery  - exact-recovery frequency vs calibration batch size R, from
              the same schema with method names "clustering_R=<r>"
  bounds    - lower-bound curves vs the swept parameter, from the bounds
              sweep schema (kind,param,param_value,density,n,
              probability_lower_bound,mse_lower_bound)

Trials are aggregated into a mean with a Wilson 95% band per group.
Rendering is a pure function of the CSV bytes: fixed style, no timestamps,
so equal inputs produce pixel-identical images.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

RECORD_COLUMNS = ["trial", "method", "queries_per_task", "error", "recovered", "C", "seed"]
BOUNDS_COLUMNS = [
    "kind",
    "param",
    "param_value",
    "density",
    "n",
    "probability_lower_bound",
    "mse_lower_bound",
]

KINDS = ("tradeoff", "recovery", "bounds")

STYLE = {
    "figure.figsize": (7.0, 4.5),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
}


class SchemaError(ValueError):
    """The input CSV does not carry the columns the figure kind needs."""


@dataclass(frozen=True)
class FigureSpec:
    """What to read, which figure to draw, and where to write it."""

    input_path: str
    kind: str
    output_path: str
    y_scale: str = ""  # "log" or "linear"; empty picks the kind's default

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.y_scale not in ("", "log", "linear"):
            raise ValueError("y_scale must be 'log' or 'linear'")

    @property
    def effective_y_scale(self) -> str:
        if self.y_scale:
            return self.y_scale
        # error curves decay exponentially in the budget; frequencies do not
        return "linear" if self.kind == "recovery" else "log"


def read_rows(path: str, required: list[str]) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(
                f"missing columns {missing} in {path}; found header {header}"
            )
        return list(reader)


def wilson(successes: float, n: int, z: float = 1.96) -> tuple[float, float]:
    if n <= 0:
        return (0.0, 1.0)
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = (z / denom) * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n))
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass
class Curve:
    label: str
    x: list[float] = field(default_factory=list)
    y: list[float] = field(default_factory=list)
    lo: list[float] = field(default_factory=list)
    hi: list[float] = field(default_factory=list)


def aggregate_tradeoff(rows: list[dict]) -> list[Curve]:
    """Mean error with Wilson band per (method, queries_per_task)."""
    groups: dict[tuple[str, float], list[float]] = {}
    for row in rows:
        key = (row["method"], float(row["queries_per_task"]))
        groups.setdefault(key, []).append(float(row["error"]))
    curves: dict[str, Curve] = {}
    for (method, budget), errors in sorted(groups.items()):
        curve = curves.setdefault(method, Curve(label=method))
        lo, hi = wilson(sum(errors), len(errors))
        curve.x.append(budget)
        curve.y.append(sum(errors) / len(errors))
        curve.lo.append(lo)
        curve.hi.append(hi)
    return [curves[m] for m in sorted(curves)]


def _batch_size_of(method: str, fallback: float) -> float:
    marker = "_R="
    if marker in method:
        try:
            return float(method.split(marker, 1)[1])
        except ValueError:
            pass
    return fallback


def aggregate_recovery(rows: list[dict]) -> Curve:
    """Exact-recovery frequency with Wilson band per swept batch size."""
    groups: dict[float, list[int]] = {}
    for row in rows:
        x = _batch_size_of(row["method"], float(row["queries_per_task"]))
        groups.setdefault(x, []).append(int(row["recovered"] or 0))
    curve = Curve(label="exact recovery")
    for x in sorted(groups):
        hits = groups[x]
        lo, hi = wilson(sum(hits), len(hits))
        curve.x.append(x)
        curve.y.append(sum(hits) / len(hits))
        curve.lo.append(lo)
        curve.hi.append(hi)
    return curve


def aggregate_bounds(rows: list[dict]) -> tuple[str, list[Curve]]:
    """Probability and MSE lower-bound curves over the swept parameter."""
    param = rows[0]["param"] if rows else "parameter"
    prob = Curve(label="probability lower bound")
    mse = Curve(label="MSE lower bound")
    for row in sorted(rows, key=lambda r: float(r["param_value"])):
        x = float(row["param_value"])
        for curve, column in ((prob, "probability_lower_bound"), (mse, "mse_lower_bound")):
            value = float(row[column])
            curve.x.append(x)
            curve.y.append(value)
            curve.lo.append(value)
            curve.hi.append(value)
    return param, [prob, mse]


def build_figure(spec: FigureSpec):
    """Load, aggregate, and draw; returns the matplotlib figure."""
    if spec.kind == "bounds":
        rows = read_rows(spec.input_path, BOUNDS_COLUMNS)
        x_label, curves = aggregate_bounds(rows)
    else:
        rows = read_rows(spec.input_path, RECORD_COLUMNS)
        if spec.kind == "tradeoff":
            curves = aggregate_tradeoff(rows)
            x_label = "queries per task"
        else:
            recovery_rows = [r for r in rows if r["recovered"] != ""]
            curves = [aggregate_recovery(recovery_rows)] if recovery_rows else []
            x_label = "calibration batch size R"

    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for curve in curves:
            ax.plot(curve.x, curve.y, marker="o", markersize=3, label=curve.label)
            if any(h > l for l, h in zip(curve.lo, curve.hi)):
                ax.fill_between(curve.x, curve.lo, curve.hi, alpha=0.2)
        ax.set_xlabel(x_label)
        ax.set_ylabel(
            {"tradeoff": "error", "recovery": "exact-recovery frequency", "bounds": "bound"}[
                spec.kind
            ]
        )
        ax.set_yscale(spec.effective_y_scale)
        if curves:
            ax.legend()
        fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> str:
    """Write the figure to spec.output_path and return the path."""
    fig = build_figure(spec)
    try:
        # strip the writer's software tag so output bytes depend on the CSV only
        fig.savefig(spec.output_path, metadata={"Software": None})
    finally:
        plt.close(fig)
    return spec.output_path
