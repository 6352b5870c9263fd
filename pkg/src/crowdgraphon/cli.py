"""Command line interface.

Subcommands: simulate (one verbose trial), tradeoff, clustering (CSV record
streams), bounds (closed-form lower bounds as JSON or CSV sweeps), and
graphon-check (spectral residual report). Exit codes: 0 on success, 2 on a
configuration error, 3 when a --check assertion fails.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import experiments, graphon, theory
from .experiments import ConfigError, ExperimentConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ASSERT = 3


def _experiment_flags(parser: argparse.ArgumentParser, kind: str) -> None:
    parser.add_argument("--config", help="JSON config file (overrides the flags below)")
    parser.add_argument("--d", type=int, help="number of task/worker types")
    parser.add_argument("--p", type=float, help="matched-type success probability, in (1/2, 1]")
    parser.add_argument("--tasks", type=int, help="number of tasks T")
    parser.add_argument("--workers", type=int, help="number of workers W")
    parser.add_argument("--trials", type=int, default=50, help="Monte Carlo trials")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--alpha", type=float, default=0.1, help="target accuracy in (0, 1)")
    if kind == "tradeoff":
        parser.add_argument(
            "--schedule",
            choices=["target", "budget"],
            default="target",
            help="target: derive R, L, xi from alpha and run the full pipeline; "
            "budget: fixed per-task budget split over the true partition",
        )
        parser.add_argument("--budget", type=int, help="per-task responses (budget schedule)")
    if kind == "clustering":
        parser.add_argument(
            "--r-grid", help="comma-separated stage-1 batch sizes, e.g. 0,134,534,1068"
        )
    parser.add_argument("--out", help="output CSV path (default: stdout)")
    parser.add_argument(
        "--assert",
        dest="check",
        action="store_true",
        help="exit 3 unless the run meets its accuracy target",
    )


def _config_from_args(args: argparse.Namespace, kind: str) -> ExperimentConfig:
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        data.setdefault("kind", kind)
        return ExperimentConfig.from_dict(data)
    missing = [name for name in ("d", "p", "tasks", "workers") if getattr(args, name) is None]
    if missing:
        raise ConfigError(f"missing required flags: {', '.join('--' + m for m in missing)}")
    kwargs: dict = {
        "kind": kind,
        "d": args.d,
        "p": args.p,
        "num_tasks": args.tasks,
        "num_workers": args.workers,
        "trials": args.trials,
        "seed": args.seed,
        "alpha": args.alpha,
    }
    if kind == "tradeoff":
        kwargs["schedule"] = args.schedule
        if args.schedule == "budget":
            kwargs["budget"] = args.budget
            kwargs["partition_mode"] = "oracle"
    if kind == "clustering" and args.r_grid:
        kwargs["r_grid"] = tuple(int(x) for x in args.r_grid.split(","))
    return ExperimentConfig.from_dict(kwargs)


def _write_records(records, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", newline="") as fh:
            experiments.records_to_csv(records, fh)
    else:
        experiments.records_to_csv(records, sys.stdout)


def _cmd_tradeoff(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args, "tradeoff")
    records = experiments.run_tradeoff_experiment(cfg)
    _write_records(records, args.out)
    if args.check:
        mean, _, hi = experiments.aggregate_task_error(records, "two_stage", cfg.num_tasks)
        if hi > cfg.alpha:
            print(
                f"assertion failed: two_stage Wilson upper bound {hi:.6f} > alpha {cfg.alpha}",
                file=sys.stderr,
            )
            return EXIT_ASSERT
    return EXIT_OK


def _cmd_clustering(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args, "clustering")
    records = experiments.run_clustering_recovery_experiment(cfg)
    _write_records(records, args.out)
    if args.check:
        largest = max(
            (rec for rec in records), key=lambda rec: (rec.queries_per_task, rec.trial)
        ).method
        hits = [rec.recovered for rec in records if rec.method == largest]
        frequency = sum(hits) / len(hits)
        if frequency < 1.0 - cfg.alpha:
            print(
                f"assertion failed: recovery frequency {frequency:.4f} at {largest} "
                f"below 1 - alpha = {1.0 - cfg.alpha}",
                file=sys.stderr,
            )
            return EXIT_ASSERT
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args, "tradeoff")
    if cfg.trials != 1:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "trials": 1})
    print(json.dumps({"config": cfg.to_dict()}, sort_keys=True))
    if cfg.schedule == "target":
        params = theory.two_stage_schedule(cfg.d, cfg.p, cfg.alpha, cfg.num_workers, cfg.num_tasks)
        print(json.dumps({"schedule": params.to_dict()}, sort_keys=True))
    for rec in experiments.run_tradeoff_experiment(cfg):
        print(
            json.dumps(
                {
                    "method": rec.method,
                    "queries_per_task": float(rec.queries_per_task),
                    "error": float(rec.error),
                    "recovered": rec.recovered,
                    "num_clusters": rec.num_clusters,
                    "seed": rec.seed,
                },
                sort_keys=True,
            )
        )
    return EXIT_OK


def _parse_grid(spec: str) -> tuple[str, list[float]]:
    try:
        name, rng = spec.split("=", 1)
        start, stop, count = rng.split(":")
        start_f, stop_f, count_i = float(start), float(stop), int(count)
    except ValueError as exc:
        raise ConfigError(f"bad grid spec {spec!r}; expected name=start:stop:count") from exc
    if count_i < 2:
        raise ConfigError("grid count must be >= 2")
    step = (stop_f - start_f) / (count_i - 1)
    return name, [start_f + k * step for k in range(count_i)]


_BOUND_PARAMS = {"spammer-hammer": "sigma2", "amplitude": "b", "eigenvalue": "lam"}


def _one_bound(kind: str, value: float, density: float, n: float) -> theory.BoundReport:
    if kind == "spammer-hammer":
        return theory.spammer_hammer_lower_bounds(value, density, n)
    if kind == "amplitude":
        return theory.amplitude_lower_bounds(value, density, int(n))
    return theory.eigenvalue_lower_bounds(value, density, int(n))


def _cmd_bounds(args: argparse.Namespace) -> int:
    kind = args.kind
    if kind == "schedule":
        for name in ("d", "p", "workers", "tasks"):
            if getattr(args, name) is None:
                raise ConfigError(f"--{name} is required for the schedule report")
        params = theory.two_stage_schedule(args.d, args.p, args.alpha, args.workers, args.tasks)
        print(json.dumps(params.to_dict(), sort_keys=True))
        return EXIT_OK
    if kind == "mv":
        if args.d is None or args.p is None:
            raise ConfigError("--d and --p are required for the majority-vote query count")
        value = theory.mv_queries_needed(args.d, args.p, args.alpha)
        print(json.dumps({"queries_per_task": value}, sort_keys=True))
        return EXIT_OK

    param = _BOUND_PARAMS[kind]
    size = args.workers if kind == "spammer-hammer" else args.n
    if size is None:
        raise ConfigError("--workers (spammer-hammer) or --n (amplitude/eigenvalue) is required")
    if args.grid:
        name, values = _parse_grid(args.grid)
        if name != param:
            raise ConfigError(f"{kind} sweeps parameter {param!r}, got {name!r}")
        rows = [(v, _one_bound(kind, v, args.density, size)) for v in values]
        out = sys.stdout if not args.csv else open(args.csv, "w", newline="")
        try:
            out.write("kind,param,param_value,density,n,probability_lower_bound,mse_lower_bound\n")
            for v, rep in rows:
                out.write(
                    f"{kind},{param},{v!r},{args.density!r},{size!r},"
                    f"{rep.probability_lower_bound!r},{rep.mse_lower_bound!r}\n"
                )
        finally:
            if args.csv:
                out.close()
        return EXIT_OK
    if getattr(args, param) is None:
        raise ConfigError(f"--{param} is required for kind {kind}")
    report = _one_bound(kind, getattr(args, param), args.density, size)
    print(json.dumps(report.to_dict(), sort_keys=True))
    return EXIT_OK


def _cmd_graphon_check(args: argparse.Namespace) -> int:
    spec = graphon.build_graphon(args.alpha, args.beta, args.sigma2)
    es = graphon.eigensystem(spec)
    check = graphon.verify_spectral(spec, grid_points=args.grid_points)
    print(
        json.dumps(
            {
                "spec": graphon.spec_to_dict(spec),
                "boundaries": list(spec.boundaries),
                "lambda1": es.lambda1,
                "lambda2": es.lambda2,
                "amplitude": es.amplitude,
                "q1_values": es.q1_values.tolist(),
                "q2_values": es.q2_values.tolist(),
                "max_pointwise_residual": check.max_pointwise_residual,
                "gram_residual": check.gram_residual,
            },
            sort_keys=True,
        )
    )
    if args.check and max(check.max_pointwise_residual, check.gram_residual) > args.tol:
        print(f"assertion failed: residual exceeds {args.tol}", file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crowdgraphon",
        description="Simulators and bound calculators for crowdsourced label "
        "aggregation and its reduction to matrix estimation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one tradeoff trial and print verbose JSON lines")
    _experiment_flags(p_sim, "tradeoff")

    p_trade = sub.add_parser(
        "tradeoff", help="two-stage pipeline vs majority vote, CSV records per trial"
    )
    _experiment_flags(p_trade, "tradeoff")

    p_clust = sub.add_parser(
        "clustering", help="exact-recovery frequency over a stage-1 batch size grid"
    )
    _experiment_flags(p_clust, "clustering")

    p_bounds = sub.add_parser(
        "bounds",
        help="closed-form lower bounds and schedules",
        description=(
            "Evaluates closed-form formulas: "
            "spammer-hammer: probability >= (1/2)exp(-(s+s^2) p W) and MSE >= exp(-(s+s^2) p W)/(8W) "
            "for hammer frequency s = sigma2 <= 2/3; "
            "amplitude: probability >= (1/2)exp(-pn/(2B^2-1)), MSE >= B^2 exp(-pn/(2B^2-1))/(4(2B^2-1)n); "
            "eigenvalue: probability >= (1/2)exp(-2 L^2(4 L^2+1) pn), MSE >= exp(-2 L^2(4 L^2+1) pn)/(4n) "
            "for L = lam in [0, 1/2]; "
            "schedule: xi = 1/2 + (2p-1)^2/(4d), R = ceil(8 d^2 (2p-1)^-4 ln(3W(W-1)/(2 alpha))), "
            "L = ceil(8 (2p-1)^-2 ln(6d/alpha)), Wmin = ceil(16 d (2p-1)^-2 ln(6d/alpha)); "
            "mv: 2 d^2 (2p-1)^-2 ln(1/alpha) queries per task."
        ),
    )
    p_bounds.add_argument(
        "--kind",
        choices=["spammer-hammer", "amplitude", "eigenvalue", "schedule", "mv"],
        required=True,
    )
    p_bounds.add_argument("--sigma2", type=float, help="hammer frequency (spammer-hammer)")
    p_bounds.add_argument("--b", type=float, help="eigenfunction amplitude supremum (amplitude)")
    p_bounds.add_argument("--lam", type=float, help="minimum eigenvalue magnitude (eigenvalue)")
    p_bounds.add_argument("--density", type=float, default=0.1, help="observation density p")
    p_bounds.add_argument("--n", type=int, help="matrix size (amplitude/eigenvalue)")
    p_bounds.add_argument("--workers", type=int, help="worker count W (spammer-hammer)")
    p_bounds.add_argument("--tasks", type=int, help="task count T (schedule)")
    p_bounds.add_argument("--d", type=int, help="type count (schedule/mv)")
    p_bounds.add_argument("--p", type=float, help="matched-type success probability (schedule/mv)")
    p_bounds.add_argument("--alpha", type=float, default=0.1, help="target accuracy")
    p_bounds.add_argument("--grid", help="sweep, e.g. lam=0:0.5:11")
    p_bounds.add_argument("--csv", help="write the sweep to this CSV path")

    p_gc = sub.add_parser("graphon-check", help="spectral identity residual report")
    p_gc.add_argument("--alpha", type=float, required=True, help="+1 answer prior, in (0,1)")
    p_gc.add_argument("--beta", type=float, required=True, help="task fraction, in (0,1)")
    p_gc.add_argument("--sigma2", type=float, required=True, help="hammer fraction, in (0,1)")
    p_gc.add_argument("--grid-points", type=int, default=201)
    p_gc.add_argument("--tol", type=float, default=1e-12)
    p_gc.add_argument("--assert", dest="check", action="store_true")

    return parser


_DISPATCH = {
    "simulate": _cmd_simulate,
    "tradeoff": _cmd_tradeoff,
    "clustering": _cmd_clustering,
    "bounds": _cmd_bounds,
    "graphon-check": _cmd_graphon_check,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
