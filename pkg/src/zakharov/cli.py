"""Command line entry point: ``zakharov {run,sweep,collision,validate}``.

Exit codes: 0 success, 1 a ``validate`` audit failed, 2 configuration error,
3 a scheme diverged.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .grid import Grid
from .harness import (ConfigError, ExperimentConfig, RunReport, _setup, collision_comparison,
                      convergence_study, emit, run_experiment)
from .schemes import NewtonDivergenceError, glassey_first_N, stepsize_thresholds

EXIT_OK, EXIT_AUDIT, EXIT_CONFIG, EXIT_DIVERGED = 0, 1, 2, 3


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with ExperimentConfig fields; flags override it")
    p.add_argument("--scheme", choices=["gp", "gn", "g", "dvdm"], type=str.lower)
    p.add_argument("--emax", type=float, dest="E_max")
    p.add_argument("--L", type=float, dest="L")
    p.add_argument("--m", type=int, dest="m")
    p.add_argument("--dt", type=float)
    p.add_argument("--dx", type=float)
    p.add_argument("--horizon", help="tl, t1, <k>tl or a time")
    p.add_argument("--collision", action="store_true", default=None)
    p.add_argument("--variant", type=int, choices=[0, 1], dest="collision_variant")
    p.add_argument("--newton-eps", type=float, dest="newton_eps")
    p.add_argument("--out", default=None, help="directory for summary and series files")
    p.add_argument("--format", choices=["csv", "json"], default="csv")


def build_parser() -> argparse.ArgumentParser:
    # argparse exits with 2 on bad usage, which matches the config-error code
    parser = argparse.ArgumentParser(prog="zakharov", description="Conservative finite-difference solvers for the periodic Zakharov equations")
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("run", help="one run against the exact soliton (or a bare collision run)"))
    sweep = sub.add_parser("sweep", help="halve dt and dx together and report observed orders")
    _common(sweep)
    sweep.add_argument("--halvings", type=int, default=2)
    coll = sub.add_parser("collision", help="compare a collision run with a finer GN reference")
    _common(coll)
    coll.add_argument("--reference-dt", type=float, default=0.025)
    val = sub.add_parser("validate", help="audit the invariants of one configuration")
    _common(val)
    val.add_argument("--steps", type=int, default=50, help="steps to audit (default 50)")
    return parser


_CONFIG_KEYS = ("scheme", "E_max", "L", "m", "dt", "dx", "horizon", "collision", "collision_variant", "newton_eps")


def config_from_args(args: argparse.Namespace, **overrides) -> ExperimentConfig:
    fields: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                fields.update(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    for key in _CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            fields[key] = val
    fields.update(overrides)
    try:
        return ExperimentConfig(**fields)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _print_summary(rows) -> None:
    for r in rows:
        parts = []
        for k, v in r.items():
            parts.append(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}")
        print(" ".join(parts))


def _finish(reports: list[RunReport], args, stem: str) -> int:
    _print_summary([r.summary() for r in reports])
    if args.out:
        for path in emit(reports, args.out, args.format, stem):
            print(f"wrote {path}")
    for r in reports:
        if r.status != "ok":
            print(f"diverged: {r.message}", file=sys.stderr)
            return EXIT_DIVERGED
    return EXIT_OK


def _cmd_run(args) -> int:
    return _finish([run_experiment(config_from_args(args))], args, "run")


def _cmd_sweep(args) -> int:
    base = config_from_args(args)
    reports: list[RunReport] = []
    rows = convergence_study(base, args.halvings, reports)
    _print_summary(rows)
    if args.out:
        for path in emit(reports, args.out, args.format, "sweep"):
            print(f"wrote {path}")
    return EXIT_DIVERGED if any(r["status"] != "ok" for r in rows) else EXIT_OK


def _asdict(cfg: ExperimentConfig) -> dict:
    return {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}


def _cmd_collision(args) -> int:
    cfg = config_from_args(args, collision=True)
    ref = ExperimentConfig(**{**_asdict(cfg), "scheme": "GN", "dt": args.reference_dt, "dx": args.reference_dt})
    return _finish([collision_comparison(cfg, ref)], args, "collision")


def _cmd_validate(args) -> int:
    cfg = config_from_args(args)
    p, g, init, T, M = _setup(cfg)
    audit_cfg = ExperimentConfig(**{**_asdict(cfg), "horizon": min(args.steps, M) * cfg.dt})
    rep = run_experiment(audit_cfg)
    checks: list[tuple[str, bool, str]] = []
    norms = np.array([r["norm"] for r in rep.series])
    drift = float(np.max(np.abs(norms - norms[0])) / norms[0]) if norms[0] > 0 else 0.0
    limit = 1e-10 if cfg.scheme != "DVDM" else 1e3 * cfg.newton_eps
    checks.append(("norm conservation", drift <= limit, f"relative drift {drift:.3e} (limit {limit:.0e})"))
    # GP and G carry no energy guarantee: their first level breaks the zero-mean increment
    e_limit = {"GN": 1e-8, "DVDM": 100 * cfg.newton_eps * max(rep.steps, 1)}.get(cfg.scheme, math.inf)
    checks.append(("energy drift", rep.dE <= e_limit, f"dE {rep.dE:.3e} (limit {e_limit:.0e})"))
    N1 = glassey_first_N(init.E0, init.N0field, init.Nt0, g, cfg.dt, "GN")
    mean_inc = abs(float(np.sum(N1 - init.N0field) * g.dx))
    checks.append(("GN zero-mean first increment", mean_inc <= 1e-12 * max(1.0, float(np.abs(N1).sum() * g.dx)),
                   f"sum {mean_inc:.3e}"))
    checks.append(("run status", rep.status == "ok", rep.message or "ok"))
    adv = stepsize_thresholds(4.0, 1.0, Grid(g.K, g.L), cfg.dt)
    print(f"advisory: eps1={adv.eps1:.3e} eps2={adv.eps2:.3e} (p=4, r=1) dt within bound: {adv.admissible}")
    ok = True
    for name, passed, detail in checks:
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
    if rep.status != "ok":
        return EXIT_DIVERGED
    return EXIT_OK if ok else EXIT_AUDIT


_COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "collision": _cmd_collision, "validate": _cmd_validate}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NewtonDivergenceError as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
