"""Experiment driver: configs, runs against exact or reference solutions, output files."""
from __future__ import annotations

import csv
import json
import math
import re
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .exact import (InfeasibleSolitonError, PeriodMismatchError, resolve_soliton, sample_collision_initial,
                    sample_single_soliton, single_soliton_initial)
from .grid import Grid, norm
from .invariants import energy_dvdm, energy_glassey, error_vs_reference, norm_invariant
from .schemes import NewtonDivergenceError, SchemeConfig, State, glassey_recover_V, trajectory

SCHEME_CHOICES = ("GP", "GN", "G", "DVDM")
SUMMARY_FIELDS = ("scheme", "E_max", "dt", "dx", "K", "T", "steps", "E0_energy", "dE", "epsE", "epsN",
                  "wall_time", "newton_iters", "seam_jump", "status")
SERIES_FIELDS = ("step", "t", "norm", "energy", "errE", "errN", "newton_iters")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str = "GN"
    E_max: float = 1.0
    L: float = 20.0
    m: int = 1
    dt: float = 0.1
    dx: float | None = None  # defaults to dt
    horizon: str | float = "tl"
    collision: bool = False
    collision_variant: int = 0
    newton_eps: float = 1e-8
    newton_max_iter: int = 50

    def __post_init__(self):
        object.__setattr__(self, "scheme", str(self.scheme).upper())
        if self.scheme not in SCHEME_CHOICES:
            raise ConfigError(f"scheme must be one of {SCHEME_CHOICES}, got {self.scheme!r}")
        for name in ("E_max", "L", "dt", "newton_eps"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise ConfigError(f"{name} must be a positive number, got {val!r}")
        if self.dx is not None and not self.dx > 0:
            raise ConfigError(f"dx must be positive, got {self.dx!r}")
        if self.collision_variant not in (0, 1):
            raise ConfigError(f"collision variant must be 0 or 1, got {self.collision_variant!r}")
        parse_horizon(self.horizon, 1.0, 1.0)

    @property
    def domain_multiplier(self) -> int:
        return 8 if self.collision else 1

    @property
    def spacing(self) -> float:
        return self.dt if self.dx is None else self.dx

    @property
    def K(self) -> int:
        K = int(round(self.domain_multiplier * self.L / self.spacing))
        if K < 3:
            raise ConfigError(f"dx={self.spacing} leaves fewer than 3 grid points")
        return K

    def scheme_config(self) -> SchemeConfig:
        if self.scheme == "DVDM":
            return SchemeConfig(self.dt, self.newton_eps, self.newton_max_iter, "GN", "DVDM")
        return SchemeConfig(self.dt, self.newton_eps, self.newton_max_iter, self.scheme, "GLASSEY")


_MULTIPLE_TL = re.compile(r"^\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*tl\s*$", re.IGNORECASE)


def parse_horizon(h, T_L: float, T_1: float) -> float:
    """``tl``, ``t1``, ``<k>tl`` or an explicit time."""
    if isinstance(h, (int, float)) and not isinstance(h, bool):
        T = float(h)
    else:
        s = str(h).strip().lower()
        if s == "tl":
            T = T_L
        elif s == "t1":
            T = T_1
        elif (m := _MULTIPLE_TL.match(s)):
            T = float(m.group(1)) * T_L
        else:
            try:
                T = float(s)
            except ValueError:
                raise ConfigError(f"horizon must be tl, t1, <k>tl or a number, got {h!r}") from None
    if not (math.isfinite(T) and T >= 0):
        raise ConfigError(f"horizon must be a nonnegative time, got {h!r}")
    return T


@dataclass
class RunReport:
    config: dict
    K: int
    T: float
    steps: int
    E0_energy: float = float("nan")
    dE: float = 0.0
    epsE: float | None = None  # None when no exact solution exists (collisions)
    epsN: float | None = None
    wall_time: float = 0.0
    newton_iters: int = 0
    seam_jump: float = 0.0
    status: str = "ok"
    message: str = ""
    series: list[dict] = field(default_factory=list)

    def summary(self) -> dict:
        c = self.config
        dx = c["L"] * (8 if c["collision"] else 1) / self.K
        return {"scheme": c["scheme"], "E_max": c["E_max"], "dt": c["dt"], "dx": dx,
                "K": self.K, "T": self.T, "steps": self.steps, "E0_energy": self.E0_energy, "dE": self.dE,
                "epsE": self.epsE, "epsN": self.epsN, "wall_time": self.wall_time,
                "newton_iters": self.newton_iters, "seam_jump": self.seam_jump, "status": self.status}


def _setup(cfg: ExperimentConfig):
    try:
        p = resolve_soliton(cfg.E_max, cfg.L, cfg.m)
    except InfeasibleSolitonError as exc:
        raise ConfigError(str(exc)) from exc
    g = Grid(cfg.K, cfg.domain_multiplier * cfg.L)
    try:
        init = sample_collision_initial(p, g, cfg.collision_variant) if cfg.collision else single_soliton_initial(p, g)
    except PeriodMismatchError as exc:
        raise ConfigError(str(exc)) from exc
    T = parse_horizon(cfg.horizon, p.T_L, p.T_1)
    return p, g, init, T, int(round(T / cfg.dt))


def _drive(cfg: ExperimentConfig, on_state=None) -> RunReport:
    p, g, init, T, M = _setup(cfg)
    scfg = cfg.scheme_config()
    dvdm = scfg.scheme == "DVDM"
    report = RunReport(asdict(cfg), g.K, T, M, seam_jump=init.seam_jump)
    if not cfg.collision:
        report.epsE = report.epsN = 0.0
    energies: list[float] = []
    prev: State | None = None
    it = trajectory(init, scfg, M)
    stepping = 0.0
    while True:
        t0 = time.perf_counter()
        try:
            s = next(it)
        except StopIteration:
            break
        except NewtonDivergenceError as exc:
            report.status, report.message = "diverged", str(exc)
            break
        finally:
            stepping += time.perf_counter() - t0
        row = {"step": s.step, "t": s.t, "norm": norm_invariant(s, g), "energy": float("nan"),
               "errE": float("nan"), "errN": float("nan"), "newton_iters": s.newton_iters}
        if dvdm:
            row["energy"] = energy_dvdm(s, g)
        elif prev is not None:
            row["energy"] = energy_glassey(prev, s, glassey_recover_V(prev.N, s.N, g, cfg.dt), g)
        if math.isfinite(row["energy"]):
            energies.append(row["energy"])
        if not cfg.collision:
            ex = sample_single_soliton(p, g, s.t)
            err = error_vs_reference(s, (ex.E, ex.N), g)
            row["errE"], row["errN"] = err.errE, err.errN
            report.epsE, report.epsN = max(report.epsE, err.errE), max(report.epsN, err.errN)
        report.newton_iters += s.newton_iters
        report.series.append(row)
        if on_state is not None:
            on_state(s, g)
        prev = s
    report.wall_time = stepping
    if energies:
        report.E0_energy = energies[0]
        report.dE = float(np.max(np.abs(np.asarray(energies) - energies[0])))
    if report.status == "ok" and not all(math.isfinite(r["norm"]) for r in report.series):
        report.status, report.message = "diverged", "non-finite field values"
    return report


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    return _drive(cfg)


def convergence_study(base: ExperimentConfig, halvings: int = 1, reports: list | None = None) -> list[dict]:
    """Run ``base`` and ``halvings`` refinements with dt and dx halved together.

    Returns one summary row per run with ``order_epsE``/``order_epsN`` (log2 of
    successive error ratios); full reports are appended to ``reports`` if given.
    """
    if base.collision:
        raise ConfigError("convergence studies need an exact solution; use collision_comparison for collisions")
    rows: list[dict] = []
    for h in range(halvings + 1):
        f = 2.0**-h
        rep = run_experiment(_replace(base, dt=base.dt * f, dx=base.spacing * f))
        if reports is not None:
            reports.append(rep)
        row = rep.summary()
        if rows:
            for key in ("epsE", "epsN"):
                a, b = rows[-1][key], row[key]
                row[f"order_{key}"] = math.log2(a / b) if a and b else float("nan")
        rows.append(row)
    return rows


def _replace(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    d = asdict(cfg)
    d.update(kw)
    return ExperimentConfig(**d)


def collision_comparison(cfg: ExperimentConfig, reference_cfg: ExperimentConfig) -> RunReport:
    """Errors of ``cfg`` against a finer run, compared at the coarse times and nodes."""
    if cfg.collision != reference_cfg.collision or cfg.collision_variant != reference_cfg.collision_variant:
        raise ConfigError("run and reference must use the same initial data variant")
    for name in ("E_max", "L", "m"):
        if getattr(cfg, name) != getattr(reference_cfg, name):
            raise ConfigError(f"run and reference differ in {name}")
    t_ratio = cfg.dt / reference_cfg.dt
    x_ratio = reference_cfg.K / cfg.K
    if abs(t_ratio - round(t_ratio)) > 1e-9 or round(t_ratio) < 1:
        raise ConfigError(f"reference dt={reference_cfg.dt} must divide dt={cfg.dt}")
    if abs(x_ratio - round(x_ratio)) > 1e-9 or round(x_ratio) < 1:
        raise ConfigError(f"reference K={reference_cfg.K} must be a multiple of K={cfg.K}")
    t_stride, x_stride = int(round(t_ratio)), int(round(x_ratio))

    ref_fields: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def keep(s: State, g: Grid):
        if s.step % t_stride == 0:
            ref_fields[s.step // t_stride] = (s.E[::x_stride].copy(), s.N[::x_stride].copy())

    ref_report = _drive(reference_cfg, keep)
    if ref_report.status != "ok":
        raise NewtonDivergenceError(f"reference run failed: {ref_report.message}", -1, [])

    errors: list[tuple[int, float, float]] = []

    def compare(s: State, g: Grid):
        if s.step in ref_fields:
            E_ref, N_ref = ref_fields[s.step]
            errors.append((s.step, norm(s.E - E_ref, g), norm(s.N - N_ref, g)))

    report = _drive(cfg, compare)
    by_step = {step: (eE, eN) for step, eE, eN in errors}
    for row in report.series:
        if row["step"] in by_step:
            row["errE"], row["errN"] = by_step[row["step"]]
    report.epsE = max((e[1] for e in errors), default=0.0)
    report.epsN = max((e[2] for e in errors), default=0.0)
    return report


# ---------------------------------------------------------------- output


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _write_csv(path: Path, fields, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(fields)
        for r in rows:
            w.writerow([_fmt(r.get(k)) for k in fields])


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def emit(reports: RunReport | list[RunReport], out_dir, fmt: str = "csv", stem: str = "run") -> list[Path]:
    """Write ``<stem>_summary`` (one row per report) and ``<stem>_series[_i]`` files."""
    if isinstance(reports, RunReport):
        reports = [reports]
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        summary = [r.summary() for r in reports]
        path = out / f"{stem}_summary.{fmt}"
        if fmt == "csv":
            _write_csv(path, SUMMARY_FIELDS, summary)
        else:
            path.write_text(json.dumps([{k: _json_safe(v) for k, v in s.items()} for s in summary], indent=1))
        written.append(path)
        for i, r in enumerate(reports):
            suffix = "" if len(reports) == 1 else f"_{i}"
            path = out / f"{stem}_series{suffix}.{fmt}"
            if fmt == "csv":
                _write_csv(path, SERIES_FIELDS, r.series)
            else:
                rows = [{k: _json_safe(row.get(k)) for k in SERIES_FIELDS} for row in r.series]
                path.write_text(json.dumps(rows))
            written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc}") from exc
    return written


def read_summary_csv(path) -> list[dict]:
    """Parse a summary file written by :func:`emit` back into typed rows."""
    ints = {"K", "steps", "newton_iters"}
    strs = {"scheme", "status"}
    rows = []
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            rows.append({k: (v if k in strs else None if v == "" else int(v) if k in ints else float(v))
                         for k, v in r.items()})
    return rows
