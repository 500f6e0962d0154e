"""Command-line driver: simulate, analyze, region-scan, verify-global.

Each ``run_*`` function takes a :class:`RunConfig`, streams its table to
``config.out`` when set, and returns a :class:`RunResult` carrying the rows,
the summary record and the exit status.
"""
from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .analysis import (
    DIVERGED,
    ESCAPED,
    UNCONVERGED,
    CycleRecord,
    find_fixed_points,
    omega_limit_estimate,
    period2_absence_test,
    periodic_orbits_by_period,
    verify_global_convergence,
)
from .config import ConfigError, RunConfig, build_model, load_config, sampling_box, with_param
from .core import ConvergenceRule, EvaluationError, PeriodWarning, TriangularSystem, compose, iterate_orbit
from .io import Column, OutputError, ResultWriter, fmt_float
from .models import (
    LeslieGowerParams,
    LogisticParams,
    RickerKParams,
    RickerParams,
    leslie_gower_cycles,
    leslie_gower_spectra,
    logistic_spectra_and_regions,
    ricker_stability_and_generalization,
)
from .models.leslie_gower import exclusion_quotient
from .models.logistic import deltas, reality_polynomial
from .models.ricker import interior_fixed_point

__all__ = [
    "EXIT_OK",
    "EXIT_VALIDATION",
    "EXIT_SOLVER",
    "EXIT_VIOLATED",
    "EXIT_INCONCLUSIVE",
    "EXIT_IO",
    "RunResult",
    "run_simulate",
    "run_analyze",
    "run_region_scan",
    "run_verify_global",
    "main",
]

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_VIOLATED = 4
EXIT_INCONCLUSIVE = 5
EXIT_IO = 6

SOLVER_ERRORS = (EvaluationError, FloatingPointError, ArithmeticError, np.linalg.LinAlgError, RuntimeError)


@dataclass
class RunResult:
    kind: str
    rows: list[dict]
    summary: dict
    exit_code: int = EXIT_OK
    path: Path | None = None


class _Sink:
    """Write rows to a file when a path is configured, and keep them in memory."""

    def __init__(self, cfg: RunConfig, kind: str, columns: list[Column], keep: bool = True):
        self.kind = kind
        self.rows: list[dict] = []
        self.keep = keep
        self.writer = ResultWriter(cfg.out, kind, columns, cfg.format) if cfg.out else None

    def write(self, row: dict) -> None:
        if self.writer:
            self.writer.write(row)
        if self.keep:
            self.rows.append(row)

    def finish(self, summary: dict, code: int = EXIT_OK) -> RunResult:
        path = None
        if self.writer:
            self.writer.close(summary)
            path = self.writer.path
        summary = dict(summary, n_rows=len(self.rows)) if self.keep else summary
        return RunResult(self.kind, self.rows, summary, code, path)

    def abort(self):
        if self.writer:
            self.writer.abort()


def _system_info(system: TriangularSystem) -> dict:
    return {"name": system.name, "k": system.k, "p": system.p}


def _config_echo(cfg: RunConfig) -> dict:
    d = asdict(cfg)
    d.pop("out")  # file contents must not depend on where they are written
    return d


def _fmt_point(x) -> str:
    return "(" + " ".join(fmt_float(v) for v in x) + ")"


def _xcols(prefix: str, k: int) -> list[str]:
    return [f"{prefix}{j}" for j in range(1, k + 1)]


# ---------------------------------------------------------------- simulate


def run_simulate(cfg: RunConfig) -> RunResult:
    system, _ = build_model(cfg)
    k, p = system.k, system.p
    box = sampling_box(cfg, system)
    x0 = np.array(cfg.x0, dtype=float) if cfg.x0 is not None else (np.array(box.lower) + np.array(box.upper)) / 2
    orbit = iterate_orbit(system, x0, cfg.phase, cfg.steps, ConvergenceRule(cfg.orbit_tol, halt=False))
    omega = omega_limit_estimate(orbit, cfg.cluster_tol)
    cols = [Column("step", "int"), Column("phase", "int")] + [Column(c) for c in _xcols("x", k)]
    sink = _Sink(cfg, "orbit", cols)
    for n, x in enumerate(orbit.trajectory):
        sink.write({"step": n, "phase": (cfg.phase + n) % p, **dict(zip(_xcols("x", k), x))})
    summary = {
        "command": "simulate",
        "system": _system_info(system),
        "phase": cfg.phase,
        "x0": x0,
        "converged": orbit.converged,
        "converged_step": orbit.converged_step,
        "escaped": orbit.escaped,
        "diverged": orbit.diverged,
        "omega_limit": {
            "points": omega.points,
            "counts": omega.counts,
            "tail_length": omega.tail_length,
            "unresolved": omega.unresolved,
        },
        "config": _config_echo(cfg),
    }
    return sink.finish(summary)


# ----------------------------------------------------------------- analyze


def _periods(cfg: RunConfig, system: TriangularSystem) -> list[int]:
    if cfg.periods is not None:
        return list(cfg.periods)
    return [d for d in range(1, system.p + 1) if system.p % d == 0]


def analyze_records(cfg: RunConfig, system: TriangularSystem) -> list[CycleRecord]:
    found = periodic_orbits_by_period(
        system, cfg.phase, _periods(cfg, system), None, cfg.search_grid, cfg.newton_tol, cfg.center_tol
    )
    return [rec for q in found for rec in found[q]]


def _closed_forms(cfg: RunConfig, params, system: TriangularSystem) -> list[tuple[str, np.ndarray, str | None]]:
    """Closed-form reference points at phase 0 with their verdicts, per bundled model."""
    if isinstance(params, LeslieGowerParams):
        cyc = leslie_gower_cycles(params)
        spec = leslie_gower_spectra(params, cfg.center_tol)
        return [
            ("O", cyc.origin, spec["O"].verdict.value),
            ("E_x", cyc.e_x[0], spec["E_x"].verdict.value),
            ("E_y", cyc.e_y[0], spec["E_y"].verdict.value),
            ("C*", cyc.c2[0], spec["C*"].verdict.value),
        ]
    if isinstance(params, LogisticParams):
        st = logistic_spectra_and_regions(params, cfg.center_tol)
        fp = st.fixed_points
        out = [("E0", fp.e0, st.spectra["E0"].verdict.value)]
        if fp.e1 is not None:
            out.append(("E1", fp.e1, st.spectra["E1"].verdict.value))
        out += [(f"E2[{i}]", pt, st.spectra[f"E2[{i}]"].verdict.value) for i, pt in enumerate(fp.e2)]
        return out
    if isinstance(params, (RickerParams, RickerKParams)):
        kp = params.to_k() if isinstance(params, RickerParams) else params
        pts = [("O", np.zeros(kp.k))]
        for j in range(kp.k):
            # the sub-community of the first j+1 species at equilibrium, others absent
            c = np.zeros(kp.k)
            c[: j + 1] = interior_fixed_point(kp.mu[:j])
            pts.append(("C*" if j == kp.k - 1 else ("E_1" if j == 0 else f"C{j + 1}"), c))
        for j in range(1, kp.k):
            e = np.zeros(kp.k)
            e[j] = 1.0
            pts.append((f"E_{j + 1}", e))
        return [(n, x, None) for n, x in pts]
    return []


def _at_phase(system: TriangularSystem, x: np.ndarray, phase: int) -> np.ndarray:
    for n in range(phase):
        x = system[n](x)
    return x


def run_analyze(cfg: RunConfig) -> RunResult:
    system, params = build_model(cfg)
    k = system.k
    records = analyze_records(cfg, system)
    refs = [(n, _at_phase(system, x, cfg.phase), v) for n, x, v in _closed_forms(cfg, params, system)]
    cols = (
        [Column("cycle", "int"), Column("phase", "int"), Column("period", "int"), Column("window", "int")]
        + [Column("scenario", "str"), Column("verdict", "str")]
        + [Column("n_stable", "int"), Column("n_center", "int"), Column("n_unstable", "int")]
        + [Column(c) for c in _xcols("lambda", k)]
        + [Column(c) for c in _xcols("x", k)]
        + [Column("residual"), Column("orbit", "str")]
        + [Column("closed_form", "str"), Column("closed_form_delta"), Column("closed_form_verdict", "str")]
    )
    sink = _Sink(cfg, "cycles", cols)
    for i, rec in enumerate(records):
        row = {
            "cycle": i,
            "phase": rec.phase,
            "period": rec.period,
            "window": rec.window,
            "scenario": rec.scenario.value if rec.scenario else None,
            "verdict": rec.spectrum.verdict.value,
            "n_stable": rec.spectrum.n_stable,
            "n_center": rec.spectrum.n_center,
            "n_unstable": rec.spectrum.n_unstable,
            "residual": float(np.max(rec.residuals)),
            "orbit": ";".join(_fmt_point(x) for x in rec.points),
            "closed_form": None,
            "closed_form_delta": None,
            "closed_form_verdict": None,
        }
        row.update(zip(_xcols("lambda", k), np.real(rec.spectrum.eigenvalues)))
        row.update(zip(_xcols("x", k), rec.point))
        if refs:
            d = [float(np.max(np.abs(rec.point - x))) for _, x, _ in refs]
            j = int(np.argmin(d))
            row.update(closed_form=refs[j][0], closed_form_delta=d[j], closed_form_verdict=refs[j][2])
        sink.write(row)
    summary = {
        "command": "analyze",
        "system": _system_info(system),
        "phase": cfg.phase,
        "periods": _periods(cfg, system),
        "n_cycles": len(records),
        "config": _config_echo(cfg),
    }
    return sink.finish(summary)


def verdict_signature(rows_or_records) -> str:
    """Compact ``period:verdict`` list used to compare scans with analyze output."""
    parts = []
    for r in rows_or_records:
        if isinstance(r, CycleRecord):
            parts.append(f"{r.period}:{r.spectrum.verdict.value}")
        else:
            parts.append(f"{r['period']}:{r['verdict']}")
    return ";".join(parts)


# ------------------------------------------------------------- region scan

_PREDICATES = {
    "logistic": [
        Column("delta2"),
        Column("reality"),
        Column("delta2_nonneg", "bool"),
        Column("reality_nonneg", "bool"),
        Column("E0_stable", "bool"),
        Column("E1_stable", "bool"),
        Column("E2_stable", "bool"),
    ],
    "leslie-gower": [Column("exclusion_quotient"), Column("coexistence", "bool"), Column("quotient_gt_1", "bool")],
    "ricker": [Column("interior_residual"), Column("interior_stable", "bool")],
    "custom": [],
}


def _predicates(cfg: RunConfig, params) -> dict:
    if isinstance(params, LogisticParams):
        mu0, mu1 = params.mu
        _, d2 = deltas(mu0, mu1)
        rp = reality_polynomial(mu0, mu1)
        st = logistic_spectra_and_regions(params, cfg.center_tol)
        e2 = [v for n, v in st.table2.items() if n.startswith("E2")]
        return {
            "delta2": d2,
            "reality": rp,
            "delta2_nonneg": d2 >= 0,
            "reality_nonneg": rp >= 0,
            "E0_stable": st.table2["E0"],
            "E1_stable": st.table2.get("E1"),
            "E2_stable": any(e2) if e2 else None,
        }
    if isinstance(params, LeslieGowerParams):
        c = exclusion_quotient(params)
        return {"exclusion_quotient": c, "coexistence": leslie_gower_cycles(params).coexistence, "quotient_gt_1": c > 1}
    if isinstance(params, (RickerParams, RickerKParams)):
        st = ricker_stability_and_generalization(params, cfg.center_tol)
        return {"interior_residual": st.residual, "interior_stable": st.satisfied}
    return {}


def run_region_scan(cfg: RunConfig) -> RunResult:
    if len(cfg.scan_axes) != 2:
        raise ConfigError("scan.axes", f"region scan needs exactly 2 axes, got {len(cfg.scan_axes)}")
    a0, a1 = cfg.scan_axes
    pred_cols = _PREDICATES[cfg.model]
    cols = (
        [Column(a0.name), Column(a1.name), Column("status", "str"), Column("error", "str")]
        + pred_cols
        + [Column("n_cycles", "int"), Column("verdicts", "str"), Column("witnesses", "int")]
    )
    # at high resolution rows only go to disk
    sink = _Sink(cfg, "region-scan", cols, keep=cfg.out is None or a0.n * a1.n <= 10_000)
    n_failed = 0
    try:
        for v0 in a0.values():
            for v1 in a1.values():
                row = {c.name: None for c in cols}
                row.update({a0.name: v0, a1.name: v1, "status": "ok", "error": ""})
                try:
                    cell = with_param(with_param(cfg, a0.name, v0), a1.name, v1)
                    system, params = build_model(cell)
                    row.update(_predicates(cell, params))
                    if cfg.scan_numeric:
                        recs = analyze_records(cell, system)
                        row["n_cycles"] = len(recs)
                        row["verdicts"] = verdict_signature(recs)
                    if cfg.scan_witnesses:
                        op = compose(system, cell.phase, system.p)
                        known = find_fixed_points(op, None, cell.search_grid, cell.newton_tol)
                        res = period2_absence_test(
                            op, [r.point for r in known], None, cell.search_grid, cell.newton_tol
                        )
                        row["witnesses"] = len(res.witnesses)
                except (ConfigError, ValueError, *SOLVER_ERRORS) as exc:
                    n_failed += 1
                    row = {c.name: None for c in cols}
                    row.update({a0.name: v0, a1.name: v1, "status": "failed", "error": f"{type(exc).__name__}: {exc}"})
                sink.write(row)
    except BaseException:
        sink.abort()
        raise
    summary = {
        "command": "region-scan",
        "model": cfg.model,
        "axes": [asdict(a) for a in (a0, a1)],
        "cells": a0.n * a1.n,
        "failed": n_failed,
        "config": _config_echo(cfg),
    }
    return sink.finish(summary)


# ----------------------------------------------------------- verify-global

_CODES = {ESCAPED: "escaped", UNCONVERGED: "unconverged", DIVERGED: "diverged"}


def run_verify_global(cfg: RunConfig) -> RunResult:
    system, _ = build_model(cfg)
    k = system.k
    op = compose(system, cfg.phase, system.p)
    targets = find_fixed_points(op, None, cfg.search_grid, cfg.newton_tol, cfg.center_tol)
    p2 = period2_absence_test(op, [t.point for t in targets], None, cfg.search_grid, cfg.newton_tol)
    box = sampling_box(cfg, system)
    rep = verify_global_convergence(
        system,
        targets,
        box,
        cfg.grid if len(cfg.grid) > 1 else cfg.grid[0],
        cfg.max_iters,
        cfg.tol,
        cfg.phase,
        cfg.interior,
        cfg.jitter,
        cfg.seed,
    )
    if p2.witnesses:
        verdict, code = "criterion-violated", EXIT_VIOLATED
    elif rep.fraction == 1.0:
        verdict, code = "criterion-satisfied", EXIT_OK
    else:
        verdict, code = "inconclusive", EXIT_INCONCLUSIVE
    cols = (
        [Column("sample", "int")]
        + [Column(c) for c in _xcols("x0_", k)]
        + [Column("in_domain", "bool"), Column("target", "int"), Column("outcome", "str"), Column("steps", "int")]
        + [Column(c) for c in _xcols("final_", k)]
    )
    sink = _Sink(cfg, "convergence", cols)
    for i in range(rep.samples.shape[0]):
        a = int(rep.assignment[i])
        row = {
            "sample": i,
            "in_domain": bool(rep.in_domain[i]),
            "target": a,
            "outcome": f"target-{a}" if a >= 0 else _CODES[a],
            "steps": int(rep.steps[i]),
        }
        row.update(zip(_xcols("x0_", k), rep.samples[i]))
        row.update(zip(_xcols("final_", k), rep.final_states[i]))
        sink.write(row)
    summary = {
        "command": "verify-global",
        "system": _system_info(system),
        "verdict": verdict,
        "fraction": rep.fraction,
        "witnesses": [np.asarray(w) for w in p2.witnesses],
        "period2_grid": list(p2.grid_density),
        "period2_degenerate": p2.degenerate,
        "targets": [
            {"index": i, "point": t.point, "period": t.period, "verdict": t.spectrum.verdict.value}
            for i, t in enumerate(targets)
        ],
        "counts": {(f"target-{a}" if a >= 0 else _CODES[a]): n for a, n in rep.counts().items()},
        "nonconvergent": rep.nonconvergent,
        "max_iters_used": rep.max_iters_used,
        "tol": rep.tol,
        "config": _config_echo(cfg),
    }
    return sink.finish(summary, code)


# -------------------------------------------------------------------- main

COMMANDS = {
    "simulate": run_simulate,
    "analyze": run_analyze,
    "region-scan": run_region_scan,
    "verify-global": run_verify_global,
}


def _grid_arg(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or N,N, got {text!r}") from None
    if not 1 <= len(vals) <= 2:
        raise argparse.ArgumentTypeError("expected N or N,N")
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="trimap", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="YAML run configuration")
        sp.add_argument("--out", help="output file (CSV also writes <out>.summary.json)")
        sp.add_argument("--format", choices=["csv", "json"])
        sp.add_argument("--seed", type=int)
        sp.add_argument("--grid", type=_grid_arg, help="sample density N or N,N (scan resolution for region-scan)")
        sp.add_argument("--max-iters", type=int)
        sp.add_argument("--tol", type=float)
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    over = {"out": args.out, "format": args.format, "seed": args.seed, "max_iters": args.max_iters, "tol": args.tol}
    if args.grid is not None:
        if args.command == "region-scan":
            ns = args.grid * 2 if len(args.grid) == 1 else args.grid
            if len(cfg.scan_axes) != 2:
                raise ConfigError("scan.axes", "--grid needs two configured scan axes")
            over["scan_axes"] = tuple(replace(a, n=n) for a, n in zip(cfg.scan_axes, ns))
        else:
            over["grid"] = args.grid
    if args.out and not args.format:
        suffix = Path(args.out).suffix.lstrip(".")
        if suffix in ("csv", "json"):
            over["format"] = suffix
    if over.get("format") and not args.out and cfg.out:
        over["out"] = str(Path(cfg.out).with_suffix("." + over["format"]))
    return cfg.with_overrides(**over)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PeriodWarning)
            result = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OutputError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SOLVER_ERRORS as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    s = result.summary
    line = f"{args.command}: {s.get('n_rows', len(result.rows))} rows"
    if "verdict" in s:
        line += f", verdict {s['verdict']} (fraction {s['fraction']:.6g}, {len(s['witnesses'])} witnesses)"
    if result.path:
        line += f" -> {result.path}"
    print(line)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
