"""Tabular result files: CSV (+ JSON sidecar summary) or a single JSON document.

Rows are streamed as they are produced.  Floats are written with 17
significant digits so values survive a round trip bit for bit.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

SCHEMA_VERSION = 1
TYPES = ("float", "int", "bool", "str")

__all__ = ["SCHEMA_VERSION", "Column", "ResultWriter", "ResultFile", "read_output", "validate_output", "fmt_float"]


class OutputError(OSError):
    pass


@dataclass(frozen=True)
class Column:
    name: str
    type: str = "float"

    def __post_init__(self):
        if self.type not in TYPES:
            raise ValueError(f"column type must be one of {TYPES}")


def fmt_float(v: float) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def _cell_text(v, typ: str) -> str:
    if v is None:
        return ""
    if typ == "float":
        return fmt_float(v)
    if typ == "bool":
        return "true" if v else "false"
    if typ == "int":
        return str(int(v))
    return str(v)


def _parse_text(s: str, typ: str):
    if s == "":
        return None
    if typ == "float":
        return float(s)
    if typ == "int":
        return int(s)
    if typ == "bool":
        if s not in ("true", "false"):
            raise ValueError(f"bad boolean {s!r}")
        return s == "true"
    return s


def _json_value(v, typ: str):
    if v is None:
        return None
    if typ == "float":
        v = float(v)
        # JSON has no NaN/inf; mirror the CSV spelling
        return v if math.isfinite(v) else fmt_float(v)
    if typ == "int":
        return int(v)
    if typ == "bool":
        return bool(v)
    return str(v)


def _from_json(v, typ: str):
    if v is None:
        return None
    if typ == "float":
        return float(v)
    return v


def jsonable(obj: Any):
    """Convert numpy scalars/arrays and non-finite floats for ``json.dumps``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return jsonable(obj.tolist())
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else fmt_float(obj)
    if hasattr(obj, "value"):  # enums
        return obj.value
    return str(obj)


def _dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, allow_nan=False)


class ResultWriter:
    """Stream rows to ``path``; call :meth:`close` with the summary record."""

    def __init__(self, path: str | Path, kind: str, columns: Iterable[Column], fmt: str = "csv"):
        self.path = Path(path)
        self.kind = kind
        self.columns = list(columns)
        self.fmt = fmt
        self.n_rows = 0
        if fmt not in ("csv", "json"):
            raise ValueError(f"unknown format {fmt!r}")
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = self.path.open("w", newline="" if fmt == "csv" else None, encoding="utf-8")
        except OSError as exc:
            raise OutputError(f"cannot open {self.path}: {exc}") from exc
        if fmt == "csv":
            self._csv = csv.writer(self._fh)  # RFC 4180: CRLF, so a bare CR gets quoted
            self._csv.writerow([c.name for c in self.columns])
        else:
            head = {
                "schema_version": SCHEMA_VERSION,
                "kind": kind,
                "columns": [{"name": c.name, "type": c.type} for c in self.columns],
            }
            self._fh.write(_dumps(head)[:-1] + ', "rows": [')

    def write(self, row: dict) -> None:
        missing = [c.name for c in self.columns if c.name not in row]
        extra = set(row) - {c.name for c in self.columns}
        if missing or extra:
            raise ValueError(f"row keys mismatch: missing {missing}, unexpected {sorted(extra)}")
        if self.fmt == "csv":
            self._csv.writerow([_cell_text(row[c.name], c.type) for c in self.columns])
        else:
            vals = [_json_value(row[c.name], c.type) for c in self.columns]
            self._fh.write(("\n" if self.n_rows == 0 else ",\n") + json.dumps(vals, allow_nan=False))
        self.n_rows += 1

    def close(self, summary: dict) -> None:
        summary = dict(summary, n_rows=self.n_rows)
        if self.fmt == "csv":
            self._fh.close()
            side = {
                "schema_version": SCHEMA_VERSION,
                "kind": self.kind,
                "columns": [{"name": c.name, "type": c.type} for c in self.columns],
                "summary": summary,
            }
            try:
                Path(str(self.path) + ".summary.json").write_text(_dumps(side) + "\n", encoding="utf-8")
            except OSError as exc:
                raise OutputError(f"cannot write summary for {self.path}: {exc}") from exc
        else:
            self._fh.write('\n], "summary": ' + _dumps(summary) + "}\n")
            self._fh.close()

    def abort(self) -> None:
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.abort()
        return False


@dataclass(frozen=True)
class ResultFile:
    schema_version: int
    kind: str
    columns: list[Column]
    rows: list[dict]
    summary: dict

    def column(self, name: str) -> list:
        return [r[name] for r in self.rows]


def read_output(path: str | Path) -> ResultFile:
    """Parse a file written by :class:`ResultWriter` (format from the suffix)."""
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text(encoding="utf-8"))
        cols = [Column(c["name"], c["type"]) for c in doc["columns"]]
        rows = [{c.name: _from_json(v, c.type) for c, v in zip(cols, r)} for r in doc["rows"]]
        return ResultFile(doc["schema_version"], doc["kind"], cols, rows, doc["summary"])
    side = json.loads(Path(str(path) + ".summary.json").read_text(encoding="utf-8"))
    cols = [Column(c["name"], c["type"]) for c in side["columns"]]
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != [c.name for c in cols]:
            raise ValueError(f"{path}: header does not match summary columns")
        rows = [{c.name: _parse_text(s, c.type) for c, s in zip(cols, r)} for r in reader]
    return ResultFile(side["schema_version"], side["kind"], cols, rows, side["summary"])


_PY = {"float": float, "int": int, "bool": bool, "str": str}


def validate_output(res: ResultFile) -> list[str]:
    """Structural and per-kind invariant checks; returns a list of problems."""
    errs = []
    if res.schema_version != SCHEMA_VERSION:
        errs.append(f"schema_version {res.schema_version} != {SCHEMA_VERSION}")
    if res.summary.get("n_rows") != len(res.rows):
        errs.append("summary n_rows does not match row count")
    for i, row in enumerate(res.rows):
        for c in res.columns:
            v = row.get(c.name)
            if v is not None and not isinstance(v, _PY[c.type]):
                errs.append(f"row {i}: {c.name} is not {c.type}")
            if c.type == "int" and isinstance(v, bool):
                errs.append(f"row {i}: {c.name} is not int")
    check = _KIND_CHECKS.get(res.kind)
    if check is not None:
        errs.extend(check(res))
    return errs


def _check_orbit(res: ResultFile) -> list[str]:
    steps = res.column("step")
    errs = []
    if steps != list(range(len(steps))):
        errs.append("orbit steps must be 0, 1, 2, ...")
    p = res.summary.get("system", {}).get("p")
    ph0 = res.summary.get("phase", 0)
    if p and any(r["phase"] != (ph0 + r["step"]) % p for r in res.rows):
        errs.append("phase column inconsistent with step")
    return errs


def _check_cycles(res: ResultFile) -> list[str]:
    ok = {"sink", "source", "saddle", "non-hyperbolic"}
    errs = [f"row {i}: bad verdict {r['verdict']!r}" for i, r in enumerate(res.rows) if r["verdict"] not in ok]
    for i, r in enumerate(res.rows):
        if r["n_stable"] + r["n_center"] + r["n_unstable"] != res.summary["system"]["k"]:
            errs.append(f"row {i}: spectrum counts do not add up to k")
    return errs


def _check_region(res: ResultFile) -> list[str]:
    axes = res.summary.get("axes", [])
    errs = []
    expected = math.prod(a["n"] for a in axes) if axes else 0
    if len(res.rows) != expected:
        errs.append(f"region scan has {len(res.rows)} cells, expected {expected}")
    for i, r in enumerate(res.rows):
        if r["status"] not in ("ok", "failed"):
            errs.append(f"row {i}: status must be ok or failed")
        if r["status"] == "failed" and not r["error"]:
            errs.append(f"row {i}: failed cell without an error message")
    return errs


def _check_convergence(res: ResultFile) -> list[str]:
    s = res.summary
    errs = []
    if s.get("verdict") not in ("criterion-satisfied", "criterion-violated", "inconclusive"):
        errs.append(f"bad verdict {s.get('verdict')!r}")
    inside = [r for r in res.rows if r["in_domain"]]
    if inside:
        frac = sum(r["target"] >= 0 for r in inside) / len(inside)
        if abs(frac - s["fraction"]) > 1e-12:
            errs.append("fraction does not match per-sample assignments")
    if s.get("verdict") == "criterion-satisfied" and (s.get("witnesses") or s.get("fraction") != 1.0):
        errs.append("criterion-satisfied needs no witnesses and fraction 1")
    if s.get("verdict") == "criterion-violated" and not s.get("witnesses"):
        errs.append("criterion-violated needs witnesses")
    return errs


_KIND_CHECKS = {
    "orbit": _check_orbit,
    "cycles": _check_cycles,
    "region-scan": _check_region,
    "convergence": _check_convergence,
}
