"""Run configuration: strict YAML parsing into dataclasses.

Every mapping in the file is checked against a fixed key set, and every
error names the offending field path and, when known, its line.
"""
from __future__ import annotations

import importlib
import warnings
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import yaml

from .core import Box, PeriodWarning, TriangularSystem
from .models import (
    LeslieGowerParams,
    LogisticParams,
    RickerKParams,
    RickerParams,
    leslie_gower_system,
    logistic_system,
    ricker_k_system,
    ricker_system,
)

__all__ = [
    "ConfigError",
    "RunConfig",
    "ScanAxis",
    "load_config",
    "parse_config",
    "build_model",
    "MODELS",
]

MODELS = ("leslie-gower", "logistic", "ricker", "custom")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    def __init__(self, path: str, message: str, line: int | None = None):
        self.path = path
        self.line = line
        self.message = message
        where = f"{path}" + (f" (line {line})" if line is not None else "")
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class ScanAxis:
    name: str
    min: float
    max: float
    n: int

    def values(self) -> list[float]:
        if self.n == 1:
            return [self.min]
        step = (self.max - self.min) / (self.n - 1)
        return [self.min + i * step for i in range(self.n)]


@dataclass(frozen=True)
class RunConfig:
    model: str = "leslie-gower"
    params: dict = field(default_factory=dict)
    box: tuple[tuple[float, float], ...] | None = None
    grid: tuple[int, ...] = (50,)
    search_grid: int = 128
    interior: bool = True
    phase: int = 0
    periods: tuple[int, ...] | None = None  # None: every divisor of the system period
    x0: tuple[float, ...] | None = None
    steps: int = 1000
    tol: float = 1e-6
    orbit_tol: float = 1e-10
    newton_tol: float = 1e-12
    center_tol: float = 1e-8
    cluster_tol: float = 1e-6
    max_iters: int = 10_000
    scan_axes: tuple[ScanAxis, ...] = ()
    scan_numeric: bool = True
    scan_witnesses: bool = False
    out: str | None = None
    format: str = "csv"
    seed: int = 0
    jitter: float = 0.0

    def with_overrides(self, **kw) -> RunConfig:
        kw = {k: v for k, v in kw.items() if v is not None}
        cfg = replace(self, **kw)
        validate(cfg)
        return cfg


# yaml key -> RunConfig field; None marks a nested block
_TOP = {
    "model": "model",
    "params": "params",
    "box": "box",
    "grid": "grid",
    "search_grid": "search_grid",
    "interior": "interior",
    "phase": "phase",
    "periods": "periods",
    "x0": "x0",
    "steps": "steps",
    "tolerances": None,
    "max_iters": "max_iters",
    "scan": None,
    "output": None,
    "seed": "seed",
    "jitter": "jitter",
}
_TOLS = {"tol": "tol", "orbit": "orbit_tol", "newton": "newton_tol", "center": "center_tol", "cluster": "cluster_tol"}
_SCAN = {"axes": None, "numeric": "scan_numeric", "witnesses": "scan_witnesses"}
_OUTPUT = {"path": "out", "format": "format"}
_AXIS = {"name", "min", "max", "n"}

_PARAM_KEYS = {
    "leslie-gower": {"mu", "alpha", "beta", "K", "L"},
    "logistic": {"mu", "nu"},
    "ricker": {"r", "s", "mu", "rates"},
    "custom": {"factory", "kwargs"},
}

# scan axis name -> (params key, index or None)
_AXIS_TARGETS = {
    "leslie-gower": {
        "mu": ("mu", None), "alpha": ("alpha", None), "beta": ("beta", None),
        "K0": ("K", 0), "K1": ("K", 1), "L0": ("L", 0), "L1": ("L", 1),
    },
    "logistic": {"mu0": ("mu", 0), "mu1": ("mu", 1), "nu0": ("nu", 0), "nu1": ("nu", 1)},
    "ricker": {
        "mu": ("mu", None), "r0": ("r", 0), "r1": ("r", 1), "r2": ("r", 2), "s0": ("s", 0), "s1": ("s", 1),
    },
    "custom": {},
}


def _lines(node: yaml.Node, path: str = "", out: dict | None = None) -> dict[str, int]:
    out = {} if out is None else out
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            _lines(v, f"{path}.{k.value}" if path else str(k.value), out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _lines(v, f"{path}[{i}]", out)
    return out


class _Reader:
    def __init__(self, lines: dict[str, int]):
        self.lines = lines

    def err(self, path: str, msg: str) -> ConfigError:
        return ConfigError(path, msg, self.lines.get(path))

    def mapping(self, value, path: str, allowed) -> dict:
        if not isinstance(value, dict):
            raise self.err(path or "<root>", "expected a mapping")
        for key in value:
            if key not in allowed:
                p = f"{path}.{key}" if path else str(key)
                raise self.err(p, f"unknown key (allowed: {', '.join(sorted(allowed))})")
        return value

    def number(self, value, path: str, positive=False) -> float:
        if isinstance(value, str):
            # YAML 1.1 reads exponent floats without a dot (1e-6) as strings
            try:
                value = float(value)
            except ValueError:
                pass
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.err(path, f"expected a number, got {value!r}")
        if positive and not value > 0:
            raise self.err(path, f"must be > 0, got {value}")
        return float(value)

    def integer(self, value, path: str, minimum: int | None = None) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.err(path, f"expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            raise self.err(path, f"must be >= {minimum}, got {value}")
        return value

    def boolean(self, value, path: str) -> bool:
        if not isinstance(value, bool):
            raise self.err(path, f"expected true/false, got {value!r}")
        return value

    def seq(self, value, path: str) -> list:
        if not isinstance(value, list):
            raise self.err(path, f"expected a list, got {value!r}")
        return value


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(source, f"invalid YAML: {exc}", mark.line + 1 if mark else None) from None
    if data is None:
        data = {}
    rd = _Reader(_lines(node) if node is not None else {})
    rd.mapping(data, "", _TOP)
    kw: dict[str, Any] = {}

    if "model" in data:
        if data["model"] not in MODELS:
            raise rd.err("model", f"unknown model {data['model']!r} (choose from {', '.join(MODELS)})")
        kw["model"] = data["model"]
    model = kw.get("model", "leslie-gower")
    if "params" in data:
        params = rd.mapping(data["params"], "params", _PARAM_KEYS[model])
        kw["params"] = dict(params)
    if "box" in data:
        pairs = []
        for i, pr in enumerate(rd.seq(data["box"], "box")):
            pr = rd.seq(pr, f"box[{i}]")
            if len(pr) != 2:
                raise rd.err(f"box[{i}]", "each box entry is [lower, upper]")
            lo, hi = (rd.number(v, f"box[{i}][{j}]") for j, v in enumerate(pr))
            if not lo < hi:
                raise rd.err(f"box[{i}]", f"lower {lo} must be below upper {hi}")
            pairs.append((lo, hi))
        kw["box"] = tuple(pairs)
    if "grid" in data:
        g = data["grid"]
        g = g if isinstance(g, list) else [g]
        kw["grid"] = tuple(rd.integer(v, f"grid[{i}]" if isinstance(data["grid"], list) else "grid", 2) for i, v in enumerate(g))
    if "search_grid" in data:
        kw["search_grid"] = rd.integer(data["search_grid"], "search_grid", 2)
    if "interior" in data:
        kw["interior"] = rd.boolean(data["interior"], "interior")
    if "phase" in data:
        kw["phase"] = rd.integer(data["phase"], "phase", 0)
    if "periods" in data:
        kw["periods"] = tuple(rd.integer(v, f"periods[{i}]", 1) for i, v in enumerate(rd.seq(data["periods"], "periods")))
    if "x0" in data:
        kw["x0"] = tuple(rd.number(v, f"x0[{i}]") for i, v in enumerate(rd.seq(data["x0"], "x0")))
    if "steps" in data:
        kw["steps"] = rd.integer(data["steps"], "steps", 1)
    if "max_iters" in data:
        kw["max_iters"] = rd.integer(data["max_iters"], "max_iters", 1)
    if "seed" in data:
        kw["seed"] = rd.integer(data["seed"], "seed", 0)
    if "jitter" in data:
        j = rd.number(data["jitter"], "jitter")
        if not 0 <= j <= 1:
            raise rd.err("jitter", "jitter is a fraction of the cell width in [0, 1]")
        kw["jitter"] = j
    if "tolerances" in data:
        tols = rd.mapping(data["tolerances"], "tolerances", _TOLS)
        for key, name in _TOLS.items():
            if key in tols:
                kw[name] = rd.number(tols[key], f"tolerances.{key}", positive=True)
    if "scan" in data:
        scan = rd.mapping(data["scan"], "scan", _SCAN)
        if "axes" in scan:
            axes = []
            for i, ax in enumerate(rd.seq(scan["axes"], "scan.axes")):
                p = f"scan.axes[{i}]"
                ax = rd.mapping(ax, p, _AXIS)
                missing = _AXIS - set(ax)
                if missing:
                    raise rd.err(p, f"missing keys: {', '.join(sorted(missing))}")
                name = ax["name"]
                if name not in _AXIS_TARGETS[model]:
                    allowed = ", ".join(_AXIS_TARGETS[model]) or "none"
                    raise rd.err(f"{p}.name", f"cannot scan {name!r} for model {model} (allowed: {allowed})")
                lo = rd.number(ax["min"], f"{p}.min")
                hi = rd.number(ax["max"], f"{p}.max")
                n = rd.integer(ax["n"], f"{p}.n", 1)
                if hi < lo:
                    raise rd.err(p, "max must not be below min")
                axes.append(ScanAxis(name, lo, hi, n))
            kw["scan_axes"] = tuple(axes)
        for key in ("numeric", "witnesses"):
            if key in scan:
                kw[_SCAN[key]] = rd.boolean(scan[key], f"scan.{key}")
    if "output" in data:
        out = rd.mapping(data["output"], "output", _OUTPUT)
        if "path" in out:
            if not isinstance(out["path"], str):
                raise rd.err("output.path", "expected a string")
            kw["out"] = out["path"]
            suffix = Path(out["path"]).suffix.lstrip(".")
            if "format" not in out and suffix in FORMATS:
                kw["format"] = suffix
        if "format" in out:
            if out["format"] not in FORMATS:
                raise rd.err("output.format", f"format must be one of {FORMATS}")
            kw["format"] = out["format"]
    cfg = RunConfig(**kw)
    try:
        validate(cfg)
    except ConfigError as exc:
        raise ConfigError(exc.path, exc.message, rd.lines.get(exc.path)) from None
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(), str(path))


def validate(cfg: RunConfig) -> None:
    """Semantic checks shared by file parsing and command-line overrides."""
    for name in ("tol", "orbit_tol", "newton_tol", "center_tol", "cluster_tol"):
        if not getattr(cfg, name) > 0:
            raise ConfigError(name, f"tolerance must be > 0, got {getattr(cfg, name)}")
    if any(g < 2 for g in cfg.grid):
        raise ConfigError("grid", "grid densities must be >= 2")
    if cfg.search_grid < 2:
        raise ConfigError("search_grid", "must be >= 2")
    if cfg.max_iters < 1:
        raise ConfigError("max_iters", "must be >= 1")
    if cfg.format not in FORMATS:
        raise ConfigError("output.format", f"format must be one of {FORMATS}")
    if cfg.model not in MODELS:
        raise ConfigError("model", f"unknown model {cfg.model!r}")
    _model_params(cfg)


def _model_params(cfg: RunConfig):
    p = dict(cfg.params)
    try:
        if cfg.model == "leslie-gower":
            return LeslieGowerParams(**p)
        if cfg.model == "logistic":
            return LogisticParams(**p)
        if cfg.model == "ricker":
            if "rates" in p:
                extra = set(p) - {"rates", "mu"}
                if extra:
                    raise ValueError(f"'rates' form cannot be mixed with {sorted(extra)}")
                mu = p.get("mu", ())
                return RickerKParams(rates=tuple(tuple(s) for s in p["rates"]), mu=tuple(mu) if isinstance(mu, list) else (mu,))
            return RickerParams(**p)
        if "factory" not in p:
            raise ValueError("custom model needs params.factory = 'module:function'")
        return p
    except (TypeError, ValueError) as exc:
        raise ConfigError("params", str(exc)) from None


def with_param(cfg: RunConfig, name: str, value: float) -> RunConfig:
    """Copy of ``cfg`` with one scan-axis parameter replaced."""
    key, idx = _AXIS_TARGETS[cfg.model][name]
    params = dict(cfg.params)
    if idx is None:
        params[key] = value
    else:
        defaults = {f.name: f.default for f in fields(_param_class(cfg.model))}
        seq = list(params.get(key, defaults[key]))
        seq[idx] = value
        params[key] = seq
    return replace(cfg, params=params)


def _param_class(model: str):
    return {"leslie-gower": LeslieGowerParams, "logistic": LogisticParams, "ricker": RickerParams}[model]


def build_model(cfg: RunConfig):
    """Return ``(system, params)`` for the configured model.

    A custom model names a factory ``module:function`` returning a
    :class:`TriangularSystem`; ``kwargs`` are passed through.
    """
    params = _model_params(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PeriodWarning)
        warnings.simplefilter("ignore", RuntimeWarning)
        if cfg.model == "leslie-gower":
            system = leslie_gower_system(params)
        elif cfg.model == "logistic":
            system = logistic_system(params)
        elif cfg.model == "ricker":
            system = ricker_system(params) if isinstance(params, RickerParams) else ricker_k_system(params)
        else:
            mod, _, attr = params["factory"].partition(":")
            try:
                factory = getattr(importlib.import_module(mod), attr)
            except (ImportError, AttributeError) as exc:
                raise ConfigError("params.factory", f"cannot load {params['factory']!r}: {exc}") from None
            try:
                system = factory(**params.get("kwargs", {}))
            except (TypeError, ValueError) as exc:
                raise ConfigError("params.kwargs", f"{params['factory']}: {exc}") from None
            if not isinstance(system, TriangularSystem):
                raise ConfigError("params.factory", "factory must return a TriangularSystem")
    if cfg.box is not None and len(cfg.box) != system.k:
        raise ConfigError("box", f"box has {len(cfg.box)} axes but the model has {system.k} coordinates")
    if cfg.x0 is not None and len(cfg.x0) != system.k:
        raise ConfigError("x0", f"x0 has {len(cfg.x0)} coordinates but the model has {system.k}")
    if cfg.phase >= system.p:
        raise ConfigError("phase", f"phase must be below the system period {system.p}")
    if len(cfg.grid) not in (1, system.k):
        raise ConfigError("grid", f"grid needs 1 or {system.k} densities")
    return system, params


def sampling_box(cfg: RunConfig, system: TriangularSystem) -> Box:
    return Box.from_pairs(cfg.box) if cfg.box is not None else system.sampling_box()
