"""Experiment configuration: TOML parsing with full validation, emission and overrides."""
from __future__ import annotations

import copy
import hashlib
import math
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib
import tomli_w

from .diagnostics.functionals import virial_param_violations
from .evolution import INTEGRATORS

INITIAL_KINDS = ("gaussian", "soliton", "file")
OUTPUT_FORMATS = ("csv", "bin")

DEFAULTS: dict = {
    "model": {"delta": 1.0},
    "grid": {"n_points": 1024, "length": 200.0},
    "time": {
        "dt": 1e-3,
        "t_end": 5.0,
        "checkpoint_stride": 500,
        "integrator": "integrating-factor-rk4",
        "dealias": True,
    },
    "initial": {
        "kind": "gaussian",
        "amplitude": 1.0,
        "width": 1.0,
        "center": 0.0,
        "soliton_speed": 1.5,
        "path": "",
    },
    "diagnostics": {
        "b": 0.5,
        "m": 0.2,
        "q_exp": 1.5,
        "sigma": 1.0,
        "lambda": 1.0,
        "alpha": 0.5,
        "c0": 2.0,
        "c1": 0.0,
        "corollary": True,
        "rho_sign": 1,
        "invariants": True,
        "regions": True,
        "functionals": True,
        "weighted_norm": True,
        "smoothing": True,
    },
    "inequalities": {"enabled": False, "n_functions": 6, "n_points": 1024, "length": 100.0},
    "limits": {
        "deep_deltas": [5.0, 20.0, 50.0],
        "shallow_deltas": [0.1, 0.3],
        "t_compare": 1.0,
    },
    "output": {"directory": "runs", "formats": ["csv", "bin"]},
    "run": {"seed": 0, "threads": 1},
}


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists every violated constraint."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  - " + "\n  - ".join(self.errors))


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration; ``data`` mirrors the TOML sections."""

    data: dict = field(compare=True)

    def __getitem__(self, section: str) -> dict:
        return self.data[section]

    def __hash__(self):
        return hash(emit_config(self))

    def section(self, name: str) -> dict:
        return copy.deepcopy(self.data[name])

    def content_hash(self) -> str:
        """Hash of everything that can change results (not threads or output location)."""
        d = copy.deepcopy(self.data)
        d["run"].pop("threads", None)
        d.pop("output", None)
        return hashlib.sha256(tomli_w.dumps(d).encode()).hexdigest()


def _type_ok(default, value) -> bool:
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, int):
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(default, float):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if isinstance(default, str):
        return isinstance(value, str)
    if isinstance(default, list):
        return isinstance(value, list)
    return True


def _coerce(default, value):
    if isinstance(default, float) and not isinstance(default, bool):
        return float(value)
    if isinstance(default, list) and default and isinstance(default[0], float):
        return [float(v) for v in value]
    return value


def _merge(raw: dict, errors: list) -> dict:
    data = copy.deepcopy(DEFAULTS)
    for sec, body in raw.items():
        if sec not in DEFAULTS:
            errors.append(f"unknown section [{sec}]")
            continue
        if not isinstance(body, dict):
            errors.append(f"[{sec}] must be a table")
            continue
        for key, value in body.items():
            if key not in DEFAULTS[sec]:
                errors.append(f"unknown key {sec}.{key}")
                continue
            default = DEFAULTS[sec][key]
            if not _type_ok(default, value):
                errors.append(f"{sec}.{key}={value!r} has the wrong type (expected {type(default).__name__})")
                continue
            data[sec][key] = _coerce(default, value)
    return data


def _validate(d: dict) -> list:
    e = []
    delta = d["model"]["delta"]
    if not (math.isfinite(delta) and delta > 0):
        e.append(f"model.delta={delta} must be positive")
    n, L = d["grid"]["n_points"], d["grid"]["length"]
    if n < 16 or n % 2:
        e.append(f"grid.n_points={n} must be an even integer >= 16")
    if not L > 0:
        e.append(f"grid.length={L} must be positive")
    t = d["time"]
    if not t["dt"] > 0:
        e.append(f"time.dt={t['dt']} must be positive")
    if not t["t_end"] >= 0:
        e.append(f"time.t_end={t['t_end']} must be nonnegative")
    elif t["dt"] > 0:
        steps = round(t["t_end"] / t["dt"])
        if abs(steps * t["dt"] - t["t_end"]) > 1e-9 * max(t["t_end"], t["dt"]):
            e.append(f"time.t_end={t['t_end']} must be a whole number of steps of time.dt={t['dt']}")
    if t["checkpoint_stride"] < 1:
        e.append("time.checkpoint_stride must be >= 1")
    if t["integrator"] not in INTEGRATORS:
        e.append(f"time.integrator must be one of {INTEGRATORS}")
    ini = d["initial"]
    if ini["kind"] not in INITIAL_KINDS:
        e.append(f"initial.kind must be one of {INITIAL_KINDS}")
    if not ini["width"] > 0:
        e.append("initial.width must be positive")
    if ini["kind"] == "soliton" and delta > 0 and not ini["soliton_speed"] > 1.0 / delta:
        e.append(
            f"initial.soliton_speed={ini['soliton_speed']} must exceed 1/delta={1.0 / delta:g} "
            "(solitary waves need c > 1/delta)"
        )
    if ini["kind"] == "file" and not ini["path"]:
        e.append("initial.path is required when initial.kind = 'file'")
    dg = d["diagnostics"]
    e.extend(
        "diagnostics: " + msg
        for msg in virial_param_violations(
            dg["b"], dg["m"], dg["q_exp"], dg["sigma"], dg["lambda"], dg["alpha"], dg["c0"],
            dg["c1"], dg["corollary"],
        )
    )
    if dg["rho_sign"] not in (1, -1):
        e.append("diagnostics.rho_sign must be 1 or -1")
    iq = d["inequalities"]
    if iq["n_functions"] < 1:
        e.append("inequalities.n_functions must be >= 1")
    if iq["n_points"] < 16 or iq["n_points"] % 2:
        e.append("inequalities.n_points must be an even integer >= 16")
    if not iq["length"] > 0:
        e.append("inequalities.length must be positive")
    lim = d["limits"]
    if any(not x > 0 for x in lim["deep_deltas"] + lim["shallow_deltas"]):
        e.append("limits deltas must be positive")
    if not lim["t_compare"] > 0:
        e.append("limits.t_compare must be positive")
    bad = [f for f in d["output"]["formats"] if f not in OUTPUT_FORMATS]
    if bad:
        e.append(f"output.formats has unknown entries {bad}; allowed {OUTPUT_FORMATS}")
    r = d["run"]
    if r["seed"] < 0:
        e.append("run.seed must be nonnegative")
    if r["threads"] < 1:
        e.append("run.threads must be >= 1")
    return e


def build_config(raw: dict) -> ExperimentConfig:
    errors: list = []
    data = _merge(raw, errors)
    errors.extend(_validate(data))
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(data)


def parse_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Parse TOML text (with optional ``{"section.key": value}`` overrides) and validate."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"syntax error: {exc}"]) from None
    errors = []
    for dotted, value in (overrides or {}).items():
        sec, _, key = dotted.partition(".")
        if not key:
            errors.append(f"override {dotted!r} must have the form section.key")
            continue
        raw.setdefault(sec, {})
        if not isinstance(raw[sec], dict):
            errors.append(f"[{sec}] must be a table")
            continue
        raw[sec][key] = value
    if errors:
        raise ConfigError(errors)
    return build_config(raw)


def parse_override_value(text: str):
    """Interpret a command-line value as a TOML literal, falling back to a string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def emit_config(cfg: ExperimentConfig) -> str:
    return tomli_w.dumps(cfg.data)
