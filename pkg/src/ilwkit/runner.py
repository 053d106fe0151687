"""Run orchestration: initial data, persistence, diagnostics and manifests.

Every run lives in ``<output.directory>/<command>-<hash>`` where ``hash`` is
derived from the result-relevant configuration. ``manifest.json`` is written
last and atomically, so a directory without one is an interrupted run.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import platform
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, emit_config, parse_config
from .diagnostics import DiagnosticsFlags, DiagnosticsRow, VirialParams, compute_rows
from .evolution import (
    EvolutionConfig,
    NumericalAbort,
    Trajectory,
    evolve,
    evolve_bo,
    evolve_kdv,
    kdv_rescale,
    relative_gap,
)
from .inequalities import TestBattery, remainder_shrinks, run_suite_with_refinement
from .soliton import SolitonSpec, petviashvili_solve, propagation_error
from .spectral import Grid, ModelParams, RealField

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

CHECKPOINT_BIN = "checkpoints.bin"
CHECKPOINT_META = "checkpoints.json"
DIAGNOSTICS_CSV = "diagnostics.csv"
CONFIG_ECHO = "config.toml"
MANIFEST = "manifest.json"


@dataclass
class RunResult:
    run_dir: Path
    status: str
    exit_code: int
    summary: dict = field(default_factory=dict)


# -- small helpers -------------------------------------------------------------


def fmt(value) -> str:
    """CSV cell: 17 significant digits, empty for undefined."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def diagnostics_csv(rows) -> str:
    return csv_text(DiagnosticsRow.columns(), (r.values() for r in rows))


def write_atomic(path: Path, data: bytes | str) -> None:
    path = Path(path)
    if isinstance(data, str):
        data = data.encode()
    tmp = path.with_name(f".{path.name}.tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _unique(items) -> list:
    return list(dict.fromkeys(str(i) for i in items))


def model_params(cfg: ExperimentConfig) -> ModelParams:
    return ModelParams(cfg["model"]["delta"])


def grid_of(cfg: ExperimentConfig) -> Grid:
    return Grid(cfg["grid"]["n_points"], cfg["grid"]["length"])


def virial_params(cfg: ExperimentConfig) -> VirialParams:
    d = cfg["diagnostics"]
    return VirialParams(
        b=d["b"], m=d["m"], q_exp=d["q_exp"], sigma=d["sigma"], lam=d["lambda"], alpha=d["alpha"],
        c0=d["c0"], c1=d["c1"], corollary=d["corollary"], rho_sign=d["rho_sign"],
    )


def diagnostics_flags(cfg: ExperimentConfig) -> DiagnosticsFlags:
    d = cfg["diagnostics"]
    return DiagnosticsFlags(
        invariants=d["invariants"], regions=d["regions"], functionals=d["functionals"],
        weighted_norm=d["weighted_norm"], smoothing=d["smoothing"],
    )


def evolution_config(cfg: ExperimentConfig) -> EvolutionConfig:
    t = cfg["time"]
    return EvolutionConfig(
        model_params(cfg), grid_of(cfg), t["dt"], t["t_end"], dealias=t["dealias"],
        integrator=t["integrator"], checkpoint_stride=t["checkpoint_stride"],
    )


def gaussian(grid: Grid, amplitude: float, width: float, center: float) -> RealField:
    return RealField(grid, amplitude * np.exp(-(((grid.nodes - center) / width) ** 2)))


def initial_field(cfg: ExperimentConfig) -> tuple:
    """``(u0, notes)`` from the ``[initial]`` section."""
    ini, grid = cfg["initial"], grid_of(cfg)
    if ini["kind"] == "gaussian":
        return gaussian(grid, ini["amplitude"], ini["width"], ini["center"]), []
    if ini["kind"] == "soliton":
        res = petviashvili_solve(SolitonSpec(model_params(cfg), ini["soliton_speed"], grid))
        note = f"soliton profile: residual {res.residual_norm:.3e} after {res.iterations} iterations"
        q = np.roll(res.profile.samples, int(round(ini["center"] / grid.spacing)))
        return RealField(grid, q), [note] + ([] if res.converged else ["soliton iteration did not converge"])
    data = np.fromfile(ini["path"], dtype="<f8")
    if data.shape[0] != grid.n_points:
        raise OSError(f"{ini['path']}: expected {grid.n_points} float64 samples, found {data.shape[0]}")
    return RealField(grid, data), []


# -- checkpoint persistence ----------------------------------------------------


def write_checkpoints(run_dir: Path, traj: Trajectory) -> list:
    binp, metap = Path(run_dir) / CHECKPOINT_BIN, Path(run_dir) / CHECKPOINT_META
    write_atomic(binp, np.ascontiguousarray(traj.samples, dtype="<f8").tobytes())
    meta = {
        "dtype": "float64",
        "byte_order": "little",
        "layout": "row-major (checkpoint, node)",
        "shape": list(traj.samples.shape),
        "times": list(traj.times),
        "n_points": traj.grid.n_points,
        "length": traj.grid.length,
        "delta": traj.config.params.delta,
        "dt": traj.config.dt,
    }
    write_atomic(metap, json.dumps(meta, indent=2))
    return [CHECKPOINT_BIN, CHECKPOINT_META]


def read_checkpoints(run_dir: Path) -> tuple:
    """``(times, samples)`` from a run directory."""
    meta = json.loads((Path(run_dir) / CHECKPOINT_META).read_text())
    samples = np.fromfile(Path(run_dir) / CHECKPOINT_BIN, dtype="<f8").reshape(meta["shape"])
    return tuple(meta["times"]), samples


# -- run directory and manifest ------------------------------------------------


class RunDirectory:
    def __init__(self, cfg: ExperimentConfig, command: str):
        self.cfg = cfg
        self.command = command
        self.path = Path(cfg["output"]["directory"]) / f"{command}-{cfg.content_hash()[:16]}"
        self.files: list = []
        self.started = _now()

    def prepare(self) -> "RunDirectory":
        self.path.mkdir(parents=True, exist_ok=True)
        stale = self.path / MANIFEST
        if stale.exists():
            stale.unlink()
        write_atomic(self.path / CONFIG_ECHO, emit_config(self.cfg))
        self.files.append(CONFIG_ECHO)
        return self

    def write(self, name: str, data) -> None:
        write_atomic(self.path / name, data)
        self.files.append(name)

    def finish(self, status: str, warnings_: list, summary: dict, clamped: int = 0, error: str | None = None):
        manifest = {
            "status": status,
            "command": self.command,
            "config_hash": self.cfg.content_hash(),
            "config": self.cfg.data,
            "code_version": __version__,
            "numpy_version": np.__version__,
            "python_version": platform.python_version(),
            "started_utc": self.started,
            "finished_utc": _now(),
            "clamped_omega_prime": clamped,
            "warnings": _unique(warnings_),
            "error": error,
            "summary": summary,
            "files": {
                name: {"sha256": sha256_file(self.path / name), "bytes": (self.path / name).stat().st_size}
                for name in dict.fromkeys(self.files)
            },
        }
        write_atomic(self.path / MANIFEST, json.dumps(_jsonable(manifest), indent=2, allow_nan=False))
        return manifest


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# -- commands ------------------------------------------------------------------


def run_simulate(cfg: ExperimentConfig) -> RunResult:
    rd = RunDirectory(cfg, "simulate").prepare()
    formats = cfg["output"]["formats"]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        u0, notes = initial_field(cfg)
        status, code, error = "complete", EXIT_OK, None
        try:
            traj = evolve(evolution_config(cfg), u0)
        except NumericalAbort as exc:
            traj, status, code, error = exc.partial, "aborted", EXIT_NUMERICAL, str(exc)
        if "bin" in formats and traj is not None:
            rd.files += write_checkpoints(rd.path, traj)
        rows = []
        if traj is not None:
            rows = compute_rows(traj, virial_params(cfg), diagnostics_flags(cfg), cfg["run"]["threads"])
            if "csv" in formats:
                rd.write(DIAGNOSTICS_CSV, diagnostics_csv(rows))
    warn = notes + list(traj.warnings if traj is not None else ()) + [str(w.message) for w in caught]
    summary = {"checkpoints": len(rows), "t_final": rows[-1].t if rows else None}
    if cfg["inequalities"]["enabled"] and status == "complete":
        summary["inequalities"] = _inequalities_into(rd, cfg)
    rd.finish(status, warn, summary, traj.clamped_omega_prime if traj is not None else 0, error)
    return RunResult(rd.path, status, code, summary)


def _inequalities_into(rd: RunDirectory, cfg: ExperimentConfig) -> dict:
    iq = cfg["inequalities"]
    battery = TestBattery.build(cfg["run"]["seed"], Grid(iq["n_points"], iq["length"]), iq["n_functions"])
    reports = run_suite_with_refinement(battery, model_params(cfg), cfg["run"]["threads"])
    out = {}
    for name, rep in reports.items():
        rd.write(f"inequality_{name}.csv", rep.to_csv())
        out[name] = rep.summary()
    shrink = remainder_shrinks(reports)
    out["remainder_shrinks"] = {"true": sum(shrink), "cases": len(shrink)}
    return out


def run_check_inequalities(cfg: ExperimentConfig) -> RunResult:
    rd = RunDirectory(cfg, "check-inequalities").prepare()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        summary = _inequalities_into(rd, cfg)
    rd.finish("complete", [str(w.message) for w in caught], summary)
    return RunResult(rd.path, "complete", EXIT_OK, summary)


def run_soliton(cfg: ExperimentConfig) -> RunResult:
    rd = RunDirectory(cfg, "soliton").prepare()
    params, grid, t = model_params(cfg), grid_of(cfg), cfg["time"]
    spec = SolitonSpec(params, cfg["initial"]["soliton_speed"], grid)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = petviashvili_solve(spec)
        summary = {
            "delta": params.delta,
            "speed": spec.c,
            "residual": res.residual_norm,
            "iterations": res.iterations,
            "converged": res.converged,
        }
        prop = None
        if res.converged and t["t_end"] > 0:
            prop = propagation_error(res, t["t_end"], t["dt"], integrator=t["integrator"], dealias=t["dealias"])
            summary.update(
                propagation_t_end=t["t_end"], propagation_error=prop.error, fitted_speed=prop.speed,
            )
    profile = np.ascontiguousarray(res.profile.samples, dtype="<f8")
    rd.write("soliton.bin", profile.tobytes())
    rd.write("soliton.csv", csv_text(("x", "Q"), zip(grid.nodes, profile)))
    rd.write("soliton_summary.csv", csv_text(tuple(summary), [tuple(summary.values())]))
    status = "complete" if res.converged else "aborted"
    warn = [str(w.message) for w in caught] + list(prop.warnings if prop else ())
    rd.finish(status, warn, summary, error=None if res.converged else "iteration limit reached")
    return RunResult(rd.path, status, EXIT_OK if res.converged else EXIT_NUMERICAL, summary)


def limit_gaps(cfg: ExperimentConfig) -> list:
    """Rows ``(regime, delta, t, relative_gap)`` for the deep and shallow limits."""
    grid, t, ini, lim = grid_of(cfg), cfg["time"], cfg["initial"], cfg["limits"]
    v0 = gaussian(grid, ini["amplitude"], ini["width"], ini["center"])
    tc = lim["t_compare"]
    n = max(1, math.ceil(tc / t["dt"]))
    base = EvolutionConfig(ModelParams(1.0), grid, tc / n, tc, dealias=t["dealias"],
                           integrator=t["integrator"], checkpoint_stride=n)
    rows = []
    if lim["deep_deltas"]:
        bo = evolve_bo(base, v0).final
        for d in lim["deep_deltas"]:
            ilw = evolve(EvolutionConfig(ModelParams(d), grid, base.dt, tc, dealias=t["dealias"],
                                         integrator=t["integrator"], checkpoint_stride=n), v0).final
            rows.append(("deep", d, tc, relative_gap(ilw, bo)))
    if lim["shallow_deltas"]:
        kdv = evolve_kdv(base, v0).final
        for d in lim["shallow_deltas"]:
            ts = 3.0 * tc / d
            m = max(1, math.ceil(ts / t["dt"]))
            cfg_d = EvolutionConfig(ModelParams(d), grid, ts / m, ts, dealias=t["dealias"],
                                    integrator=t["integrator"], checkpoint_stride=m)
            u0 = RealField(grid, (d / 3.0) * v0.samples)
            v = kdv_rescale(evolve(cfg_d, u0), d, [tc]).final
            rows.append(("shallow", d, tc, relative_gap(RealField(grid, v.samples), kdv)))
    return rows


def run_limits(cfg: ExperimentConfig) -> RunResult:
    rd = RunDirectory(cfg, "limits").prepare()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rows = limit_gaps(cfg)
    rd.write("limits.csv", csv_text(("regime", "delta", "t", "relative_gap"), rows))
    summary = {f"{r[0]}_delta_{r[1]:g}": r[3] for r in rows}
    rd.finish("complete", [str(w.message) for w in caught], summary)
    return RunResult(rd.path, "complete", EXIT_OK, summary)


def run_diagnose(run_dir: Path, threads: int | None = None, output: Path | None = None) -> RunResult:
    """Recompute the diagnostics CSV from persisted checkpoints."""
    run_dir = Path(run_dir)
    cfg = parse_config((run_dir / CONFIG_ECHO).read_text())
    times, samples = read_checkpoints(run_dir)
    traj = Trajectory(times, samples, evolution_config(cfg))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rows = compute_rows(traj, virial_params(cfg), diagnostics_flags(cfg),
                            cfg["run"]["threads"] if threads is None else threads)
    text = diagnostics_csv(rows)
    out = Path(output) if output is not None else run_dir / "diagnostics.rerun.csv"
    write_atomic(out, text)
    original = run_dir / DIAGNOSTICS_CSV
    identical = original.exists() and original.read_text() == text
    return RunResult(run_dir, "complete", EXIT_OK, {"output": str(out), "identical_to_original": identical})


COMMANDS = {
    "simulate": run_simulate,
    "soliton": run_soliton,
    "limits": run_limits,
    "check-inequalities": run_check_inequalities,
}


def load_config(path: Path | None, overrides: dict | None = None) -> ExperimentConfig:
    text = Path(path).read_text() if path is not None else ""
    return parse_config(text, overrides)
