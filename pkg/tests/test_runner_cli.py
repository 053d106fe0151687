import json
import math

import numpy as np
import pytest

from ilwkit.cli import main, split_overrides
from ilwkit.config import parse_config
from ilwkit.diagnostics import DiagnosticsRow
from ilwkit.inequalities import LEMMAS
from ilwkit.runner import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_NUMERICAL,
    EXIT_OK,
    read_checkpoints,
    run_diagnose,
    run_simulate,
)

CSV_COLUMNS = (
    "t,I1,I2,I3,I4,mass_ball_centered,mass_ball_shifted,mass_right,func_I,func_I_rho,func_J,"
    "weighted_norm_alpha,smoothing_flux_half,smoothing_flux_full,boundary_mass_fraction"
)

SMALL = """
[grid]
n_points = 256
length = 100.0
[time]
dt = 0.01
t_end = 0.2
checkpoint_stride = 5
"""


def small(tmp_path, **overrides):
    return parse_config(SMALL, {"output.directory": str(tmp_path / "runs"), **overrides})


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text(SMALL)
    return p


def cli(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if code == EXIT_OK or out.strip().startswith("{") else None)


def test_simulate_writes_all_artifacts_and_a_complete_manifest(tmp_path):
    res = run_simulate(small(tmp_path))
    assert res.exit_code == EXIT_OK and res.status == "complete"
    names = {p.name for p in res.run_dir.iterdir()}
    assert {"config.toml", "checkpoints.bin", "checkpoints.json", "diagnostics.csv", "manifest.json"} <= names
    manifest = json.loads((res.run_dir / "manifest.json").read_text())
    assert manifest["status"] == "complete"
    assert set(manifest["files"]) == names - {"manifest.json"}
    for entry in manifest["files"].values():
        assert len(entry["sha256"]) == 64
    assert manifest["clamped_omega_prime"] == 0
    assert res.run_dir.name.startswith("simulate-")


def test_diagnostics_csv_schema_and_monotone_time(tmp_path):
    res = run_simulate(small(tmp_path))
    lines = (res.run_dir / "diagnostics.csv").read_text().strip().split("\n")
    assert lines[0] == CSV_COLUMNS
    assert ",".join(DiagnosticsRow.columns()) == CSV_COLUMNS
    t = [float(line.split(",")[0]) for line in lines[1:]]
    assert len(t) == 5 and t[0] == 0.0 and all(b > a for a, b in zip(t, t[1:]))
    assert math.isclose(t[-1], 0.2, abs_tol=1e-12)
    for line in lines[1:]:
        assert all(math.isfinite(float(v)) for v in line.split(",") if v)


def test_numbers_use_seventeen_significant_digits(tmp_path):
    res = run_simulate(small(tmp_path))
    row = (res.run_dir / "diagnostics.csv").read_text().split("\n")[1].split(",")
    i2 = row[2]
    assert float(i2) == float(f"{float(i2):.17g}")
    assert len(i2.replace(".", "").replace("-", "").split("e")[0].lstrip("0")) <= 17


def test_checkpoints_round_trip(tmp_path):
    res = run_simulate(small(tmp_path))
    times, samples = read_checkpoints(res.run_dir)
    assert samples.shape == (5, 256)
    assert samples.dtype == np.dtype("<f8")
    x = np.linspace(-50.0, 50.0, 256, endpoint=False)
    np.testing.assert_array_equal(samples[0], np.exp(-x * x))
    assert times[0] == 0.0


def test_zero_end_time_gives_single_checkpoint(tmp_path):
    res = run_simulate(small(tmp_path, **{"time.t_end": 0.0}))
    assert res.status == "complete"
    times, samples = read_checkpoints(res.run_dir)
    assert times == (0.0,) and samples.shape == (1, 256)
    assert (res.run_dir / "manifest.json").exists()


def test_rerun_reproduces_csv_byte_for_byte(tmp_path):
    a = run_simulate(small(tmp_path / "a"))
    b = run_simulate(small(tmp_path / "b"))
    assert (a.run_dir / "diagnostics.csv").read_bytes() == (b.run_dir / "diagnostics.csv").read_bytes()
    assert (a.run_dir / "checkpoints.bin").read_bytes() == (b.run_dir / "checkpoints.bin").read_bytes()
    assert a.run_dir.name == b.run_dir.name


def test_thread_count_does_not_change_values(tmp_path):
    a = run_simulate(small(tmp_path / "a"))
    b = run_simulate(small(tmp_path / "b", **{"run.threads": 3}))
    assert (a.run_dir / "diagnostics.csv").read_text() == (b.run_dir / "diagnostics.csv").read_text()


def test_diagnose_reproduces_the_original_csv(tmp_path):
    res = run_simulate(small(tmp_path))
    again = run_diagnose(res.run_dir)
    assert again.summary["identical_to_original"] is True
    assert (res.run_dir / "diagnostics.rerun.csv").read_bytes() == (res.run_dir / "diagnostics.csv").read_bytes()


def test_stale_manifest_is_removed_before_a_new_run(tmp_path, monkeypatch):
    cfg = small(tmp_path)
    first = run_simulate(cfg)
    assert (first.run_dir / "manifest.json").exists()

    def interrupted(*args, **kwargs):
        raise KeyboardInterrupt

    monkeypatch.setattr("ilwkit.runner.evolve", interrupted)
    with pytest.raises(KeyboardInterrupt):
        run_simulate(cfg)
    assert not (first.run_dir / "manifest.json").exists()


def test_blow_up_is_flagged_with_partial_outputs(tmp_path):
    cfg = parse_config(
        "[grid]\nn_points = 64\nlength = 10.0\n"
        "[time]\ndt = 0.5\nt_end = 50.0\ncheckpoint_stride = 1\ndealias = false\n"
        "[initial]\namplitude = 50.0\n",
        {"output.directory": str(tmp_path)},
    )
    res = run_simulate(cfg)
    assert res.status == "aborted" and res.exit_code == EXIT_NUMERICAL
    manifest = json.loads((res.run_dir / "manifest.json").read_text())
    assert manifest["status"] == "aborted" and manifest["error"]
    times, samples = read_checkpoints(res.run_dir)
    assert len(times) >= 1 and np.all(np.isfinite(samples))


def test_file_initial_data(tmp_path):
    x = np.linspace(-50.0, 50.0, 256, endpoint=False)
    path = tmp_path / "u0.bin"
    (0.5 * np.exp(-x * x)).astype("<f8").tofile(path)
    res = run_simulate(small(tmp_path, **{"initial.kind": "file", "initial.path": str(path), "time.t_end": 0.0}))
    _, samples = read_checkpoints(res.run_dir)
    np.testing.assert_array_equal(samples[0], 0.5 * np.exp(-x * x))


def test_cli_simulate_with_overrides(tmp_path, cfg_file, capsys):
    code, out = cli(["simulate", "--config", cfg_file, "--output", tmp_path / "o", "--seed", 4,
                     "--model.delta=2.0", "--time.t_end", "0.1"], capsys)
    assert code == EXIT_OK and out["status"] == "complete"
    echo = parse_config((tmp_path / "o" / out["run_dir"].split("/")[-1] / "config.toml").read_text())
    assert echo["model"]["delta"] == 2.0 and echo["run"]["seed"] == 4 and echo["time"]["t_end"] == 0.1


def test_cli_config_error_exit_code(tmp_path, cfg_file, capsys):
    code = main(["simulate", "--config", str(cfg_file), "--diagnostics.b=0.7", "--output", str(tmp_path)])
    err = capsys.readouterr().err
    assert code == EXIT_CONFIG and "0 < b < 2/3" in err


def test_cli_unknown_flag_is_a_config_error(capsys):
    assert main(["simulate", "--frobnicate"]) == EXIT_CONFIG


def test_cli_missing_config_file_is_an_io_error(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "absent.toml")]) == EXIT_IO


def test_cli_unwritable_output_is_an_io_error(tmp_path, cfg_file, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory")
    assert main(["simulate", "--config", str(cfg_file), "--output", str(blocker)]) == EXIT_IO


def test_cli_numerical_abort_exit_code(tmp_path, capsys):
    code = main([
        "simulate", "--output", str(tmp_path), "--grid.n_points=64", "--grid.length=10.0", "--time.dt=0.5",
        "--time.t_end=50.0", "--time.checkpoint_stride=1", "--time.dealias=false", "--initial.amplitude=50.0",
    ])
    assert code == EXIT_NUMERICAL


def test_cli_soliton_command(tmp_path, capsys):
    code, out = cli(["soliton", "--delta", 1, "--speed", 1.5, "--output", tmp_path, "--grid.n_points=512",
                     "--grid.length=50.0", "--time.t_end=0.0"], capsys)
    assert code == EXIT_OK
    assert out["residual"] < 1e-10 and out["iterations"] < 200
    run = tmp_path / out["run_dir"].split("/")[-1]
    q = np.fromfile(run / "soliton.bin", dtype="<f8")
    assert q.shape == (512,) and q.argmax() == 256


def test_cli_soliton_rejects_threshold_speed(tmp_path, capsys):
    assert main(["soliton", "--delta", "2", "--speed", "0.5", "--output", str(tmp_path)]) == EXIT_CONFIG


def test_cli_limits_command(tmp_path, capsys):
    code, out = cli(["limits", "--output", tmp_path, "--grid.n_points=256", "--grid.length=100.0",
                     "--time.dt=0.005", "--limits.deep_deltas=[5.0, 50.0]"], capsys)
    assert code == EXIT_OK
    assert out["deep_delta_50"] < out["deep_delta_5"]
    assert out["shallow_delta_0.1"] < out["shallow_delta_0.3"]
    run = tmp_path / out["run_dir"].split("/")[-1]
    header = (run / "limits.csv").read_text().split("\n")[0]
    assert header == "regime,delta,t,relative_gap"


def test_cli_check_inequalities_command(tmp_path, capsys):
    code, out = cli(["check-inequalities", "--output", tmp_path, "--seed", 2, "--threads", 2,
                     "--inequalities.n_points=512"], capsys)
    assert code == EXIT_OK
    assert out["remainder_shrinks"]["true"] == out["remainder_shrinks"]["cases"]
    run = tmp_path / out["run_dir"].split("/")[-1]
    assert (run / "inequality_gns.csv").exists()
    for name in LEMMAS:
        assert out[name]["refinement_factor"] < 2.0


def test_cli_diagnose(tmp_path, cfg_file, capsys):
    code, out = cli(["simulate", "--config", cfg_file, "--output", tmp_path], capsys)
    run = tmp_path / out["run_dir"].split("/")[-1]
    target = tmp_path / "again.csv"
    code, out = cli(["diagnose", run, "--output", target], capsys)
    assert code == EXIT_OK and out["identical_to_original"] is True
    assert target.read_bytes() == (run / "diagnostics.csv").read_bytes()


def test_split_overrides():
    over, unknown = split_overrides(["--a.b=1", "--c.d", "x", "--flag", "stray"])
    assert over == {"a.b": 1, "c.d": "x"}
    assert unknown == ["--flag", "stray"]
