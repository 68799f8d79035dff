"""Config parsing, overrides, and the command-line surface."""

from __future__ import annotations

import io
import pathlib
import subprocess
import sys
from dataclasses import replace

import numpy as np
import pytest

from egetransport import cli
from egetransport.config import (FULL_SCALE_REALIZATIONS, ConfigError,
                                 apply_overrides, load_config, parse_config,
                                 serialize_config)
from egetransport.ensembles import sample_ege
from egetransport.fock import BasisSpec, enumerate_basis
from egetransport.sweep import (KINDS, ExperimentSpec, FailureBudgetExceeded,
                                default_eps_grid, default_eta_grid)
from egetransport.version import VERSION

CONFIG_DIR = pathlib.Path(__file__).resolve().parent.parent / "configs"

KIND_GRIDS = {
    "mix-cs-vs-ege": (0.0, 0.5, 1.0),
    "mix-same-ensemble": (0.0, 0.5, 1.0),
    "parity-break": (0.0, 0.5, 1.0),
    "cs-break": (0.0, 0.5, 1.0),
    "eta-sweep": (0.01, 0.5, 10.0),
    "dephasing-sweep": (0.0, 1.0, 50.0),
}


@pytest.mark.parametrize("kind", KINDS)
def test_serialize_parse_round_trip(kind):
    spec = ExperimentSpec(kind=kind, basis=BasisSpec(6, 5), k=3, k_prime=2,
                          realizations=17, master_seed=12345,
                          grid=KIND_GRIDS[kind], ensemble="ege",
                          construction="coupling", eta=0.75)
    assert parse_config(serialize_config(spec)) == spec


def test_round_trip_normalizes_unset_k_prime():
    spec = ExperimentSpec(kind="parity-break", basis=BasisSpec(6, 5), k=3,
                          realizations=5, master_seed=1, grid=(0.0, 1.0))
    back = parse_config(serialize_config(spec))
    assert back.k_prime == spec.k
    assert replace(back, k_prime=None) == spec


def _base_toml(grid_lines: str) -> str:
    return (
        "[experiment]\n"
        'kind = "parity-break"\n'
        "l = 6\nn = 5\nk = 3\nrealizations = 5\nmaster_seed = 1\n"
        "\n[grid]\n" + grid_lines
    )


def test_linear_grid_form_matches_the_default_eps_grid():
    spec = parse_config(_base_toml("start = 0.0\nstop = 1.0\nstep = 0.01\n"))
    assert spec.grid == default_eps_grid()


def test_log_grid_form():
    spec = parse_config(
        "[experiment]\n"
        'kind = "eta-sweep"\n'
        "l = 6\nn = 5\nk = 3\nrealizations = 5\nmaster_seed = 1\n"
        "\n[grid]\nlog_start = 0.01\nlog_stop = 10.0\npoints = 25\n")
    assert len(spec.grid) == 25
    assert spec.grid[0] == 0.01
    assert abs(spec.grid[-1] - 10.0) < 1e-12

    spec = parse_config(
        "[experiment]\n"
        'kind = "dephasing-sweep"\n'
        "l = 6\nn = 5\nk = 3\nrealizations = 5\nmaster_seed = 1\n"
        "\n[grid]\nlog_start = 0.001\nlog_stop = 50.0\npoints = 10\nprepend_zero = true\n")
    assert spec.grid[0] == 0.0 and spec.grid[1] == 0.001 and len(spec.grid) == 11


def test_missing_grid_section_resolves_defaults():
    spec = parse_config(
        "[experiment]\n"
        'kind = "eta-sweep"\n'
        "l = 6\nn = 5\nk = 3\nrealizations = 5\nmaster_seed = 1\n")
    assert spec.grid == default_eta_grid()


@pytest.mark.parametrize("grid_lines", [
    "values = []\n",
    'values = ["a"]\n',
    "values = [0.0, 1.0]\nstart = 0.0\nstop = 1.0\nstep = 0.5\n",
    "start = 0.0\nstop = 1.0\nstep = 0.3\n",
    "start = 0.0\nstop = 1.0\nstep = -0.1\n",
    "start = 1.0\nstop = 0.0\nstep = 0.1\n",
    "log_start = 0.0\nlog_stop = 1.0\npoints = 5\n",
    "log_start = 0.01\nlog_stop = 10.0\npoints = 1\n",
    "log_start = 0.01\nlog_stop = 10.0\npoints = 5\nprepend_zero = 1\n",
])
def test_bad_grid_sections(grid_lines):
    with pytest.raises(ConfigError):
        parse_config(_base_toml(grid_lines))


def test_experiment_section_errors():
    with pytest.raises(ConfigError):
        parse_config("")
    with pytest.raises(ConfigError):
        parse_config("just not toml [")
    with pytest.raises(ConfigError):
        parse_config("[experiment]\nl = 6\n")  # missing fields
    with pytest.raises(ConfigError):
        parse_config(_base_toml("").replace("l = 6", 'l = "6"'))
    with pytest.raises(ConfigError):
        parse_config(_base_toml("").replace("l = 6", "l = true"))
    with pytest.raises(ConfigError):
        # spec-level validation surfaces as a config error too
        parse_config(_base_toml("").replace('"parity-break"', '"anneal"'))


def test_apply_overrides_precedence():
    spec = parse_config(_base_toml("values = [0.0, 1.0]\n"))
    assert apply_overrides(spec) is spec
    assert apply_overrides(spec, full_scale=True).realizations == FULL_SCALE_REALIZATIONS
    assert apply_overrides(spec, realizations=7, full_scale=True).realizations == 7
    assert apply_overrides(spec, seed=99).master_seed == 99
    assert apply_overrides(spec, eta=0.25).eta == 0.25
    with pytest.raises(ConfigError):
        apply_overrides(spec, eta=-1.0)


def test_shipped_configs_parse():
    paths = sorted(CONFIG_DIR.glob("*.toml"))
    assert len(paths) == 20
    kinds = set()
    for path in paths:
        spec = load_config(path)
        kinds.add(spec.kind)
        expected = 12 if path.stem == "smoke_parity" else 500
        assert spec.realizations == expected, path.name
    assert kinds == set(KINDS)


# ---------------------------------------------------------------------------
# command-line entry points

GEN44 = ["generate", "--l", "4", "--n", "2", "--k", "1", "--seed", "3"]


def test_generate_stdout_matches_library(capsys):
    assert cli.main(GEN44) == 0
    out = capsys.readouterr().out
    got = np.loadtxt(io.StringIO(out))
    expect = sample_ege(enumerate_basis(BasisSpec(4, 2)), 1, 3).values
    assert np.array_equal(got, expect)


def test_generate_to_file_and_cs_variant(tmp_path, capsys):
    plain = tmp_path / "h.txt"
    assert cli.main(GEN44 + ["--out", str(plain)]) == 0
    cs = tmp_path / "hcs.txt"
    assert cli.main(["generate", "--l", "6", "--n", "5", "--k", "2",
                     "--seed", "3", "--cs", "--out", str(cs)]) == 0
    a = np.loadtxt(plain)
    b = np.loadtxt(cs)
    assert np.array_equal(a, a.T) and a.shape == (6, 6)
    assert np.array_equal(b, b.T) and b.shape == (6, 6)
    assert np.array_equal(b, b[::-1, ::-1])  # centrosymmetric draw


def test_generate_subprocess_entry():
    proc = subprocess.run([sys.executable, "-m", "egetransport.cli"] + GEN44,
                          capture_output=True, text=True)
    assert proc.returncode == 0
    got = np.loadtxt(io.StringIO(proc.stdout))
    assert np.array_equal(got, got.T)


def test_version_flag(capsys):
    assert cli.main(["--version"]) == 0
    assert VERSION in capsys.readouterr().out


def test_transmission_stdout(capsys):
    argv = ["transmission", "--l", "4", "--n", "2", "--k", "1", "--seed", "3",
            "--emin", "-1.0", "--emax", "1.0", "--points", "5"]
    assert cli.main(argv) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == f"# E,T,eta={0.5!r},seed=3"
    assert len(lines) == 6
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    assert np.array_equal(data[:, 0], np.linspace(-1.0, 1.0, 5))
    assert np.all(data[:, 1] >= 0.0)


def test_transmission_rejects_bad_points(capsys):
    argv = ["transmission", "--l", "4", "--n", "2", "--k", "1", "--seed", "3",
            "--emin", "-1.0", "--emax", "1.0", "--points", "1"]
    assert cli.main(argv) == 1
    assert "config error" in capsys.readouterr().err


def test_current_stdout(capsys):
    argv = ["current", "--l", "4", "--n", "2", "--k", "1", "--seed", "3"]
    assert cli.main(argv) == 0
    out = capsys.readouterr().out
    fields = dict(ln.split("=", 1) for ln in out.splitlines())
    assert float(fields["current"]) >= 0.0
    assert float(fields["abs_error_estimate"]) >= 0.0
    assert int(fields["evaluations"]) > 0

    assert cli.main(argv + ["--nu", "-1.0"]) == 1


TINY_SWEEP = (
    "[experiment]\n"
    'kind = "parity-break"\n'
    "l = 6\nn = 5\nk = 3\nrealizations = 2\nmaster_seed = 5\n"
    "\n[grid]\nvalues = [1.0]\n"
)


def _write_tiny(tmp_path) -> pathlib.Path:
    path = tmp_path / "tiny_parity.toml"
    path.write_text(TINY_SWEEP)
    return path


def test_sweep_end_to_end(tmp_path, capsys):
    config = _write_tiny(tmp_path)
    out_dir = tmp_path / "results"
    argv = ["sweep", "--config", str(config), "--out-dir", str(out_dir),
            "--seed", "99", "--realizations", "3", "-v"]
    assert cli.main(argv) == 0
    out = capsys.readouterr().out
    assert "param" in out and "running parity-break" in out

    csv_text = (out_dir / "tiny_parity.csv").read_text()
    assert "param,mean_I,stderr,count,failures" in csv_text
    assert "# kind=parity-break" in csv_text
    assert f"{1.0!r},{0.0!r},{0.0!r},3,0" in csv_text

    meta = (out_dir / "tiny_parity.meta").read_text()
    assert "master_seed=99" in meta
    assert "realizations=3" in meta
    assert "timestamp=" in meta


def test_sweep_missing_config(tmp_path, capsys):
    argv = ["sweep", "--config", str(tmp_path / "absent.toml")]
    assert cli.main(argv) == 1
    assert "config error" in capsys.readouterr().err


def test_sweep_failure_budget_exit_code(tmp_path, monkeypatch, capsys):
    config = _write_tiny(tmp_path)

    def boom(spec, workers=1):
        raise FailureBudgetExceeded("synthetic")

    monkeypatch.setattr("egetransport.cli.run_experiment", boom)
    assert cli.main(["sweep", "--config", str(config)]) == 2
    assert "failure budget" in capsys.readouterr().err


def test_sweep_unwritable_out_dir(tmp_path, capsys):
    config = _write_tiny(tmp_path)
    blocker = tmp_path / "blocker"
    blocker.write_text("file, not a directory\n")
    argv = ["sweep", "--config", str(config),
            "--out-dir", str(blocker / "nested")]
    assert cli.main(argv) == 3
    assert "i/o failure" in capsys.readouterr().err


def test_thread_resolution(tmp_path, monkeypatch, capsys):
    config = _write_tiny(tmp_path)
    monkeypatch.setenv(cli.THREADS_ENV, "abc")
    assert cli.main(["sweep", "--config", str(config),
                     "--out-dir", str(tmp_path)]) == 1
    assert "config error" in capsys.readouterr().err
    # an explicit flag wins over the broken environment value
    assert cli.main(["sweep", "--config", str(config),
                     "--out-dir", str(tmp_path), "--threads", "1"]) == 0
    capsys.readouterr()
    assert cli.main(["sweep", "--config", str(config),
                     "--out-dir", str(tmp_path), "--threads", "0"]) == 1
