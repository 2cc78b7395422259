import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from dopplerstirap.cli import CommandSpec, execute, main, parse_args

FIG2 = "q = 0.1\nomega0 = 10\npulse_width = 10\ndelay = 10\n"


@pytest.fixture
def config(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text(FIG2)
    return path


def test_parse_run():
    spec = parse_args(["run", "--config", "c.txt", "--out", "t.csv"])
    assert spec == CommandSpec("run", Path("c.txt"), Path("t.csv"))


def test_parse_sweep_with_override():
    spec = parse_args(["sweep-delay", "--config", "c.txt", "--set", "q=10", "--set", "delay=-3"])
    assert spec.subcommand == "sweep-delay"
    assert spec.overrides == {"q": 10.0, "delay": -3.0}
    assert spec.grid is None and spec.workers == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate"],
        ["run"],
        ["run", "--config", "c.txt", "--set", "speed=3"],
        ["run", "--config", "c.txt", "--set", "q"],
        ["sweep-area", "--config", "c.txt", "--grid", "1,2"],
    ],
)
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as info:
        parse_args(argv)
    assert info.value.code != 0
    assert "usage" in capsys.readouterr().err


def test_run_writes_trajectory(config, tmp_path):
    out = tmp_path / "t.csv"
    assert main(["run", "--config", str(config), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# dopplerstirap")
    assert "# q = 0.1" in lines and "# t_start = -50.0" in lines
    header = next(l for l in lines if not l.startswith("#"))
    assert header == "t,P1,P2,P3,theta,omega_eff,PD,PB"
    data = np.loadtxt(out, delimiter=",", comments="#", skiprows=lines.index(header) + 1)
    assert data.shape == (512, 8)
    assert data[-1, 3] >= 0.999


def test_outputs_deterministic(config, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["sweep-delay", "--config", str(config), "--grid=-10,10,3", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_invalid_config_exit_1(config, capsys):
    code = main(["run", "--config", str(config), "--set", "pulse_width=0"])
    assert code == 1
    assert "pulse_width" in capsys.readouterr().err


def test_missing_config_exit_1(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.txt")]) == 1


def test_integration_failure_exit_2(config, capsys):
    code = main(["sweep-delay", "--config", str(config), "--set", "norm_tol=1e-18", "--grid", "0,1,2"])
    assert code == 2
    assert "delay=0" in capsys.readouterr().err


def test_diagnostics(config, tmp_path):
    out = tmp_path / "d.csv"
    assert main(["diagnostics", "--config", str(config), "--out", str(out)]) == 0
    text = out.read_text()
    assert "# adiabatic_return,worst=0.1,satisfied=1" in text
    assert text.startswith("# dopplerstirap")


def test_stdout_and_module_entry(config):
    proc = subprocess.run(
        [sys.executable, "-m", "dopplerstirap", "sweep-area", "--config", str(config), "--grid", "0,100,2"],
        capture_output=True,
        text=True,
        check=True,
    )
    body = [l for l in proc.stdout.splitlines() if not l.startswith("#")]
    assert body[0] == "param,P1,P2,P3,maxP2,kick"
    assert len(body) == 3


@pytest.mark.slow
def test_fast_atom_delay_sweep_default_grid(config, tmp_path):
    out = tmp_path / "fig4.csv"
    spec = CommandSpec("sweep-delay", config, out, {"q": 10.0})
    assert execute(spec) == 0
    body = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert len(body) == 1 + 81
