from __future__ import annotations

import subprocess
import sys
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from stagechain.cli import main, parse_config
from stagechain.dde import read_trajectory_csv, simulate
from stagechain.errors import DuplicateKey, MalformedNumber, MissingKey, UnknownKey
from stagechain.model import BOUNDARY_PARAMS, REFERENCE_PARAMS, RATE_NAMES

ROOT = Path(__file__).resolve().parents[1]
REF_CFG = ROOT / "configs" / "reference.cfg"


def cfg_text(p, **extra):
    lines = [f"{n} = {getattr(p, n)!r}" for n in RATE_NAMES] + [f"tau = {p.tau!r}"]
    lines += [f"{k} = {v}" for k, v in extra.items()]
    return "\n".join(lines) + "\n"


def test_reference_config_parses():
    cfg = parse_config(REF_CFG.read_text())
    assert cfg.params == REFERENCE_PARAMS.with_tau(0.75)
    assert (cfg.t_end, cfg.step, cfg.tau_max) == (3000.0, 0.01, 2.0)


def test_comments_and_blank_lines():
    cfg = parse_config("# header\n\n" + cfg_text(REFERENCE_PARAMS) + "svg = true  # plots\n")
    assert cfg.svg and cfg.params == REFERENCE_PARAMS


def test_duplicate_key():
    with pytest.raises(DuplicateKey):
        parse_config(cfg_text(REFERENCE_PARAMS) + "a1 = 2\n")


def test_malformed_number_reports_line():
    text = cfg_text(REFERENCE_PARAMS).replace("alpha1 = 1.2", "alpha1 = abc")
    with pytest.raises(MalformedNumber, match="line 8") as exc:
        parse_config(text)
    assert exc.value.line == 8


def test_unknown_and_missing_keys():
    with pytest.raises(UnknownKey):
        parse_config(cfg_text(REFERENCE_PARAMS) + "gamma = 1\n")
    with pytest.raises(MissingKey, match="d3"):
        parse_config("\n".join(ln for ln in cfg_text(REFERENCE_PARAMS).splitlines() if not ln.startswith("d3")))


def write_cfg(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


def test_equilibria_reports_absent_rows(tmp_path, capsys):
    cfg = write_cfg(tmp_path, cfg_text(BOUNDARY_PARAMS))
    assert main(["equilibria", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "equilibria.csv").read_text().splitlines()
    assert rows[0] == "kind,x,y,z1,z2,exists,condition"
    flags = {r.split(",")[0]: r.split(",")[5] for r in rows[1:]}
    assert flags == {"E0": "true", "E1": "true", "E2": "false", "E3": "false"}


def test_step_too_large_exit_code(tmp_path, capsys):
    cfg = write_cfg(tmp_path, cfg_text(REFERENCE_PARAMS.with_tau(0.75)))
    assert main(["simulate", "--config", cfg, "--step", "0.5", "--out", str(tmp_path)]) == 3
    assert "dde.StepTooLarge" in capsys.readouterr().err


def test_config_error_exit_code(tmp_path, capsys):
    cfg = write_cfg(tmp_path, cfg_text(REFERENCE_PARAMS) + "a1 = 3\n")
    assert main(["equilibria", "--config", cfg]) == 2
    assert "cli.DuplicateKey" in capsys.readouterr().err
    assert main(["equilibria", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_nonpositive_rate_is_config_error(tmp_path, capsys):
    cfg = write_cfg(tmp_path, cfg_text(REFERENCE_PARAMS).replace("a1 = 2.0", "a1 = 0"))
    assert main(["equilibria", "--config", cfg]) == 2
    assert "model.NonPositiveRate" in capsys.readouterr().err


def test_simulate_round_trip_and_svg(tmp_path):
    cfg = write_cfg(tmp_path, cfg_text(REFERENCE_PARAMS.with_tau(0.75)))
    out = tmp_path / "sim"
    assert main(["simulate", "--config", cfg, "--t-end", "50", "--out", str(out), "--svg"]) == 0
    t, s = read_trajectory_csv((out / "trajectory.csv").read_text())
    ref = simulate(REFERENCE_PARAMS.with_tau(0.75), t_end=50)
    assert np.array_equal(t, ref.times) and np.array_equal(s, ref.states)
    for name in ("timeseries.svg", "phase.svg"):
        assert ET.parse(out / name).getroot().tag.endswith("svg")


def test_switches_outputs_and_determinism(tmp_path, capsys):
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert main(["switches", "--config", str(REF_CFG), "--out", str(out), "--svg"]) == 0
        outs.append(out)
    for name in ("switch_zeros.csv", "switch_curves.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    ET.parse(outs[0] / "switch_curves.svg")
    rows = (outs[0] / "switch_zeros.csv").read_text().splitlines()
    assert len(rows) == 3 and rows[1].endswith(",1") and rows[2].endswith(",-1")


def test_stability_and_hopf(tmp_path, capsys):
    assert main(["stability", "--config", str(REF_CFG), "--out", str(tmp_path)]) == 0
    text = (tmp_path / "stability.csv").read_text()
    assert "E2,lambda1,-0.02083" in text and "rh_discriminant" in text
    assert main(["hopf", "--config", str(REF_CFG), "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "hopf.csv").read_text().splitlines()
    assert len(rows) == 3 and "supercritical" in rows[1]


def test_sweep_outputs(tmp_path, capsys):
    argv = ["sweep", "--config", str(REF_CFG), "--tau-min", "0.7", "--tau-max", "0.8",
            "--tau-step", "0.05", "--t-end", "500", "--jobs", "1", "--svg", "--out"]
    assert main(argv + [str(tmp_path / "a")]) == 0
    assert main(argv + [str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "sweep.csv").read_bytes()
    assert a == (tmp_path / "b" / "sweep.csv").read_bytes()
    assert a.decode().splitlines()[0] == "tau,class,period,amplitude,lle,extrema"
    ET.parse(tmp_path / "a" / "bifurcation.svg")


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "stagechain", "equilibria", "--config", str(REF_CFG),
                          "--out", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0 and "E3" in res.stdout
