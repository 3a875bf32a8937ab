import csv
import json
import math
import re
import subprocess
import sys

import numpy as np
import pytest

from saturation_lab import __version__
from saturation_lab.cli import main
from saturation_lab.models import DegreeDistribution, ldpc_bec
from saturation_lab.single import energy_gap
from saturation_lab.system import iterate_to_fixed_point


def run(capsys, *args):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(path):
    lines = path.read_text().split("\n")
    assert lines[0].startswith("# saturation-lab v")
    rows = list(csv.reader(lines[1:-1]))
    return lines[0], rows[0], rows[1:]


def value(text, key):
    m = re.search(rf"^{re.escape(key)}\s+([0-9.eE+-]+)", text, re.M)
    return float(m.group(1))


def test_thresholds_ldpc(capsys):
    code, out, _ = run(capsys, "thresholds", "--ldpc", "3,6", "--eps", "0.45")
    assert code == 0
    assert abs(value(out, "eps_s*") - 0.4294) <= 5e-4
    assert abs(value(out, "eps*") - 0.4881) <= 5e-4
    assert value(out, "K") == 75
    s = ldpc_bec(DegreeDistribution.regular(3, 6))
    w_min = math.floor(75 / energy_gap(s, 0.45)) + 1
    row = [l for l in out.splitlines() if l.strip().startswith("0.45")][0]
    assert int(row.split()[-1]) == w_min


def test_thresholds_gldpc(capsys):
    code, out, _ = run(capsys, "thresholds", "--gldpc", "15,3")
    assert code == 0
    assert abs(value(out, "eps_bar") - value(out, "eps*")) <= 1e-5


def test_thresholds_csv(tmp_path, capsys):
    code, _, _ = run(capsys, "thresholds", "--eps", "0.45,0.6", "--out", tmp_path, "--seed", "7")
    assert code == 0
    head, header, rows = read_csv(tmp_path / "thresholds.csv")
    assert head == f"# saturation-lab v{__version__}, system=ldpc(3,6), seed=7"
    assert header == ["quantity", "eps", "value", "u", "w_min"]
    assert rows[-1][-1] == ""  # no width above the potential threshold


def test_potential_command(tmp_path, capsys):
    code, _, _ = run(capsys, "potential", "--eps", "0.40,0.4294,0.45,0.4881,0.55", "--out", tmp_path)
    assert code == 0
    _, header, rows = read_csv(tmp_path / "potential.csv")
    assert len(header) == 6 and header[1] == "U_0.4"
    U = np.array(rows, dtype=float)
    assert np.all(U[1:, 1] > 0)  # eps below the single threshold
    assert U[:, 5][-1] < 0  # eps above the potential threshold ends below zero
    _, header, rows = read_csv(tmp_path / "stationary.csv")
    assert header == ["eps", "x", "U", "kind"]
    assert not [r for r in rows if float(r[0]) == 0.4]
    assert {r[3] for r in rows if float(r[0]) == 0.45} == {"unstable", "stable"}


def test_potential_eps_zero_nonnegative(tmp_path, capsys):
    assert run(capsys, "potential", "--eps", "0", "--out", tmp_path)[0] == 0
    _, _, rows = read_csv(tmp_path / "potential.csv")
    assert min(float(r[1]) for r in rows) >= 0


def test_csv_round_trip_and_line_endings(tmp_path, capsys):
    run(capsys, "potential", "--eps", "0.45", "--out", tmp_path)
    raw = (tmp_path / "potential.csv").read_bytes()
    assert b"\r" not in raw
    _, _, rows = read_csv(tmp_path / "potential.csv")
    s = ldpc_bec(DegreeDistribution.regular(3, 6))
    x, u = float(rows[100][0]), float(rows[100][1])
    gx = float(s.g(x))
    assert u == x * gx - float(s.G(x)) - float(s.F(gx, 0.45))


def test_simulate(tmp_path, capsys):
    code, out, _ = run(capsys, "simulate", "--L", "16", "--w", "3", "--eps", "0.47,0.55", "--out", tmp_path)
    assert code == 0
    assert "basic eps=0.47 L=16 w=3: converged_to_zero=true" in out
    assert "eps=0.55 L=16 w=3: converged_to_zero=false" in out
    _, header, rows = read_csv(tmp_path / "sc_basic_eps0.55_L16_w3_state.csv")
    assert header == ["position", "value"]
    v = np.array([float(r[1]) for r in rows])
    mid = v[len(v) // 2]
    assert mid > 0.5 and np.all(v[:3] < mid) and np.all(v[-3:] < mid)  # plateau with decaying edges
    _, header, rows = read_csv(tmp_path / "sc_one-sided_eps0.47_L16_w3_trace.csv")
    assert header == ["iteration", "max_entry"] and float(rows[-1][1]) == 0.0


def test_simulate_w1_matches_uncoupled(tmp_path, capsys, caplog):
    code, _, _ = run(capsys, "simulate", "--L", "3", "--w", "1", "--eps", "0.45", "--mode", "basic", "--out", tmp_path)
    assert code == 0 and "w=1" in caplog.text
    _, _, rows = read_csv(tmp_path / "sc_basic_eps0.45_L3_w1_state.csv")
    x, _ = iterate_to_fixed_point(ldpc_bec(DegreeDistribution.regular(3, 6)), 1.0, 0.45)
    assert max(abs(float(r[1]) - x) for r in rows) <= 1e-10


def test_deterministic_outputs(tmp_path, capsys):
    for d in ("a", "b"):
        run(capsys, "simulate", "--eps", "0.5", "--L", "8", "--out", tmp_path / d)
        run(capsys, "potential", "--eps", "0.45", "--out", tmp_path / d)
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_config_file_and_override(tmp_path, capsys):
    cfg = {"system": {"gldpc": [15, 3]}, "eps": [0.38], "L": 8, "w": 2, "tolerances": {"grid_n": 2048}, "output": str(tmp_path / "o"), "seed": 3}
    path = tmp_path / "run.json"
    path.write_text(json.dumps(cfg))
    code, out, _ = run(capsys, "thresholds", "--config", path)
    assert code == 0 and "gldpc(n=15,t=3)" in out
    head, _, _ = read_csv(tmp_path / "o" / "thresholds.csv")
    assert head.endswith("seed=3")
    code, out, _ = run(capsys, "simulate", "--config", path, "--eps", "0.30", "--mode", "basic")
    assert code == 0 and "eps=0.3 L=8 w=2: converged_to_zero=true" in out


def test_isi_flag(capsys):
    code, out, _ = run(capsys, "thresholds", "--isi", "memoryless")
    assert code == 0 and abs(value(out, "eps*") - 0.4881) <= 5e-4


@pytest.mark.parametrize(
    "args",
    [
        ["thresholds", "--gldpc", "15,9"],
        ["thresholds", "--eps", "1.5"],
        ["thresholds", "--ldpc", "x,6"],
        ["thresholds", "--isi", "nope"],
        ["simulate", "--w", "0", "--eps", "0.4"],
        ["simulate"],
        ["thresholds", "--tol", "-1"],
    ],
)
def test_config_errors_exit_2(capsys, args):
    assert run(capsys, *args)[0] == 2


def test_bad_config_file_exit_2(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text('{"system": {"ldpc": [3, 6]}, "colour": 1}')
    assert run(capsys, "thresholds", "--config", p)[0] == 2
    p.write_text("{not json")
    assert run(capsys, "thresholds", "--config", p)[0] == 2
    assert run(capsys, "thresholds", "--config", tmp_path / "missing.json")[0] == 2


def test_not_admissible_exit_3(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"system": {"ldpc": {"lambda": [0.5, 0.5], "rho": [0, 0, 0, 0, 0, 1]}}}))
    code, _, err = run(capsys, "thresholds", "--config", p)
    assert code == 3 and "not admissible" in err


def test_unwritable_output_exit_4(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run(capsys, "potential", "--out", blocker / "sub")[0] == 4


def test_verify_shift_energy(capsys):
    code, out, _ = run(capsys, "verify", "--lemma", "shift-energy", "--trials", "1000")
    assert code == 0
    m = re.search(r"PASS shift-energy\s+max violation ([0-9.e+-]+)", out)
    assert m and float(m.group(1)) <= 1e-9


def test_verify_corrupted_matrix_fails(capsys):
    code, out, _ = run(capsys, "verify", "--lemma", "shift-energy", "--corrupt-matrix")
    assert code == 1 and "FAIL shift-energy" in out


def test_verify_all(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0, out
    assert out.count("PASS") == 10


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "saturation_lab", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and __version__ in r.stdout
