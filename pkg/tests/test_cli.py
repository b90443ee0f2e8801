"""End-to-end tests of the command line interface."""

import csv
import io
import json
import math
from contextlib import redirect_stdout

import numpy as np
import pytest

from giantatom.analytic import steady_state_closed
from giantatom.cli import main, parse_angle, parse_delay
from giantatom.dde import InitialState
from giantatom.model import SystemParams


def _run_cli(argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


@pytest.mark.parametrize(
    "text,value",
    [
        ("0", 0.0),
        ("1.5", 1.5),
        ("pi", math.pi),
        ("0.5pi", 0.5 * math.pi),
        ("2pi", 2.0 * math.pi),
        ("-0.25pi", -0.25 * math.pi),
        ("+pi", math.pi),
    ],
)
def test_parse_angle(text, value):
    assert parse_angle(text) == pytest.approx(value, abs=1e-15)


def test_parse_angle_rejects_garbage():
    for bad in ("pie", "", "pi2", "0.5oi"):
        with pytest.raises(ValueError):
            parse_angle(bad)


def test_parse_delay():
    assert parse_delay("0.8") == 0.8
    assert parse_delay("inf") == math.inf
    assert parse_delay("infinity") == math.inf
    for bad in ("-1", "nan", "soon"):
        with pytest.raises(ValueError):
            parse_delay(bad)


def test_simulate_csv_schema(tmp_path):
    out = tmp_path / "run.csv"
    code, _ = _run_cli(
        ["simulate", "--config", "separate", "--theta0", "1.0pi", "--delay", "0.8",
         "--init", "plus", "--tmax", "2.0", "--output", str(out)]
    )
    assert code == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    header_idx = next(i for i, r in enumerate(rows) if r and r[0] == "gamma_t")
    assert rows[header_idx] == ["gamma_t", "re_ca", "im_ca", "re_cb", "im_cb", "concurrence"]
    data = np.array(rows[header_idx + 1:], dtype=float)
    assert data[0, 0] == 0.0
    assert data[-1, 0] >= 2.0 - 1e-12
    # starting state is the symmetric superposition
    s2 = 1.0 / math.sqrt(2.0)
    assert data[0, 1] == pytest.approx(s2, abs=1e-15)
    assert data[0, 3] == pytest.approx(s2, abs=1e-15)
    assert data[0, 5] == pytest.approx(1.0, abs=1e-15)
    # concurrence column is consistent with the amplitude columns
    ca = data[:, 1] + 1j * data[:, 2]
    cb = data[:, 3] + 1j * data[:, 4]
    assert np.max(np.abs(data[:, 5] - 2.0 * np.abs(ca * np.conj(cb)))) < 1e-12


def test_simulate_matches_settled_value(tmp_path):
    out = tmp_path / "long.csv"
    code, _ = _run_cli(
        ["simulate", "--config", "separate", "--theta0", "1.0pi", "--delay", "0.8",
         "--init", "plus", "--tmax", "15", "--output", str(out)]
    )
    assert code == 0
    data = np.loadtxt(out, delimiter=",", skiprows=next_header_skip(out))
    want = steady_state_closed(
        SystemParams(theta0=math.pi, delay=0.8, config="separate"), InitialState.plus()
    ).value
    assert abs(data[-1, 5] - want) < 1e-3


def next_header_skip(path):
    with open(path) as fh:
        for i, line in enumerate(fh):
            if line.startswith("gamma_t"):
                return i + 1
    raise AssertionError("no header row found")


def test_simulate_infinite_delay(tmp_path):
    out = tmp_path / "inf.csv"
    code, _ = _run_cli(
        ["simulate", "--delay", "inf", "--theta0", "0.3", "--init", "plus",
         "--tmax", "5", "--output", str(out)]
    )
    assert code == 0
    data = np.loadtxt(out, delimiter=",", skiprows=next_header_skip(out))
    assert np.max(np.abs(data[:, 5] - np.exp(-2.0 * data[:, 0]))) < 1e-8


def test_simulate_output_is_deterministic(tmp_path):
    args = ["simulate", "--config", "braided", "--theta0", "0.7", "--delay", "0.5",
            "--init", "phase", "--phi", "1.1", "--tmax", "3"]
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert _run_cli(args + ["--output", str(a)])[0] == 0
    assert _run_cli(args + ["--output", str(b)])[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_json_meta(tmp_path):
    out = tmp_path / "run.json"
    code, _ = _run_cli(
        ["simulate", "--delay", "inf", "--theta0", "0.5pi", "--tmax", "1",
         "--format", "json", "--output", str(out)]
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["meta"]["delay"] == "inf"
    assert doc["meta"]["theta0"] == pytest.approx(0.5 * math.pi)
    assert doc["meta"]["config"] == "separate"
    assert doc["columns"][0] == "gamma_t"
    assert len(doc["rows"][0]) == len(doc["columns"])


def test_bad_arguments_exit_2():
    assert _run_cli(["simulate", "--delay", "-3"])[0] == 2
    assert _run_cli(["simulate", "--theta0", "halfpi"])[0] == 2
    assert _run_cli(["sweep", "--param", "theta0", "--from", "0", "--to", "1",
                     "--count", "1"])[0] == 2
    assert _run_cli(["sweep", "--param", "theta0", "--from", "0"])[0] == 2
    assert _run_cli(["table1", "--delay", "inf"])[0] == 2
    assert _run_cli(["table1", "--delay", "0"])[0] == 2


def test_sweep_steady_matches_closed_form(tmp_path):
    out = tmp_path / "sweep.csv"
    code, _ = _run_cli(
        ["sweep", "--config", "nested", "--theta0", "1.0pi", "--delay", "0.5",
         "--init", "phase", "--param", "phi", "--from", "0", "--to", "2pi",
         "--count", "9", "--steady", "--output", str(out)]
    )
    assert code == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    hdr = next(i for i, r in enumerate(rows) if r and r[0] == "phi")
    assert rows[hdr] == ["phi", "steady_concurrence"]
    data = np.array(rows[hdr + 1:], dtype=float)
    assert data.shape == (9, 2)
    for phi, got in data:
        want = steady_state_closed(
            SystemParams(theta0=math.pi, delay=0.5, phi=phi, config="nested"),
            InitialState.phase(phi),
        ).value
        assert abs(got - want) < 1e-8
    # antiphase initialization reproduces the antisymmetric branch
    mid = data[4]
    assert mid[0] == pytest.approx(math.pi)


def test_sweep_parallel_is_deterministic(tmp_path, monkeypatch):
    args = ["sweep", "--config", "braided", "--theta0", "0", "--delay", "0.4",
            "--init", "minus", "--param", "theta0", "--from", "0", "--to", "2pi",
            "--count", "7", "--steady"]
    a = tmp_path / "serial.csv"
    monkeypatch.setenv("GIANTATOM_THREADS", "1")
    assert _run_cli(args + ["--output", str(a)])[0] == 0
    b = tmp_path / "parallel.csv"
    monkeypatch.setenv("GIANTATOM_THREADS", "2")
    assert _run_cli(args + ["--output", str(b)])[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_preset_fig3g_rows(tmp_path):
    out = tmp_path / "fig3g.csv"
    code, _ = _run_cli(["sweep", "--preset", "fig3g", "--output", str(out)])
    assert code == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    hdr = next(i for i, r in enumerate(rows) if r and r[0] == "theta0")
    assert rows[hdr] == ["theta0", "init", "delay", "steady_concurrence"]
    data = rows[hdr + 1:]
    assert len(data) == 3 * 201
    # the x -> 0 end of each branch reproduces the instantaneous limit
    first = data[0]
    assert float(first[2]) == 0.0
    assert float(first[3]) == pytest.approx(1.0, abs=1e-9)


def test_table1_exit_zero():
    code, text = _run_cli(["table1"])
    assert code == 0
    lines = [ln for ln in text.splitlines() if ln.strip()]
    body = [ln for ln in lines if ln.lstrip().startswith(("separate", "braided", "nested"))]
    assert len(body) == 18
    assert any(ln.startswith("table check: ok") for ln in lines)
