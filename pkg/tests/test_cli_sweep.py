import csv
import io
import json
import math
from pathlib import Path

import pytest

from armacap import make_channel
from armacap.capacity import feedback_capacity
from armacap.cli import main
from armacap.errors import InvalidParams
from armacap.sweep import CSV_COLUMNS, parse_sweep, render_csv

SWEEPS = Path(__file__).resolve().parent.parent / "sweeps"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    lines = text.splitlines()
    assert lines[0] == "# armacap sweep schema=1"
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_capacity_text(capsys):
    code, out, _ = run(capsys, "capacity", "--a", "0.2", "--c", "1.5", "--kappa", "5")
    assert code == 0
    assert "FeedbackOptimal" in out and "nats" in out


def test_capacity_json_bits(capsys):
    code, out, _ = run(capsys, "capacity", "--a", "0.2", "--c", "1.5", "--kappa", "5", "--format", "json")
    rep = json.loads(out)
    assert code == 0
    assert rep["rate_nats"] == feedback_capacity(make_channel(0.2, 1.5, 1.0, 5.0)).rate
    assert rep["rate_bits"] == pytest.approx(rep["rate_nats"] / math.log(2), rel=1e-15)
    code, out, _ = run(capsys, "capacity", "--a", "0.2", "--c", "1.5", "--kappa", "5", "--bits")
    assert repr(rep["rate_bits"]) in out and "bits" in out


def test_capacity_rejects_pole_zero_cancellation(capsys):
    code, _, err = run(capsys, "capacity", "--a", "0.5", "--c", "0.5", "--kappa", "1")
    assert code == 2 and "armacap:" in err


def test_capacity_zero_power(capsys):
    code, out, _ = run(capsys, "capacity", "--a", "0.2", "--c", "1.5", "--kappa", "0", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["rate_nats"] == 0.0 and rep["regime"] == "InfeasiblePower"


def test_capacity_out_file(capsys, tmp_path):
    target = tmp_path / "cap.json"
    code, out, _ = run(capsys, "capacity", "--a", "0", "--c", "0.5", "--kappa", "1",
                       "--format", "json", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["regime"] == "NonfeedbackFallback"


def test_sweep_csv_is_deterministic(capsys):
    path = str(SWEEPS / "fig2.sweep")
    _, first, _ = run(capsys, "sweep", path)
    _, second, _ = run(capsys, "sweep", path)
    assert first == second


def test_sweep_columns_and_units(capsys):
    _, out, _ = run(capsys, "sweep", str(SWEEPS / "fig1.sweep"))
    rows = rows_of(out)
    assert list(rows[0].keys()) == list(CSV_COLUMNS)
    numeric = [r for r in rows if r["rate_nats"] not in ("", "nan")]
    assert numeric
    for r in numeric:
        assert float(r["rate_bits"]) == pytest.approx(float(r["rate_nats"]) / math.log(2), rel=1e-12)


def test_sweep_skips_cancelled_points(capsys):
    _, out, _ = run(capsys, "sweep", str(SWEEPS / "fig2.sweep"))
    skipped = [r for r in rows_of(out) if r["regime"] == "Skipped"]
    assert skipped and all(float(r["a"]) == float(r["c"]) == 0.5 for r in skipped)


def test_fig1_grid_covers_region(capsys):
    _, out, _ = run(capsys, "sweep", str(SWEEPS / "fig1.sweep"))
    rows = rows_of(out)
    cs = sorted({float(r["c"]) for r in rows})
    assert cs[0] == -5.0 and cs[-1] == 5.0 and len(cs) == 101
    fb = [r for r in rows if r["output"] == "feedback" and r["regime"] == "FeedbackOptimal"]
    assert fb


def test_butman_sweep_marks_unstable_poles(capsys):
    _, out, _ = run(capsys, "sweep", str(SWEEPS / "butman.sweep"))
    rows = [r for r in rows_of(out) if r["output"] == "butman"]
    for r in rows:
        assert (r["regime"] == "ButmanOutOfDomain") == (abs(float(r["c"])) > 1)


@pytest.mark.parametrize("text", [
    "parameter = kappa\nvalues = 1:0:1\nc = 0.5\nkw = 1\na = 0\noutputs = feedback\n",
    "parameter = zeta\nvalues = 1,2\nc = 0.5\nkw = 1\na = 0\noutputs = feedback\n",
    "parameter = kappa\nvalues = 1,2\nc = 0.5\nkw = 1\noutputs = feedback\n",
    "parameter = kappa\nvalues = 1,2\nc = x\nkw = 1\na = 0\noutputs = feedback\n",
    "parameter = kappa\nvalues = 1,2\nc = 0.5\nkw = 1\na = 0\noutputs = capacity\n",
    "garbage line\n",
])
def test_parse_sweep_rejects_malformed(text):
    with pytest.raises(InvalidParams):
        parse_sweep(text)


def test_sweep_malformed_file_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.sweep"
    bad.write_text("parameter = kappa\nvalues = oops\n")
    code, _, err = run(capsys, "sweep", str(bad))
    assert code == 2 and err
    code, _, _ = run(capsys, "sweep", str(tmp_path / "missing.sweep"))
    assert code == 2


def test_render_csv_rounds_grid():
    sweep = parse_sweep("parameter = kappa\nvalues = 0.1:0.3:0.1\nc = 0.5\nkw = 1\na = 0\noutputs = nonfeedback\n")
    rows = rows_of(render_csv(sweep))
    assert [r["value"] for r in rows] == ["0.1", "0.2", "0.3"]


def test_simulate_closed_form(capsys):
    code, out, _ = run(capsys, "simulate", "--a", "0.2", "--c", "1.5", "--kappa", "5", "--n", "100000", "--seed", "1")
    rep = json.loads(out)
    assert code == 0
    assert rep["strategy_source"].startswith("closed-form")
    assert rep["rate_relative_gap"] < 0.02 and rep["error_stable"]
    assert rep["coordinates"] == "error"


def test_simulate_explicit_strategy(capsys):
    code, out, _ = run(capsys, "simulate", "--a", "0", "--c", "0.5", "--kappa", "1",
                       "--lambda", "0", "--kz", "1", "--n", "20000")
    rep = json.loads(out)
    assert code == 0 and rep["strategy_source"] == "explicit" and rep["lambda"] == 0.0


def test_simulate_requires_both_strategy_flags(capsys):
    code, _, _ = run(capsys, "simulate", "--a", "0", "--c", "0.5", "--kappa", "1", "--lambda", "0")
    assert code == 2


def test_simulate_structural_failure(capsys):
    code, _, err = run(capsys, "simulate", "--a", "0", "--c", "2", "--kappa", "4",
                       "--lambda", "-2", "--kz", "1", "--n", "1000")
    assert code == 3 and err


def test_simulate_is_deterministic(capsys):
    argv = ("simulate", "--a", "0.2", "--c", "1.5", "--kappa", "5", "--n", "5000", "--seed", "3")
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_verify_small(capsys):
    code, out, _ = run(capsys, "verify", "--points", "1")
    assert code == 0 and "ALL PASS" in out
    assert out.count("PASS  ") == 9


def test_verify_exit_code_tracks_report(capsys):
    code, out, _ = run(capsys, "verify", "--points", "1", "--tol", "1e-12")
    assert (code == 0) == ("ALL PASS" in out)
    assert code in (0, 1)
