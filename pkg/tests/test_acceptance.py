"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected and echoed in the pytest terminal summary
(see ``conftest.py``), so they appear in a plain ``pytest -v`` log.
"""

import subprocess
import sys

from armacap import verify

RESULTS = {}

def record(number, check, extra=""):
    line = f"[criterion {number}] {check.line()}  ({check.seconds:.1f}s){extra}"
    RESULTS[number] = line
    print(line)
    return check

def test_criterion_1_oracle_equivalence():
    assert len(verify.ORACLE_POINTS) >= 20
    a02 = [(c, kappa) for a, c, kappa in verify.ORACLE_POINTS if a == 0.2]
    assert {1.3, 1.5, 2.0, 3.0} <= {c for c, _ in a02}
    chk = record(1, verify.check_oracle_equivalence(tol=1e-4))
    assert chk.passed, chk.failures
    assert chk.seconds < 120.0

def test_criterion_2_are_consistency():
    chk = record(2, verify.check_are_consistency(tol=1e-9))
    assert chk.passed, chk.failures

def test_criterion_3_kappa_min():
    assert len(verify.KMIN_PAIRS_A) >= 5 and len(verify.KMIN_PAIRS_B) >= 3
    chk = record(3, verify.check_kappa_min(tol=1e-4))
    assert chk.passed, chk.failures

def test_criterion_4_nonfeedback():
    assert len(verify.nonfeedback_grid()) == 30
    chk = record(4, verify.check_nonfeedback(tol=1e-8))
    assert chk.passed, chk.failures

def test_criterion_5_butman():
    chk = record(5, verify.check_butman(tol=1e-12))
    assert chk.passed, chk.failures

def test_criterion_6_riccati_convergence():
    chk = record(6, verify.check_riccati_convergence(tol=2e-12))
    assert chk.passed, chk.failures

def test_criterion_7_monte_carlo():
    chk = record(7, verify.check_monte_carlo(n=100_000, seeds=(0, 1, 2, 3, 4), rate_rel_tol=0.02))
    assert chk.passed, chk.failures

def test_criterion_8_figure_shapes():
    chk = record(8, verify.check_figure_shapes())
    assert chk.passed, chk.failures

def _cli(*argv):
    proc = subprocess.run([sys.executable, "-m", "armacap.cli", *argv], capture_output=True, check=True)
    return proc.stdout

def test_criterion_9_determinism():
    chk = verify.check_determinism()
    sweep = ("sweep", "sweeps/fig1.sweep")
    sim = ("simulate", "--a", "0.2", "--c", "1.5", "--kappa", "5", "--n", "20000", "--seed", "11")
    same_cli = _cli(*sweep) == _cli(*sweep) and _cli(*sim) == _cli(*sim)
    chk.passed = chk.passed and same_cli
    record(9, chk, "  + CLI subprocess runs")
    assert chk.passed
