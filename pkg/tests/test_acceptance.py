"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v`` (the lines are
printed even without ``-s``) or ``python3 tests/test_acceptance.py``.
"""

import cmath
import io
import math
import random
import sys
import time
from fractions import Fraction

import mpmath
import pytest

from partial_theta import certify, fps_delta, spectrum, zeros
from partial_theta.cli import main
from partial_theta.theta_eval import eval_theta, peak_term_log2

Q1 = 0.3092493386


@pytest.fixture
def report(capsys):
    def emit(number: int, name: str, ok: bool, elapsed: float, limit: float, detail: str = ""):
        status = "PASS" if ok and elapsed < limit else "FAIL"
        line = f"[{status}] criterion {number}: {name} ({elapsed:.3f} s, limit {limit:g} s)"
        if detail:
            line += f" {detail}"
        with capsys.disabled():
            print("\n" + line)
        return status == "PASS"

    return emit


def test_1_coefficient_table(report):
    fps_delta._solve_cached.cache_clear()
    out = io.StringIO()
    t0 = time.perf_counter()
    code = main(["delta", "--s", "5", "--k", "9", "--check-table"], stdout=out)
    elapsed = time.perf_counter() - t0
    table = fps_delta.solve_delta(5, 9)
    expected = [
        [1, -1, -1, -1, -2, -4, -10, -25, -66, -178],
        [1, 0, 0, 1, 3, 9, 24, 66, 180, 498],
        [1, 0, 0, 0, 0, 0, -1, -3, -9, -22],
        [1] + [0] * 9,
        [1] + [0] * 9,
    ]
    ok = code == 0 and "check-table: PASS" in out.getvalue() and table.as_lists() == expected
    assert report(1, "5x10 coefficient table, exact", ok, elapsed, 1.0)


def test_2_certificate_at_constants(report):
    a, u, beta = Fraction("0.108"), Fraction("1.7882"), Fraction("0.7882")
    t0 = time.perf_counter()
    cond = certify.check_conditions(a, u)
    sep = certify.separation_margin(a, beta)
    elapsed = time.perf_counter() - t0
    ineq = sep.inequalities[0]
    ok = (
        cond.ok
        and sep.ok
        and ineq.lhs == Fraction("0.1931256")
        and ineq.rhs == Fraction("0.2118")
        and ineq.lhs < ineq.rhs
    )
    assert report(2, "conditions and separation at a=0.108, u=1.7882", ok, elapsed, 0.010,
                  f"slack {float(cond.slack):.4g}")


def test_3_inverse_and_coefficient_oracles(report):
    rng = random.Random(3)
    t0 = time.perf_counter()
    inverse_ok = 0
    for _ in range(200):
        s = rng.randint(1, 8)
        d = s + rng.randint(1, 4)
        q = cmath.rect(rng.uniform(0, 0.3), rng.uniform(0, 2 * math.pi))
        delta = cmath.rect(rng.uniform(0.2, 1.8), rng.uniform(0, 2 * math.pi))
        inverse_ok += certify.inverse_oracle_check(s, d, q, delta, 1e-10)
    bound_ok = True
    for a in ("0.05", "0.108", "0.2", "0.3"):
        af = Fraction(a)
        for s in range(2, 9):
            b = certify.product_coefficients(s, af, 60)
            bound_ok &= all(b[j] <= certify.bound_b(j, af) for j in range(1, s))
    elapsed = time.perf_counter() - t0
    assert report(3, "band-inverse closed form x200 and coefficient bound, j < s <= 8",
                  inverse_ok == 200 and bound_ok, elapsed, 5.0, f"{inverse_ok}/200 inverses")


def test_4_first_spectral_value(report):
    t0 = time.perf_counter()
    p = spectrum.find_spectral(1)
    elapsed = time.perf_counter() - t0
    ok = (
        abs(float(p.q_tilde) - Q1) <= 1e-8
        and p.newton_residual <= 1e-10
        and abs(p.theta_xx) > 1e-3
    )
    assert report(4, "q~1 = 0.3092493386 with double-zero certificate", ok, elapsed, 30.0,
                  f"q~1 = {mpmath.nstr(p.q_tilde, 15)}, residual {p.newton_residual:.1e}, theta_xx {p.theta_xx:.4g}")


def test_5_zero_count_transition(report):
    t0 = time.perf_counter()
    below = spectrum.count_real_zeros(0.30, n_probe=6)
    above = spectrum.count_real_zeros(0.32, n_probe=6)
    elapsed = time.perf_counter() - t0
    assert report(5, "6 real zeros at q=0.30, 4 at q=0.32", below == 6 and above == 4, elapsed, 5.0,
                  f"counts {below}, {above}")


def test_6_distinct_zeros_in_disk(report):
    t0 = time.perf_counter()
    rows = zeros.scan_disk(0.108, 10, 6, 1e-10)
    elapsed = time.perf_counter() - t0
    ok = (
        len(rows) == 100
        and all(abs(r.q) <= 0.108 + 1e-15 for r in rows)
        and all(not r.stalled and r.n_found == 6 for r in rows)
        and all(r.max_residual <= 1e-10 for r in rows)
        and all(r.decreasing and r.distinct for r in rows)
        and all(0.2118 <= r.min_abs_delta and r.max_abs_delta <= 1.7882 for r in rows)
    )
    lo = min(r.min_abs_delta for r in rows)
    hi = max(r.max_abs_delta for r in rows)
    assert report(6, "100-point scan of |q| <= 0.108", ok, elapsed, 60.0, f"|Delta_j| in [{lo:.4f}, {hi:.4f}]")


def test_7_functional_equation(report):
    rng = random.Random(7)
    prec = 160
    t0 = time.perf_counter()
    worst = 0.0
    ok = True
    for _ in range(1000):
        q = cmath.rect(0.9 * math.sqrt(rng.random()), rng.uniform(0, 2 * math.pi))
        x = cmath.rect(10 * math.sqrt(rng.random()), rng.uniform(0, 2 * math.pi))
        with mpmath.workprec(prec):
            qx = mpmath.mpc(q) * mpmath.mpc(x)
            lhs = eval_theta(q, x, 1e-20, prec=prec)
            rhs = eval_theta(q, qx, 1e-20, prec=prec)
            diff = abs(lhs.value - (1 + qx * rhs.value))
        rounding = 2.0 ** (peak_term_log2(q, x) + 16 - prec)
        slack = lhs.tail_bound + abs(q * x) * rhs.tail_bound + rounding
        worst = max(worst, float(diff / slack))
        ok &= diff <= slack
    elapsed = time.perf_counter() - t0
    assert report(7, "theta(q,x) = 1 + q x theta(q,qx) on 1000 samples", ok, elapsed, 5.0,
                  f"max |diff|/bound {worst:.3g}")


def test_8_asymptotic_trend(report):
    t0 = time.perf_counter()
    pts = spectrum.spectrum(6)
    rep = spectrum.asymptotic_report(pts)
    elapsed = time.perf_counter() - t0
    increasing = all(float(a.q_tilde) < float(b.q_tilde) for a, b in zip(pts, pts[1:]))
    ok = len(pts) == 6 and increasing and rep.gap_monotone and rep.x_monotone and rep.x_above_limit
    gaps = ", ".join(f"{r.scaled_gap:.4f}" for r in rep.rows)
    assert report(8, "j(1-q~j) toward pi/2, x_double toward -e^pi for j=1..6", ok, elapsed, 300.0,
                  f"j(1-q~j): {gaps}; x_6 = {rep.rows[-1].x_double:.4f}")


def test_9_method_reach(report):
    t0 = time.perf_counter()
    r = certify.max_certified_radius()
    elapsed = time.perf_counter() - t0
    ok = Fraction("0.108") <= r < Fraction("0.3092493386")
    assert report(9, "max certified radius in [0.108, 0.3092493386)", ok, elapsed, 60.0, f"radius {r} = {float(r)}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
