import csv
import io
import random

import mpmath
import pytest

from partial_theta import zeros
from partial_theta.errors import DivergenceDomain, NewtonStall, TooFewZeros
from partial_theta.fps_delta import solve_delta
from partial_theta.theta_eval import eval_product, eval_theta, product_tail_estimate


class TestFind:
    def test_q_zero_is_empty(self):
        assert zeros.find(0, 4).count == 0

    def test_first_zero_small_q(self):
        zs = zeros.find(0.05, 1, 1e-14)
        e = zs.entries[0]
        assert float(e.zero.real) == pytest.approx(-21.111274895303, abs=1e-9)
        assert float(e.delta.real) == pytest.approx(0.9473610712, abs=1e-9)
        assert e.residual <= 1e-14
        # the seed is the truncated series itself
        seed = solve_delta(1, 20).rows[0].evaluate(0.05)
        assert abs(seed - float(e.delta.real)) < 1e-20

    def test_residuals_recomputed_independently(self):
        q = 0.1 + 0.05j
        zs = zeros.find(q, 5, 1e-12)
        for e in zs:
            r = eval_theta(q, e.zero, 1e-40, prec=zs.prec + 64).value
            assert abs(r) <= 1e-12

    def test_conjugate_symmetry(self):
        q = 0.07 + 0.06j
        a = zeros.find(q, 4)
        b = zeros.find(q.conjugate(), 4)
        for ea, eb in zip(a, b):
            assert abs(complex(ea.xi).conjugate() - complex(eb.xi)) <= 1e-8 * abs(complex(ea.xi))

    def test_sorted_and_labelled(self):
        zs = zeros.find(0.1, 6)
        assert zs.labels_in_order
        mods = [abs(complex(x)) for x in zs.xis()]
        assert mods == sorted(mods)

    def test_domain(self):
        with pytest.raises(DivergenceDomain):
            zeros.find(0.95, 3)
        with pytest.raises(ValueError):
            zeros.find(0.1, 0)

    def test_stall_is_reported(self):
        with pytest.raises(NewtonStall):
            zeros.newton_zero(0.3, -8.0, 1e-10, 100, max_iter=1)

    def test_product_matches_series(self):
        zs = zeros.find(0.05, 8, 1e-14)
        prod = complex(eval_product(0.05, 1, zs))
        series = eval_theta(0.05, 1, 1e-16).value
        assert abs(prod - series) <= max(1e-9, 2 * product_tail_estimate(0.05, 1, 8))

    def test_product_at_origin(self):
        zs = zeros.find(0.08 + 0.02j, 3)
        assert eval_product(0.08, 0, zs) == 1

    def test_real_below_first_spectral_value(self):
        rng = random.Random(20261018)
        for _ in range(20):
            q = rng.uniform(0.01, 0.30)
            zs = zeros.find(q, 6)
            assert all(abs(float(e.xi.imag)) <= 1e-10 for e in zs), q

    def test_mp_q_is_not_rounded(self):
        with mpmath.workprec(200):
            q = mpmath.mpf(1) / 10 + mpmath.mpf(2) ** -80
            zs = zeros.find(q, 2, 1e-40)
            r = eval_theta(q, zs.entries[1].zero, 1e-50, prec=300).value
        assert abs(r) <= 1e-40


class TestSeparation:
    def test_small_q(self):
        rep = zeros.separation_report(zeros.find(0.05, 5))
        assert 0.045 <= rep.min_ratio <= 0.06
        assert rep.distinct

    def test_edge_of_disk(self):
        rep = zeros.separation_report(zeros.find(0.108, 8))
        # (1 + beta) a / (1 - beta) with a = 0.108, beta = 0.7882
        assert rep.min_ratio <= 1.7882 * 0.108 / 0.2118
        assert rep.distinct

    def test_needs_two(self):
        with pytest.raises(TooFewZeros):
            zeros.separation_report(zeros.find(0.05, 1))

    def test_pair_merges_near_spectral_value(self):
        # the two rightmost real zeros approach each other as q -> 0.30925
        sets = [zeros.find(q, 2) for q in (0.25, 0.29, 0.305, 0.309)]
        d = [zs.min_pair_distance() for zs in sets]
        assert d[0] > d[1] > d[2] > d[3]
        assert d[3] < 0.5
        mid = -sum(float(x.real) for x in sets[-1].xis()) / 2
        assert mid == pytest.approx(-7.5033, abs=0.02)


class TestScan:
    def test_grid_shape(self):
        pts = zeros.polar_grid(0.1, 4)
        assert len(pts) == 16
        assert max(abs(q) for q in pts) == pytest.approx(0.1)

    def test_small_scan_and_csv(self):
        rows = zeros.scan_disk(0.05, 3, 3)
        assert len(rows) == 9
        assert not any(r.stalled for r in rows)
        assert all(r.decreasing and r.distinct for r in rows)
        buf = io.StringIO()
        zeros.write_scan_csv(rows, buf)
        parsed = list(csv.reader(io.StringIO(buf.getvalue())))
        assert tuple(parsed[0]) == zeros.CSV_COLUMNS
        assert len(parsed) == 10
        assert all(p[-1] == "0" for p in parsed[1:])

    def test_stalled_rows_are_data(self, monkeypatch):
        def boom(*a, **k):
            raise NewtonStall("forced")

        monkeypatch.setattr(zeros, "find", boom)
        row = zeros.scan_point(0.1, 3)
        assert row.stalled and row.n_found == 0

    def test_parameter_checks(self):
        with pytest.raises(ValueError):
            zeros.scan_disk(0.4, 4, 3)
        with pytest.raises(ValueError):
            zeros.scan_disk(0.1, 513, 3)
