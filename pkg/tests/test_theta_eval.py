import cmath
import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from partial_theta.errors import DivergenceDomain, EmptyZeroSet, ToleranceUnreachable
from partial_theta.theta_eval import (
    eval_derivative,
    eval_dtheta_dx,
    eval_product,
    eval_theta,
    peak_term_log2,
    product_tail_estimate,
    tail_majorant,
    terms_needed,
)


def exact_partial(q: Fraction, x: Fraction, n: int, dx: int = 0) -> Fraction:
    total = Fraction(0)
    for j in range(dx, n):
        coef = math.perm(j, dx)
        total += coef * q ** (j * (j + 1) // 2) * x ** (j - dx)
    return total


def reference(q, x, dq=0, dx=0, prec=400):
    """Direct mpmath summation far past any tail of interest."""
    with mpmath.workprec(prec):
        q, x = mpmath.mpc(q), mpmath.mpc(x)
        total = mpmath.mpc(0)
        for j in range(0, 4000):
            e = j * (j + 1) // 2
            if e < dq or j < dx:
                continue
            c = mpmath.ff(e, dq) * mpmath.ff(j, dx)
            t = c * q ** (e - dq) * x ** (j - dx)
            total += t
            if j > 20 and abs(t) < mpmath.mpf(2) ** (-prec):
                break
        return complex(total)


complex_in_disk = lambda r: st.builds(  # noqa: E731
    lambda rho, phi: cmath.rect(rho, phi),
    st.floats(0, r, allow_nan=False),
    st.floats(0, 2 * math.pi, allow_nan=False),
)


class TestKnownValues:
    def test_q_zero_is_one_with_zero_tail(self):
        r = eval_theta(0, 5 + 2j, 1e-12)
        assert r.value == 1
        assert r.tail_bound == 0

    def test_x_zero(self):
        assert eval_theta(0.3, 0, 1e-12).value == 1

    def test_dx_at_origin_is_q(self):
        assert eval_dtheta_dx(0.2, 0, 1e-12).value == pytest.approx(0.2, abs=1e-15)

    def test_dx_q_zero_vanishes(self):
        assert eval_dtheta_dx(0, 7 - 3j, 1e-12).value == 0

    def test_against_exact_rational_sum(self):
        # theta(1/10, 1) = 1 + 10^-1 + 10^-3 + 10^-6 + ...
        r = eval_theta(0.1, 1, 1e-15)
        exact = exact_partial(Fraction(1, 10), Fraction(1), 40)
        assert abs(r.value - float(exact)) <= 1e-15
        assert float(exact) == pytest.approx(1.101001000100001, abs=1e-15)

    def test_derivative_against_exact_rational_sum(self):
        r = eval_dtheta_dx(0.1, 1, 1e-15)
        exact = exact_partial(Fraction(1, 10), Fraction(1), 40, dx=1)
        assert abs(r.value - float(exact)) <= 1e-15
        assert float(exact) == pytest.approx(0.1020030004000050, abs=1e-15)

    def test_divergence_domain(self):
        with pytest.raises(DivergenceDomain):
            eval_theta(1.5, 1)
        with pytest.raises(DivergenceDomain):
            eval_theta(0.995, 1)

    def test_tolerance_unreachable(self):
        with pytest.raises(ToleranceUnreachable):
            eval_theta(0.98, 1e6, 1e-300, max_terms=50)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            eval_theta(0.1, 1, 0)
        with pytest.raises(ValueError):
            eval_derivative(0.1, 1, dq=-1)


class TestHighPrecision:
    @pytest.mark.parametrize("q,x", [(0.3, -9.0), (0.5 + 0.2j, -20 + 3j), (0.8, -17.4)])
    def test_matches_direct_sum(self, q, x):
        r = eval_theta(q, x, 1e-40, prec=300)
        ref = reference(q, x)
        assert abs(complex(r.value) - ref) <= 1e-30 * max(1, abs(ref))

    @pytest.mark.parametrize("dq,dx", [(1, 0), (0, 2), (1, 1), (2, 0)])
    def test_mixed_derivatives(self, dq, dx):
        q, x = 0.4 - 0.1j, -6 + 1j
        r = eval_derivative(q, x, 1e-35, dq=dq, dx=dx, prec=250)
        ref = reference(q, x, dq=dq, dx=dx)
        assert abs(complex(r.value) - ref) <= 1e-25 * max(1, abs(ref))

    def test_q_derivative_matches_finite_difference(self):
        q, x, h = 0.35, -4.0, 1e-20
        with mpmath.workprec(300):
            f = lambda qq: eval_theta(qq, x, 1e-60, prec=300).value  # noqa: E731
            fd = (f(mpmath.mpf(q) + h) - f(mpmath.mpf(q) - h)) / (2 * h)
        d = eval_derivative(q, x, 1e-40, dq=1, prec=300).value
        assert abs(complex(d) - complex(fd)) < 1e-20


class TestTailBound:
    @given(q=complex_in_disk(0.9), x=complex_in_disk(10.0), n=st.integers(1, 60))
    @settings(max_examples=200, deadline=None)
    def test_tail_bound_is_an_upper_bound(self, q, x, n):
        bound = tail_majorant(q, x, n)
        if math.isinf(bound):
            return
        full = reference(q, x, prec=200)
        part = eval_theta(q, x, terms=n, prec=200).value
        assert abs(full - complex(part)) <= bound * (1 + 1e-9) + 1e-40

    @given(q=complex_in_disk(0.9), x=complex_in_disk(10.0), dq=st.integers(0, 2), dx=st.integers(0, 2))
    @settings(max_examples=200, deadline=None)
    def test_tail_nonincreasing_in_n(self, q, x, dq, dx):
        vals = [tail_majorant(q, x, n, dq=dq, dx=dx) for n in range(1, 80)]
        assert all(b <= a for a, b in zip(vals, vals[1:]))

    @given(q=complex_in_disk(0.9), x=complex_in_disk(10.0), tol=st.sampled_from([1e-6, 1e-12, 1e-15]))
    @settings(max_examples=100, deadline=None)
    def test_terms_needed_is_minimal(self, q, x, tol):
        n = terms_needed(q, x, tol)
        assert tail_majorant(q, x, n) <= tol
        if n > 1:
            assert tail_majorant(q, x, n - 1) > tol

    def test_peak_term(self):
        # terms of theta(0.5, -16): j = 4 gives 2^(-10) 2^16 = 2^6
        assert peak_term_log2(0.5, -16) == pytest.approx(6.0)
        assert peak_term_log2(0, 3) == 0.0


class TestSymmetries:
    @given(q=complex_in_disk(0.9), x=complex_in_disk(10.0))
    @settings(max_examples=200, deadline=None)
    def test_conjugate_symmetry(self, q, x):
        a = eval_theta(q, x, 1e-14).value
        b = eval_theta(q.conjugate(), x.conjugate(), 1e-14).value
        assert abs(a.conjugate() - b) <= 1e-12 * max(1.0, abs(a))

    @given(q=complex_in_disk(0.9), x=complex_in_disk(10.0))
    @settings(max_examples=200, deadline=None)
    def test_functional_equation(self, q, x):
        # theta(q, x) = 1 + q x theta(q, q x)
        lhs = eval_theta(q, x, 1e-14, prec=160)
        rhs = eval_theta(q, q * x, 1e-14, prec=160)
        slack = lhs.tail_bound + abs(q * x) * rhs.tail_bound
        diff = abs(complex(lhs.value) - (1 + q * x * complex(rhs.value)))
        assert diff <= slack + 1e-13 * max(1.0, abs(complex(lhs.value)))


class TestProduct:
    def test_x_zero_gives_one(self):
        assert eval_product(0.1, 0, [3 + 1j, 40]) == 1

    def test_empty_raises(self):
        with pytest.raises(EmptyZeroSet):
            eval_product(0.1, 1, [])

    def test_polynomial_identity(self):
        # (1 + x/2)(1 + x/5) at x = 1
        assert eval_product(0, 1, [2, 5]) == pytest.approx(1.5 * 1.2)

    def test_tail_estimate_shrinks(self):
        a = product_tail_estimate(0.05, 1, 4)
        b = product_tail_estimate(0.05, 1, 8)
        assert 0 < b < a
        assert b < 1e-9
