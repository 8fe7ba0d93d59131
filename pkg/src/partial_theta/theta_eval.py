"""Summation of the partial theta series and its derivatives.

``theta(q, x) = sum_{j >= 0} q^(j(j+1)/2) x^j`` is entire in ``x`` for
``|q| < 1``.  Every evaluation returns the partial sum together with a
rigorous bound on the discarded tail, obtained from a geometric majorant
of the term ratio ``|q|^(j+1) |x|``.

Two arithmetic modes are offered: Python ``complex`` (IEEE double, the
default) and ``mpmath`` at a caller-chosen number of bits (``prec=``).
In the high-precision mode the partial sum is accumulated with
``mpmath.fsum`` so the only rounding is the final one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable

import mpmath

from .errors import DivergenceDomain, EmptyZeroSet, ToleranceUnreachable

#: hard cap on |q|; the series still converges beyond it but term counts explode
Q_CAP = 0.99
MAX_TERMS = 20_000
DEFAULT_TOL = 1e-15


@dataclass(frozen=True)
class EvalResult:
    """Partial sum of the series plus a bound on the neglected tail.

    ``value`` is a Python ``complex`` in double mode and an ``mpmath.mpc``
    in high-precision mode.
    """

    value: Any
    tail_bound: float
    terms_used: int

    def __complex__(self) -> complex:
        return complex(self.value)


def _falling(n: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= n - i
    return out


def _exponent(j: int) -> int:
    return j * (j + 1) // 2


def _multiplier(j: int, dq: int, dx: int) -> int:
    return _falling(_exponent(j), dq) * _falling(j, dx)


def _first_live_index(dq: int, dx: int) -> int:
    """Smallest j whose term survives the differentiation."""
    j = dx
    while _exponent(j) < dq:
        j += 1
    return j


def _ratio_factor(n: int, dq: int, dx: int) -> float:
    """Upper bound on m(j+1)/m(j) for all j >= n, m the derivative multiplier.

    Both factors are decreasing in j once j >= max(2, dq, dx), so the value
    at n bounds every later ratio.
    """
    if dq == 0 and dx == 0:
        return 1.0
    e = _exponent(n)
    f = 1.0
    if dq:
        f *= ((e + n + 1) / (e - dq + 1)) ** dq
    if dx:
        f *= ((n + 1) / (n - dx + 1)) ** dx
    return f


def _log_abs(z: complex) -> float:
    a = abs(z)
    return math.log(a) if a > 0 else -math.inf


def tail_majorant(q, x, n: int, *, dq: int = 0, dx: int = 0) -> float:
    """Bound on ``|sum_{j >= n} t_j|`` for the (dq, dx)-derivative series.

    Returns ``inf`` when the ratio test does not yet give a factor <= 1/2
    at index ``n``.  Nonincreasing in ``n``.
    """
    aq, ax = abs(complex(q)), abs(complex(x))
    if aq >= 1.0:
        return math.inf
    lq, lx = _log_abs(aq), _log_abs(ax)
    n = max(n, _first_live_index(dq, dx))
    # terms past a zero q or x are identically zero
    if (aq == 0.0 and _exponent(n) > dq) or (ax == 0.0 and n > dx):
        return 0.0
    if aq == 0.0 or ax == 0.0:
        # index n is the only survivor
        return float(_multiplier(n, dq, dx) * aq ** (_exponent(n) - dq) * ax ** (n - dx))
    lo = max(2, dq, dx) if (dq or dx) else 0
    if n < lo:
        # bound the finitely many early terms individually, then the rest
        head = sum(
            _multiplier(j, dq, dx) * aq ** (_exponent(j) - dq) * ax ** (j - dx)
            for j in range(n, lo)
        )
        rest = tail_majorant(q, x, lo, dq=dq, dx=dx)
        return head + rest
    ratio = _ratio_factor(n, dq, dx) * aq ** (n + 1) * ax
    if ratio > 0.5:
        return math.inf
    log_t = (
        math.log(_multiplier(n, dq, dx))
        + (_exponent(n) - dq) * lq
        + (n - dx) * lx
    )
    if log_t < -745.0:
        return 5e-324
    # 2|t_n| bounds the geometric tail; the extra factor absorbs rounding here
    return 2.0 * math.exp(log_t) * (1.0 + 1e-12)


def terms_needed(
    q, x, tol: float, *, dq: int = 0, dx: int = 0, max_terms: int = MAX_TERMS
) -> int:
    """Smallest N >= 1 whose tail majorant is <= tol."""
    aq, ax = abs(complex(q)), abs(complex(x))
    n = max(1, _first_live_index(dq, dx) + 1)
    # jump to where the ratio condition can hold before stepping one by one
    if aq > 0.0 and ax > 0.0:
        # ratio factors are >= 1, so this start never overshoots the minimum
        need = (math.log(0.5) - math.log(ax)) / math.log(aq) - 1
        n = max(n, min(int(need) - 1, max_terms + 1))
    while True:
        if n > max_terms:
            raise ToleranceUnreachable(
                f"tail bound {tol:g} needs more than {max_terms} terms"
                f" at |q|={aq:g}, |x|={ax:g}"
            )
        if tail_majorant(q, x, n, dq=dq, dx=dx) <= tol:
            return n
        n += 1


def _check_q(q, q_cap: float) -> None:
    if not q_cap < 1.0:
        raise ValueError("q_cap must be < 1")
    if abs(complex(q)) > q_cap:
        raise DivergenceDomain(f"|q| = {abs(complex(q)):g} exceeds the cap {q_cap:g}")


def _partial_sum_double(q: complex, x: complex, n: int, dq: int, dx: int) -> complex:
    j0 = _first_live_index(dq, dx)
    if j0 >= n:
        return 0j
    base = q ** (_exponent(j0) - dq) * x ** (j0 - dx)
    total = 0j
    for j in range(j0, n):
        total += _multiplier(j, dq, dx) * base
        base *= q ** (j + 1) * x
    return total


def _partial_sum_mp(q, x, n: int, dq: int, dx: int):
    j0 = _first_live_index(dq, dx)
    if j0 >= n:
        return mpmath.mpc(0)
    base = q ** (_exponent(j0) - dq) * x ** (j0 - dx)
    qpow = q ** (j0 + 1)
    terms = []
    for j in range(j0, n):
        terms.append(_multiplier(j, dq, dx) * base)
        base *= qpow * x
        qpow *= q
    return mpmath.fsum(terms)


def eval_derivative(
    q,
    x,
    tol: float = DEFAULT_TOL,
    *,
    dq: int = 0,
    dx: int = 0,
    terms: int | None = None,
    prec: int | None = None,
    q_cap: float = Q_CAP,
    max_terms: int = MAX_TERMS,
) -> EvalResult:
    """Evaluate ``d^dq/dq^dq d^dx/dx^dx theta(q, x)``.

    With ``terms`` given the sum is taken over exactly that many indices and
    the tail bound reported for it (possibly ``inf``); otherwise the number
    of terms is chosen so that the bound does not exceed ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if dq < 0 or dx < 0:
        raise ValueError("derivative orders must be nonnegative")
    _check_q(q, q_cap)
    if terms is None:
        n = terms_needed(q, x, tol, dq=dq, dx=dx, max_terms=max_terms)
    else:
        if terms < 1:
            raise ValueError("terms must be >= 1")
        n = terms
    tail = tail_majorant(q, x, n, dq=dq, dx=dx)
    if prec is None:
        value = _partial_sum_double(complex(q), complex(x), n, dq, dx)
    else:
        with mpmath.workprec(prec):
            value = _partial_sum_mp(mpmath.mpc(q), mpmath.mpc(x), n, dq, dx)
    return EvalResult(value=value, tail_bound=tail, terms_used=n)


def eval_theta(q, x, tol: float = DEFAULT_TOL, **kwargs) -> EvalResult:
    """Evaluate theta(q, x) with tail bound <= tol.

    >>> eval_theta(0, 5 + 2j).value
    (1+0j)
    """
    return eval_derivative(q, x, tol, **kwargs)


def eval_dtheta_dx(q, x, tol: float = DEFAULT_TOL, **kwargs) -> EvalResult:
    """Evaluate the termwise x-derivative ``sum j q^(j(j+1)/2) x^(j-1)``."""
    return eval_derivative(q, x, tol, dx=1, **kwargs)


def peak_term_log2(q, x) -> float:
    """log2 of the largest |term| of the series at (q, x).

    Summing to a given absolute accuracy needs roughly this many bits on
    top of the accuracy itself, because of cancellation between terms.
    """
    aq, ax = abs(complex(q)), abs(complex(x))
    if aq == 0.0 or ax == 0.0:
        return 0.0
    lq, lx = math.log2(aq), math.log2(ax)
    # j(j+1)/2 lq + j lx is concave in j; check the integers around the vertex
    jstar = max(0.0, -(lx + lq / 2) / lq)
    best = 0.0
    for j in {0, int(jstar), int(jstar) + 1}:
        best = max(best, _exponent(j) * lq + j * lx)
    return best


def _zero_list(zeros) -> list:
    entries = getattr(zeros, "entries", None)
    if entries is not None:
        return [e.xi for e in entries]
    return list(zeros)


def eval_product(q, x, zeros: Iterable, *, prec: int | None = None):
    """Finite product ``prod_j (1 + x/xi_j)`` over the supplied zeros.

    ``zeros`` is a :class:`~partial_theta.zeros.ZeroSet` or any iterable of
    the ``xi_j`` (the zeros themselves are ``-xi_j``).  ``q`` is accepted
    for symmetry with :func:`eval_theta`; the product depends only on the
    zeros.
    """
    xis = _zero_list(zeros)
    if not xis:
        raise EmptyZeroSet("cannot form a product over no zeros")
    if prec is None:
        if any(isinstance(v, (mpmath.mpc, mpmath.mpf)) for v in xis):
            prec = max(mpmath.mp.prec, 53)
    if prec is None:
        out = 1 + 0j
        for xi in xis:
            out *= 1 + complex(x) / complex(xi)
        return out
    with mpmath.workprec(prec):
        out = mpmath.mpc(1)
        xm = mpmath.mpc(x)
        for xi in xis:
            out *= 1 + xm / xi
        return out


def product_tail_estimate(q, x, n: int, beta: float = 0.7882) -> float:
    """Relative-error estimate for truncating the product after n factors.

    Uses |1/xi_j| <= (1 + beta)|q|^j for the omitted factors, valid inside
    the certified disk; returns ``exp(S) - 1`` with S the sum of the
    omitted ``|x/xi_j|``.
    """
    aq = abs(complex(q))
    if aq >= 1.0:
        return math.inf
    s = abs(complex(x)) * (1.0 + beta) * aq ** (n + 1) / (1.0 - aq)
    return math.expm1(s)
