"""Exact-arithmetic certificate that theta(q, .) has only simple zeros for |q| <= a.

The chain, for a radius ``a`` and band half-width ``beta`` (``u = 1 + beta``):

* the unitriangular band factors ``L_s = I + N_s`` have inverses with a closed
  form (:func:`inverse_entry`), whose moduli are majorised using
  ``|q| <= a`` and ``|Delta_s| <= u``;
* the coefficients of the majorising product are bounded by
  ``1/((1-a)(1-a^2)...(1-a^j))`` (:func:`bound_b`);
* under ``0 < a < 1/3`` and ``0 < au < 1`` this yields
  ``| |Delta_1...Delta_s| - 1 | <= E`` with
  ``E = ua/(1-a) + (ua)^2/(1-ua)`` independent of s;
* ``E <= beta/3`` then keeps every ``|Delta_s|`` inside ``[1-beta, 1+beta]``;
* finally ``(1+beta) a < 1-beta`` separates consecutive zeros.

Every inequality of the chain is evaluated with :class:`fractions.Fraction`;
floating point appears only in the numerical oracles.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

Rational = Union[Fraction, int, str]

THIRD = Fraction(1, 3)
#: search grid for u, coarse pass then one refinement pass around the best point
COARSE_STEP = Fraction(1, 1000)
FINE_STEP = Fraction(1, 10**6)


def as_fraction(v: Rational) -> Fraction:
    """Exact conversion; decimal strings like "0.108" stay exact.

    Floats are rejected: a binary float is not the decimal the user typed.
    """
    if isinstance(v, float):
        raise TypeError("pass rationals as Fraction, int or decimal string, not float")
    return Fraction(v)


# -- domain types -----------------------------------------------------------


@dataclass(frozen=True)
class CertParams:
    """Radius ``a`` on |q| and band half-width ``beta`` on |Delta_j|; ``u = 1 + beta``."""

    a: Fraction
    beta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", as_fraction(self.a))
        object.__setattr__(self, "beta", as_fraction(self.beta))
        if self.a <= 0:
            raise ValueError("a must be positive")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")

    @property
    def u(self) -> Fraction:
        return 1 + self.beta

    @classmethod
    def from_u(cls, a: Rational, u: Rational) -> "CertParams":
        return cls(as_fraction(a), as_fraction(u) - 1)


@dataclass(frozen=True)
class Inequality:
    """One checked relation ``lhs <rel> rhs`` between exact rationals."""

    label: str
    lhs: Fraction
    rel: str  # "<" or "<="
    rhs: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs < self.rhs if self.rel == "<" else self.lhs <= self.rhs

    @property
    def slack(self) -> Fraction:
        return self.rhs - self.lhs

    def line(self) -> str:
        mark = "ok  " if self.holds else "FAIL"
        return (
            f"[{mark}] {self.label}: {self.lhs} {self.rel} {self.rhs}"
            f"  (~ {float(self.lhs):.10g} {self.rel} {float(self.rhs):.10g})"
        )

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "lhs": _frac_dict(self.lhs),
            "rel": self.rel,
            "rhs": _frac_dict(self.rhs),
            "holds": self.holds,
        }


@dataclass(frozen=True)
class CertVerdict:
    ok: bool
    inequalities: tuple[Inequality, ...]
    slack: Fraction | None = None

    def transcript(self) -> list[str]:
        return [i.line() for i in self.inequalities]


def _frac_dict(f: Fraction) -> dict:
    return {"num": str(f.numerator), "den": str(f.denominator)}


# -- closed form and oracle for the band-factor inverses --------------------


def inverse_entry(s: int, mu: int, nu: int, q: complex, delta_s: complex) -> complex:
    """Entry (mu, nu) (1-based) of the inverse of L_s.

    L_s is the identity with ``q^(s-1) Delta_s, ..., q Delta_s`` on the first
    subdiagonal (rows 2..s) and zeros elsewhere.
    """
    if s < 1 or mu < 1 or nu < 1:
        raise ValueError("indices start at 1")
    if mu == nu:
        return 1
    if not nu <= mu <= s:
        return 0
    k = mu - nu
    exponent = k * (s - mu + 1) + k * (k - 1) // 2
    return (-1) ** k * delta_s**k * q**exponent


def band_matrix(s: int, d: int, q: complex, delta_s: complex) -> np.ndarray:
    """The d x d leading block of L_s."""
    L = np.eye(d, dtype=complex)
    for row in range(2, min(s, d) + 1):
        L[row - 1, row - 2] = q ** (s - row + 1) * delta_s
    return L


def inverse_oracle_check(
    s: int, d: int | None, q: complex, delta_s: complex, tol: float = 1e-12
) -> bool:
    """Compare the closed form against a numerical inverse of the d x d block.

    ``d=None`` uses s + 4, which also exercises rows past the band.
    """
    if d is None:
        d = s + 4
    if d < s + 1:
        raise ValueError("truncation dimension must be at least s + 1")
    inv = np.linalg.inv(band_matrix(s, d, q, delta_s))
    closed = np.array(
        [[inverse_entry(s, m, n, q, delta_s) for n in range(1, d + 1)] for m in range(1, d + 1)],
        dtype=complex,
    )
    return bool(np.max(np.abs(inv - closed)) <= tol)


def entry_majorant(s: int, mu: int, nu: int, a: Rational, u: Rational) -> Fraction:
    """``u^(mu-nu) a^((mu-nu)(s-mu+1) + (mu-nu)(mu-nu-1)/2)`` for nu < mu <= s."""
    k = mu - nu
    a, u = as_fraction(a), as_fraction(u)
    return u**k * a ** (k * (s - mu + 1) + k * (k - 1) // 2)


# -- coefficients of the majorising product ---------------------------------


def bound_b(j: int, a: Rational) -> Fraction:
    """``1/((1-a)(1-a^2)...(1-a^j))`` as an exact rational."""
    a = as_fraction(a)
    if not 0 < a < 1:
        raise ValueError("need 0 < a < 1")
    if j < 1:
        raise ValueError("j must be >= 1")
    den = Fraction(1)
    for i in range(1, j + 1):
        den *= 1 - a**i
    return 1 / den


def model_matrix(s: int, a: Fraction, u: Fraction) -> list[list[Fraction]]:
    """s x s matrix with ``a^(s-1) u, ..., a u`` on the first subdiagonal."""
    M = [[Fraction(0)] * s for _ in range(s)]
    for row in range(1, s):
        M[row][row - 1] = a ** (s - row) * u
    return M


def _matmul(A, B):
    n = len(A)
    return [
        [sum((A[i][k] * B[k][j] for k in range(n) if A[i][k] and B[k][j]), Fraction(0)) for j in range(n)]
        for i in range(n)
    ]


def product_coefficients(s: int, a: Rational, terms: int, u: Rational = Fraction(17882, 10000)) -> list[Fraction]:
    """b_0..b_(s-1) of ``prod_{k=s}^{s+terms-1} (I + sum_{j<s} (a^(k-s) M)^j)``.

    The product is formed with actual s x s matrices; since it is a
    polynomial in M and M^j has the single nonzero diagonal j below the
    main one, b_j is read off as ``P[j][0] / (M^j)[j][0]``.
    """
    a, u = as_fraction(a), as_fraction(u)
    M = model_matrix(s, a, u)
    ident = [[Fraction(int(i == j)) for j in range(s)] for i in range(s)]
    powers = [ident]
    for _ in range(1, s):
        powers.append(_matmul(powers[-1], M))
    P = ident
    for k in range(s, s + terms):
        scale = a ** (k - s)
        factor = [[Fraction(0)] * s for _ in range(s)]
        for jp in range(s):
            c = scale**jp
            for r in range(s):
                for col in range(s):
                    if powers[jp][r][col]:
                        factor[r][col] += c * powers[jp][r][col]
        P = _matmul(P, factor)
    return [P[j][0] / powers[j][j][0] for j in range(s)]


def bound_b_oracle(j: int, s: int, a: Rational, terms: int = 60) -> bool:
    """True iff the finite-product coefficient b_j does not exceed bound_b(j, a)."""
    if not 1 <= j < s:
        raise ValueError("need 1 <= j < s")
    b = product_coefficients(s, a, terms)[j]
    return b <= bound_b(j, a)


# -- the inequality chain ---------------------------------------------------


def excess(a: Rational, u: Rational) -> Fraction:
    """``E = ua/(1-a) + (ua)^2/(1-ua)``; requires a < 1 and ua < 1."""
    a, u = as_fraction(a), as_fraction(u)
    ua = u * a
    return ua / (1 - a) + ua**2 / (1 - ua)


def check_conditions(a: Rational, u: Rational) -> CertVerdict:
    """Check ``0 < a < 1/3``, ``0 < au < 1`` and ``E <= (u-1)/3``.

    ``slack`` is ``(u-1)/3 - E``, or None when E is undefined (a >= 1 or
    au >= 1).
    """
    a, u = as_fraction(a), as_fraction(u)
    if a <= 0 or u <= 1:
        raise ValueError("need a > 0 and u > 1")
    ua = u * a
    ineqs = [
        Inequality("0 < a", Fraction(0), "<", a),
        Inequality("a < 1/3", a, "<", THIRD),
        Inequality("0 < ua", Fraction(0), "<", ua),
        Inequality("ua < 1", ua, "<", Fraction(1)),
    ]
    slack = None
    if a < 1 and ua < 1:
        E = excess(a, u)
        ineqs.append(Inequality("ua/(1-a) + (ua)^2/(1-ua) <= (u-1)/3", E, "<=", (u - 1) / 3))
        slack = (u - 1) / 3 - E
    ok = len(ineqs) == 5 and all(i.holds for i in ineqs)
    return CertVerdict(ok=ok, inequalities=tuple(ineqs), slack=slack)


@dataclass(frozen=True)
class Sandwich:
    """s-independent bounds ``lo <= |Delta_1...Delta_s| <= hi`` and the derived band."""

    lo: Fraction
    hi: Fraction
    excess: Fraction
    within_third: bool
    quotient: tuple[Inequality, Inequality]

    @property
    def quotient_ok(self) -> bool:
        return all(i.holds for i in self.quotient)


def band_sandwich(a: Rational, u: Rational) -> Sandwich:
    """Bounds ``1 - E`` and ``1 + E`` plus the band they imply for each Delta_s.

    With ``beta = u - 1``, ``E <= beta/3`` gives
    ``1-beta <= (1-beta/3)/(1+beta/3) <= |Delta_s| <= (1+beta/3)/(1-beta/3) <= 1+beta``;
    the outer two relations are checked here for the given beta.
    """
    a, u = as_fraction(a), as_fraction(u)
    if not (0 < a < THIRD and 0 < u * a < 1):
        raise ValueError("sandwich needs 0 < a < 1/3 and 0 < ua < 1")
    E = excess(a, u)
    beta = u - 1
    b3 = beta / 3
    quotient = (
        Inequality("1 - beta <= (1 - beta/3)/(1 + beta/3)", 1 - beta, "<=", (1 - b3) / (1 + b3)),
        Inequality("(1 + beta/3)/(1 - beta/3) <= 1 + beta", (1 + b3) / (1 - b3), "<=", 1 + beta),
    )
    return Sandwich(lo=1 - E, hi=1 + E, excess=E, within_third=E <= b3, quotient=quotient)


def separation_margin(a: Rational, beta: Rational) -> CertVerdict:
    """Check ``(1 + beta) a < 1 - beta``: |q^(j+1) Delta_(j+1)| < |q^j Delta_j|."""
    a, beta = as_fraction(a), as_fraction(beta)
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    ineq = Inequality("(1 + beta) a < 1 - beta", (1 + beta) * a, "<", 1 - beta)
    return CertVerdict(ok=ineq.holds, inequalities=(ineq,), slack=ineq.slack)


# -- search over u ---------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    """Outcome of :func:`certify_disk`.

    When ``feasible`` every sub-verdict holds for ``params``; otherwise
    ``params`` is the best point tried and ``best_slack`` its (negative)
    margin, the smaller of the excess-bound slack and the separation slack.
    """

    a: Fraction
    feasible: bool
    params: CertParams | None
    conditions: CertVerdict | None
    sandwich: Sandwich | None
    separation: CertVerdict | None
    best_slack: Fraction | None
    candidates_tried: int = 0
    notes: tuple[str, ...] = field(default_factory=tuple)

    def transcript(self) -> list[str]:
        lines = [f"radius a = {self.a} (~ {float(self.a):.10g})"]
        if self.params is not None:
            p = self.params
            lines.append(f"u = {p.u} (~ {float(p.u):.10g}), beta = {p.beta}")
        if self.conditions is not None:
            lines += self.conditions.transcript()
        if self.sandwich is not None:
            sw = self.sandwich
            lines.append(
                f"[{'ok  ' if sw.within_third else 'FAIL'}] E <= beta/3:"
                f" {sw.excess} <= {(self.params.beta / 3) if self.params else '?'}"
            )
            lines.append(f"       |Delta_1...Delta_s| in [{float(sw.lo):.10g}, {float(sw.hi):.10g}] for every s")
            lines += [i.line() for i in sw.quotient]
        if self.separation is not None:
            lines += self.separation.transcript()
        lines.append(f"verdict: {'FEASIBLE' if self.feasible else 'INFEASIBLE'}")
        if self.best_slack is not None:
            lines.append(f"best slack: {float(self.best_slack):.6g}")
        lines += list(self.notes)
        return lines

    def to_dict(self) -> dict:
        doc: dict = {
            "a": _frac_dict(self.a),
            "feasible": self.feasible,
            "best_slack": None if self.best_slack is None else _frac_dict(self.best_slack),
            "candidates_tried": self.candidates_tried,
        }
        if self.params is not None:
            doc["u"] = _frac_dict(self.params.u)
            doc["beta"] = _frac_dict(self.params.beta)
        if self.conditions is not None:
            doc["conditions"] = [i.to_dict() for i in self.conditions.inequalities]
        if self.sandwich is not None:
            doc["sandwich"] = {
                "lo": _frac_dict(self.sandwich.lo),
                "hi": _frac_dict(self.sandwich.hi),
                "excess": _frac_dict(self.sandwich.excess),
                "within_beta_third": self.sandwich.within_third,
                "quotient": [i.to_dict() for i in self.sandwich.quotient],
            }
        if self.separation is not None:
            doc["separation"] = [i.to_dict() for i in self.separation.inequalities]
        return doc

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _score(a: Fraction, u: Fraction) -> Fraction | None:
    """min of the two slacks at (a, u), or None if the conditions are undefined."""
    if not (0 < a < THIRD and u * a < 1 and 1 < u < 2):
        return None
    beta = u - 1
    s7 = beta / 3 - excess(a, u)
    sep = (1 - beta) - (1 + beta) * a
    return min(s7, sep)


def evaluate_params(a: Rational, u: Rational) -> Certificate:
    """Run the full chain at one (a, u)."""
    a, u = as_fraction(a), as_fraction(u)
    cond = check_conditions(a, u)
    beta = u - 1
    sandwich = None
    sep = None
    params = None
    if 0 < beta < 1:
        params = CertParams(a, beta)
        sep = separation_margin(a, beta)
    if 0 < a < THIRD and 0 < u * a < 1:
        sandwich = band_sandwich(a, u)
    feasible = bool(
        cond.ok
        and sandwich is not None
        and sandwich.within_third
        and sandwich.quotient_ok
        and sep is not None
        and sep.ok
    )
    slack = None
    if cond.slack is not None and sep is not None:
        slack = min(cond.slack, sep.slack)
    return Certificate(
        a=a,
        feasible=feasible,
        params=params,
        conditions=cond,
        sandwich=sandwich,
        separation=sep,
        best_slack=slack,
        candidates_tried=1,
    )


def certify_disk(
    a: Rational,
    u: Rational | None = None,
    *,
    coarse_step: Fraction = COARSE_STEP,
    fine_step: Fraction = FINE_STEP,
) -> Certificate:
    """Search u in (1, min(2, 1/a)) for a witness of the whole chain.

    A coarse grid is scanned first, then a fine grid around the best coarse
    point.  With ``u`` given only that value is tried.
    """
    a = as_fraction(a)
    if a <= 0:
        raise ValueError("a must be positive")
    if u is not None:
        return evaluate_params(a, u)
    upper = min(Fraction(2), 1 / a)
    best_u, best = None, None
    tried = 0

    def scan(lo: Fraction, hi: Fraction, step: Fraction):
        nonlocal best_u, best, tried
        k = 1
        while True:
            cand = lo + k * step
            if cand >= hi:
                break
            k += 1
            sc = _score(a, cand)
            tried += 1
            if sc is None:
                continue
            if best is None or sc > best:
                best, best_u = sc, cand
            if sc > 0:
                return True
        return False

    found = scan(Fraction(1), upper, coarse_step)
    if not found and best_u is not None:
        found = scan(max(Fraction(1), best_u - coarse_step), min(upper, best_u + coarse_step), fine_step)
    if best_u is None:
        return Certificate(a, False, None, None, None, None, None, tried,
                           ("no admissible u: need a < 1/3",))
    cert = evaluate_params(a, best_u)
    return Certificate(
        a=a,
        feasible=cert.feasible,
        params=cert.params,
        conditions=cert.conditions,
        sandwich=cert.sandwich,
        separation=cert.separation,
        best_slack=best,
        candidates_tried=tried,
    )


def max_certified_radius(grid_step: Rational = Fraction(1, 10**5)) -> Fraction:
    """Largest a on the grid ``k * grid_step`` that :func:`certify_disk` accepts.

    Feasibility is monotone in a (every slack decreases as a grows for fixed
    u), so the grid is bisected; the last feasible point is then confirmed
    by stepping forward until the first failure.
    """
    step = as_fraction(grid_step)
    if step <= 0:
        raise ValueError("grid_step must be positive")
    lo = 0  # 0 * step stands for the trivially feasible limit a -> 0
    hi = int(THIRD / step) + 1  # a >= 1/3 always fails
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if certify_disk(mid * step).feasible:
            lo = mid
        else:
            hi = mid
    while certify_disk((lo + 1) * step).feasible:
        lo += 1
    return lo * step
