"""Real spectrum of theta: values q_j at which theta(q_j, .) has a double real zero.

For real q in (0, 1) the zeros of theta(q, .) are real and negative up to
the first spectral value; each later spectral value turns the two rightmost
real zeros into a complex pair.  The number of complex pairs at a given q
is read off from a sign-change count: far from the origin the k-th zero
sits next to -q^(-k), so ``(k - #real zeros in [-q^(-k-1/2), 0)) / 2`` is the
pair count once k is large enough.

Spectral values are bracketed by scanning that count in q, narrowed by
bisection, and polished by Newton's method on ``(theta, theta_x) = 0`` with
exact termwise q- and x-derivatives.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence, TextIO

import mpmath
import numpy as np

from .errors import BracketInvalid, Inconclusive, NewtonStall
from .theta_eval import eval_derivative, peak_term_log2

#: minimum precision for the fold Newton iteration
HIGH_PREC = 128
SCAN_STEP = 1e-3
#: real q below this radius carries no spectral value
SCAN_START = 0.108
MAX_LEVELS = 7
#: |x| beyond which the zeros follow -q^(-k)
ALIGN_RADIUS = 200.0
PI_HALF = math.pi / 2
NEG_E_PI = -math.exp(math.pi)


# -- sign evaluation on the negative real axis -------------------------------


def _dyadic(v: float, P: int) -> int:
    f = Fraction(v)
    return (f.numerator << P) // f.denominator


def _terms_real(q: float, x_max: float, rel: float) -> int:
    """Number of terms after which the tail at |x| <= x_max is below rel * 2^-P scale."""
    n = 1
    while True:
        if q ** (n + 1) * x_max <= 0.5:
            log_t = n * (n + 1) / 2 * math.log(q) + n * math.log(x_max)
            if log_t + math.log(2) < math.log(rel):
                return n
        n += 1
        if n > 100_000:
            raise Inconclusive("series tail does not shrink")


def theta_signs(q: float, xs: Sequence[float], extra_bits: int = 64) -> list[int]:
    """Signs of theta(q, x) at real points, using fixed-point integer arithmetic.

    Values whose magnitude cannot be separated from the accumulated
    rounding and truncation error come back as 0; the precision is doubled
    for them up to a few times before giving up.
    """
    xs = [float(x) for x in xs]
    if not xs:
        return []
    x_max = max(abs(x) for x in xs)
    peak = max(peak_term_log2(q, x_max), 0.0)
    signs = [0] * len(xs)
    todo = list(range(len(xs)))
    bits = extra_bits
    for _ in range(5):
        P = int(peak) + bits + 16
        n = _terms_real(q, max(x_max, 1.0), 2.0 ** (-P))
        Q = _dyadic(q, P)
        X = np.array([_dyadic(xs[i], P) for i in todo], dtype=object)
        one = 1 << P
        term = np.array([one] * len(todo), dtype=object)
        total = term.copy()
        qp = Q
        for _j in range(1, n):
            term = (term * ((qp * X) >> P)) >> P
            total = total + term
            qp = (qp * Q) >> P
        # a few units lost per step, amplified by at most |x| and the peak term
        err = 16 * (n + 1) ** 2 * (int(2.0**peak) + 1) * (int(x_max) + 2)
        still = []
        for idx, v in zip(todo, total):
            if abs(v) > err:
                signs[idx] = 1 if v > 0 else -1
            else:
                still.append(idx)
        todo = still
        if not todo:
            break
        bits *= 2
    return signs


def _log_grid(lo: float, hi: float, n: int) -> np.ndarray:
    return -np.exp(np.linspace(math.log(lo), math.log(hi), n))


def _sign_change_cells(q: float, lo: float, hi: float, n: int) -> tuple[list[tuple[float, float]], bool]:
    xs = _log_grid(lo, hi, n)
    sg = theta_signs(q, xs)
    cells = []
    clean = True
    prev_x, prev_s = None, 0
    for x, s in zip(xs, sg):
        if s == 0:
            clean = False
            continue
        if prev_s and s != prev_s:
            cells.append((float(prev_x), float(x)))
        prev_x, prev_s = x, s
    return cells, clean


def _initial_points(q: float, lo: float, hi: float) -> int:
    # about eight samples per gap between consecutive far zeros
    return int(8 * math.log(hi / lo) / math.log(1 / q)) + 32


def real_zero_cells(q: float, lo: float, hi: float, max_levels: int = MAX_LEVELS) -> list[tuple[float, float]]:
    """Cells (x_right, x_left) each holding one sign change of theta(q, .) on [-hi, -lo].

    The log-spaced grid is doubled until two successive levels agree;
    otherwise :class:`Inconclusive` is raised (typically two zeros inside
    one cell, i.e. a near-double zero).
    """
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    if not 0 < lo < hi:
        raise ValueError("need 0 < lo < hi")
    n = _initial_points(q, lo, hi)
    prev = None
    for _ in range(max_levels):
        cells, clean = _sign_change_cells(q, lo, hi, n)
        if clean and prev is not None and len(prev) == len(cells):
            return cells
        prev = cells if clean else None
        n = 2 * n - 1
    raise Inconclusive(f"sign-change count at q = {q!r} did not stabilise on [-{hi:g}, -{lo:g}]")


def default_window(q: float, n_probe: int) -> tuple[float, float]:
    """Window on the negative axis that covers the first n_probe ansatz zeros."""
    return (-(q ** -(n_probe + 0.5)), -0.5)


def count_real_zeros(q: float, window: tuple[float, float] | None = None, n_probe: int = 6) -> int:
    """Number of sign changes of theta(q, .) in the real window (left, right)."""
    if window is None:
        window = default_window(q, n_probe)
    left, right = sorted(window)
    if right >= 0:
        # theta(q, x) > 0 for x >= -1/2 when 0 < q < 1
        right = -0.5 if left < -0.5 else right
    if not left < right < 0:
        raise ValueError("window must be a negative interval")
    return len(real_zero_cells(q, -right, -left))


def alignment_index(q: float) -> int:
    """A k with q^(-k) beyond ALIGN_RADIUS, where zeros follow -q^(-k)."""
    return max(3, math.ceil(math.log(ALIGN_RADIUS) / math.log(1 / q)))


def complex_pairs(q: float) -> int:
    """Number of complex-conjugate zero pairs of theta(q, .) for real q in (0, 1).

    Counts real zeros in [-q^(-k-1/2), -1/2] for two consecutive k and
    requires both to give the same pair count.
    """
    k = alignment_index(q)
    out = []
    for kk in (k, k + 1):
        real = len(real_zero_cells(q, 0.5, q ** -(kk + 0.5)))
        diff = kk - real
        if diff < 0 or diff % 2:
            raise Inconclusive(f"{real} real zeros below index {kk} at q = {q!r}")
        out.append(diff // 2)
    if out[0] != out[1]:
        raise Inconclusive(f"pair counts {out} disagree at q = {q!r}")
    return out[0]


# -- spectral points ---------------------------------------------------------


@dataclass(frozen=True)
class SpectralPoint:
    j: int
    q_tilde: Any  # mpmath.mpf
    x_double: Any  # mpmath.mpf
    newton_residual: float
    theta_xx: float
    bracket: tuple[float, float]
    iterations: int

    def as_row(self) -> dict:
        return {
            "j": self.j,
            "q_tilde": mpmath.nstr(self.q_tilde, 20),
            "x_double": mpmath.nstr(self.x_double, 20),
            "newton_residual": self.newton_residual,
            "theta_xx": self.theta_xx,
        }


def scan_bracket(j: int, start: float = SCAN_START, step: float = SCAN_STEP, stop: float = 0.95) -> tuple[float, float]:
    """Walk q upward until the complex-pair count reaches j.

    Where the count is inconclusive the step is refined tenfold over that
    interval.
    """
    if j < 1:
        raise ValueError("j must be >= 1")

    def pairs(q):
        try:
            return complex_pairs(q)
        except Inconclusive:
            return None

    q_prev, c_prev = start, pairs(start)
    if c_prev is None or c_prev >= j:
        raise BracketInvalid(f"scan start q = {start} already has {c_prev} pairs")
    k = 1
    while True:
        q = start + k * step
        k += 1
        if q > stop:
            raise BracketInvalid(f"no spectral value of index {j} below q = {stop}")
        c = pairs(q)
        if c is None:
            sub = step / 10
            for i in range(1, 21):
                qq = q_prev + i * sub
                cc = pairs(qq)
                if cc is None:
                    continue
                if cc >= j:
                    return _bracket_result(j, q_prev, c_prev, qq, cc)
                q_prev, c_prev = qq, cc
            continue
        if c >= j:
            return _bracket_result(j, q_prev, c_prev, q, c)
        q_prev, c_prev = q, c


def _bracket_result(j, q_lo, c_lo, q_hi, c_hi):
    if c_lo != j - 1 or c_hi != j:
        raise BracketInvalid(f"pair count jumps {c_lo} -> {c_hi} in [{q_lo}, {q_hi}]")
    return (q_lo, q_hi)


def _theta_parts(q, x, prec: int):
    tol = 2.0 ** (-prec)
    ev = lambda dq, dx: eval_derivative(q, x, tol, dq=dq, dx=dx, prec=prec).value.real  # noqa: E731
    return ev(0, 0), ev(0, 1), ev(1, 0), ev(1, 1), ev(0, 2)


def fold_newton(q0, x0, prec: int = HIGH_PREC, max_iter: int = 50):
    """Newton on F(q, x) = (theta, theta_x) = 0 for real (q, x).

    Returns (q, x, max(|theta|, |theta_x|), theta_xx, iterations).
    """
    with mpmath.workprec(prec):
        q, x = mpmath.mpf(q0), mpmath.mpf(x0)
        eps = mpmath.mpf(2) ** (20 - prec)
        th, thx, thq, thqx, thxx = _theta_parts(q, x, prec)
        norm = max(abs(th), abs(thx))
        for it in range(1, max_iter + 1):
            det = thq * thxx - thx * thqx
            if det == 0:
                raise NewtonStall("singular Jacobian in fold iteration")
            dq = (th * thxx - thx * thx) / det
            dx = (thq * thx - thqx * th) / det
            lam = mpmath.mpf(1)
            while True:
                qn, xn = q - lam * dq, x - lam * dx
                if 0 < qn < 1:
                    parts = _theta_parts(qn, xn, prec)
                    nn = max(abs(parts[0]), abs(parts[1]))
                    if nn < norm or lam < 2.0**-20:
                        break
                lam /= 2
                if lam < 2.0**-20:
                    raise NewtonStall("fold iteration left (0, 1) or stopped decreasing")
            if nn >= norm:
                if norm <= eps * 2**20:
                    break
                raise NewtonStall(f"fold residual stuck at {mpmath.nstr(norm, 5)}")
            q, x = qn, xn
            th, thx, thq, thqx, thxx = parts
            norm = nn
            if abs(lam * dq) <= eps * abs(q) and abs(lam * dx) <= eps * abs(x):
                break
        else:
            raise NewtonStall(f"fold iteration did not converge in {max_iter} steps")
        return q, x, float(norm), float(thxx), it


def _rightmost_pair(q: float) -> tuple[float, float]:
    k = alignment_index(q)
    cells = real_zero_cells(q, 0.5, q ** -(k + 0.5))
    if len(cells) < 2:
        raise BracketInvalid(f"fewer than two real zeros at q = {q}")
    (a0, a1), (b0, b1) = cells[0], cells[1]
    return (a0 + a1) / 2, (b0 + b1) / 2


def find_spectral(
    j: int,
    q_bracket: tuple[float, float] | None = None,
    tol: float = 1e-12,
    *,
    prec: int = HIGH_PREC,
    start: float = SCAN_START,
    step: float = SCAN_STEP,
) -> SpectralPoint:
    """Locate the j-th real spectral value and its double zero.

    Without a bracket one is found by :func:`scan_bracket` from ``start``.
    The bracket is bisected on the complex-pair count down to ``1e-7``,
    then the fold Newton iteration polishes (q, x).
    """
    if prec < 100:
        raise ValueError("spectral computations need at least 100 bits")
    if q_bracket is None:
        q_bracket = scan_bracket(j, start=start, step=step)
    lo, hi = map(float, q_bracket)
    if not 0 < lo < hi < 1:
        raise BracketInvalid("bracket must satisfy 0 < lo < hi < 1")
    try:
        c_lo, c_hi = complex_pairs(lo), complex_pairs(hi)
    except Inconclusive as exc:
        raise BracketInvalid(f"bracket end is inconclusive: {exc}") from exc
    if c_lo != j - 1 or c_hi != j:
        raise BracketInvalid(f"pair count {c_lo} -> {c_hi} across [{lo}, {hi}], expected {j - 1} -> {j}")
    bracket = (lo, hi)
    while hi - lo > 1e-7:
        mid = (lo + hi) / 2
        try:
            c = complex_pairs(mid)
        except Inconclusive:
            break
        if c <= j - 1:
            lo = mid
        else:
            hi = mid
    z1, z2 = _rightmost_pair(lo)
    q0, x0 = (lo + hi) / 2, (z1 + z2) / 2
    q, x, res, thxx, it = fold_newton(q0, x0, prec=max(prec, int(-math.log2(tol)) + 64))
    if not bracket[0] - 1e-6 <= float(q) <= bracket[1] + 1e-6:
        raise NewtonStall(f"fold iteration converged to q = {mpmath.nstr(q, 12)} outside {bracket}")
    return SpectralPoint(j=j, q_tilde=q, x_double=x, newton_residual=res, theta_xx=thxx, bracket=bracket, iterations=it)


def spectrum(jmax: int, *, prec: int = HIGH_PREC, step: float = SCAN_STEP) -> list[SpectralPoint]:
    """The first jmax spectral points, each scan starting just past the previous one."""
    out: list[SpectralPoint] = []
    start = SCAN_START
    for j in range(1, jmax + 1):
        p = find_spectral(j, prec=prec, start=start, step=step)
        out.append(p)
        start = float(p.q_tilde) + step
    return out


# -- asymptotics -------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticRow:
    j: int
    q_tilde: float
    scaled_gap: float  # j (1 - q_tilde), tends to pi/2
    x_double: float  # tends to -e^pi


@dataclass(frozen=True)
class AsymptoticReport:
    rows: tuple[AsymptoticRow, ...]
    gap_monotone: bool
    x_monotone: bool
    x_above_limit: bool

    def write_csv(self, fh: TextIO) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["j", "q_tilde", "j*(1-q_tilde)", "x_double"])
        for r in self.rows:
            w.writerow([r.j, repr(r.q_tilde), repr(r.scaled_gap), repr(r.x_double)])


def asymptotic_report(points: Iterable[SpectralPoint], slack: float = 1e-9) -> AsymptoticReport:
    """Tabulate j(1 - q_j) against pi/2 and x_double against -e^pi.

    The limits are approached at an unspecified o(1/j) rate, so only the
    trends are judged: distances to the limits must shrink with j, and
    the double zeros must stay to the right of -e^pi up to ``slack``.
    """
    pts = sorted(points, key=lambda p: p.j)
    if len(pts) < 3:
        raise ValueError("need at least three spectral points")
    rows = tuple(
        AsymptoticRow(p.j, float(p.q_tilde), p.j * (1 - float(p.q_tilde)), float(p.x_double)) for p in pts
    )
    gaps = [abs(PI_HALF - r.scaled_gap) for r in rows]
    xgaps = [abs(r.x_double - NEG_E_PI) for r in rows]
    return AsymptoticReport(
        rows=rows,
        gap_monotone=all(b < a for a, b in zip(gaps, gaps[1:])),
        x_monotone=all(r2.x_double < r1.x_double for r1, r2 in zip(rows, rows[1:]))
        and all(b < a for a, b in zip(xgaps, xgaps[1:])),
        x_above_limit=all(r.x_double > NEG_E_PI - slack for r in rows),
    )
