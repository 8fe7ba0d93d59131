"""Numerical zeros of theta(q, .) near the geometric progression -q^(-j).

The j-th zero is written ``-xi_j`` with ``1/xi_j = q^j Delta_j``.  Seeds come
from the truncated integer series for ``Delta_j(q)``; each seed is polished
by damped Newton iteration in mpmath at a precision large enough to absorb
the cancellation between the series terms near ``|x| ~ |q|^(-j)``.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass
from typing import Any, Iterable, TextIO

import mpmath

from .errors import DivergenceDomain, NewtonStall, TooFewZeros
from .fps_delta import solve_delta
from .theta_eval import eval_derivative, peak_term_log2

#: default order of the Delta seeds
SEED_ORDER = 20
MAX_ITER = 60
Q_LIMIT = 0.9


@dataclass(frozen=True)
class ZeroEntry:
    """One zero ``-xi`` of theta(q, .), with ``delta = 1/(q^j xi)``."""

    j: int
    xi: Any  # mpmath.mpc
    residual: float
    delta: Any  # mpmath.mpc
    error_bound: float
    iterations: int

    @property
    def zero(self):
        # negate at the stored width; the global mpmath context may be narrower
        bits = max(self.xi.real._mpf_[3], self.xi.imag._mpf_[3], 53)
        with mpmath.workprec(bits + 1):
            return -self.xi

    @property
    def scale(self) -> float:
        """|q^j Delta_j| = 1/|xi_j|."""
        return float(1 / abs(self.xi))


@dataclass(frozen=True)
class ZeroSet:
    q: complex
    entries: tuple[ZeroEntry, ...]
    prec: int
    tol: float

    @property
    def count(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def labels_in_order(self) -> bool:
        """True when sorting by modulus kept the seed labels 1..n in order."""
        return [e.j for e in self.entries] == list(range(1, self.count + 1))

    def xis(self) -> list:
        return [e.xi for e in self.entries]

    def min_pair_distance(self) -> float:
        xs = self.xis()
        if len(xs) < 2:
            return math.inf
        with mpmath.workprec(self.prec):
            return float(min(abs(xs[i] - xs[k]) for i in range(len(xs)) for k in range(i)))

    def rows(self) -> list[dict]:
        return [
            {
                "j": e.j,
                "re_zero": float(-e.xi.real),
                "im_zero": float(-e.xi.imag),
                "residual": e.residual,
                "re_delta": float(e.delta.real),
                "im_delta": float(e.delta.imag),
                "abs_delta": float(abs(e.delta)),
                "scale": e.scale,
            }
            for e in self.entries
        ]


def _working_prec(q: complex, x_max: float, tol: float) -> int:
    bits = peak_term_log2(q, x_max) + math.log2(max(1.0, x_max)) + math.log2(1.0 / tol)
    return max(64, int(bits) + 40)


def delta_seeds(q, n: int, order: int = SEED_ORDER) -> list:
    """Truncated Delta_1(q)..Delta_n(q) evaluated at q."""
    table = solve_delta(n, order)
    return [row.evaluate(q) for row in table.rows]


def newton_zero(q, x0, tol: float, prec: int, max_iter: int = MAX_ITER):
    """Damped Newton on theta(q, .) from x0; returns (x, |theta|, |theta'|, iterations).

    Steps are halved while the residual grows.  Iteration stops once the
    residual is below ``tol`` and the step has shrunk to the working
    precision, or the residual reaches its rounding floor.
    """
    eval_tol = tol * 1e-6
    with mpmath.workprec(prec):
        q = mpmath.mpc(q)
        x = mpmath.mpc(x0)
        eps = mpmath.mpf(2) ** (16 - prec)

        def f(z):
            return eval_derivative(q, z, eval_tol, prec=prec).value

        r = f(x)
        it = 0
        for it in range(1, max_iter + 1):
            if r == 0:
                break
            d = eval_derivative(q, x, eval_tol, dx=1, prec=prec).value
            if d == 0:
                raise NewtonStall(f"vanishing derivative at x = {mpmath.nstr(x, 12)}")
            step = r / d
            lam = mpmath.mpf(1)
            while True:
                x_new = x - lam * step
                r_new = f(x_new)
                if abs(r_new) < abs(r) or lam < 2.0**-30:
                    break
                lam /= 2
            if abs(r_new) >= abs(r):
                if abs(r) <= tol:
                    break  # rounding floor reached
                raise NewtonStall(
                    f"no residual decrease at x = {mpmath.nstr(x, 12)} (|theta| = {mpmath.nstr(abs(r), 5)})"
                )
            x, r = x_new, r_new
            if abs(lam * step) <= eps * abs(x) and abs(r) <= tol:
                break
        else:
            if abs(r) > tol:
                raise NewtonStall(f"no convergence in {max_iter} iterations (|theta| = {mpmath.nstr(abs(r), 5)})")
        d = eval_derivative(q, x, eval_tol, dx=1, prec=prec).value
        if abs(r) > tol:
            raise NewtonStall(f"residual {mpmath.nstr(abs(r), 5)} above tolerance {tol:g}")
        return x, abs(r), abs(d), it


def find(q, n: int = 6, tol: float = 1e-10, *, order: int = SEED_ORDER, prec: int | None = None) -> ZeroSet:
    """Locate the first n zeros of theta(q, .), ordered by increasing modulus.

    ``q`` may be an mpmath number, in which case it is used at full
    precision rather than rounded to a double.  Raises
    :class:`NewtonStall` when a seed fails to converge, which signals that
    the geometric-progression seeding has broken down.
    """
    q_exact = q if isinstance(q, (mpmath.mpc, mpmath.mpf)) else None
    q = complex(q)
    if n < 1:
        raise ValueError("n must be >= 1")
    if abs(q) > Q_LIMIT:
        raise DivergenceDomain(f"|q| = {abs(q):g} exceeds {Q_LIMIT}")
    if q == 0:
        return ZeroSet(q=q, entries=(), prec=prec or 53, tol=tol)
    seeds = delta_seeds(q, n, order)
    x_seeds = []
    for j, dj in enumerate(seeds, start=1):
        if dj == 0:
            raise NewtonStall(f"seed Delta_{j}(q) vanishes")
        x_seeds.append(-1 / (q**j * dj))
    if prec is None:
        x_max = max(abs(x) for x in x_seeds) * 2
        prec = _working_prec(q, x_max, tol)
    entries = []
    with mpmath.workprec(prec):
        qm = mpmath.mpc(q if q_exact is None else q_exact)
        for j, x0 in enumerate(x_seeds, start=1):
            x, res, dabs, it = newton_zero(qm, x0, tol, prec)
            xi = -x
            delta = 1 / (qm**j * xi)
            err = 2 * float(res / dabs) if dabs else math.inf
            entries.append(ZeroEntry(j=j, xi=xi, residual=float(res), delta=delta, error_bound=err, iterations=it))
    entries.sort(key=lambda e: abs(e.xi))
    return ZeroSet(q=q, entries=tuple(entries), prec=prec, tol=tol)


@dataclass(frozen=True)
class SeparationReport:
    min_ratio: float
    distinct: bool
    min_pair_distance: float


def separation_report(zs: ZeroSet) -> SeparationReport:
    """Smallest consecutive ratio |1/xi_(j+1)| / |1/xi_j| and pairwise distinctness.

    ``min_ratio`` is the minimum over j; any ratio >= 1 means two
    consecutive zeros share a modulus.
    """
    if zs.count < 2:
        raise TooFewZeros("separation needs at least two zeros")
    es = zs.entries
    with mpmath.workprec(zs.prec):
        ratios = [float(abs(es[k].xi) / abs(es[k + 1].xi)) for k in range(len(es) - 1)]
        pairs_ok = True
        dmin = math.inf
        for i in range(len(es)):
            for k in range(i):
                dist = float(abs(es[i].xi - es[k].xi))
                dmin = min(dmin, dist)
                if dist <= es[i].error_bound + es[k].error_bound:
                    pairs_ok = False
    # ratios are of 1/|xi|, i.e. |xi_j|/|xi_(j+1)|
    max_ratio = max(ratios)
    return SeparationReport(
        min_ratio=min(ratios),
        distinct=bool(max_ratio < 1 and pairs_ok),
        min_pair_distance=dmin,
    )


@dataclass(frozen=True)
class ScanRow:
    q: complex
    n_found: int
    min_ratio: float
    max_ratio: float
    min_pair_distance: float
    max_delta_dev: float
    min_abs_delta: float
    max_abs_delta: float
    max_residual: float
    decreasing: bool
    distinct: bool
    stalled: bool


CSV_COLUMNS = ("re_q", "im_q", "n_found", "min_ratio", "min_pair_distance", "max_delta_dev", "stalled")


def polar_grid(r_max: float, grid: int) -> list[complex]:
    """grid radii ``r_max (i+1)/grid`` times grid equally spaced angles."""
    out = []
    for i in range(grid):
        r = r_max * (i + 1) / grid
        for k in range(grid):
            out.append(r * cmath.exp(2j * math.pi * k / grid))
    return out


def scan_point(q: complex, n: int, tol: float = 1e-10, order: int = SEED_ORDER) -> ScanRow:
    nan = math.nan
    try:
        zs = find(q, n, tol, order=order)
    except NewtonStall:
        return ScanRow(q, 0, nan, nan, nan, nan, nan, nan, nan, False, False, True)
    es = zs.entries
    devs = [float(abs(e.delta - 1)) for e in es]
    absd = [float(abs(e.delta)) for e in es]
    scales = [e.scale for e in es]
    if len(es) >= 2:
        rep = separation_report(zs)
        ratios = [scales[k + 1] / scales[k] for k in range(len(es) - 1)]
        min_ratio, max_ratio = min(ratios), max(ratios)
        dmin, distinct = rep.min_pair_distance, rep.distinct
    else:
        min_ratio = max_ratio = nan
        dmin, distinct = math.inf, True
    return ScanRow(
        q=q,
        n_found=len(es),
        min_ratio=min_ratio,
        max_ratio=max_ratio,
        min_pair_distance=dmin,
        max_delta_dev=max(devs),
        min_abs_delta=min(absd),
        max_abs_delta=max(absd),
        max_residual=max(e.residual for e in es),
        decreasing=zs.labels_in_order and all(scales[k + 1] < scales[k] for k in range(len(es) - 1)),
        distinct=distinct,
        stalled=False,
    )


def scan_disk(r_max: float, grid: int, n: int, tol: float = 1e-10, order: int = SEED_ORDER) -> list[ScanRow]:
    """Run :func:`find` and :func:`separation_report` on a polar grid of q.

    Points where Newton stalls become rows with ``stalled=True``.
    """
    if not 0 < r_max <= 0.35:
        raise ValueError("r_max must lie in (0, 0.35]")
    if not 1 <= grid <= 512:
        raise ValueError("grid must lie in [1, 512]")
    return [scan_point(q, n, tol, order) for q in polar_grid(r_max, grid)]


def write_scan_csv(rows: Iterable[ScanRow], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([
            repr(r.q.real), repr(r.q.imag), r.n_found,
            repr(r.min_ratio), repr(r.min_pair_distance), repr(r.max_delta_dev),
            int(r.stalled),
        ])
