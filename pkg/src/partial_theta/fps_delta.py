"""Integer power series for the zero-correction factors Delta_s(q).

Writing the zeros of theta(q, .) as ``-1/(q^s Delta_s)``, comparing the
series with its product expansion gives the infinite triangular system

    e_s(q Delta_1, q^2 Delta_2, ...) = q^(s(s+1)/2),   s = 1, 2, ...

whose unique solution with ``Delta_s = 1 + O(q)`` has integer
coefficients.  :func:`solve_delta` computes that solution through a given
order.

With ``tau_j^k = e_j(Delta_1, q Delta_2, ..., q^(k-1) Delta_k) / q^(j(j-1)/2)``
the system reads ``tau_s^oo = 1``, and ``tau_s^s = Delta_1 ... Delta_s`` while
every later contribution ``tau_s^k - tau_s^(k-1)`` carries a factor
``q^(k-s)``.  Hence the order-n coefficient of ``Delta_1 ... Delta_s`` is
fixed by strictly lower-order data, and the coefficients can be produced
one order at a time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import ResourceCap

#: cap on S*K accepted by solve_delta
DEFAULT_BUDGET = 4000
#: cap on the estimated inner-loop operation count (M K^3 / 6)
DEFAULT_MAX_WORK = 5 * 10**7

# Rows Delta_1..Delta_5 through q^9, used by ``delta --check-table``.
KNOWN_DELTA_COEFFS: tuple[tuple[int, ...], ...] = (
    (1, -1, -1, -1, -2, -4, -10, -25, -66, -178),
    (1, 0, 0, 1, 3, 9, 24, 66, 180, 498),
    (1, 0, 0, 0, 0, 0, -1, -3, -9, -22),
    (1, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (1, 0, 0, 0, 0, 0, 0, 0, 0, 0),
)


def _mul(a: Sequence[int], b: Sequence[int], order: int) -> list[int]:
    out = [0] * (order + 1)
    for i, ai in enumerate(a[: order + 1]):
        if ai:
            for j, bj in enumerate(b[: order + 1 - i]):
                out[i + j] += ai * bj
    return out


@dataclass(frozen=True)
class TruncSeries:
    """Power series in q with exact integer coefficients, known through q^order."""

    coeffs: tuple[int, ...]
    order: int

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("order must be >= 0")
        cs = tuple(int(c) for c in self.coeffs[: self.order + 1])
        cs = cs + (0,) * (self.order + 1 - len(cs))
        object.__setattr__(self, "coeffs", cs)

    @classmethod
    def constant(cls, c: int, order: int) -> "TruncSeries":
        return cls((c,), order)

    @classmethod
    def monomial(cls, k: int, order: int, c: int = 1) -> "TruncSeries":
        cs = [0] * (order + 1)
        if k <= order:
            cs[k] = c
        return cls(tuple(cs), order)

    def __getitem__(self, k: int) -> int:
        return self.coeffs[k]

    def __len__(self) -> int:
        return self.order + 1

    def __iter__(self):
        return iter(self.coeffs)

    def _coerce(self, other) -> "TruncSeries":
        if isinstance(other, TruncSeries):
            return other
        if isinstance(other, int):
            return TruncSeries.constant(other, self.order)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = min(self.order, other.order)
        return TruncSeries(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), n)

    __radd__ = __add__

    def __neg__(self):
        return TruncSeries(tuple(-c for c in self.coeffs), self.order)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = min(self.order, other.order)
        return TruncSeries(tuple(_mul(self.coeffs, other.coeffs, n)), n)

    __rmul__ = __mul__

    def shift(self, k: int) -> "TruncSeries":
        """Multiply by q^k (k >= 0), keeping the same order."""
        if k < 0:
            raise ValueError("shift must be nonnegative")
        return TruncSeries((0,) * k + self.coeffs, self.order)

    def truncate(self, order: int) -> "TruncSeries":
        return TruncSeries(self.coeffs, min(order, self.order))

    def inverse(self) -> "TruncSeries":
        """Multiplicative inverse; requires a unit constant term (+-1)."""
        c0 = self.coeffs[0]
        if c0 not in (1, -1):
            raise ZeroDivisionError("series inverse over the integers needs c_0 = +-1")
        out = [c0]
        for n in range(1, self.order + 1):
            acc = sum(self.coeffs[i] * out[n - i] for i in range(1, n + 1))
            out.append(-acc * c0)
        return TruncSeries(tuple(out), self.order)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def compose(self, inner: "TruncSeries") -> "TruncSeries":
        """Substitute ``inner`` (with zero constant term) for q."""
        if inner.coeffs[0] != 0:
            raise ValueError("inner series must vanish at q = 0")
        n = min(self.order, inner.order)
        out = TruncSeries.constant(0, n)
        for c in reversed(self.coeffs[: n + 1]):
            out = out * inner + c
        return out

    def evaluate(self, q):
        """Horner evaluation at a numeric q (complex, float or mpmath)."""
        acc = 0 * q
        for c in reversed(self.coeffs):
            acc = acc * q + c
        return acc

    def is_zero(self) -> bool:
        return not any(self.coeffs)


def _check_budget(S: int, K: int, budget: int, max_work: int) -> None:
    if S < 1 or K < 0:
        raise ValueError("need S >= 1 and K >= 0")
    if S * K > budget:
        raise ResourceCap(f"S*K = {S * K} exceeds the budget {budget}")
    work = (K + S) * K**3 // 6
    if work > max_work:
        raise ResourceCap(f"estimated work {work} exceeds {max_work}")


@dataclass(frozen=True)
class DeltaTable:
    """Delta_1..Delta_S through q^order.

    ``auxiliary`` holds the remaining unknowns Delta_(S+1)..Delta_M that
    were carried during the solve; they are only needed to reproduce the
    defining identities and are not exact through ``order``.
    """

    rows: tuple[TruncSeries, ...]
    order: int
    variables_used: int
    auxiliary: tuple[TruncSeries, ...] = ()

    @property
    def S(self) -> int:
        return len(self.rows)

    def unknowns(self) -> tuple[TruncSeries, ...]:
        return self.rows + self.auxiliary

    def as_lists(self) -> list[list[int]]:
        return [list(r.coeffs) for r in self.rows]

    def to_json(self, **kwargs) -> str:
        """Serialise with coefficients as decimal strings."""
        doc = {
            "order": self.order,
            "variables_used": self.variables_used,
            "rows": [
                {
                    "s": s,
                    "coeffs": [str(c) for c in row.coeffs],
                    "leading_gap": leading_gap(row),
                }
                for s, row in enumerate(self.rows, start=1)
            ],
        }
        return json.dumps(doc, **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "DeltaTable":
        doc = json.loads(text)
        K = int(doc["order"])
        rows = tuple(TruncSeries(tuple(int(c) for c in r["coeffs"]), K) for r in doc["rows"])
        return cls(rows=rows, order=K, variables_used=int(doc["variables_used"]))


def _solve(S: int, K: int, M: int) -> list[list[int]]:
    """Coefficient lists of Delta_1..Delta_M, order by order.

    ``tau[j][d][n]`` is the order-n coefficient of tau_j^(j+d); entries with
    d > K never reach order K and are not stored.
    """
    delta = [[1] + [0] * K for _ in range(M + 1)]  # index 0 unused
    prod = [[1] + [0] * K for _ in range(M + 1)]  # prod[s] = Delta_1...Delta_s
    # tau_0^k = 1 for every k
    tau = [[[1] + [0] * K for _ in range(K + 1)]]
    for j in range(1, M + 1):
        tau.append([[0] * (K + 1) for _ in range(K + 1)])
    for j in range(1, M + 1):
        for d in range(K + 1):
            tau[j][d][0] = 1
    # inc[j][d][n]: order-n coefficient of q^d Delta_(j+d) tau_(j-1)^(j+d-1)
    for n in range(1, K + 1):
        for j in range(1, M + 1):
            prev = tau[j - 1]
            incs = [0] * (n + 1)
            for d in range(1, n + 1):
                k = j + d
                if k > M:
                    break
                # prev[d] is tau_(j-1)^(k-1); needs coefficients <= n - d
                dk = delta[k]
                p = prev[d]
                m = n - d
                incs[d] = sum(dk[i] * p[m - i] for i in range(m + 1))
            # tau_j^oo = 1 at order n >= 1 fixes the product coefficient
            pj = -sum(incs[1:])
            prod[j][n] = pj
            # Delta_j = prod_j / prod_(j-1); prod_(j-1) has constant term 1
            pp = prod[j - 1]
            dj = delta[j]
            dj[n] = pj - sum(dj[i] * pp[n - i] for i in range(n))
            run = pj
            row = tau[j]
            row[0][n] = pj
            for d in range(1, K + 1):
                if d <= n:
                    run += incs[d]
                row[d][n] = run
    return [delta[s] for s in range(1, M + 1)]


def solve_delta(
    S: int,
    K: int,
    *,
    budget: int = DEFAULT_BUDGET,
    max_work: int = DEFAULT_MAX_WORK,
) -> DeltaTable:
    """Solve for Delta_1..Delta_S as integer series through q^K.

    ``M = K + S`` unknowns are carried: an index beyond M first enters the
    equation for Delta_s at order M + 1 - s > K.

    >>> solve_delta(3, 6).rows[2].coeffs
    (1, 0, 0, 0, 0, 0, -1)
    """
    _check_budget(S, K, budget, max_work)
    return _solve_cached(S, K)


@lru_cache(maxsize=32)
def _solve_cached(S: int, K: int) -> DeltaTable:
    M = K + S
    lists = _solve(S, K, M)
    series = [TruncSeries(tuple(c), K) for c in lists]
    return DeltaTable(
        rows=tuple(series[:S]),
        order=K,
        variables_used=M,
        auxiliary=tuple(series[S:]),
    )


def elementary_symmetric(values: Sequence[TruncSeries], s: int, K: int) -> TruncSeries:
    """e_s of the given series, truncated at q^K.

    Uses the insertion recurrence ``e_j <- e_j + v_k e_(j-1)`` over the
    arguments in turn; e_s of fewer than s arguments is 0.
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    e = [TruncSeries.constant(1, K)] + [TruncSeries.constant(0, K) for _ in range(s)]
    for count, v in enumerate(values, start=1):
        v = v.truncate(K) if v.order > K else TruncSeries(v.coeffs, K)
        for j in range(min(count, s), 0, -1):
            e[j] = e[j] + v * e[j - 1]
    return e[s]


def prefactored(deltas: Iterable[TruncSeries], K: int) -> list[TruncSeries]:
    """The arguments q^k Delta_k, k = 1, 2, ..., as series through q^K."""
    return [TruncSeries((0,) * k + d.coeffs, K) for k, d in enumerate(deltas, start=1)]


def back_substitution_ok(table: DeltaTable, s: int) -> bool:
    """Check e_s(q Delta_1, ..., q^M Delta_M) = q^(s(s+1)/2) through the table order.

    The identity is checked up to q^(K + s(s+1)/2), i.e. K orders beyond
    its leading term, so it is not vacuous for large s.
    """
    base = s * (s + 1) // 2
    K = table.order + base
    # rows are padded with zeros past table.order; those coefficients only
    # reach e_s beyond q^K
    args = prefactored(table.unknowns(), K)
    e = elementary_symmetric(args, s, K)
    return e.coeffs == TruncSeries.monomial(base, K).coeffs


def leading_gap(delta: TruncSeries) -> int | None:
    """Smallest k >= 1 with a nonzero coefficient, or None through the order."""
    for k in range(1, delta.order + 1):
        if delta.coeffs[k]:
            return k
    return None


@dataclass(frozen=True)
class ProbeRow:
    s: int
    status: str  # "holds", "fails" or "inconclusive"
    kappa: int | None


def sign_pattern_probe(table: DeltaTable) -> list[ProbeRow]:
    """Test whether (-1)^s (Delta_s - 1) has nonnegative coefficients.

    Exploration only: reports the data through the table order.
    """
    out = []
    for s, row in enumerate(table.rows, start=1):
        sign = -1 if s % 2 else 1
        tail = [sign * c for c in row.coeffs[1:]]
        kappa = leading_gap(row)
        if kappa is None:
            status = "inconclusive"
        elif all(c >= 0 for c in tail):
            status = "holds"
        else:
            status = "fails"
        out.append(ProbeRow(s=s, status=status, kappa=kappa))
    return out


def check_known_table(table: DeltaTable) -> list[tuple[int, int, int, int]]:
    """Mismatches (s, k, got, expected) against KNOWN_DELTA_COEFFS."""
    bad = []
    for s, expected in enumerate(KNOWN_DELTA_COEFFS, start=1):
        if s > table.S:
            break
        got = table.rows[s - 1].coeffs
        for k in range(min(len(expected), table.order + 1)):
            if got[k] != expected[k]:
                bad.append((s, k, got[k], expected[k]))
    return bad
