"""Command-line front end: ``partial-theta <command> [options]``.

Exit codes: 0 success or feasible, 1 infeasible or failed check,
2 usage or domain error, 3 numeric failure (stall, tolerance, inconclusive).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import mpmath

from . import certify, fps_delta, spectrum, theta_eval, zeros
from .errors import BracketInvalid, PartialThetaError

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

ENV_PRECISION = "THETA_PRECISION_BITS"
DOUBLE_BITS = 53

_DECIMAL = re.compile(r"(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)")
_SUBSCRIPT = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")


@dataclass(frozen=True)
class RunConfig:
    precision_bits: int = DOUBLE_BITS
    tol: float | None = None
    output_format: str = "text"
    output_path: str | None = None

    def __post_init__(self):
        if self.precision_bits < DOUBLE_BITS:
            raise ValueError(f"precision_bits must be >= {DOUBLE_BITS}")
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tol must be positive")

    @property
    def mp_prec(self) -> int | None:
        """mpmath precision, or None for plain double arithmetic."""
        return None if self.precision_bits == DOUBLE_BITS else self.precision_bits


# -- parsing -----------------------------------------------------------------


def _signed_decimal(text: str) -> float:
    sign = 1.0
    if text and text[0] in "+-":
        sign = -1.0 if text[0] == "-" else 1.0
        text = text[1:]
    if text == "":
        return sign
    if not _DECIMAL.fullmatch(text):
        raise ValueError
    return sign * float(text)


def parse_complex(text: str) -> complex:
    """Parse ``RE``, ``IMi`` or ``RE[+-]IMi`` with plain decimal parts.

    >>> parse_complex("3+4i")
    (3+4j)
    >>> parse_complex("-0.5i")
    -0.5j
    """
    s = text.strip().replace(" ", "")
    try:
        if not s:
            raise ValueError
        if s.endswith("i"):
            body = s[:-1]
            cut = max(body.rfind("+"), body.rfind("-"))
            if cut > 0:
                re_part, im_part = body[:cut], body[cut:]
                if re_part in ("+", "-"):
                    raise ValueError
                return complex(_signed_decimal(re_part), _signed_decimal(im_part))
            return complex(0.0, _signed_decimal(body))
        if s in ("+", "-"):
            raise ValueError
        return complex(_signed_decimal(s), 0.0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex literal of the form RE[+-]IMi: {text!r}") from None


def parse_rational(text: str) -> Fraction:
    """Parse ``p/q`` or a decimal exactly, never through a float."""
    s = text.strip()
    if not re.fullmatch(r"[+-]?(?:[0-9]+/[0-9]+|[0-9]+(?:\.[0-9]*)?|\.[0-9]+)", s):
        raise argparse.ArgumentTypeError(f"not a rational p/q or decimal: {text!r}")
    try:
        return Fraction(s)
    except ZeroDivisionError:
        raise argparse.ArgumentTypeError(f"zero denominator: {text!r}") from None


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0 or math.isinf(v):
        raise argparse.ArgumentTypeError("must be a positive finite number")
    return v


def _default_precision() -> int:
    raw = os.environ.get(ENV_PRECISION)
    if raw is None:
        return DOUBLE_BITS
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{ENV_PRECISION} must be an integer, got {raw!r}") from None


# -- formatting --------------------------------------------------------------


def _fmt_real(v, digits: int = 16) -> str:
    if isinstance(v, (mpmath.mpf,)):
        return mpmath.nstr(v, digits, min_fixed=-5, max_fixed=20)
    v = float(v)
    if math.isnan(v) or math.isinf(v):
        return repr(v)
    out = f"{v:.{digits}g}"
    return "0" if out == "-0" else out


def _fmt_complex(z, digits: int = 16) -> str:
    re_, im_ = z.real, z.imag
    if im_ == 0:
        return _fmt_real(re_, digits)
    im_txt = _fmt_real(abs(im_), digits)
    if re_ == 0:
        return f"{'-' if im_ < 0 else ''}{im_txt}i"
    return f"{_fmt_real(re_, digits)}{'-' if im_ < 0 else '+'}{im_txt}i"


def _digits(cfg: RunConfig) -> int:
    return 16 if cfg.mp_prec is None else max(16, int(cfg.precision_bits * math.log10(2)))


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json_text(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _poly(coeffs: Sequence[int]) -> str:
    parts = []
    for k, c in enumerate(coeffs):
        if c == 0:
            continue
        mag = abs(c)
        mono = "" if k == 0 else ("q" if k == 1 else f"q^{k}")
        body = str(mag) if k == 0 else (mono if mag == 1 else f"{mag}{mono}")
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append(("- " if c < 0 else "+ ") + body)
    return " ".join(parts) if parts else "0"


# -- commands ----------------------------------------------------------------


@dataclass
class Outcome:
    text: str
    code: int = EXIT_OK


def cmd_eval(args, cfg: RunConfig) -> Outcome:
    tol = cfg.tol
    if tol is None:
        tol = theta_eval.DEFAULT_TOL if cfg.mp_prec is None else 2.0 ** -cfg.mp_prec
    res = theta_eval.eval_derivative(args.q, args.x, tol, dq=args.dq, dx=args.dx, prec=cfg.mp_prec)
    d = _digits(cfg)
    value = complex(res.value)
    if cfg.output_format == "json":
        doc = {
            "q": _fmt_complex(args.q),
            "x": _fmt_complex(args.x),
            "dq": args.dq,
            "dx": args.dx,
            "value": _fmt_complex(res.value, d),
            "re": value.real,
            "im": value.imag,
            "tail_bound": res.tail_bound,
            "terms_used": res.terms_used,
        }
        return Outcome(_json_text(doc))
    if cfg.output_format == "csv":
        row = [_fmt_real(res.value.real, d), _fmt_real(res.value.imag, d), repr(res.tail_bound), res.terms_used]
        return Outcome(_csv_text(["re", "im", "tail_bound", "terms_used"], [row]))
    return Outcome(
        f"value = {_fmt_complex(res.value, d)}\n"
        f"tail_bound = {res.tail_bound:.3e}\n"
        f"terms_used = {res.terms_used}\n"
    )


def cmd_delta(args, cfg: RunConfig) -> Outcome:
    table = fps_delta.solve_delta(args.s, args.k)
    code = EXIT_OK
    check_lines: list[str] = []
    check_status = None
    if args.check_table:
        bad = fps_delta.check_known_table(table)
        check_status = "FAIL" if bad else "PASS"
        check_lines = [f"  s={s} k={k}: got {g}, expected {e}" for s, k, g, e in bad]
        if bad:
            code = EXIT_FAIL
    probe = fps_delta.sign_pattern_probe(table) if args.probe else None
    if cfg.output_format == "json":
        doc = json.loads(table.to_json())
        if check_status is not None:
            doc["check_table"] = check_status
        if probe is not None:
            doc["sign_pattern"] = [{"s": p.s, "status": p.status, "kappa": p.kappa} for p in probe]
        return Outcome(_json_text(doc), code)
    if cfg.output_format == "csv":
        rows = [[s, k, c] for s, row in enumerate(table.rows, start=1) for k, c in enumerate(row.coeffs)]
        return Outcome(_csv_text(["s", "k", "coeff"], rows), code)
    lines = [f"order: {table.order} (unknowns carried: {table.variables_used})"]
    for s, row in enumerate(table.rows, start=1):
        lines.append(f"Δ{str(s).translate(_SUBSCRIPT)} = {_poly(row.coeffs)}")
    for s, row in enumerate(table.rows, start=1):
        gap = fps_delta.leading_gap(row)
        sub = str(s).translate(_SUBSCRIPT)
        lines.append(f"κ{sub} = {gap}" if gap is not None else f"κ{sub} > {table.order}")
    if probe is not None:
        for p in probe:
            lines.append(f"sign pattern s={p.s}: {p.status}")
    if check_status is not None:
        lines.append(f"check-table: {check_status}")
        lines += check_lines
    return Outcome("\n".join(lines) + "\n", code)


def cmd_certify(args, cfg: RunConfig) -> Outcome:
    if args.max_radius:
        r = certify.max_certified_radius(args.grid_step)
        if cfg.output_format == "json":
            doc = {"max_certified_radius": {"num": str(r.numerator), "den": str(r.denominator)},
                   "approx": float(r), "grid_step": str(args.grid_step)}
            return Outcome(_json_text(doc))
        if cfg.output_format == "csv":
            return Outcome(_csv_text(["max_radius", "approx", "grid_step"], [[str(r), repr(float(r)), str(args.grid_step)]]))
        return Outcome(f"max certified radius: {r} (~ {float(r):.10g}) on grid step {args.grid_step}\n")
    if args.a is None:
        raise ValueError("certify needs --a or --max-radius")
    cert = certify.certify_disk(args.a, args.u)
    code = EXIT_OK if cert.feasible else EXIT_FAIL
    if cfg.output_format == "json":
        doc = cert.to_dict()
        if args.transcript:
            doc["transcript"] = cert.transcript()
        return Outcome(_json_text(doc), code)
    if cfg.output_format == "csv":
        rows = []
        verdicts = [cert.conditions, cert.separation]
        groups = [v.inequalities for v in verdicts if v is not None]
        if cert.sandwich is not None:
            groups.append(cert.sandwich.quotient)
        for ineqs in groups:
            for i in ineqs:
                rows.append([i.label, str(i.lhs), i.rel, str(i.rhs), int(i.holds)])
        return Outcome(_csv_text(["label", "lhs", "rel", "rhs", "holds"], rows), code)
    return Outcome("\n".join(cert.transcript()) + "\n", code)


def cmd_zeros(args, cfg: RunConfig) -> Outcome:
    tol = cfg.tol if cfg.tol is not None else 1e-10
    zs = zeros.find(args.q, args.n, tol, order=args.order, prec=cfg.mp_prec)
    rows = zs.rows()
    sep = zeros.separation_report(zs) if zs.count >= 2 else None
    if cfg.output_format == "json":
        doc = {
            "q": _fmt_complex(args.q),
            "tol": tol,
            "zeros": rows,
            "separation": None if sep is None else {
                "min_ratio": sep.min_ratio, "distinct": sep.distinct, "min_pair_distance": sep.min_pair_distance
            },
        }
        return Outcome(_json_text(doc))
    cols = ["j", "re_zero", "im_zero", "residual", "re_delta", "im_delta", "abs_delta", "scale"]
    if cfg.output_format == "csv":
        return Outcome(_csv_text(cols, [[repr(r[c]) if isinstance(r[c], float) else r[c] for c in cols] for r in rows]))
    lines = [f"zeros of theta(q, .) at q = {_fmt_complex(args.q)} (tol {tol:g}, {zs.prec} bits)"]
    lines.append(f"{'j':>3} {'zero':>36} {'|theta|':>10} {'Delta_j':>28}")
    for r in rows:
        z = complex(r["re_zero"], r["im_zero"])
        dl = complex(r["re_delta"], r["im_delta"])
        lines.append(f"{r['j']:>3} {_fmt_complex(z, 14):>36} {r['residual']:>10.2e} {_fmt_complex(dl, 10):>28}")
    if sep is not None:
        lines.append(f"min ratio {sep.min_ratio:.6g}, min pair distance {sep.min_pair_distance:.6g}, "
                     f"distinct: {'yes' if sep.distinct else 'no'}")
    return Outcome("\n".join(lines) + "\n")


def cmd_scan(args, cfg: RunConfig) -> Outcome:
    tol = cfg.tol if cfg.tol is not None else 1e-10
    rows = zeros.scan_disk(args.rmax, args.grid, args.n, tol)
    if cfg.output_format == "json":
        doc = [
            {
                "re_q": r.q.real, "im_q": r.q.imag, "n_found": r.n_found,
                "min_ratio": _json_float(r.min_ratio), "min_pair_distance": _json_float(r.min_pair_distance),
                "max_delta_dev": _json_float(r.max_delta_dev), "stalled": r.stalled,
            }
            for r in rows
        ]
        return Outcome(_json_text(doc))
    if cfg.output_format == "csv":
        buf = io.StringIO()
        zeros.write_scan_csv(rows, buf)
        return Outcome(buf.getvalue())
    stalled = sum(r.stalled for r in rows)
    ok = [r for r in rows if not r.stalled]
    lines = [f"scanned {len(rows)} points with |q| <= {args.rmax:g}, n = {args.n}",
             f"stalled: {stalled}"]
    if ok:
        lines.append(f"largest consecutive ratio: {max(r.max_ratio for r in ok if r.n_found > 1):.6g}"
                     if args.n > 1 else "single zero per point")
        lines.append(f"max |Delta_j - 1|: {max(r.max_delta_dev for r in ok):.6g}")
        lines.append(f"all distinct: {'yes' if all(r.distinct for r in ok) else 'no'}")
    return Outcome("\n".join(lines) + "\n")


def _json_float(v: float):
    return None if math.isnan(v) or math.isinf(v) else v


def cmd_spectrum(args, cfg: RunConfig) -> Outcome:
    prec = max(cfg.precision_bits, spectrum.HIGH_PREC)
    pts = spectrum.spectrum(args.jmax, prec=prec)
    if cfg.output_format == "json":
        return Outcome(_json_text([p.as_row() for p in pts]))
    if cfg.output_format == "csv":
        if len(pts) >= 3:
            buf = io.StringIO()
            spectrum.asymptotic_report(pts).write_csv(buf)
            return Outcome(buf.getvalue())
        rows = [[p.j, repr(float(p.q_tilde)), repr(p.j * (1 - float(p.q_tilde))), repr(float(p.x_double))] for p in pts]
        return Outcome(_csv_text(["j", "q_tilde", "j*(1-q_tilde)", "x_double"], rows))
    lines = [f"{'j':>3} {'q_tilde':>22} {'j(1-q_tilde)':>14} {'x_double':>22} {'residual':>10}"]
    for p in pts:
        lines.append(
            f"{p.j:>3} {mpmath.nstr(p.q_tilde, 17):>22} {p.j * (1 - float(p.q_tilde)):>14.10f}"
            f" {mpmath.nstr(p.x_double, 15):>22} {p.newton_residual:>10.2e}"
        )
    if len(pts) >= 3:
        rep = spectrum.asymptotic_report(pts)
        lines.append(f"j(1-q_tilde) approaching pi/2 monotonically: {'yes' if rep.gap_monotone else 'no'}")
        lines.append(f"x_double decreasing toward -e^pi: {'yes' if rep.x_monotone and rep.x_above_limit else 'no'}")
    return Outcome("\n".join(lines) + "\n")


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default=None, help="output format")
    common.add_argument("--output", default=None, help="write output to this file (UTF-8)")
    common.add_argument("--precision-bits", type=int, default=None,
                        help=f"working precision; 53 means IEEE double (env {ENV_PRECISION})")
    common.add_argument("--tol", type=_positive_float, default=None, help="absolute tolerance")

    p = argparse.ArgumentParser(prog="partial-theta", description="Partial theta function toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[common], help="evaluate theta or a derivative")
    e.add_argument("--q", type=parse_complex, required=True)
    e.add_argument("--x", type=parse_complex, required=True)
    e.add_argument("--dq", type=int, default=0, help="order of the q-derivative")
    e.add_argument("--dx", type=int, default=0, help="order of the x-derivative")
    e.set_defaults(func=cmd_eval)

    d = sub.add_parser("delta", parents=[common], help="integer series of the correction factors")
    d.add_argument("--s", type=int, required=True, help="number of factors")
    d.add_argument("--k", type=int, required=True, help="truncation order in q")
    d.add_argument("--check-table", action="store_true", help="compare with the stored 5x10 table")
    d.add_argument("--probe", action="store_true", help="report the alternating sign pattern")
    d.set_defaults(func=cmd_delta)

    c = sub.add_parser("certify", parents=[common], help="exact-arithmetic simplicity certificate")
    c.add_argument("--a", type=parse_rational, default=None, help="disk radius")
    c.add_argument("--u", type=parse_rational, default=None, help="fixed u = 1 + beta (searched if absent)")
    c.add_argument("--max-radius", action="store_true", help="largest certifiable radius on a grid")
    c.add_argument("--grid-step", type=parse_rational, default=Fraction(1, 10**5))
    c.add_argument("--transcript", action="store_true", help="include the inequality transcript in JSON")
    c.set_defaults(func=cmd_certify)

    z = sub.add_parser("zeros", parents=[common], help="first n zeros of theta(q, .)")
    z.add_argument("--q", type=parse_complex, required=True)
    z.add_argument("--n", type=int, default=6)
    z.add_argument("--order", type=int, default=zeros.SEED_ORDER, help="order of the seed series")
    z.set_defaults(func=cmd_zeros)

    s = sub.add_parser("scan", parents=[common], help="zero separation on a polar grid of q")
    s.add_argument("--rmax", type=float, required=True)
    s.add_argument("--grid", type=int, required=True)
    s.add_argument("--n", type=int, default=6)
    s.set_defaults(func=cmd_scan, default_format="csv")

    sp = sub.add_parser("spectrum", parents=[common], help="real spectral values and double zeros")
    sp.add_argument("--jmax", type=int, required=True)
    sp.set_defaults(func=cmd_spectrum)
    return p


def _emit(text: str, path: str | None, stdout) -> None:
    if path is None:
        stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def main(argv: Sequence[str] | None = None, *, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        bits = args.precision_bits if args.precision_bits is not None else _default_precision()
        fmt = args.format or getattr(args, "default_format", "text")
        cfg = RunConfig(precision_bits=bits, tol=args.tol, output_format=fmt, output_path=args.output)
    except ValueError as exc:
        stderr.write(f"partial-theta: error: {exc}\n")
        return EXIT_USAGE
    func: Callable[..., Outcome] = args.func
    try:
        out = func(args, cfg)
    except (ArithmeticError, BracketInvalid) as exc:
        stderr.write(f"partial-theta: numeric failure: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC
    except (PartialThetaError, ValueError) as exc:
        stderr.write(f"partial-theta: error: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE
    _emit(out.text, cfg.output_path, stdout)
    return out.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
