"""
Command-line interface.

    median-uncertainty product gaussian --mu 0 --sigma 1
    median-uncertainty quartiles cauchy --gamma 2 --format text
    median-uncertainty reproduce
    median-uncertainty search --degree 8 --samples 100000 --seed 42
    median-uncertainty qubit --grid 1001

Exit codes: 0 success, 1 numerical failure or a failed check, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dispersion import DispersionError, quartiles, uncertainty_report
from .hermite import hermite_fn
from .momentum import momentum_density, to_momentum_amplitude
from .numerics import DEFAULT_ABS_TOL, DEFAULT_REL_TOL, NumericsError
from .qubit import verify_qubit_theorem
from .search import SearchError, min_siqr_search, min_variance_search, write_convergence_csv
from .states import CATALOG, ParameterError, WaveFunction, make_state, position_density

__all__ = ["RunConfig", "main", "reproduce_rows", "build_parser", "REPORT_KEYS"]

log = logging.getLogger(__name__)

REPORT_KEYS = (
    "label", "params", "hbar", "siqr_x", "siqr_p", "product_over_hbar",
    "mean_x", "var_x", "mean_p", "var_p", "variance_product_over_hbar", "tolerances",
)
REPRODUCE_COLUMNS = ("quantity", "paper_value", "computed_value", "abs_diff", "status")

# first computed value of the F(5, 2) product, kept as a regression constant
F52_PRODUCT = 0.28794862877983


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    hbar: float = 1.0
    abs_tol: float = DEFAULT_ABS_TOL
    rel_tol: float = DEFAULT_REL_TOL
    output_format: str = "json"
    seed: int = 42
    samples: int = 10_000
    degree: int = 8

    def __post_init__(self):
        if not self.hbar > 0:
            raise UsageError("--hbar must be positive")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise UsageError("tolerances must be positive")
        if self.samples < 1 or self.degree < 0:
            raise UsageError("--samples must be >= 1 and --degree >= 0")


_PARAM_FLAGS = {
    "cauchy": ("x0", "gamma"),
    "gaussian": ("mu", "sigma"),
    "student-t": ("n",),
    "f": ("d1", "d2"),
}
_INT_PARAMS = {"n", "d1", "d2"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--hbar", type=float, default=1.0)
    common.add_argument("--abs-tol", type=float, default=DEFAULT_ABS_TOL)
    common.add_argument("--rel-tol", type=float, default=DEFAULT_REL_TOL)
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--samples", type=int, default=10_000)
    common.add_argument("--degree", type=int, default=8)
    common.add_argument("--out", metavar="FILE", default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="median-uncertainty",
        description="Median-based (SIQR) and variance-based uncertainty products.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (("product", "full uncertainty report"), ("quartiles", "position and momentum quartiles")):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("dist", choices=sorted(CATALOG))
        p.add_argument("--x0", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--mu", type=float)
        p.add_argument("--sigma", type=float)
        p.add_argument("--n", type=float)
        p.add_argument("--d1", type=float)
        p.add_argument("--d2", type=float)
        p.add_argument("--method", choices=("auto", "numeric", "closed_form"), default="auto")
        if name == "product":
            p.add_argument("--raw-units", action="store_true", help="momentum values in absolute units, not hbar")

    sub.add_parser("reproduce", parents=[common], help="recompute every published figure")

    p = sub.add_parser("search", parents=[common], help="Haar search over Hermite superpositions")
    p.add_argument("--objective", choices=("siqr", "variance"), default="siqr")
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("qubit", parents=[common], help="sigma_x / sigma_y SIQR check")
    p.add_argument("--grid", type=int, default=1001)
    p.add_argument("--grid-theta", type=int, default=None)
    return parser


def _config(args) -> RunConfig:
    return RunConfig(args.hbar, args.abs_tol, args.rel_tol, args.format, args.seed, args.samples, args.degree)


def _state_from_args(args) -> WaveFunction:
    params = {}
    allowed = _PARAM_FLAGS[args.dist]
    for flag in ("x0", "gamma", "mu", "sigma", "n", "d1", "d2"):
        value = getattr(args, flag)
        if value is None:
            continue
        if flag not in allowed:
            raise UsageError(f"--{flag} does not apply to {args.dist}")
        if flag in _INT_PARAMS:
            if not float(value).is_integer():
                raise UsageError(f"--{flag} must be an integer")
            value = int(value)
        params[flag] = value
    try:
        return make_state(args.dist, **params)
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc


# Formatting ----------------------------------------------------------------

def _moment_text(m: dict) -> str:
    return "divergent" if m["status"] == "divergent" else repr(m["value"])


def _report_csv(d: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    cols = [k for k in REPORT_KEYS if k not in ("params", "tolerances")]
    w.writerow(cols)
    row = []
    for k in cols:
        v = d[k]
        row.append(_moment_text(v) if isinstance(v, dict) else ("" if v is None else v))
    w.writerow(row)
    return buf.getvalue()


def _report_text(d: dict, unit: str) -> str:
    lines = [f"{d['label']}  (hbar = {d['hbar']:g})"]
    lines.append(f"  SIQR_x                 {d['siqr_x']:.6f}")
    lines.append(f"  SIQR_p                 {d['siqr_p']:.6f} {unit}")
    lines.append(f"  SIQR product / hbar    {d['product_over_hbar']:.6f}")
    for k in ("mean_x", "var_x", "mean_p", "var_p"):
        lines.append(f"  {k:<22} {_moment_text(d[k])}")
    vp = d["variance_product_over_hbar"]
    lines.append(f"  std product / hbar     {'n/a' if vp is None else f'{vp:.6f}'}")
    return "\n".join(lines) + "\n"


def _table_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([r[c] for c in columns])
    return buf.getvalue()


def _table_text(columns, rows) -> str:
    cells = [[str(c) for c in columns]] + [[_fmt(r[c]) for c in columns] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    return "\n".join("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in cells) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


# Commands ------------------------------------------------------------------

def cmd_product(args, cfg: RunConfig) -> int:
    wf = _state_from_args(args)
    rep = uncertainty_report(wf, cfg.hbar, cfg.abs_tol, cfg.rel_tol, method=args.method)
    d = rep.to_dict(momentum_in_hbar_units=not args.raw_units)
    unit = "" if args.raw_units else "hbar"
    text = {"json": lambda: _json(d), "csv": lambda: _report_csv(d), "text": lambda: _report_text(d, unit)}
    _emit(text[cfg.output_format](), args.out)
    return 0


def cmd_quartiles(args, cfg: RunConfig) -> int:
    wf = _state_from_args(args)
    qx = quartiles(position_density(wf))
    qp = quartiles(momentum_density(wf, cfg.hbar, args.method))
    rows = [
        {"axis": "x", "q1": qx.q1, "median": qx.median, "q3": qx.q3, "achieved_tol": qx.achieved_tol},
        {"axis": "p", "q1": qp.q1 / cfg.hbar, "median": qp.median / cfg.hbar, "q3": qp.q3 / cfg.hbar,
         "achieved_tol": qp.achieved_tol},
    ]
    cols = ("axis", "q1", "median", "q3", "achieved_tol")
    if cfg.output_format == "json":
        text = _json({"label": wf.label, "hbar": cfg.hbar, "momentum_unit": "hbar", "quartiles": rows})
    elif cfg.output_format == "csv":
        text = _table_csv(cols, rows)
    else:
        text = f"{wf.label}\n" + _table_text(cols, rows)
    _emit(text, args.out)
    return 0


def _row(quantity, paper, computed, ok, diff=None):
    if diff is None:
        try:
            diff = abs(float(computed) - float(paper))
        except (TypeError, ValueError):
            diff = ""
    return {"quantity": quantity, "paper_value": paper, "computed_value": computed,
            "abs_diff": diff, "status": "pass" if ok else "fail"}


def _close(quantity, paper, computed, tol):
    return _row(quantity, paper, computed, abs(computed - paper) <= tol)


def _status(m) -> str:
    return m.status if m.status == "divergent" else f"finite {m.value:.3g}"


def reproduce_rows(cfg: RunConfig) -> list[dict]:
    """Recompute each published figure; one dict per row."""
    h = cfg.hbar
    tol = dict(abs_tol=cfg.abs_tol, rel_tol=cfg.rel_tol)
    rows = []

    def report(name, **params):
        return uncertainty_report(make_state(name, **params), h, **tol)

    g = report("gaussian", mu=0.0, sigma=1.0)
    rows.append(_close("gaussian SIQR_x / sigma", 0.674, g.siqr_x, 1e-3))
    rows.append(_close("gaussian SIQR_p * sigma / hbar", 0.337, g.siqr_p / h, 1e-3))
    rows.append(_close("gaussian SIQR product / hbar", 0.2275, g.product_over_hbar, 5e-4))
    rows.append(_close("gaussian std product / hbar", 0.5, g.variance_product_over_hbar, 1e-8))

    products = []
    for gamma, paper in zip((1, 2, 3, 4), (0.094, 0.047, 0.032, 0.024)):
        c = report("cauchy", x0=0.0, gamma=float(gamma))
        products.append(c.product_over_hbar)
        rows.append(_close(f"cauchy gamma={gamma} SIQR_x", float(gamma), c.siqr_x, 1e-6))
        rows.append(_close(f"cauchy gamma={gamma} SIQR_p / hbar", paper, c.siqr_p / h, 1e-3))
        rows.append(_close(f"cauchy gamma={gamma} SIQR product / hbar", 0.094, c.product_over_hbar, 1e-3))
    spread = max(products) - min(products)
    rows.append(_row("cauchy product spread over gamma", 0.0, spread, spread <= 1e-5, spread))
    rows.append(_row("cauchy mean, variance", "divergent, divergent",
                     f"{_status(c.mean_x)}, {_status(c.var_x)}",
                     not c.mean_x.finite and not c.var_x.finite, ""))

    t2 = report("student-t", n=2)
    rows.append(_close("t(2) SIQR_x", math.sqrt(2 / 3), t2.siqr_x, 1e-6))
    rows.append(_close("t(2) Q3_p / hbar", 0.161, t2.quartiles_p.q3 / h, 1e-3))
    rows.append(_close("t(2) SIQR product / hbar", 0.131, t2.product_over_hbar, 1e-3))
    rows.append(_row("t(2) mean, variance", "finite 0, divergent",
                     f"{_status(t2.mean_x)}, {_status(t2.var_x)}",
                     t2.mean_x.finite and abs(t2.mean_x.value) <= 1e-6 and not t2.var_x.finite, ""))

    t3 = report("student-t", n=3)
    rows.append(_close("t(3) Q3_x", 0.765, t3.quartiles_x.q3, 1e-3))
    rows.append(_close("t(3) Q3_p / hbar", 0.200, t3.quartiles_p.q3 / h, 1e-3))
    rows.append(_close("t(3) SIQR product / hbar", 0.153, t3.product_over_hbar, 1e-3))
    rows.append(_row("t(3) mean, variance", "finite, finite",
                     f"{_status(t3.mean_x)}, {_status(t3.var_x)}", t3.mean_x.finite and t3.var_x.finite, ""))
    order = (t2.product_over_hbar, t3.product_over_hbar, g.product_over_hbar)
    rows.append(_row("ordering t(2) < t(3) < gaussian", "0.131 < 0.153 < 0.2275",
                     " < ".join(f"{v:.4f}" for v in order), order[0] < order[1] < order[2], ""))
    if t3.variance_product_over_hbar is not None:
        rows.append(_row("t(3) std product / hbar >= 1/2", ">= 0.5", t3.variance_product_over_hbar,
                         t3.variance_product_over_hbar >= 0.5 - 1e-6, ""))

    f = report("f", d1=5, d2=2)
    rows.append(_row("F(5,2) SIQR product / hbar", "> 0.2275", f.product_over_hbar,
                     f.product_over_hbar > 0.2275, ""))
    rows.append(_row("F(5,2) mean, variance", "divergent, divergent",
                     f"{_status(f.mean_x)}, {_status(f.var_x)}", not f.mean_x.finite and not f.var_x.finite, ""))

    catalog_min = min(products + [g.product_over_hbar, t2.product_over_hbar, t3.product_over_hbar, f.product_over_hbar])
    rows.append(_close("catalog bound hbar / r", 10.6, 1.0 / catalog_min, 0.05))

    worst = 0.0
    for n in range(9):
        wf = WaveFunction(label=f"h_{n}", position_amplitude=lambda x, n=n: hermite_fn(n, x),
                          symmetric=(n % 2 == 0))
        for x in (-2.0, -1.0, 0.0, 1.0, 2.0):
            expected = (-1j) ** n * hermite_fn(n, x)
            worst = max(worst, abs(to_momentum_amplitude(wf, x, 1.0) - expected))
    rows.append(_row("hermite transform law max deviation", 0.0, worst, worst <= 1e-6, worst))

    s = min_siqr_search(cfg.degree, cfg.samples, cfg.seed, h)
    mins = [v for _, v in s.per_degree_minima]
    rows.append(_row(f"haar search degree {cfg.degree} min SIQR product / hbar", "<= 0.175 (1/5.88)",
                     s.min_product_over_hbar, s.min_product_over_hbar <= 0.175, ""))
    rows.append(_row("haar search minima nonincreasing in degree", "nonincreasing",
                     " ".join(f"{v:.4f}" for v in mins), all(b <= a for a, b in zip(mins, mins[1:])), ""))
    v = min_variance_search(min(cfg.degree, 5), cfg.samples, cfg.seed, h)
    rows.append(_row("haar variance search degree 5 min std product / hbar", 0.5,
                     v.min_variance_product_over_hbar,
                     0.5 - 1e-6 <= v.min_variance_product_over_hbar <= 0.5 + 1e-3))

    q = verify_qubit_theorem(1001, 1001)
    rows.append(_row("qubit SIQR_x^2 + SIQR_y^2 >= 1 counterexamples", 0, q.counterexample_count,
                     q.passed, q.counterexample_count))
    return rows


def cmd_reproduce(args, cfg: RunConfig) -> int:
    rows = reproduce_rows(cfg)
    if cfg.output_format == "json":
        text = _json(rows)
    elif cfg.output_format == "csv":
        text = _table_csv(REPRODUCE_COLUMNS, rows)
    else:
        text = _table_text(REPRODUCE_COLUMNS, rows)
    _emit(text, args.out)
    return 0 if all(r["status"] == "pass" for r in rows) else 1


def cmd_search(args, cfg: RunConfig) -> int:
    fn = min_siqr_search if args.objective == "siqr" else min_variance_search
    t0 = time.perf_counter()
    res = fn(cfg.degree, cfg.samples, cfg.seed, cfg.hbar, workers=args.workers)
    log.info("search finished in %.1f s", time.perf_counter() - t0)
    if cfg.output_format == "json":
        text = _json(res.to_dict())
    elif cfg.output_format == "csv":
        text = write_convergence_csv(res)
    else:
        rows = [{"degree": d, "samples": res.samples, "running_min": m, "fresh_min": fm}
                for (d, m), (_, fm) in zip(res.per_degree_minima, res.fresh_minima)]
        text = _table_text(("degree", "samples", "running_min", "fresh_min"), rows)
        text += f"argmin coefficients: {np.array2string(res.argmin_state.coefficients, precision=6)}\n"
    _emit(text, args.out)
    return 0


def cmd_qubit(args, cfg: RunConfig) -> int:
    n_theta = args.grid_theta if args.grid_theta is not None else args.grid
    if args.grid < 2 or n_theta < 2:
        raise UsageError("grid sizes must be at least 2")
    rep = verify_qubit_theorem(args.grid, n_theta)
    if cfg.output_format == "json":
        text = _json(rep.to_dict())
    elif cfg.output_format == "csv":
        text = _table_csv(("p", "theta", "siqr_x", "siqr_y"),
                          [dict(zip(("p", "theta", "siqr_x", "siqr_y"), c)) for c in rep.counterexamples])
    else:
        verdict = "pass" if rep.passed else "fail"
        text = (f"SIQR_x^2 + SIQR_y^2 >= 1 on {rep.points} points: {verdict}\n"
                f"counterexamples: {rep.counterexample_count}, smallest sum: {rep.min_sum:g}\n")
        for p, t, sx, sy in rep.counterexamples:
            text += f"  p={p:.6f} theta={t:.6f} siqr_x={sx:g} siqr_y={sy:g}\n"
    _emit(text, args.out)
    return 0 if rep.passed else 1


_COMMANDS = {
    "product": cmd_product,
    "quartiles": cmd_quartiles,
    "reproduce": cmd_reproduce,
    "search": cmd_search,
    "qubit": cmd_qubit,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        return _COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (NumericsError, DispersionError, SearchError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
