"""
Quantiles, semi-interquartile ranges, divergence-aware moments and the
assembled position/momentum uncertainty report.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .momentum import momentum_density
from .numerics import (
    DEFAULT_ABS_TOL,
    DEFAULT_REL_TOL,
    Interval,
    NumericsError,
    RootFindingError,
    brent_root,
    integrate,
)
from .states import Density, MomentFlags, WaveFunction, position_density

__all__ = [
    "QuartileSet",
    "MomentResult",
    "UncertaintyReport",
    "DispersionError",
    "InconclusiveMomentError",
    "CumulativeDistribution",
    "cdf",
    "quantile",
    "quartiles",
    "siqr",
    "mean_variance",
    "probe_moment",
    "uncertainty_report",
    "discrete_quantile",
]

QUANTILE_TOL = 1e-9
X_TOL = 1e-13


class DispersionError(ArithmeticError):
    pass


class InconclusiveMomentError(DispersionError):
    """The divergence probe could not decide whether a moment exists."""


@dataclass(frozen=True)
class QuartileSet:
    q1: float
    median: float
    q3: float
    achieved_tol: float

    @property
    def siqr(self) -> float:
        return 0.5 * (self.q3 - self.q1)


@dataclass(frozen=True)
class MomentResult:
    status: str
    value: Optional[float] = None

    def __post_init__(self):
        if self.status not in ("finite", "divergent"):
            raise ValueError(f"bad status {self.status!r}")
        if (self.status == "finite") != (self.value is not None):
            raise ValueError("value must be present iff the moment is finite")

    @property
    def finite(self) -> bool:
        return self.status == "finite"

    @classmethod
    def divergent(cls) -> "MomentResult":
        return cls("divergent")

    def to_dict(self):
        return {"status": self.status, "value": self.value}


@dataclass(frozen=True)
class UncertaintyReport:
    label: str
    hbar: float
    siqr_x: float
    siqr_p: float
    product_over_hbar: float
    mean_x: MomentResult
    var_x: MomentResult
    mean_p: MomentResult
    var_p: MomentResult
    variance_product_over_hbar: Optional[float]
    quartiles_x: QuartileSet
    quartiles_p: QuartileSet
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def to_dict(self, momentum_in_hbar_units: bool = True) -> dict:
        """JSON-ready mapping with the fixed key set used by the CLI."""
        unit = self.hbar if momentum_in_hbar_units else 1.0
        unit2 = unit * unit

        def scaled(m: MomentResult, div):
            return {"status": m.status, "value": None if m.value is None else m.value / div}

        return {
            "label": self.label,
            "params": dict(self.params),
            "hbar": self.hbar,
            "siqr_x": self.siqr_x,
            "siqr_p": self.siqr_p / unit,
            "product_over_hbar": self.product_over_hbar,
            "mean_x": self.mean_x.to_dict(),
            "var_x": self.var_x.to_dict(),
            "mean_p": scaled(self.mean_p, unit),
            "var_p": scaled(self.var_p, unit2),
            "variance_product_over_hbar": self.variance_product_over_hbar,
            "tolerances": dict(self.tolerances),
        }


class CumulativeDistribution:
    """
    Memoising CDF evaluator.

    Every evaluation adds a knot; later queries integrate only from the
    nearest knot, so a root finder homing in on a quantile costs a few
    short integrals instead of repeated integrals from the far tail.
    """

    def __init__(self, d: Density, abs_tol=DEFAULT_ABS_TOL, rel_tol=DEFAULT_REL_TOL):
        self.density = d
        self.abs_tol = abs_tol
        self.rel_tol = rel_tol
        dom = d.domain
        if d.cdf is not None:
            self._xs = self._fs = self._errs = None
            return
        if d.symmetry_center is not None:
            anchor, value, err = d.symmetry_center, 0.5, 0.0
        elif math.isfinite(dom.lo):
            anchor, value, err = dom.lo, 0.0, 0.0
        elif math.isfinite(dom.hi):
            anchor, value, err = dom.hi, 1.0, 0.0
        else:
            anchor = d.location
            res = integrate(d.pdf, Interval(-math.inf, anchor), abs_tol, rel_tol)
            value, err = res.value, res.abs_error_estimate
        self._xs = [anchor]
        self._fs = [value]
        self._errs = [err]

    def error_at(self, q: float) -> float:
        if self._xs is None:
            return 0.0
        i = bisect.bisect_left(self._xs, q)
        if i < len(self._xs) and self._xs[i] == q:
            return self._errs[i]
        return math.inf

    def __call__(self, q: float) -> float:
        d = self.density
        q = float(q)
        if d.cdf is not None:
            return float(d.cdf(q))
        if q <= d.domain.lo:
            return 0.0
        if q >= d.domain.hi:
            return 1.0
        xs = self._xs
        i = bisect.bisect_left(xs, q)
        if i < len(xs) and xs[i] == q:
            return self._fs[i]
        # nearest knot
        if i == 0:
            j = 0
        elif i == len(xs):
            j = i - 1
        else:
            j = i if xs[i] - q < q - xs[i - 1] else i - 1
        x0 = xs[j]
        lo, hi = (x0, q) if q > x0 else (q, x0)
        res = integrate(d.pdf, (lo, hi), self.abs_tol, self.rel_tol)
        inc = res.value if q > x0 else -res.value
        value = self._fs[j] + inc
        err = self._errs[j] + res.abs_error_estimate
        xs.insert(i, q)
        self._fs.insert(i, value)
        self._errs.insert(i, err)
        return value


def cdf(d: Density, q: float, abs_tol=DEFAULT_ABS_TOL, rel_tol=DEFAULT_REL_TOL) -> float:
    """P(X <= q) for the density ``d``."""
    return CumulativeDistribution(d, abs_tol, rel_tol)(q)


def _bracket(F: CumulativeDistribution, d: Density, level: float):
    start = d.symmetry_center if d.symmetry_center is not None else d.domain.clip(d.location)
    step = d.scale
    f0 = F(start) - level
    if f0 == 0.0:
        return start, start
    direction = 1.0 if f0 < 0 else -1.0
    prev = start
    for k in range(80):
        x = start + direction * step * 2.0 ** k
        if direction < 0 and x <= d.domain.lo:
            x = d.domain.lo
        if direction > 0 and x >= d.domain.hi:
            x = d.domain.hi
        fx = F(x) - level
        if (fx >= 0) if direction > 0 else (fx <= 0):
            return (prev, x) if direction > 0 else (x, prev)
        prev = x
    raise DispersionError(f"could not bracket the {level} quantile of {d.label}")


def quantile(
    d: Density,
    level: float,
    tol: float = QUANTILE_TOL,
    F: Optional[CumulativeDistribution] = None,
) -> float:
    """
    Solve CDF(q) = level by outward bracket doubling from the centre then Brent.

    Raises DispersionError if the bracket cannot be found or the achieved
    |CDF(q) - level| exceeds ``tol``.
    """
    return _quantile_with_error(d, level, tol, F)[0]


def _quantile_with_error(d, level, tol, F=None):
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    F = F or CumulativeDistribution(d)
    lo, hi = _bracket(F, d, level)
    if lo == hi:
        return lo, 0.0
    try:
        q = brent_root(lambda x: F(x) - level, (lo, hi), x_tol=X_TOL * max(1.0, d.scale))
    except RootFindingError as exc:
        raise DispersionError(f"quantile {level} of {d.label}: {exc}") from exc
    miss = abs(F(q) - level)
    if miss > tol:
        raise DispersionError(
            f"quantile {level} of {d.label}: |CDF(q) - level| = {miss:.3g} exceeds {tol:.3g}"
        )
    err = miss + (F.error_at(q) if math.isfinite(F.error_at(q)) else 0.0)
    return q, err


def quartiles(d: Density, tol: float = QUANTILE_TOL) -> QuartileSet:
    F = CumulativeDistribution(d)
    q1, e1 = _quantile_with_error(d, 0.25, tol, F)
    med, e2 = _quantile_with_error(d, 0.5, tol, F)
    q3, e3 = _quantile_with_error(d, 0.75, tol, F)
    return QuartileSet(q1, med, q3, max(e1, e2, e3, np.finfo(float).eps))


def siqr(d: Density, tol: float = QUANTILE_TOL) -> float:
    """Semi-interquartile range (Q3 - Q1) / 2."""
    F = CumulativeDistribution(d)
    q1 = quantile(d, 0.25, tol, F)
    q3 = quantile(d, 0.75, tol, F)
    return 0.5 * (q3 - q1)


# Moments -----------------------------------------------------------------

PROBE_START = 8.0
PROBE_DOUBLINGS = 7          # 8 * 2**7 = 1024


def _probe_center(d: Density) -> float:
    if d.symmetry_center is not None:
        return d.symmetry_center
    return d.domain.clip(0.0)


def probe_moment(d: Density, order: int, abs_tol=DEFAULT_ABS_TOL, rel_tol=DEFAULT_REL_TOL) -> str:
    """
    Decide numerically whether E|X - c|**order is finite.

    The truncated absolute moment A(L) over [c - L, c + L] is tracked for
    L = 8, 16, ..., 1024 (in units of the density scale). With increments
    D_k = A(L_k) - A(L_{k-1}):

    * finite      if the last increment is below 1e-9 * A, or the last
                  three increments shrink geometrically (ratios <= 0.75,
                  i.e. an algebraic tail that is summable);
    * divergent   if the increments do not shrink (ratios >= 0.9) and the
                  relative change over the last three doublings exceeds 1e-3;
    * otherwise   InconclusiveMomentError.

    Absolute moments are used so that symmetric cancellation (the Cauchy
    principal value) cannot masquerade as a finite mean.
    """
    c = _probe_center(d)
    s = d.scale

    def shell(a, b):
        total = 0.0
        for lo, hi in ((c + a, c + b), (c - b, c - a)):
            lo, hi = max(lo, d.domain.lo), min(hi, d.domain.hi)
            if hi > lo:
                total += integrate(
                    lambda x: np.abs(x - c) ** order * d.pdf(x), (lo, hi), abs_tol, rel_tol
                ).value
        return total

    lengths = [PROBE_START * s * 2.0 ** k for k in range(PROBE_DOUBLINGS + 1)]
    acc = shell(0.0, lengths[0])
    incs = []
    for a, b in zip(lengths[:-1], lengths[1:]):
        inc = shell(a, b)
        incs.append(inc)
        acc += inc
    last = incs[-3:]
    if acc <= 0 or last[-1] <= 1e-9 * acc:
        return "finite"
    ratios = [last[1] / last[0] if last[0] > 0 else math.inf, last[2] / last[1] if last[1] > 0 else math.inf]
    if max(ratios) <= 0.75:
        return "finite"
    if min(ratios) >= 0.9 and sum(last) / acc > 1e-3:
        return "divergent"
    raise InconclusiveMomentError(
        f"order-{order} moment of {d.label}: increments {last} are inconclusive"
    )


def _signed_moment(d: Density, g, abs_tol, rel_tol):
    c = _probe_center(d)
    bps = [c] if d.domain.lo < c < d.domain.hi else []
    return integrate(lambda x: g(x) * d.pdf(x), d.domain, abs_tol, rel_tol, breakpoints=bps).value


def mean_variance(
    d: Density,
    flags: MomentFlags = MomentFlags(),
    abs_tol=DEFAULT_ABS_TOL,
    rel_tol=DEFAULT_REL_TOL,
) -> tuple[MomentResult, MomentResult]:
    """
    Mean and variance, or ``divergent`` where they do not exist.

    Known flags are trusted; unknown ones are settled by :func:`probe_moment`.
    A divergent mean implies a divergent variance.
    """
    mean_ok = flags.mean
    if mean_ok is None:
        mean_ok = probe_moment(d, 1, abs_tol, rel_tol) == "finite"
    if not mean_ok:
        return MomentResult.divergent(), MomentResult.divergent()
    mean = _signed_moment(d, lambda x: x, abs_tol, rel_tol)
    var_ok = flags.variance
    if var_ok is None:
        var_ok = probe_moment(d, 2, abs_tol, rel_tol) == "finite"
    if not var_ok:
        return MomentResult("finite", mean), MomentResult.divergent()
    var = _signed_moment(d, lambda x: (x - mean) ** 2, abs_tol, rel_tol)
    return MomentResult("finite", mean), MomentResult("finite", var)


def _momentum_moments_from_derivative(wf: WaveFunction, hbar, abs_tol, rel_tol):
    """<p> = hbar int Im(conj(psi) psi'),  <p^2> = hbar^2 int |psi'|^2."""
    flags = wf.momentum_flags
    if not flags.mean:
        return MomentResult.divergent(), MomentResult.divergent()
    psi, dpsi = wf.position_amplitude, wf.amplitude_derivative
    bps = [wf.center] if wf.support.lo < wf.center < wf.support.hi else []
    if wf.real:
        mean = 0.0
    else:
        mean = hbar * integrate(
            lambda x: np.imag(np.conj(psi(x)) * dpsi(x)), wf.support, abs_tol, rel_tol, breakpoints=bps
        ).value
    if not flags.variance:
        return MomentResult("finite", mean), MomentResult.divergent()
    second = hbar ** 2 * integrate(
        lambda x: np.abs(dpsi(x)) ** 2, wf.support, abs_tol, rel_tol, breakpoints=bps
    ).value
    return MomentResult("finite", mean), MomentResult("finite", second - mean * mean)


def uncertainty_report(
    wf: WaveFunction,
    hbar: float = 1.0,
    abs_tol: float = DEFAULT_ABS_TOL,
    rel_tol: float = DEFAULT_REL_TOL,
    method: str = "auto",
    quantile_tol: float = QUANTILE_TOL,
) -> UncertaintyReport:
    """
    Position and momentum quartiles, SIQRs, their product in units of
    hbar, and the mean/variance results for both axes.

    Momentum moments use the closed-form density when available, else the
    position-space identities with psi' when the state provides it, else
    the numerically transformed density.
    """
    if not hbar > 0:
        raise ValueError("hbar must be positive")
    dx = position_density(wf)
    try:
        qx = quartiles(dx, quantile_tol)
        mean_x, var_x = mean_variance(dx, wf.moment_flags, abs_tol, rel_tol)
    except (NumericsError, DispersionError) as exc:
        raise DispersionError(f"position axis of {wf.label}: {exc}") from exc
    try:
        dp = momentum_density(wf, hbar, method)
        qp = quartiles(dp, quantile_tol)
        if dp.source == "closed_form" or (wf.amplitude_derivative is None and wf.momentum_flags.mean is not None):
            mean_p, var_p = mean_variance(dp, wf.momentum_flags, abs_tol, rel_tol)
        elif wf.amplitude_derivative is not None and wf.momentum_flags.mean is not None \
                and (wf.momentum_flags.variance is not None or not wf.momentum_flags.mean):
            mean_p, var_p = _momentum_moments_from_derivative(wf, hbar, abs_tol, rel_tol)
        else:
            mean_p, var_p = mean_variance(dp, wf.momentum_flags, abs_tol, rel_tol)
    except (NumericsError, DispersionError) as exc:
        raise DispersionError(f"momentum axis of {wf.label}: {exc}") from exc

    sx, sp = qx.siqr, qp.siqr
    var_prod = None
    if var_x.finite and var_p.finite:
        var_prod = math.sqrt(var_x.value * var_p.value) / hbar
    return UncertaintyReport(
        label=wf.label,
        hbar=hbar,
        siqr_x=sx,
        siqr_p=sp,
        product_over_hbar=sx * sp / hbar,
        mean_x=mean_x,
        var_x=var_x,
        mean_p=mean_p,
        var_p=var_p,
        variance_product_over_hbar=var_prod,
        quartiles_x=qx,
        quartiles_p=qp,
        params=dict(wf.params),
        tolerances={"abs_tol": abs_tol, "rel_tol": rel_tol, "quantile_tol": quantile_tol},
    )


def discrete_quantile(
    outcomes: Sequence[tuple[float, float]], level: float, inclusive: bool = False
) -> float:
    """
    Quantile of a discrete distribution given as sorted (value, prob) pairs.

    Default: inf{a : F(a) > level} with the right-continuous CDF F; the
    largest outcome when nothing exceeds ``level``. ``inclusive=True``
    uses inf{a : F(a) >= level} instead, the reflection of the strict rule
    (the strict upper quartile of X equals minus the inclusive lower
    quartile of -X).
    """
    probs = [float(pr) for _, pr in outcomes]
    if not outcomes:
        raise ValueError("empty distribution")
    if any(pr < 0 for pr in probs) or abs(math.fsum(probs) - 1.0) > 1e-12:
        raise ValueError("probabilities must be nonnegative and sum to 1")
    values = [float(v) for v, _ in outcomes]
    if any(b < a for a, b in zip(values, values[1:])):
        raise ValueError("outcomes must be sorted")
    acc = 0.0
    for v, pr in zip(values, probs):
        acc += pr
        if acc > level or (inclusive and acc >= level):
            return v
    return values[-1]
