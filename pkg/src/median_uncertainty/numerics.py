"""
Numerical foundations: adaptive quadrature, bracketed root finding,
series acceleration and the modified Bessel functions used by the
closed-form momentum densities.

Integrands passed to :func:`integrate` must be vectorised, i.e. accept a
1-D ndarray of abscissae and return an ndarray of the same shape.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "NumericsError",
    "QuadratureError",
    "RootFindingError",
    "BracketError",
    "Interval",
    "QuadratureResult",
    "integrate",
    "brent_root",
    "wynn_epsilon",
    "bessel_k0",
    "bessel_k1",
    "bessel_i0",
    "bessel_i1",
    "DEFAULT_ABS_TOL",
    "DEFAULT_REL_TOL",
    "MAX_EVALUATIONS",
]

DEFAULT_ABS_TOL = 1e-10
DEFAULT_REL_TOL = 1e-10
_ZERO_RESAMPLE = 64
MAX_EVALUATIONS = 1_000_000

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


class NumericsError(ArithmeticError):
    """Base class for numerical failures."""


class QuadratureError(NumericsError):
    """Quadrature did not reach the requested tolerance.

    The best available estimate travels with the exception so callers can
    decide whether it is usable.
    """

    def __init__(self, message, value=math.nan, abs_error_estimate=math.inf, evaluations=0):
        super().__init__(message)
        self.value = value
        self.abs_error_estimate = abs_error_estimate
        self.evaluations = evaluations


class RootFindingError(NumericsError):
    def __init__(self, message, best=math.nan):
        super().__init__(message)
        self.best = best


class BracketError(RootFindingError, ValueError):
    """The supplied bracket does not straddle a sign change."""


@dataclass(frozen=True)
class Interval:
    """Closed/open real interval; either endpoint may be infinite."""

    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi) or not self.lo < self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    @property
    def finite(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def clip(self, x: float) -> float:
        return min(max(x, self.lo), self.hi)

    @classmethod
    def real_line(cls) -> "Interval":
        return cls(-math.inf, math.inf)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int

    def __float__(self):
        return float(self.value)


# 15-point Kronrod rule with its embedded 7-point Gauss rule (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])          # ascending, 15 nodes
_KRONROD_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS_W = np.zeros(15)
_GAUSS_W[[1, 3, 5]] = _WG[:3]
_GAUSS_W[7] = _WG[3]
_GAUSS_W[[9, 11, 13]] = _WG[2::-1]


def _mapping(domain: Interval):
    """Return (g, t_lo, t_hi) so that int_domain f = int_t f(x(t)) x'(t) dt."""
    lo, hi = domain.lo, domain.hi
    if math.isfinite(lo) and math.isfinite(hi):
        return None, lo, hi
    if math.isinf(lo) and math.isinf(hi):
        def to_x(t):
            s = 1.0 - t * t
            return t / s, (1.0 + t * t) / (s * s)
        return to_x, -1.0, 1.0
    if math.isinf(hi):
        def to_x(t):
            s = 1.0 - t
            return lo + t / s, 1.0 / (s * s)
        return to_x, 0.0, 1.0

    def to_x(t):
        s = 1.0 - t
        return hi - t / s, 1.0 / (s * s)
    return to_x, 0.0, 1.0


def _gk15(fun, a, b):
    """One Kronrod panel; returns (value, error, resabs)."""
    half = 0.5 * (b - a)
    center = 0.5 * (a + b)
    fv = fun(center + half * _NODES)
    resk = np.dot(_KRONROD_W, fv) * half
    resg = np.dot(_GAUSS_W, fv) * half
    mean = 0.5 * resk / half if half else 0.0
    resabs = np.dot(_KRONROD_W, np.abs(fv)) * abs(half)
    resasc = np.dot(_KRONROD_W, np.abs(fv - mean)) * abs(half)
    err = abs(resk - resg)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > _TINY / (50 * _EPS):
        err = max(err, 50 * _EPS * resabs)
    return float(resk), float(err)


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    domain,
    abs_tol: float = DEFAULT_ABS_TOL,
    rel_tol: float = DEFAULT_REL_TOL,
    max_evals: int = MAX_EVALUATIONS,
    breakpoints: Sequence[float] = (),
) -> QuadratureResult:
    """
    Globally adaptive Gauss-Kronrod (7/15) quadrature.

    Infinite endpoints are compactified (``x = t/(1-t^2)`` on the real line,
    ``x = a + t/(1-t)`` on half lines) so heavy algebraic tails stay
    bounded in the mapped variable.

    Parameters
    ----------
    f : callable
        Vectorised integrand.
    domain : Interval or (lo, hi)
    abs_tol, rel_tol : float
        Stop once the summed error estimate is below
        ``max(abs_tol, rel_tol * |value|)``.
    max_evals : int
        Hard budget on integrand evaluations.
    breakpoints : sequence of float
        Interior points where the initial partition is split (kinks,
        integrable singularities).

    Raises
    ------
    QuadratureError
        On budget exhaustion, NaN integrand values or an unsplittable
        segment; carries the best estimate.
    """
    if not isinstance(domain, Interval):
        domain = Interval(*domain)
    if abs_tol <= 0 or rel_tol <= 0:
        raise ValueError("tolerances must be positive")

    to_x, t_lo, t_hi = _mapping(domain)
    if to_x is None:
        fun = f
        pts = [domain.lo, *sorted(b for b in breakpoints if domain.lo < b < domain.hi), domain.hi]
    else:
        def fun(t):
            x, jac = to_x(t)
            return np.asarray(f(x), dtype=float) * jac
        # initial split: a handful of panels so the core is resolved
        interior = []
        for b in breakpoints:
            if domain.lo < b < domain.hi:
                if math.isinf(domain.lo) and math.isinf(domain.hi):
                    t = 2 * b / (1 + math.sqrt(1 + 4 * b * b)) if b else 0.0
                elif math.isinf(domain.hi):
                    d = b - domain.lo
                    t = d / (1 + d)
                else:
                    d = domain.hi - b
                    t = d / (1 + d)
                interior.append(t)
        base = np.linspace(t_lo, t_hi, 5)
        pts = sorted(set(base.tolist()) | set(interior))

    evals = 0
    heap = []
    total = 0.0
    total_err = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        val, err = _gk15(fun, a, b)
        evals += 15
        heapq.heappush(heap, (-err, a, b, val))
        total += val
        total_err += err

    if total == 0.0 and total_err == 0.0:
        # every node hit a zero; support narrower than the node spacing
        # (a density cut off inside the interval) would be missed entirely
        heap = []
        for a, b in zip(pts[:-1], pts[1:]):
            edges = np.linspace(a, b, _ZERO_RESAMPLE + 1)
            for u, v in zip(edges[:-1], edges[1:]):
                val, err = _gk15(fun, float(u), float(v))
                heapq.heappush(heap, (-err, float(u), float(v), val))
                total += val
                total_err += err
        evals += 15 * _ZERO_RESAMPLE * (len(pts) - 1)

    def check_nan():
        if not math.isfinite(total):
            raise QuadratureError("integrand produced a non-finite value", total, math.inf, evals)

    check_nan()
    while total_err > max(abs_tol, rel_tol * abs(total)):
        if evals + 30 > max_evals:
            raise QuadratureError(
                f"evaluation budget of {max_evals} exhausted (error estimate {total_err:.3g})",
                total, total_err, evals,
            )
        neg_err, a, b, val = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        if not (a < mid < b) or (b - a) <= 4 * _EPS * max(abs(a), abs(b)):
            raise QuadratureError(
                f"cannot subdivide segment near {a!r}: roundoff or non-integrable singularity",
                total, total_err, evals,
            )
        v1, e1 = _gk15(fun, a, mid)
        v2, e2 = _gk15(fun, mid, b)
        evals += 30
        heapq.heappush(heap, (-e1, a, mid, v1))
        heapq.heappush(heap, (-e2, mid, b, v2))
        # resum rather than update incrementally to avoid drift
        total += v1 + v2 - val
        total_err += e1 + e2 + neg_err
        check_nan()
        if len(heap) % 64 == 0:
            total = math.fsum(s[3] for s in heap)
            total_err = math.fsum(-s[0] for s in heap)
    total = math.fsum(s[3] for s in heap)
    total_err = math.fsum(-s[0] for s in heap)
    return QuadratureResult(total, total_err, evals)


def brent_root(
    f: Callable[[float], float],
    bracket,
    x_tol: float = 1e-12,
    max_iter: int = 200,
) -> float:
    """
    Van Wijngaarden-Dekker-Brent root finder.

    Combines bisection, secant and inverse quadratic interpolation; the
    bracket shrinks every iteration so convergence is guaranteed for a
    continuous ``f`` with ``f(lo) * f(hi) < 0``.
    """
    if not isinstance(bracket, Interval):
        bracket = Interval(*bracket)
    a, b = float(bracket.lo), float(bracket.hi)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise BracketError("bracket endpoints must be finite")
    fa, fb = float(f(a)), float(f(b))
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if math.isnan(fa) or math.isnan(fb):
        raise RootFindingError("function returned NaN at bracket endpoint")
    if (fa > 0) == (fb > 0):
        raise BracketError(f"no sign change on [{a}, {b}]: f={fa:.3g}, {fb:.3g}")

    c, fc = a, fa
    d = e = b - a
    for _ in range(max_iter):
        if (fb > 0) == (fc > 0):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol1 = 2.0 * _EPS * abs(b) + 0.5 * x_tol
        xm = 0.5 * (c - b)
        if abs(xm) <= tol1 or fb == 0.0:
            return b
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * xm * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = xm
        else:
            d = e = xm
        a, fa = b, fb
        b += d if abs(d) > tol1 else math.copysign(tol1, xm)
        fb = float(f(b))
        if math.isnan(fb):
            raise RootFindingError("function returned NaN", best=a)
    raise RootFindingError(f"no convergence in {max_iter} iterations", best=b)


def wynn_epsilon(partial_sums: Sequence[float]) -> tuple[float, float]:
    """
    Wynn epsilon extrapolation of a sequence of partial sums.

    Returns ``(limit, error)``. Among the even-column estimates the one
    whose two predecessors agree best is returned, ``error`` being that
    spread; deeper columns mostly amplify roundoff.
    """
    s = [float(v) for v in partial_sums]
    n = len(s)
    if n < 3:
        return s[-1], math.inf
    prev = [0.0] * (n + 1)
    cur = s[:]
    estimates = [s[-1]]
    col = 0
    while len(cur) > 1:
        nxt = []
        for i in range(len(cur) - 1):
            diff = cur[i + 1] - cur[i]
            if abs(diff) <= 4 * _EPS * max(abs(cur[i]), abs(cur[i + 1])):
                # column has converged to roundoff; deeper columns are noise
                nxt = None
                break
            nxt.append(prev[i + 1] + 1.0 / diff)
        if nxt is None:
            break
        prev, cur = cur, nxt
        col += 1
        if col % 2 == 0:
            estimates.append(cur[-1])
    if len(estimates) < 3:
        best = estimates[-1]
        err = abs(s[-1] - s[-2]) if len(estimates) == 1 else abs(estimates[-1] - estimates[-2])
        return best, err
    # deeper columns amplify roundoff: keep the estimate whose neighbours agree best
    best, err = estimates[-1], math.inf
    for j in range(2, len(estimates)):
        e = abs(estimates[j] - estimates[j - 1]) + abs(estimates[j - 1] - estimates[j - 2])
        if e < err:
            best, err = estimates[j], e
    return best, err


# Modified Bessel functions -------------------------------------------------

def _trapezoid_k(t: np.ndarray, order: int) -> np.ndarray:
    """K_order(t) = int_0^inf exp(-t cosh u) cosh(order u) du by trapezoid.

    The integrand is analytic in a strip, so the trapezoid sum converges
    geometrically; the strip width is narrowed for large ``t`` to keep
    the discretisation error relative to ``exp(-t)``.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    live = t < 745.0
    if not np.any(live):
        return out
    tl = t[live]
    # strip half-width d with t*(1 - cos d) <= 5
    d = np.where(tl > 2.5, np.arccos(np.clip(1.0 - 5.0 / tl, -1.0, 1.0)), 1.4)
    d = np.minimum(d, 1.4)
    h = float(np.min(2 * np.pi * d / 44.0))
    u_max = float(np.max(np.arccosh(1.0 + 42.0 / tl)))
    u = np.arange(0.0, u_max + h, h)
    w = np.full(u.shape, h)
    w[0] = 0.5 * h
    expo = -np.outer(tl, np.cosh(u) - 1.0)
    kern = np.exp(expo)
    if order:
        kern = kern * np.cosh(order * u)
    out[live] = np.exp(-tl) * (kern @ w)
    return out


def _as_positive(t, name):
    arr = np.asarray(t, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError(f"{name} requires t > 0")
    return arr


def bessel_k0(t):
    """Modified Bessel function of the second kind, order 0, for t > 0."""
    arr = _as_positive(t, "bessel_k0")
    flat = arr.reshape(-1)
    res = np.empty_like(flat)
    # chunk so the (points x nodes) kernel stays small
    for i in range(0, flat.size, 256):
        res[i:i + 256] = _trapezoid_k(flat[i:i + 256], 0)
    res = res.reshape(arr.shape)
    return float(res) if np.ndim(t) == 0 else res


def bessel_k1(t):
    """Modified Bessel function of the second kind, order 1, for t > 0."""
    arr = _as_positive(t, "bessel_k1")
    flat = arr.reshape(-1)
    res = np.empty_like(flat)
    for i in range(0, flat.size, 256):
        res[i:i + 256] = _trapezoid_k(flat[i:i + 256], 1)
    res = res.reshape(arr.shape)
    return float(res) if np.ndim(t) == 0 else res


def _bessel_i_series(t, order):
    t = np.asarray(t, dtype=float)
    q = 0.25 * t * t
    term = (0.5 * t) ** order / math.factorial(order) * np.ones_like(t)
    total = term.copy()
    for k in range(1, 500):
        term = term * q / (k * (k + order))
        total = total + term
        if np.all(np.abs(term) <= _EPS * np.abs(total)):
            break
    return total


def bessel_i0(t):
    """Modified Bessel function of the first kind, order 0 (power series)."""
    res = _bessel_i_series(t, 0)
    return float(res) if np.ndim(t) == 0 else res


def bessel_i1(t):
    """Modified Bessel function of the first kind, order 1 (power series)."""
    res = _bessel_i_series(t, 1)
    return float(res) if np.ndim(t) == 0 else res
