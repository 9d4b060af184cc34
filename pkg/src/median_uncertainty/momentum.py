"""
Momentum-space amplitudes and densities.

The transform is

    phi(p) = (2 pi hbar)^(-1/2) * int exp(-i x p / hbar) psi(x) dx.

Slowly decaying amplitudes (psi ~ 1/|x| for the Cauchy state) make this
only conditionally convergent, so the integral is split at the state's
centre, cut into half-period panels between zeros of the trigonometric
factor, and the alternating tail of panel sums is extrapolated with the
Wynn epsilon algorithm. No position-space truncation is applied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .numerics import (
    DEFAULT_ABS_TOL,
    DEFAULT_REL_TOL,
    Interval,
    QuadratureError,
    integrate,
    wynn_epsilon,
)
from .states import Density, WaveFunction

__all__ = [
    "MomentumDensity",
    "fourier_half_line",
    "to_momentum_amplitude",
    "momentum_density",
    "plancherel_check",
    "grid_transform",
]

_GL_HI = np.polynomial.legendre.leggauss(24)
_GL_LO = np.polynomial.legendre.leggauss(12)

# panels between the origin and CORE_WIDTHS * scale are always integrated
CORE_WIDTHS = 12.0
MAX_PANELS = 400_000
MAX_TAIL_PANELS = 2_000
TRANSFORM_TOL = 1e-12
PLANCHEREL_CUTOFF = 1024.0


@dataclass(frozen=True)
class MomentumDensity(Density):
    """Momentum density |phi(p)|^2 together with its provenance."""

    source: str = "numeric_transform"
    hbar: float = 1.0


def _panel_sums(g, kind, k, edges_lo, edges_hi, tol):
    """Integrate g(u)*trig(k u) over many panels at once."""
    mid = 0.5 * (edges_lo + edges_hi)
    half = 0.5 * (edges_hi - edges_lo)
    trig = np.cos if kind == "cos" else np.sin

    def rule(nodes_weights):
        nodes, weights = nodes_weights
        u = mid[:, None] + half[:, None] * nodes[None, :]
        vals = np.asarray(g(u.ravel()), dtype=float).reshape(u.shape) * trig(k * u)
        return (vals @ weights) * half

    hi = rule(_GL_HI)
    lo = rule(_GL_LO)
    bad = ~(np.abs(hi - lo) <= max(0.01 * tol, 1e-15)) | ~np.isfinite(hi)
    for i in np.flatnonzero(bad):
        a, b = float(edges_lo[i]), float(edges_hi[i])
        res = integrate(
            lambda u: np.asarray(g(u), dtype=float) * trig(k * u),
            (a, b), abs_tol=0.1 * tol, rel_tol=1e-13,
        )
        hi[i] = res.value
    return hi


def fourier_half_line(
    g: Callable[[np.ndarray], np.ndarray],
    k: float,
    kind: str = "cos",
    scale: float = 1.0,
    tol: float = TRANSFORM_TOL,
    extent: Optional[float] = None,
) -> float:
    """
    int_0^inf g(u) cos(k u) du  (kind="cos")  or the sine analogue.

    ``g`` must be real and vectorised. ``extent`` (default 12*scale) is the
    part of the half line treated as core; beyond it the panel sums are
    assumed to form an asymptotically alternating series.
    """
    if kind not in ("cos", "sin"):
        raise ValueError("kind must be 'cos' or 'sin'")
    if k < 0:
        sign = -1.0 if kind == "sin" else 1.0
        return sign * fourier_half_line(g, -k, kind, scale, tol, extent)
    if k == 0:
        if kind == "sin":
            return 0.0
        return integrate(g, (0.0, math.inf), abs_tol=tol, rel_tol=1e-13).value
    if extent is None:
        extent = CORE_WIDTHS * scale
    width = math.pi / k
    first = 0.5 * width if kind == "cos" else width
    n_core = 1 + max(0, math.ceil((extent - first) / width))
    if n_core > MAX_PANELS:
        raise QuadratureError(
            f"|k|={k:g} needs {n_core} panels over the core; exceeds panel budget"
        )

    def edges(j0, j1):
        j = np.arange(j0, j1, dtype=float)
        lo = np.where(j == 0, 0.0, first + (j - 1) * width)
        hi = first + j * width
        return lo, hi

    core = 0.0
    for j0 in range(0, n_core, 20_000):
        j1 = min(n_core, j0 + 20_000)
        core += math.fsum(_panel_sums(g, kind, k, *edges(j0, j1), tol))

    partial = [core]
    j = n_core
    history = []
    block = 8
    while j - n_core < MAX_TAIL_PANELS:
        terms = _panel_sums(g, kind, k, *edges(j, j + block), tol)
        for t in terms:
            partial.append(partial[-1] + t)
        j += block
        if np.all(np.abs(terms) <= 1e-3 * tol):
            return partial[-1]
        estimate, _ = wynn_epsilon(partial[-28:])
        history.append(estimate)
        target = max(tol, 1e-12 * abs(estimate))
        if len(history) >= 3 and max(abs(history[-1] - history[-2]), abs(history[-1] - history[-3])) <= target:
            return estimate
        block = 16
    previous = history[-1] if history else math.nan
    raise QuadratureError(
        f"Fourier tail did not converge for k={k:g}", value=previous
    )


def _real_parts(f):
    """Split a possibly complex vectorised function into real callables."""
    def re(u):
        return np.real(f(u))

    def im(u):
        return np.imag(f(u))
    return re, im


def to_momentum_amplitude(wf: WaveFunction, p: float, hbar: float = 1.0, tol: float = TRANSFORM_TOL) -> complex:
    """
    phi(p) by panelled oscillatory quadrature.

    The integral is split at ``wf.center = c``:
    int psi e^{-ikx} dx = e^{-ikc} [ int_0^inf (g+ + g-) cos(ku) du
                                     - i int_0^inf (g+ - g-) sin(ku) du ]
    with g+(u) = psi(c+u), g-(u) = psi(c-u).
    """
    if not hbar > 0:
        raise ValueError("hbar must be positive")
    k = float(p) / hbar
    c = wf.center
    psi = wf.position_amplitude
    has_right = wf.support.hi > c
    has_left = wf.support.lo < c

    def g_plus(u):
        return psi(c + u) if has_right else np.zeros_like(u)

    def g_minus(u):
        return psi(c - u) if has_left else np.zeros_like(u)

    def even(u):
        return g_plus(u) + g_minus(u)

    def odd(u):
        return g_plus(u) - g_minus(u)

    # finite supports: no tail to extrapolate
    extent = None
    if math.isfinite(wf.support.hi - c) and math.isfinite(c - wf.support.lo):
        extent = max(wf.support.hi - c, c - wf.support.lo)

    if wf.real:
        cos_part = fourier_half_line(even, k, "cos", wf.scale, tol, extent)
        sin_part = 0.0 if wf.symmetric else fourier_half_line(odd, k, "sin", wf.scale, tol, extent)
        total = complex(cos_part, -sin_part)
    else:
        (even_re, even_im), (odd_re, odd_im) = _real_parts(even), _real_parts(odd)
        cos_c = complex(
            fourier_half_line(even_re, k, "cos", wf.scale, tol, extent),
            fourier_half_line(even_im, k, "cos", wf.scale, tol, extent),
        )
        sin_c = complex(
            fourier_half_line(odd_re, k, "sin", wf.scale, tol, extent),
            fourier_half_line(odd_im, k, "sin", wf.scale, tol, extent),
        )
        total = cos_c - 1j * sin_c
    return complex(np.exp(-1j * k * c) * total / math.sqrt(2 * math.pi * hbar))


def _numeric_pdf(wf: WaveFunction, hbar: float, tol: float):
    cache: dict[float, float] = {}

    def pdf(p):
        arr = np.asarray(p, dtype=float)
        out = np.empty(arr.shape)
        flat = out.reshape(-1)
        for i, pv in enumerate(arr.reshape(-1)):
            key = float(pv)
            if wf.real:
                # |phi(-p)| = |phi(p)| for real psi
                key = abs(key)
            val = cache.get(key)
            if val is None:
                val = abs(to_momentum_amplitude(wf, key, hbar, tol)) ** 2
                if len(cache) < 200_000:
                    cache[key] = val
            flat[i] = val
        return out if out.ndim else float(out)

    return pdf


def momentum_density(
    wf: WaveFunction, hbar: float = 1.0, method: str = "auto", tol: float = TRANSFORM_TOL
) -> MomentumDensity:
    """
    |phi(p)|^2 as a density.

    ``method="auto"`` uses the state's closed form when it has one;
    ``"numeric"`` forces the Fourier engine; ``"closed_form"`` insists on
    the closed form.
    """
    if not hbar > 0:
        raise ValueError("hbar must be positive")
    if method not in ("auto", "numeric", "closed_form"):
        raise ValueError(f"unknown method {method!r}")
    closed = wf.closed_form_momentum_density
    if method == "closed_form" and closed is None:
        raise ValueError(f"{wf.label} has no closed-form momentum density")
    use_closed = closed is not None and method != "numeric"
    if use_closed:
        pdf = lambda p: closed(p, hbar)  # noqa: E731
        cdf = (lambda p: wf.momentum_cdf(p, hbar)) if wf.momentum_cdf is not None else None
        source = "closed_form"
    else:
        pdf = _numeric_pdf(wf, hbar, tol)
        cdf = None
        source = "numeric_transform"
    return MomentumDensity(
        pdf=pdf,
        domain=Interval.real_line(),
        symmetry_center=0.0 if wf.real else None,
        scale=hbar / wf.scale,
        location=0.0,
        cdf=cdf,
        label=f"|phi|^2 of {wf.label}",
        source=source,
        hbar=hbar,
    )


def plancherel_check(
    wf: WaveFunction,
    hbar: float = 1.0,
    method: str = "auto",
    abs_tol: float = DEFAULT_ABS_TOL,
    rel_tol: float = DEFAULT_REL_TOL,
) -> float:
    """
    Total momentum probability; should be 1 for a normalised state.

    Numerically transformed densities are integrated up to
    ``PLANCHEREL_CUTOFF * hbar / scale`` and the remainder is added from the
    local power law ``|phi|^2 ~ A |p|^-alpha`` fitted over the last two
    doublings. Transforms far beyond that cutoff need an impractical number
    of panels. When the fit is inconsistent the full line is integrated
    instead.
    """
    d = momentum_density(wf, hbar, method)
    halves = [(0.0, 1.0), (0.0, -1.0)] if d.symmetry_center is None else [(0.0, 1.0)]
    weight = 1.0 if d.symmetry_center is None else 2.0
    if d.source == "numeric_transform":
        cut = PLANCHEREL_CUTOFF * hbar / wf.scale
        total = 0.0
        for start, sign in halves:
            tail = _power_tail(lambda p: d.pdf(sign * p), cut)
            if tail is None:
                break
            body = integrate(lambda p: d.pdf(sign * p), (start, cut), abs_tol, rel_tol)
            total += body.value + tail
        else:
            return weight * total
    if d.symmetry_center is not None:
        half = integrate(d.pdf, (0.0, math.inf), abs_tol, rel_tol)
        return 2.0 * half.value
    return integrate(d.pdf, Interval.real_line(), abs_tol, rel_tol, breakpoints=[0.0]).value


def _power_tail(f, cut: float) -> Optional[float]:
    """int_cut^inf of f assuming f ~ A p^-alpha, or None if that is not credible."""
    f4, f2, f1 = (float(f(cut / m)) for m in (4.0, 2.0, 1.0))
    if f1 == 0.0:
        return 0.0 if f2 == 0.0 else None
    if min(f4, f2) <= 0.0:
        return None
    a_lo, a_hi = math.log2(f4 / f2), math.log2(f2 / f1)
    if a_hi <= 1.5 or abs(a_hi - a_lo) > 0.1:
        return None
    return f1 * cut / (a_hi - 1.0)


def grid_transform(psi_values: np.ndarray, x: np.ndarray, p: np.ndarray, hbar: float = 1.0) -> np.ndarray:
    """
    Brute-force discrete transform on a uniform grid.

    O(len(x) * len(p)) Riemann sum; kept as an independent check on the
    panelled engine for rapidly decaying states only (it truncates tails).
    """
    x = np.asarray(x, dtype=float)
    dx = x[1] - x[0]
    kernel = np.exp(-1j * np.outer(np.asarray(p, dtype=float), x) / hbar)
    return kernel @ np.asarray(psi_values) * dx / math.sqrt(2 * math.pi * hbar)
