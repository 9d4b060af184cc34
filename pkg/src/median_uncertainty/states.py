"""
Wave functions and the catalog of states whose position densities are
Cauchy-Lorentz, Gaussian, Student's t and F distributions.

Each catalog amplitude is the real, nonnegative square root of the
density; only ``|psi|^2`` enters the quartiles.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from .numerics import DEFAULT_ABS_TOL, DEFAULT_REL_TOL, Interval, bessel_k0, integrate

__all__ = [
    "ParameterError",
    "MomentFlags",
    "Density",
    "WaveFunction",
    "make_cauchy",
    "make_gaussian",
    "make_student_t",
    "make_f_dist",
    "make_state",
    "CATALOG",
    "position_density",
    "norm_squared",
    "dilate",
    "translate",
    "numeric_only",
]

REAL_LINE = Interval.real_line()


class ParameterError(ValueError):
    """Invalid distribution parameter."""


@dataclass(frozen=True)
class MomentFlags:
    """Analytic knowledge about moment existence (None means unknown)."""

    mean: Optional[bool] = None
    variance: Optional[bool] = None


@dataclass(frozen=True)
class Density:
    """
    One-dimensional probability density.

    ``location`` is where quantile brackets start when there is no
    symmetry centre; ``scale`` sets the initial bracket step and the unit
    of the divergence probe. ``cdf`` is an optional closed form.
    """

    pdf: Callable[[np.ndarray], np.ndarray]
    domain: Interval = REAL_LINE
    symmetry_center: Optional[float] = None
    scale: float = 1.0
    location: float = 0.0
    cdf: Optional[Callable[[np.ndarray], np.ndarray]] = None
    label: str = ""


@dataclass(frozen=True)
class WaveFunction:
    """
    Normalised position-space amplitude plus analytic side information.

    ``closed_form_momentum_density`` and ``momentum_cdf`` take ``(p, hbar)``.
    ``center`` is where the Fourier integral is split (the symmetry centre
    for symmetric states, the support edge for one-sided ones).
    """

    label: str
    position_amplitude: Callable[[np.ndarray], np.ndarray]
    params: Mapping[str, float] = field(default_factory=dict)
    support: Interval = REAL_LINE
    center: float = 0.0
    location: float = 0.0
    scale: float = 1.0
    symmetric: bool = False
    real: bool = True
    moment_flags: MomentFlags = MomentFlags()
    momentum_flags: MomentFlags = MomentFlags()
    closed_form_momentum_density: Optional[Callable] = None
    amplitude_derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None
    position_cdf: Optional[Callable[[np.ndarray], np.ndarray]] = None
    momentum_cdf: Optional[Callable] = None

    def __call__(self, x):
        return self.position_amplitude(x)


def _positive(name, value):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ParameterError(f"{name} must be a real number, got {value!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise ParameterError(f"{name} must be a positive finite number, got {value!r}")
    return v


def _finite(name, value):
    v = float(value)
    if not math.isfinite(v):
        raise ParameterError(f"{name} must be finite, got {value!r}")
    return v


def _positive_int(name, value):
    if isinstance(value, bool):
        raise ParameterError(f"{name} must be a positive integer")
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, (int, np.integer)) or value < 1:
        raise ParameterError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def make_cauchy(x0: float = 0.0, gamma: float = 1.0) -> WaveFunction:
    """Square root of the Cauchy-Lorentz density with location x0, half-width gamma."""
    x0 = _finite("x0", x0)
    gamma = _positive("gamma", gamma)
    amp0 = math.sqrt(gamma / math.pi)

    def psi(x):
        d = np.asarray(x, dtype=float) - x0
        return amp0 / np.sqrt(d * d + gamma * gamma)

    def dpsi(x):
        d = np.asarray(x, dtype=float) - x0
        return -amp0 * d / (d * d + gamma * gamma) ** 1.5

    def momentum_pdf(p, hbar=1.0):
        t = gamma * np.abs(np.asarray(p, dtype=float)) / hbar
        out = np.full(t.shape, np.inf)
        pos = t > 0
        out[pos] = 2 * gamma / (math.pi ** 2 * hbar) * bessel_k0(t[pos]) ** 2
        return out if out.ndim else float(out)

    return WaveFunction(
        label=f"cauchy(x0={x0:g}, gamma={gamma:g})",
        position_amplitude=psi,
        params={"x0": x0, "gamma": gamma},
        center=x0,
        location=x0,
        scale=gamma,
        symmetric=True,
        moment_flags=MomentFlags(False, False),
        momentum_flags=MomentFlags(True, True),
        closed_form_momentum_density=momentum_pdf,
        amplitude_derivative=dpsi,
    )


def make_gaussian(mu: float = 0.0, sigma: float = 1.0) -> WaveFunction:
    """Square root of the normal density N(mu, sigma^2)."""
    mu = _finite("mu", mu)
    sigma = _positive("sigma", sigma)
    amp0 = (2 * math.pi * sigma * sigma) ** -0.25

    def psi(x):
        d = np.asarray(x, dtype=float) - mu
        return amp0 * np.exp(-d * d / (4 * sigma * sigma))

    def dpsi(x):
        d = np.asarray(x, dtype=float) - mu
        return -d / (2 * sigma * sigma) * psi(x)

    def momentum_pdf(p, hbar=1.0):
        s = hbar / (2 * sigma)
        p = np.asarray(p, dtype=float)
        out = np.exp(-0.5 * (p / s) ** 2) / (math.sqrt(2 * math.pi) * s)
        return out if out.ndim else float(out)

    return WaveFunction(
        label=f"gaussian(mu={mu:g}, sigma={sigma:g})",
        position_amplitude=psi,
        params={"mu": mu, "sigma": sigma},
        center=mu,
        location=mu,
        scale=sigma,
        symmetric=True,
        moment_flags=MomentFlags(True, True),
        momentum_flags=MomentFlags(True, True),
        closed_form_momentum_density=momentum_pdf,
        amplitude_derivative=dpsi,
    )


def make_student_t(n: int = 2) -> WaveFunction:
    """
    Square root of Student's t density with ``n`` degrees of freedom.

    No momentum closed form is attached, so momentum quantities go
    through the numerical Fourier transform.
    """
    n = _positive_int("n", n)
    log_c = math.lgamma((n + 1) / 2) - math.lgamma(n / 2) - 0.5 * math.log(n * math.pi)
    amp0 = math.exp(0.5 * log_c)
    power = (n + 1) / 4

    def psi(x):
        x = np.asarray(x, dtype=float)
        return amp0 * (1 + x * x / n) ** -power

    def dpsi(x):
        x = np.asarray(x, dtype=float)
        return -amp0 * power * (2 * x / n) * (1 + x * x / n) ** (-power - 1)

    return WaveFunction(
        label=f"student-t(n={n})",
        position_amplitude=psi,
        params={"n": n},
        center=0.0,
        location=0.0,
        scale=1.0,
        symmetric=True,
        moment_flags=MomentFlags(n >= 2, n >= 3),
        # smooth amplitude, analytic in a strip: momentum tails are exponential
        momentum_flags=MomentFlags(True, True),
        amplitude_derivative=dpsi,
    )


def make_f_dist(d1: int = 5, d2: int = 2) -> WaveFunction:
    """
    Square root of the Fisher-Snedecor F(d1, d2) density on (0, inf).

    Near the origin psi ~ x**(d1/4 - 1/2), so the momentum density decays
    like |p|**-(1 + d1/2): the momentum mean exists iff d1 > 2 and the
    momentum variance iff d1 > 4.
    """
    d1 = _positive_int("d1", d1)
    d2 = _positive_int("d2", d2)
    log_k = (
        0.5 * d1 * math.log(d1) + 0.5 * d2 * math.log(d2)
        - (math.lgamma(d1 / 2) + math.lgamma(d2 / 2) - math.lgamma((d1 + d2) / 2))
    )
    a = d1 / 2 - 1
    b = (d1 + d2) / 2

    def log_f(x):
        return log_k + a * np.log(x) - b * np.log(d1 * x + d2)

    def psi(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        pos = x > 0
        out[pos] = np.exp(0.5 * log_f(x[pos]))
        return out if out.ndim else float(out)

    def dpsi(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        pos = x > 0
        xp = x[pos]
        dlog = a / xp - b * d1 / (d1 * xp + d2)
        out[pos] = 0.5 * dlog * np.exp(0.5 * log_f(xp))
        return out if out.ndim else float(out)

    mode = (d1 - 2) / d1 * d2 / (d2 + 2) if d1 > 2 else 0.5
    return WaveFunction(
        label=f"f(d1={d1}, d2={d2})",
        position_amplitude=psi,
        params={"d1": d1, "d2": d2},
        support=Interval(0.0, math.inf),
        center=0.0,
        location=mode,
        scale=1.0,
        symmetric=False,
        moment_flags=MomentFlags(d2 > 2, d2 > 4),
        momentum_flags=MomentFlags(d1 > 2, d1 > 4),
        amplitude_derivative=dpsi,
    )


CATALOG = {
    "cauchy": make_cauchy,
    "gaussian": make_gaussian,
    "student-t": make_student_t,
    "f": make_f_dist,
}


def make_state(name: str, **params) -> WaveFunction:
    """Look up a catalog state by name."""
    try:
        factory = CATALOG[name]
    except KeyError:
        raise ParameterError(f"unknown distribution {name!r}; choose from {sorted(CATALOG)}") from None
    return factory(**params)


def position_density(wf: WaveFunction) -> Density:
    amp = wf.position_amplitude

    def pdf(x):
        return np.abs(amp(x)) ** 2

    return Density(
        pdf=pdf,
        domain=wf.support,
        symmetry_center=wf.center if wf.symmetric else None,
        scale=wf.scale,
        location=wf.location,
        cdf=wf.position_cdf,
        label=f"|psi|^2 of {wf.label}",
    )


def norm_squared(wf: WaveFunction, abs_tol=DEFAULT_ABS_TOL, rel_tol=DEFAULT_REL_TOL) -> float:
    """Integral of |psi|^2 over the support."""
    d = position_density(wf)
    bps = [wf.center] if wf.support.lo < wf.center < wf.support.hi else []
    return integrate(d.pdf, wf.support, abs_tol, rel_tol, breakpoints=bps).value


def _scaled_interval(iv: Interval, s: float, shift: float = 0.0) -> Interval:
    return Interval(iv.lo / s + shift, iv.hi / s + shift)


def dilate(wf: WaveFunction, s: float) -> WaveFunction:
    """Return psi_s(x) = sqrt(s) * psi(s x); the momentum density scales as pdf(p/s)/s."""
    s = _positive("s", s)
    amp = wf.position_amplitude
    rs = math.sqrt(s)

    def psi(x):
        return rs * amp(s * np.asarray(x, dtype=float))

    changes = dict(
        label=f"{wf.label} dilated by {s:g}",
        position_amplitude=psi,
        params={**wf.params, "dilation": s},
        support=_scaled_interval(wf.support, s),
        center=wf.center / s,
        location=wf.location / s,
        scale=wf.scale / s,
        amplitude_derivative=None,
        closed_form_momentum_density=None,
        position_cdf=None,
        momentum_cdf=None,
    )
    if wf.amplitude_derivative is not None:
        dpsi0 = wf.amplitude_derivative
        changes["amplitude_derivative"] = lambda x: s * rs * dpsi0(s * np.asarray(x, dtype=float))
    if wf.closed_form_momentum_density is not None:
        mp = wf.closed_form_momentum_density
        changes["closed_form_momentum_density"] = lambda p, hbar=1.0: mp(np.asarray(p, dtype=float) / s, hbar) / s
    if wf.position_cdf is not None:
        pc = wf.position_cdf
        changes["position_cdf"] = lambda x: pc(s * np.asarray(x, dtype=float))
    if wf.momentum_cdf is not None:
        mc = wf.momentum_cdf
        changes["momentum_cdf"] = lambda p, hbar=1.0: mc(np.asarray(p, dtype=float) / s, hbar)
    return dataclasses.replace(wf, **changes)


def translate(wf: WaveFunction, a: float) -> WaveFunction:
    """Return psi(x - a). Momentum densities are unchanged."""
    a = _finite("a", a)
    amp = wf.position_amplitude
    changes = dict(
        label=f"{wf.label} shifted by {a:g}",
        position_amplitude=lambda x: amp(np.asarray(x, dtype=float) - a),
        params={**wf.params, "shift": a},
        support=_scaled_interval(wf.support, 1.0, a),
        center=wf.center + a,
        location=wf.location + a,
    )
    if wf.amplitude_derivative is not None:
        dpsi0 = wf.amplitude_derivative
        changes["amplitude_derivative"] = lambda x: dpsi0(np.asarray(x, dtype=float) - a)
    if wf.position_cdf is not None:
        pc = wf.position_cdf
        changes["position_cdf"] = lambda x: pc(np.asarray(x, dtype=float) - a)
    return dataclasses.replace(wf, **changes)


def numeric_only(wf: WaveFunction) -> WaveFunction:
    """Drop the momentum closed forms so the Fourier engine is exercised."""
    return dataclasses.replace(wf, closed_form_momentum_density=None, momentum_cdf=None)
