"""
Hermite-function basis, Haar-random superpositions and their quartiles.

Oscillator units with mass * frequency = 1 give the length scale
l = sqrt(hbar). Position amplitudes are sum_n c_n h_n(x / l) / sqrt(l) and
momentum amplitudes sum_n (-i)^n c_n h_n(p l / hbar) sqrt(l / hbar), so
both densities, and their CDFs, are available in closed form.

CDFs use the partial overlaps F_mn(q) = int_{-inf}^q h_m h_n:

    off-diagonal  F_mn = (h_m h_n' - h_n h_m') / (2 (m - n))
    diagonal      F_00 = (1 + erf q) / 2, then a recurrence in n

with h_n' = sqrt(n/2) h_{n-1} - sqrt((n+1)/2) h_{n+1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .numerics import Interval
from .states import MomentFlags, WaveFunction

__all__ = [
    "MAX_ORDER",
    "HermiteState",
    "hermite_fn",
    "hermite_functions",
    "haar_sample",
    "sample_seed",
    "state_amplitude",
    "state_momentum_amplitude",
    "partial_overlaps",
    "state_cdf",
    "to_wavefunction",
    "batch_quartiles",
    "batch_siqr_products",
    "batch_variance_products",
]

MAX_ORDER = 64
_PI_QUARTER = math.pi ** -0.25
_erf = np.frompyfunc(math.erf, 1, 1)


@dataclass(frozen=True, eq=False)
class HermiteState:
    """Normalised coefficient vector c_0..c_d over the Hermite functions."""

    coefficients: np.ndarray
    hbar: float = 1.0
    seed_tag: Optional[int] = None

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex).ravel()
        if c.size == 0 or c.size - 1 > MAX_ORDER:
            raise ValueError(f"degree must lie in [0, {MAX_ORDER}]")
        if abs(np.vdot(c, c).real - 1.0) > 1e-12:
            raise ValueError("coefficients must be normalised")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    @property
    def length(self) -> float:
        return math.sqrt(self.hbar)

    @property
    def momentum_coefficients(self) -> np.ndarray:
        return (-1j) ** np.arange(self.coefficients.size) * self.coefficients

    def padded(self, degree: int) -> "HermiteState":
        """The same state viewed in a larger subspace."""
        if degree < self.degree:
            raise ValueError("cannot pad to a smaller degree")
        c = np.zeros(degree + 1, dtype=complex)
        c[: self.coefficients.size] = self.coefficients
        return HermiteState(c, self.hbar, self.seed_tag)

    def to_dict(self) -> dict:
        """{degree, seed_tag, coefficients} with interleaved re/im parts."""
        inter = np.empty(2 * self.coefficients.size)
        inter[0::2] = self.coefficients.real
        inter[1::2] = self.coefficients.imag
        return {"degree": self.degree, "seed_tag": self.seed_tag, "coefficients": inter.tolist()}

    @classmethod
    def from_dict(cls, data: dict, hbar: float = 1.0) -> "HermiteState":
        inter = np.asarray(data["coefficients"], dtype=float)
        return cls(inter[0::2] + 1j * inter[1::2], hbar, data.get("seed_tag"))


def hermite_functions(nmax: int, x) -> np.ndarray:
    """
    h_0..h_nmax at x, shape (nmax + 1, *x.shape).

    Normalised three-term recurrence
    h_{k+1} = sqrt(2/(k+1)) x h_k - sqrt(k/(k+1)) h_{k-1}.
    """
    if not 0 <= nmax <= MAX_ORDER + 2:
        raise ValueError(f"order must lie in [0, {MAX_ORDER}]")
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = _PI_QUARTER * np.exp(-0.5 * x * x)
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for k in range(1, nmax):
        out[k + 1] = math.sqrt(2.0 / (k + 1)) * x * out[k] - math.sqrt(k / (k + 1)) * out[k - 1]
    return out


def hermite_fn(n: int, x):
    """n-th orthonormal Hermite function, n <= 64."""
    if not (isinstance(n, (int, np.integer)) and 0 <= n <= MAX_ORDER):
        raise ValueError(f"order must be an integer in [0, {MAX_ORDER}], got {n!r}")
    h = hermite_functions(int(n), x)[n]
    return h if h.ndim else float(h)


def sample_seed(master_seed: int, degree: int, index: int) -> int:
    """Counter-based per-sample seed; independent of evaluation order."""
    ss = np.random.SeedSequence([int(master_seed), int(degree), int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


def haar_sample(degree: int, rng_seed: int, hbar: float = 1.0) -> HermiteState:
    """
    Haar-uniform state in span(h_0..h_degree): 2(d+1) standard normals
    form d+1 complex coefficients, normalised.
    """
    if degree < 0 or degree > MAX_ORDER:
        raise ValueError(f"degree must lie in [0, {MAX_ORDER}]")
    z = np.random.default_rng(rng_seed).standard_normal(2 * (degree + 1))
    c = z[: degree + 1] + 1j * z[degree + 1:]
    c /= np.sqrt(np.vdot(c, c).real)
    return HermiteState(c, hbar, int(rng_seed))


def state_amplitude(s: HermiteState, x):
    l = s.length
    h = hermite_functions(s.degree, np.asarray(x, dtype=float) / l)
    out = np.tensordot(s.coefficients, h, axes=1) / math.sqrt(l)
    return out if out.ndim else complex(out)


def state_momentum_amplitude(s: HermiteState, p):
    l = s.length
    h = hermite_functions(s.degree, np.asarray(p, dtype=float) * l / s.hbar)
    out = np.tensordot(s.momentum_coefficients, h, axes=1) * math.sqrt(l / s.hbar)
    return out if out.ndim else complex(out)


def _derivatives(h: np.ndarray) -> np.ndarray:
    """h_n' for n = 0..len(h)-2 from h_0..h_{len(h)-1}."""
    n = np.arange(h.shape[0] - 1, dtype=float).reshape((-1,) + (1,) * (h.ndim - 1))
    d = -np.sqrt((n + 1) / 2) * h[1:]
    d[1:] += np.sqrt(n[1:] / 2) * h[:-2]
    return d


def partial_overlaps(degree: int, q) -> np.ndarray:
    """
    F_mn(q) = int_{-inf}^q h_m h_n for m, n <= degree.

    Shape (*q.shape, degree + 1, degree + 1).
    """
    q = np.asarray(q, dtype=float)
    D = degree + 1
    # off-diagonal terms are needed one order beyond the degree for the diagonal recurrence
    h = hermite_functions(D + 1, q)          # h_0..h_{D+1}
    dh = _derivatives(h)                     # h'_0..h'_D
    hv = np.moveaxis(h[: D + 1], 0, -1)      # (..., D+1)
    dv = np.moveaxis(dh, 0, -1)
    m = np.arange(D + 1)
    diff = (m[:, None] - m[None, :]).astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        F = (hv[..., :, None] * dv[..., None, :] - hv[..., None, :] * dv[..., :, None]) / (2 * diff)
    F[..., m, m] = 0.0
    F[..., 0, 0] = 0.5 * (1.0 + np.asarray(_erf(q), dtype=float))
    for n in range(1, D):
        corr = hv[..., n - 1] * hv[..., n] + math.sqrt((n + 1) / 2) * F[..., n - 1, n + 1]
        if n >= 2:
            corr -= math.sqrt((n - 1) / 2) * F[..., n - 2, n]
        F[..., n, n] = F[..., n - 1, n - 1] - corr / math.sqrt(n / 2)
    return F[..., :D, :D]


def _quadratic_form(F: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Re(c^H F c) with F real symmetric, batched over leading axes."""
    cr, ci = c.real, c.imag
    return np.einsum("...m,...mn,...n->...", cr, F, cr) + np.einsum("...m,...mn,...n->...", ci, F, ci)


def state_cdf(s: HermiteState, q, axis: str = "x"):
    """P(X <= q) (axis "x") or P(P <= q) (axis "p") in closed form."""
    l = s.length
    if axis == "x":
        u, c = np.asarray(q, dtype=float) / l, s.coefficients
    elif axis == "p":
        u, c = np.asarray(q, dtype=float) * l / s.hbar, s.momentum_coefficients
    else:
        raise ValueError("axis must be 'x' or 'p'")
    out = np.clip(_quadratic_form(partial_overlaps(s.degree, u), c), 0.0, 1.0)
    return out if out.ndim else float(out)


def to_wavefunction(s: HermiteState) -> WaveFunction:
    """WaveFunction view with closed-form momentum density and both CDFs."""
    l = s.length
    cd = s.coefficients
    # psi'(x) = sum c_n h_n'(x/l) / l^(3/2)
    dcoef = np.zeros(s.degree + 2, dtype=complex)
    n = np.arange(s.degree + 1)
    dcoef[1:] -= np.sqrt((n + 1) / 2) * cd
    dcoef[:-2] += np.sqrt(n[1:] / 2) * cd[1:]

    def dpsi(x):
        h = hermite_functions(s.degree + 1, np.asarray(x, dtype=float) / l)
        return np.tensordot(dcoef, h, axes=1) / l ** 1.5

    def momentum_pdf(p, hbar=1.0):
        if hbar != s.hbar:
            raise ValueError(f"state was built for hbar={s.hbar}, got {hbar}")
        return np.abs(state_momentum_amplitude(s, p)) ** 2

    def momentum_cdf(p, hbar=1.0):
        if hbar != s.hbar:
            raise ValueError(f"state was built for hbar={s.hbar}, got {hbar}")
        return state_cdf(s, p, "p")

    real = bool(np.all(cd.imag == 0))
    return WaveFunction(
        label=f"hermite(degree={s.degree}, seed_tag={s.seed_tag})",
        position_amplitude=lambda x: state_amplitude(s, x),
        params={"degree": s.degree},
        support=Interval.real_line(),
        center=0.0,
        location=0.0,
        scale=l,
        symmetric=False,
        real=real,
        moment_flags=MomentFlags(True, True),
        momentum_flags=MomentFlags(True, True),
        closed_form_momentum_density=momentum_pdf,
        amplitude_derivative=dpsi,
        position_cdf=lambda x: state_cdf(s, x, "x"),
        momentum_cdf=momentum_cdf,
    )


# Batched evaluation --------------------------------------------------------

def _batch_cdf_pdf(C: np.ndarray, u: np.ndarray):
    D = C.shape[1] - 1
    F = partial_overlaps(D, u)
    cdf = _quadratic_form(F, C)
    h = hermite_functions(D, u)                           # (D+1, N)
    amp = np.einsum("nk,kn->n", C, h)
    return cdf, np.abs(amp) ** 2


def batch_quartiles(C: np.ndarray, levels=(0.25, 0.75), x_tol: float = 1e-13, max_iter: int = 200) -> np.ndarray:
    """
    Quantiles of |sum_n C[i, n] h_n(u)|^2 for many coefficient rows at once.

    Safeguarded Newton inside a shrinking bracket (bisection whenever the
    Newton step leaves it). Returns shape (len(levels), N), NaN where a
    row failed to converge.
    """
    C = np.atleast_2d(np.asarray(C, dtype=complex))
    N, D = C.shape[0], C.shape[1] - 1
    edge = math.sqrt(2 * D + 1) + 10.0
    out = np.empty((len(levels), N))
    for j, level in enumerate(levels):
        lo = np.full(N, -edge)
        hi = np.full(N, edge)
        x = np.zeros(N)
        active = np.arange(N)
        done = np.zeros(N, dtype=bool)
        w1 = np.full(N, 2 * edge)         # bracket widths one and two steps back
        w2 = np.full(N, 2 * edge)
        for _ in range(max_iter):
            if active.size == 0:
                break
            xa = x[active]
            cdf, pdf = _batch_cdf_pdf(C[active], xa)
            g = cdf - level
            lo[active] = np.where(g < 0, xa, lo[active])
            hi[active] = np.where(g >= 0, xa, hi[active])
            with np.errstate(divide="ignore", invalid="ignore"):
                step = g / pdf
            xn = np.where(g == 0, xa, xa - step)
            la, ha = lo[active], hi[active]
            newton_conv = np.abs(xn - xa) <= x_tol * (1 + np.abs(xa))
            # bisect when Newton leaves the bracket or two steps fail to halve it
            stalled = (ha - la) > 0.5 * w2[active]
            bad = ~newton_conv & (~np.isfinite(xn) | (xn <= la) | (xn >= ha) | stalled)
            xn = np.where(bad, 0.5 * (la + ha), xn)
            w2[active] = w1[active]
            w1[active] = ha - la
            conv = newton_conv | (ha - la <= x_tol)
            x[active] = xn
            done[active[conv]] = True
            active = active[~conv]
        res = x.copy()
        res[~done] = np.nan
        out[j] = res
    return out


def batch_siqr_products(C: np.ndarray) -> np.ndarray:
    """SIQR_x * SIQR_p / hbar for each coefficient row (independent of hbar)."""
    C = np.atleast_2d(np.asarray(C, dtype=complex))
    phase = (-1j) ** np.arange(C.shape[1])
    qx = batch_quartiles(C)
    qp = batch_quartiles(C * phase)
    return 0.25 * (qx[1] - qx[0]) * (qp[1] - qp[0])


def batch_variance_products(C: np.ndarray) -> np.ndarray:
    """
    Delta x * Delta p / hbar from the ladder-operator matrix elements.

    In oscillator units x = (a + a^dag)/sqrt(2), p = i (a^dag - a)/sqrt(2).
    """
    C = np.atleast_2d(np.asarray(C, dtype=complex))
    N, D1 = C.shape
    c = np.zeros((N, D1 + 2), dtype=complex)
    c[:, :D1] = C
    k = np.sqrt(np.arange(1, D1 + 2))                    # <n|a|n+1> = sqrt(n+1)
    a_c = c[:, 1:] * k                                   # (a c)_n = sqrt(n+1) c_{n+1}
    a_c = np.concatenate([a_c, np.zeros((N, 1))], axis=1)
    ad_c = np.zeros_like(c)
    ad_c[:, 1:] = c[:, :-1] * k                          # (a^dag c)_{n+1} = sqrt(n+1) c_n
    xc = (a_c + ad_c) / math.sqrt(2)
    pc = 1j * (ad_c - a_c) / math.sqrt(2)
    mean_x = np.einsum("ij,ij->i", c.conj(), xc).real
    mean_p = np.einsum("ij,ij->i", c.conj(), pc).real
    x2 = np.einsum("ij,ij->i", xc.conj(), xc).real
    p2 = np.einsum("ij,ij->i", pc.conj(), pc).real
    return np.sqrt((x2 - mean_x ** 2) * (p2 - mean_p ** 2))
