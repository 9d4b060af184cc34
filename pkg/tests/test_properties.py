"""
Invariant checks; runnable on their own with ``pytest tests/test_properties.py``.
"""

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from median_uncertainty.dispersion import cdf, quantile, quartiles, uncertainty_report
from median_uncertainty.hermite import (
    HermiteState,
    batch_variance_products,
    haar_sample,
    hermite_fn,
    state_amplitude,
    state_momentum_amplitude,
    to_wavefunction,
)
from median_uncertainty.momentum import momentum_density, plancherel_check, to_momentum_amplitude
from median_uncertainty.numerics import brent_root, integrate
from median_uncertainty.qubit import QubitState, pauli_distribution, pauli_siqr
from median_uncertainty.states import (
    WaveFunction,
    dilate,
    make_cauchy,
    make_f_dist,
    make_gaussian,
    make_student_t,
    position_density,
    translate,
)

FAST = settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])

DENSITIES = {
    "cauchy": position_density(make_cauchy(0.3, 1.7)),
    "gaussian": position_density(make_gaussian(-0.5, 0.8)),
    "t2": position_density(make_student_t(2)),
    "t3": position_density(make_student_t(3)),
    "f52": position_density(make_f_dist(5, 2)),
}
SYMMETRIC = [make_cauchy(0, 1), make_gaussian(0, 1), make_student_t(2), make_student_t(3)]
CATALOG = SYMMETRIC + [make_f_dist(5, 2)]


@pytest.fixture(scope="module")
def reports():
    return {wf.label: uncertainty_report(wf) for wf in CATALOG}


# quadrature ----------------------------------------------------------------

@FAST
@given(alpha=st.floats(-3, 3), beta=st.floats(-3, 3),
       names=st.tuples(st.sampled_from(sorted(DENSITIES)), st.sampled_from(sorted(DENSITIES))),
       lo=st.floats(-5, 5), width=st.floats(0.1, 10))
def test_quadrature_linearity(alpha, beta, names, lo, width):
    f, g = DENSITIES[names[0]].pdf, DENSITIES[names[1]].pdf
    dom = (lo, lo + width)
    rf, rg = integrate(f, dom), integrate(g, dom)
    rc = integrate(lambda x: alpha * f(x) + beta * g(x), dom)
    bound = 2 * (abs(alpha) * rf.abs_error_estimate + abs(beta) * rg.abs_error_estimate + rc.abs_error_estimate)
    assert abs(rc.value - (alpha * rf.value + beta * rg.value)) <= max(bound, 1e-13)


@FAST
@given(name=st.sampled_from(sorted(DENSITIES)), a=st.floats(-20, 0), b=st.floats(0.05, 3), c=st.floats(3.1, 40))
def test_quadrature_additivity(name, a, b, c):
    f = DENSITIES[name].pdf
    whole = integrate(f, (a, c))
    left, right = integrate(f, (a, b)), integrate(f, (b, c))
    tol = max(whole.abs_error_estimate + left.abs_error_estimate + right.abs_error_estimate, 2e-10)
    assert abs(whole.value - left.value - right.value) <= tol


@FAST
@given(name=st.sampled_from(sorted(DENSITIES)), level=st.floats(0.05, 0.95))
def test_brent_postcondition_on_cdf_equations(name, level):
    d = DENSITIES[name]
    lo, hi = (0.0, 200.0) if name == "f52" else (-200.0, 200.0)
    root = brent_root(lambda x: cdf(d, x) - level, (lo, hi))
    assert abs(cdf(d, root) - level) <= 1e-9


# CDFs and quantiles ----------------------------------------------------------

@FAST
@given(name=st.sampled_from(sorted(DENSITIES)), q1=st.floats(-50, 50), q2=st.floats(-50, 50))
def test_cdf_monotone(name, q1, q2):
    lo, hi = sorted((q1, q2))
    d = DENSITIES[name]
    assert cdf(d, lo) <= cdf(d, hi) + 1e-12


@pytest.mark.parametrize("name", sorted(DENSITIES))
def test_quantile_cdf_round_trip(name):
    d = DENSITIES[name]
    q = quartiles(d)
    for level, value in ((0.25, q.q1), (0.5, q.median), (0.75, q.q3)):
        assert abs(cdf(d, value) - level) <= q.achieved_tol


@pytest.mark.parametrize("wf", SYMMETRIC, ids=lambda w: w.label)
def test_symmetric_quartiles(wf):
    for d in (position_density(wf), momentum_density(wf)):
        q = quartiles(d)
        c = d.symmetry_center
        assert abs((q.q1 - c) + (q.q3 - c)) <= 2 * q.achieved_tol + 1e-12


# transform -----------------------------------------------------------------

@pytest.mark.parametrize("wf", CATALOG, ids=lambda w: w.label)
def test_plancherel_catalog(wf):
    assert plancherel_check(wf) == pytest.approx(1.0, abs=1e-6)


@FAST
@given(degree=st.integers(0, 8), seed=st.integers(0, 2 ** 32))
def test_plancherel_haar(degree, seed):
    wf = to_wavefunction(haar_sample(degree, seed))
    assert plancherel_check(wf) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("wf", [make_student_t(3), make_cauchy(0, 1)], ids=lambda w: w.label)
@pytest.mark.parametrize("s", [0.5, 2.0])
def test_momentum_dilation_covariance(wf, s):
    base = momentum_density(wf, method="numeric").pdf
    scaled = momentum_density(dilate(wf, s), method="numeric").pdf
    for p in (0.07, 0.3, 1.1, 2.5):
        assert scaled(p) == pytest.approx(base(p / s) / s, abs=1e-6)


@pytest.mark.parametrize("n", range(9))
def test_hermite_eigenfunction_law(n):
    wf = WaveFunction(label=f"h{n}", position_amplitude=lambda x: hermite_fn(n, x), symmetric=(n % 2 == 0))
    for x in (-2.0, -1.0, 0.0, 1.0, 2.0):
        assert abs(to_momentum_amplitude(wf, x) - (-1j) ** n * hermite_fn(n, x)) <= 1e-6


@FAST
@given(c=st.lists(st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False), min_size=5, max_size=5)
       .filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_even_coefficients_give_even_densities(c):
    v = np.array(c)
    v[1::2] = 0
    if np.linalg.norm(v) < 1e-3:
        return
    s = HermiteState(v / np.linalg.norm(v))
    x = np.linspace(0.1, 3, 7)
    np.testing.assert_allclose(np.abs(state_amplitude(s, x)), np.abs(state_amplitude(s, -x)), atol=1e-13)
    np.testing.assert_allclose(np.abs(state_momentum_amplitude(s, x)),
                               np.abs(state_momentum_amplitude(s, -x)), atol=1e-13)


# reports -------------------------------------------------------------------

@pytest.mark.parametrize("wf", CATALOG, ids=lambda w: w.label)
@pytest.mark.parametrize("s", [0.5, 2.0])
def test_dilation_invariance_of_product(wf, s, reports):
    r = uncertainty_report(dilate(wf, s))
    assert r.product_over_hbar == pytest.approx(reports[wf.label].product_over_hbar, abs=1e-5)


@pytest.mark.parametrize("wf,shift", [(make_cauchy(0, 1), 7.5), (make_gaussian(0, 1), -3.0),
                                      (make_student_t(3), 2.25)], ids=lambda v: getattr(v, "label", str(v)))
def test_translation_invariance(wf, shift, reports):
    moved = uncertainty_report(translate(wf, shift))
    base = reports[wf.label]
    assert moved.siqr_x == pytest.approx(base.siqr_x, abs=1e-8)
    assert moved.siqr_p == pytest.approx(base.siqr_p, abs=1e-8)


def test_translation_via_parameters(reports):
    for a, b in ((make_cauchy(0, 2), make_cauchy(-40, 2)), (make_gaussian(0, 0.6), make_gaussian(12, 0.6))):
        ra, rb = uncertainty_report(a), uncertainty_report(b)
        assert rb.siqr_x == pytest.approx(ra.siqr_x, abs=1e-8)
        assert rb.siqr_p == pytest.approx(ra.siqr_p, abs=1e-8)


def test_variance_bound_catalog(reports):
    for r in reports.values():
        if r.variance_product_over_hbar is not None:
            assert r.variance_product_over_hbar >= 0.5 - 1e-6


@FAST
@given(degree=st.integers(0, 8), seed=st.integers(0, 2 ** 32))
def test_variance_bound_haar(degree, seed):
    s = haar_sample(degree, seed)
    r = uncertainty_report(to_wavefunction(s))
    assert r.variance_product_over_hbar >= 0.5 - 1e-6
    assert r.variance_product_over_hbar == pytest.approx(batch_variance_products(s.coefficients)[0], abs=1e-8)
    assert r.product_over_hbar > 0


# qubit ---------------------------------------------------------------------

@settings(max_examples=300, deadline=None)
@given(p=st.floats(0, 1), theta=st.floats(0, 2 * math.pi))
def test_qubit_x_spread_rule(p, theta):
    sx = pauli_siqr(pauli_distribution(QubitState(p, theta), "x"))
    assert (sx == 0) == (p > 0.75 or p < 0.25)


@settings(max_examples=300, deadline=None)
@given(p=st.floats(0, 1), theta=st.floats(0, 2 * math.pi), k=st.integers(-3, 3))
def test_qubit_theta_periodicity(p, theta, k):
    a = pauli_siqr(pauli_distribution(QubitState(p, theta), "y"))
    b = pauli_siqr(pauli_distribution(QubitState(p, theta + 2 * math.pi * k), "y"))
    da = pauli_distribution(QubitState(p, theta), "y").prob_plus
    # identical unless the shifted angle rounds across the 3/4 boundary
    assert a == b or abs(max(da, 1 - da) - 0.75) < 1e-12
