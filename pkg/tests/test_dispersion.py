import math

import numpy as np
import pytest
from scipy import stats

from median_uncertainty.dispersion import (
    CumulativeDistribution,
    DispersionError,
    InconclusiveMomentError,
    MomentResult,
    cdf,
    discrete_quantile,
    mean_variance,
    probe_moment,
    quantile,
    quartiles,
    siqr,
    uncertainty_report,
)
from median_uncertainty.momentum import momentum_density
from median_uncertainty.states import (
    Density,
    MomentFlags,
    make_cauchy,
    make_f_dist,
    make_gaussian,
    make_student_t,
    position_density,
)
from median_uncertainty.numerics import Interval

# first full-pipeline value of the F(5, 2) product, frozen as a regression constant
F52_PRODUCT = 0.28794862877983


def unknown(d: Density) -> Density:
    """Same density with no analytic side information."""
    return Density(pdf=d.pdf, domain=d.domain, symmetry_center=d.symmetry_center, scale=d.scale,
                   location=d.location, label=d.label)


class TestCdf:
    def test_cauchy(self):
        assert cdf(position_density(make_cauchy(0, 1)), 1.0) == pytest.approx(0.75, abs=1e-8)

    def test_gaussian_median(self):
        assert cdf(position_density(make_gaussian(0, 1)), 0.0) == pytest.approx(0.5, abs=1e-14)

    def test_t2_quartile(self):
        assert cdf(position_density(make_student_t(2)), math.sqrt(2 / 3)) == pytest.approx(0.75, abs=1e-8)

    def test_one_sided_against_scipy(self):
        d = position_density(make_f_dist(5, 2))
        for q in (-1.0, 0.0, 0.4, 2.0, 30.0):
            assert cdf(d, q) == pytest.approx(stats.f.cdf(q, 5, 2), abs=1e-9)

    def test_memoised_evaluator_consistent(self):
        F = CumulativeDistribution(position_density(make_student_t(3)))
        qs = [3.0, -2.0, 0.5, 0.49, 10.0, -0.1]
        np.testing.assert_allclose([F(q) for q in qs], stats.t.cdf(qs, 3), atol=1e-10)


class TestQuantile:
    def test_gaussian(self):
        assert quantile(position_density(make_gaussian(0, 1)), 0.75) == pytest.approx(0.674, abs=1e-3)

    def test_cauchy_momentum(self):
        assert quantile(momentum_density(make_cauchy(0, 1)), 0.75) == pytest.approx(0.094, abs=1e-3)

    def test_t3_momentum(self):
        assert quantile(momentum_density(make_student_t(3)), 0.75) == pytest.approx(0.200, abs=1e-3)

    def test_against_scipy_ppf(self):
        d = position_density(make_f_dist(5, 2))
        for level in (0.1, 0.25, 0.5, 0.75, 0.99):
            assert quantile(d, level) == pytest.approx(stats.f.ppf(level, 5, 2), rel=1e-9)

    def test_level_validation(self):
        with pytest.raises(ValueError):
            quantile(position_density(make_gaussian(0, 1)), 1.0)

    def test_unbracketable(self):
        # a defective "density" of total mass 0.5 never reaches the 3/4 level
        d = Density(pdf=lambda x: 0.5 * np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi), label="defective")
        with pytest.raises(DispersionError):
            quantile(d, 0.75)


class TestSiqr:
    @pytest.mark.parametrize("x0,gamma", [(0, 1), (-3, 0.5), (11, 4)])
    def test_cauchy_equals_gamma(self, x0, gamma):
        assert siqr(position_density(make_cauchy(x0, gamma))) == pytest.approx(gamma, abs=1e-6)

    def test_t2(self):
        assert siqr(position_density(make_student_t(2))) == pytest.approx(math.sqrt(2 / 3), abs=1e-6)

    def test_t3(self):
        assert siqr(position_density(make_student_t(3))) == pytest.approx(0.765, abs=1e-3)

    def test_quartile_set(self):
        q = quartiles(position_density(make_student_t(3)))
        assert q.q1 <= q.median <= q.q3
        assert q.siqr == pytest.approx(0.5 * (q.q3 - q.q1))


class TestMoments:
    def test_gaussian(self):
        m, v = mean_variance(position_density(make_gaussian(1.5, 0.6)), MomentFlags(True, True))
        assert m.value == pytest.approx(1.5, abs=1e-8)
        assert v.value == pytest.approx(0.36, abs=1e-8)

    def test_cauchy_flags(self):
        m, v = mean_variance(position_density(make_cauchy(0, 1)), MomentFlags(False, False))
        assert m == MomentResult.divergent() and v == MomentResult.divergent()

    def test_t2_flags(self):
        m, v = mean_variance(position_density(make_student_t(2)), MomentFlags(True, False))
        assert m.finite and m.value == pytest.approx(0.0, abs=1e-6)
        assert not v.finite and v.value is None

    @pytest.mark.parametrize("wf,expected", [
        (make_cauchy(0, 1), ("divergent", "divergent")),
        (make_cauchy(2, 0.5), ("divergent", "divergent")),
        (make_student_t(2), ("finite", "divergent")),
        (make_student_t(3), ("finite", "finite")),
        (make_student_t(5), ("finite", "finite")),
        (make_gaussian(0, 1), ("finite", "finite")),
        (make_f_dist(5, 2), ("divergent", "divergent")),
        (make_f_dist(5, 6), ("finite", "finite")),
    ], ids=lambda v: getattr(v, "label", str(v)))
    def test_probe_agrees_with_analytic_flags(self, wf, expected):
        m, v = mean_variance(unknown(position_density(wf)))
        assert (m.status, v.status) == expected
        if m.finite:
            flagged = mean_variance(position_density(wf), wf.moment_flags)[0]
            assert m.value == pytest.approx(flagged.value, abs=1e-7)

    def test_probe_is_not_fooled_by_symmetric_cancellation(self):
        # the signed Cauchy moment over [-L, L] is exactly 0 for every L
        assert probe_moment(unknown(position_density(make_cauchy(0, 1))), 1) == "divergent"

    def test_inconclusive(self):
        # tail ~ 1/(x log^2 x): summable, but far too slowly to tell on [8, 1024]
        def pdf(x):
            ax = np.abs(x) + math.e
            return 0.5 / (ax * np.log(ax) ** 2) / 1.0
        d = Density(pdf=pdf, symmetry_center=0.0, label="log tail")
        with pytest.raises(InconclusiveMomentError):
            probe_moment(d, 0)

    def test_moment_result_invariant(self):
        with pytest.raises(ValueError):
            MomentResult("finite")
        with pytest.raises(ValueError):
            MomentResult("divergent", 1.0)


class TestReport:
    def test_gaussian(self):
        r = uncertainty_report(make_gaussian(0, 1))
        assert r.product_over_hbar == pytest.approx(0.2275, abs=5e-4)
        assert r.product_over_hbar == pytest.approx(r.siqr_x * r.siqr_p)
        assert r.variance_product_over_hbar == pytest.approx(0.5, abs=1e-8)

    @pytest.mark.parametrize("gamma", [1, 2, 3, 4])
    def test_cauchy(self, gamma):
        r = uncertainty_report(make_cauchy(0, gamma))
        assert r.product_over_hbar == pytest.approx(0.094, abs=1e-3)
        assert r.variance_product_over_hbar is None

    def test_t2(self):
        r = uncertainty_report(make_student_t(2))
        assert r.product_over_hbar == pytest.approx(0.131, abs=1e-3)
        assert r.mean_x.finite and not r.var_x.finite

    def test_t3(self):
        r = uncertainty_report(make_student_t(3))
        assert r.product_over_hbar == pytest.approx(0.153, abs=1e-3)
        # Var x = 3 and Var p = hbar^2/6 for t(3), so the std product is 1/sqrt(2)
        assert r.variance_product_over_hbar == pytest.approx(math.sqrt(0.5), abs=1e-8)

    def test_hbar_units(self):
        r1 = uncertainty_report(make_gaussian(0, 1), hbar=1.0)
        r3 = uncertainty_report(make_gaussian(0, 1), hbar=3.0)
        assert r3.product_over_hbar == pytest.approx(r1.product_over_hbar, abs=1e-12)
        assert r3.siqr_p == pytest.approx(3 * r1.siqr_p, rel=1e-12)
        assert r3.to_dict()["siqr_p"] == pytest.approx(r1.siqr_p, rel=1e-12)

    def test_deterministic(self):
        a = uncertainty_report(make_student_t(3)).to_dict()
        b = uncertainty_report(make_student_t(3)).to_dict()
        assert a == b

    def test_failure_names_axis(self):
        from median_uncertainty.states import WaveFunction
        bad = WaveFunction(label="bad", position_amplitude=lambda x: np.full_like(np.asarray(x, float), np.nan))
        with pytest.raises(DispersionError, match="position axis"):
            uncertainty_report(bad)


@pytest.mark.slow
def test_f52_regression_constant():
    r = uncertainty_report(make_f_dist(5, 2))
    assert r.product_over_hbar == pytest.approx(F52_PRODUCT, abs=1e-9)
    assert r.product_over_hbar > 0.2275


class TestDiscreteQuantile:
    def test_examples(self):
        assert discrete_quantile([(-1, 0.8), (1, 0.2)], 0.75) == -1
        assert discrete_quantile([(-1, 0.75), (1, 0.25)], 0.75) == 1
        assert discrete_quantile([(-1, 0.5), (1, 0.5)], 0.25) == -1

    def test_level_one_returns_largest(self):
        assert discrete_quantile([(0, 0.2), (1, 0.3), (2, 0.5)], 1.0) == 2

    def test_inclusive_is_mirror_of_strict(self):
        outcomes = [(-1, 0.25), (1, 0.75)]
        mirrored = [(-v, p) for v, p in reversed(outcomes)]
        assert discrete_quantile(outcomes, 0.25, inclusive=True) == -discrete_quantile(mirrored, 0.75)

    @pytest.mark.parametrize("bad", [[(-1, 0.5), (1, 0.4)], [(-1, -0.1), (1, 1.1)], [(1, 0.5), (-1, 0.5)], []])
    def test_invalid(self, bad):
        with pytest.raises(ValueError):
            discrete_quantile(bad, 0.5)
