"""Normal-primitive tests: frozen high-precision values plus invariants.

Expected constants were computed with mpmath at 40 digits; the bivariate CDF
is cross-checked against quadrature oracles that never touch the
correlation-integral code path under test.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import ndtr

from dyadlink.specfun import (binorm_cdf, binorm_pdf, binorm_sf, chisq1_cdf,
                              log_norm_cdf, mixture_quantile, norm_cdf,
                              norm_pdf)


def bvn_quad_oracle(a, b, rho):
    """Independent oracle: integrate phi(x) * Phi((b - rho x)/s) up to a."""
    if rho == 1.0:
        return float(ndtr(min(a, b)))
    if rho == -1.0:
        return max(0.0, float(ndtr(a) + ndtr(b) - 1.0))
    s = np.sqrt(1.0 - rho * rho)
    integrand = lambda x: np.exp(-0.5 * x * x) / np.sqrt(2 * np.pi) * ndtr((b - rho * x) / s)
    val, _ = integrate.quad(integrand, -9.0, min(a, 9.0), epsabs=5e-14,
                            epsrel=1e-12, limit=400)
    return val


class TestNormPdf:
    def test_at_zero(self):
        assert norm_pdf(0.0) == pytest.approx(0.39894228040143267794, abs=1e-15)

    def test_at_one(self):
        # also the phi(1) ~ 0.242 bound used to control the Hessian terms
        assert norm_pdf(1.0) == pytest.approx(0.2419707245191433498, abs=1e-15)

    def test_symmetric(self):
        v = np.linspace(-6, 6, 41)
        assert np.array_equal(norm_pdf(v), norm_pdf(-v))
        assert np.all(norm_pdf(v) > 0)

    @pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
    def test_rejects_nonfinite(self, bad):
        with pytest.raises(ValueError):
            norm_pdf(bad)


class TestNormCdf:
    def test_median(self):
        assert norm_cdf(0.0) == 0.5

    def test_975_quantile(self):
        assert norm_cdf(1.959964) == pytest.approx(0.9750000009035576, abs=1e-12)

    def test_deep_tail(self):
        val = norm_cdf(-8.0)
        assert 0.0 < val < 1e-14
        assert val == pytest.approx(6.2209605742717841235e-16, rel=1e-12)

    def test_strictly_increasing(self):
        v = np.linspace(-8, 8, 201)
        assert np.all(np.diff(norm_cdf(v)) > 0)

    @given(st.floats(-37.0, 37.0))
    @settings(max_examples=200, deadline=None)
    def test_symmetry_identity(self, v):
        assert norm_cdf(v) + norm_cdf(-v) == pytest.approx(1.0, abs=1e-14)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            norm_cdf(np.inf)


class TestLogNormCdf:
    def test_at_zero(self):
        assert log_norm_cdf(0.0) == pytest.approx(-np.log(2.0), abs=1e-15)

    def test_tail_matches_asymptotic_expansion(self):
        # exact mpmath value; leading expansion -v^2/2 - log(-v sqrt(2 pi))
        # agrees to ~6e-4 relative at v = -40
        val = log_norm_cdf(-40.0)
        assert val == pytest.approx(-804.60844201375378817, rel=1e-12)
        lead = -0.5 * 40.0 ** 2 - np.log(40.0 * np.sqrt(2 * np.pi))
        assert val == pytest.approx(lead, rel=1e-3)

    def test_near_zero_from_below(self):
        assert -1e-6 < log_norm_cdf(5.0) < 0.0

    def test_monotone_far_left(self):
        v = np.linspace(-40, -5, 141)
        assert np.all(np.diff(log_norm_cdf(v)) > 0)
        assert np.all(np.isfinite(log_norm_cdf(v)))

    def test_moderate_range_matches_direct_log(self):
        # the direct log is only a valid relative-accuracy oracle while the
        # CDF stays away from 1, i.e. up to v ~ 4; beyond that compare absolutely
        v = np.linspace(-5.0, 4.0, 37)
        direct = np.log(norm_cdf(v))
        np.testing.assert_allclose(log_norm_cdf(v), direct, rtol=1e-12)
        v = np.linspace(4.0, 8.0, 17)
        np.testing.assert_allclose(log_norm_cdf(v), np.log(norm_cdf(v)),
                                   atol=1e-15, rtol=0)

    @given(st.floats(-37.0, 37.0))
    @settings(max_examples=200, deadline=None)
    def test_exp_recovers_cdf(self, v):
        cdf = norm_cdf(v)
        if cdf > 1e-300:
            assert np.exp(log_norm_cdf(v)) == pytest.approx(cdf, rel=1e-10)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            log_norm_cdf(np.nan)


class TestBinormCdf:
    def test_independence_at_origin(self):
        assert binorm_cdf(0.0, 0.0, 0.0) == pytest.approx(0.25, abs=1e-15)

    def test_arcsine_value(self):
        assert binorm_cdf(0.0, 0.0, 0.5) == pytest.approx(1.0 / 3.0, abs=1e-13)

    def test_perfect_correlation_degenerates(self):
        assert binorm_cdf(0.3, -0.2, 1.0) == norm_cdf(-0.2)
        assert binorm_cdf(-1.5, 2.0, 1.0) == norm_cdf(-1.5)

    def test_perfect_anticorrelation(self):
        assert binorm_cdf(1.0, -1.0, -1.0) == max(0.0, norm_cdf(1.0) + norm_cdf(-1.0) - 1.0)
        assert binorm_cdf(2.0, 1.0, -1.0) == pytest.approx(
            norm_cdf(2.0) + norm_cdf(1.0) - 1.0, abs=1e-15)

    def test_against_2d_adaptive_quadrature(self):
        # mpmath double quadrature of the density over the rectangle
        assert binorm_cdf(1.0, -1.0, -0.4) == pytest.approx(
            0.10509196020869143821, abs=1e-12)

    def test_against_quad_oracle_random_points(self):
        rng = np.random.default_rng(1)
        for rho in (-0.97, -0.8, -0.35, 0.0, 0.2, 0.6, 0.9, 0.93, 0.999):
            for _ in range(8):
                a, b = rng.uniform(-5, 5, 2)
                assert binorm_cdf(a, b, rho) == pytest.approx(
                    bvn_quad_oracle(a, b, rho), abs=1e-10)

    def test_symmetric_in_arguments(self):
        rng = np.random.default_rng(2)
        a = rng.uniform(-4, 4, 50)
        b = rng.uniform(-4, 4, 50)
        for rho in (-0.95, -0.3, 0.0, 0.5, 0.95):
            np.testing.assert_allclose(binorm_cdf(a, b, rho), binorm_cdf(b, a, rho),
                                       atol=1e-14, rtol=0)

    def test_monotone_in_each_argument_and_rho(self):
        grid = np.linspace(-3, 3, 13)
        rhos = np.linspace(-0.95, 0.95, 9)
        for rho in rhos:
            for b in grid:
                vals = binorm_cdf(grid, b, rho)
                assert np.all(np.diff(vals) >= -1e-13)
                vals = binorm_cdf(b, grid, rho)
                assert np.all(np.diff(vals) >= -1e-13)
        # Slepian ordering: nondecreasing in rho
        for a in grid:
            for b in grid:
                vals = np.array([binorm_cdf(a, b, r) for r in rhos])
                assert np.all(np.diff(vals) >= -1e-13)

    def test_factorizes_at_rho_zero(self):
        rng = np.random.default_rng(3)
        a = rng.uniform(-6, 6, 100)
        b = rng.uniform(-6, 6, 100)
        np.testing.assert_allclose(binorm_cdf(a, b, 0.0),
                                   norm_cdf(a) * norm_cdf(b), atol=1e-12)

    def test_arcsine_identity_across_rho(self):
        for rho in np.linspace(-1, 1, 41):
            expected = 0.25 + np.arcsin(rho) / (2 * np.pi)
            assert binorm_cdf(0.0, 0.0, rho) == pytest.approx(expected, abs=1e-10)

    def test_rho_domain_error(self):
        with pytest.raises(ValueError):
            binorm_cdf(0.0, 0.0, 1.5)

    def test_rejects_nonfinite_args(self):
        with pytest.raises(ValueError):
            binorm_cdf(np.inf, 0.0, 0.5)


class TestBinormSf:
    def test_complement_identity(self):
        rng = np.random.default_rng(4)
        for rho in (-0.9, 0.0, 0.7, 0.95):
            a = rng.uniform(-4, 4, 30)
            b = rng.uniform(-4, 4, 30)
            total = binorm_cdf(a, b, rho) + norm_cdf(-a) + norm_cdf(-b) - binorm_sf(a, b, rho)
            np.testing.assert_allclose(total, 1.0, atol=1e-12)

    def test_small_upper_orthant_keeps_relative_precision(self):
        val = binorm_sf(6.0, 6.0, 0.5)
        assert 0.0 < val < 1e-9
        s = np.sqrt(1 - 0.25)
        integrand = lambda x: np.exp(-0.5 * x * x) / np.sqrt(2 * np.pi) * ndtr(-(6.0 - 0.5 * x) / s)
        want, _ = integrate.quad(integrand, 6.0, 12.0, epsabs=1e-20)
        assert val == pytest.approx(want, rel=1e-6)


class TestGordonBound:
    def test_inverse_mills_below_reciprocal(self):
        # (1 - Phi(v)) / phi(v) < 1/v for positive v; the survival side is
        # evaluated as Phi(-v) to dodge cancellation near v ~ 8
        v = np.linspace(0.05, 37.0, 300)
        ratio = norm_cdf(-v) / norm_pdf(v)
        assert np.all(ratio < 1.0 / v)


class TestChisq1Cdf:
    def test_at_zero(self):
        assert chisq1_cdf(0.0) == 0.0

    def test_95_quantile(self):
        assert chisq1_cdf(3.841459) == pytest.approx(0.95000000534680423, abs=1e-12)

    def test_90_quantile(self):
        assert chisq1_cdf(2.705543) == pytest.approx(0.89999997152729709, abs=1e-12)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            chisq1_cdf(-0.1)


class TestMixtureQuantile:
    @staticmethod
    def bisect_oracle(alpha):
        # solve 1/2 + 1/2 chisq1_cdf(q) = 1 - alpha by bisection
        lo, hi = 0.0, 50.0
        for _ in range(200):
            mid = (lo + hi) / 2.0
            if 0.5 + 0.5 * chisq1_cdf(mid) < 1.0 - alpha:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2.0

    def test_five_percent(self):
        assert mixture_quantile(0.05) == pytest.approx(2.7055434540954146, abs=1e-10)
        assert mixture_quantile(0.05) == pytest.approx(self.bisect_oracle(0.05), abs=1e-9)

    def test_two_and_a_half_percent(self):
        assert mixture_quantile(0.025) == pytest.approx(3.8414588206941260, abs=1e-10)
        assert mixture_quantile(0.025) == pytest.approx(self.bisect_oracle(0.025), abs=1e-9)

    def test_half_gives_zero(self):
        assert mixture_quantile(0.5) == pytest.approx(0.0, abs=1e-30)

    @pytest.mark.parametrize("bad", [0.0, 0.6, 1.0, -0.05])
    def test_domain(self, bad):
        with pytest.raises(ValueError):
            mixture_quantile(bad)


def test_binorm_pdf_matches_cdf_derivative():
    rng = np.random.default_rng(5)
    for rho in (-0.6, 0.0, 0.45, 0.9):
        h = 1e-5
        for _ in range(5):
            a, b = rng.uniform(-2.5, 2.5, 2)
            fd = (binorm_cdf(a, b, rho + h) - binorm_cdf(a, b, rho - h)) / (2 * h)
            assert binorm_pdf(a, b, rho) == pytest.approx(fd, rel=1e-4, abs=1e-10)
