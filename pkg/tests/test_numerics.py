"""Special functions, quadrature, and random-stream contracts."""

import numpy as np
import pytest

from covlaw.numerics import (
    DomainError,
    QuadratureError,
    QuadratureSpec,
    RngStream,
    bivariate_normal_cdf,
    integrate,
    inverse_incomplete_beta,
    regularized_incomplete_beta,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
    stream_for,
    uniform_stream,
)

# High-precision reference values (mpmath, 60 digits).
PHI_AT_1_6449 = 0.9500047825316536972874045321565
PDF_AT_0 = 0.3989422804014326779399460599344
PDF_AT_1_6449 = 0.1031277736999458302728262339963
QUANTILE_95 = 1.6448536269514727148638489079916
IBETA_085_28_3 = 0.1514006073236087308174413029449


class TestStdNormal:
    def test_cdf_symmetry_center(self):
        assert std_normal_cdf(0.0) == pytest.approx(0.5, abs=1e-16)

    def test_cdf_tail_saturation(self):
        assert std_normal_cdf(40.0) == 1.0
        assert std_normal_cdf(-40.0) == 0.0

    def test_cdf_high_precision_value(self):
        assert abs(std_normal_cdf(1.6449) - PHI_AT_1_6449) < 1e-15

    def test_cdf_reflection(self):
        x = np.linspace(-6, 6, 201)
        assert np.max(np.abs(std_normal_cdf(x) + std_normal_cdf(-x) - 1.0)) < 1e-15

    def test_cdf_monotone(self):
        x = np.linspace(-10, 10, 2001)
        assert np.all(np.diff(std_normal_cdf(x)) >= 0.0)

    def test_quantile_center_and_95(self):
        assert std_normal_quantile(0.5) == pytest.approx(0.0, abs=1e-15)
        assert abs(std_normal_quantile(0.95) - QUANTILE_95) < 1e-12

    def test_quantile_antisymmetry(self):
        p = np.linspace(0.01, 0.49, 49)
        assert np.max(np.abs(std_normal_quantile(p) + std_normal_quantile(1 - p))) < 1e-12

    def test_quantile_strictly_increasing(self):
        p = np.linspace(1e-6, 1 - 1e-6, 999)
        assert np.all(np.diff(std_normal_quantile(p)) > 0.0)

    def test_quantile_domain(self):
        for bad in (0.0, 1.0, -0.3, 1.2):
            with pytest.raises(DomainError):
                std_normal_quantile(bad)

    def test_cdf_quantile_inverse_pair(self):
        p = np.concatenate([[1e-8], np.linspace(0.001, 0.999, 499), [1 - 1e-8]])
        assert np.max(np.abs(std_normal_cdf(std_normal_quantile(p)) - p)) < 1e-11

    def test_pdf_values(self):
        assert abs(std_normal_pdf(0.0) - PDF_AT_0) < 1e-16
        assert abs(std_normal_pdf(1.6449) - PDF_AT_1_6449) < 1e-15

    def test_pdf_symmetry(self):
        x = np.linspace(0, 8, 100)
        assert np.array_equal(std_normal_pdf(x), std_normal_pdf(-x))


class TestIncompleteBeta:
    def test_uniform_case(self):
        x = np.linspace(0, 1, 101)
        assert np.max(np.abs(regularized_incomplete_beta(x, 1.0, 1.0) - x)) < 1e-14

    def test_boundaries(self):
        assert regularized_incomplete_beta(0.0, 2.5, 3.5) == 0.0
        assert regularized_incomplete_beta(1.0, 2.5, 3.5) == 1.0

    def test_reflection_identity(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            x = rng.uniform(0.01, 0.99)
            a = rng.uniform(0.2, 50.0)
            b = rng.uniform(0.2, 50.0)
            total = regularized_incomplete_beta(x, a, b) + regularized_incomplete_beta(
                1 - x, b, a
            )
            assert abs(total - 1.0) < 1e-13

    def test_lower_tail_of_beta_28_3(self):
        # The worked lower-tail mass near 0.15 at threshold 0.85.
        v = regularized_incomplete_beta(0.85, 28, 3)
        assert 0.14 <= v <= 0.16
        assert abs(v - IBETA_085_28_3) < 1e-13

    def test_monotone_in_x(self):
        rng = np.random.default_rng(5)
        x = np.linspace(0, 1, 101)
        for _ in range(1000):
            a = rng.uniform(0.1, 80.0)
            b = rng.uniform(0.1, 80.0)
            vals = regularized_incomplete_beta(x, a, b)
            assert np.all(np.diff(vals) >= -1e-15)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            regularized_incomplete_beta(-0.1, 2, 3)
        with pytest.raises(DomainError):
            regularized_incomplete_beta(0.5, -1.0, 3)


class TestInverseIncompleteBeta:
    def test_boundaries(self):
        assert inverse_incomplete_beta(0.0, 4.0, 9.0) == 0.0
        assert inverse_incomplete_beta(1.0, 4.0, 9.0) == 1.0

    def test_uniform_case(self):
        p = np.linspace(0, 1, 101)
        assert np.max(np.abs(inverse_incomplete_beta(p, 1.0, 1.0) - p)) < 1e-13

    def test_round_trip_99_grid(self):
        p = np.linspace(0.01, 0.99, 99)
        x = inverse_incomplete_beta(p, 28.0, 3.0)
        assert np.max(np.abs(regularized_incomplete_beta(x, 28.0, 3.0) - p)) < 1e-11

    def test_round_trip_random_shapes(self):
        rng = np.random.default_rng(3)
        p = np.linspace(0.001, 0.999, 200)
        for _ in range(50):
            a = rng.uniform(0.3, 60.0)
            b = rng.uniform(0.3, 60.0)
            x = inverse_incomplete_beta(p, a, b)
            assert np.max(np.abs(regularized_incomplete_beta(x, a, b) - p)) < 1e-11

    def test_domain(self):
        with pytest.raises(DomainError):
            inverse_incomplete_beta(1.5, 2, 2)


class TestBivariateNormal:
    def test_independence_factorizes(self):
        for h, k in [(0.0, 0.0), (1.0, -0.3), (-2.0, 1.7)]:
            assert bivariate_normal_cdf(h, k, 0.0) == pytest.approx(
                float(std_normal_cdf(h) * std_normal_cdf(k)), abs=1e-15
            )

    def test_orthant_closed_form(self):
        # P(Z1 <= 0, Z2 <= 0) = 1/4 + arcsin(rho) / (2 pi).
        for rho in (-0.9, -0.5, 0.25, 0.5, 0.75, 0.95):
            expected = 0.25 + np.arcsin(rho) / (2 * np.pi)
            assert abs(bivariate_normal_cdf(0.0, 0.0, rho) - expected) < 1e-10

    def test_comonotone_limit(self):
        # As rho -> 1 the joint mass P(Z1<=h, Z2<=h) approaches Phi(h); the
        # residual gap at rho = 1 - 1e-9 is genuinely of order
        # sqrt(1 - rho) ~ 4e-5 times phi(h), so the limit is checked at
        # that scale, and the orthant case is checked exactly.
        rho = 1 - 1e-9
        gap = abs(bivariate_normal_cdf(0.7, 0.7, rho) - float(std_normal_cdf(0.7)))
        assert gap < 1e-4
        exact = 0.25 + np.arcsin(rho) / (2 * np.pi)
        assert abs(bivariate_normal_cdf(0.0, 0.0, rho) - exact) < 1e-9

    def test_monotone_in_rho(self):
        rhos = np.linspace(-0.95, 0.95, 39)
        for h, k in [(0.3, -0.4), (1.2816, 1.2816), (-1.0, 2.0)]:
            vals = [bivariate_normal_cdf(h, k, float(r)) for r in rhos]
            assert np.all(np.diff(vals) >= -1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            bivariate_normal_cdf(0.0, 0.0, 1.0)
        with pytest.raises(DomainError):
            bivariate_normal_cdf(np.inf, 0.0, 0.5)


class TestIntegrate:
    def test_constant(self):
        assert integrate(lambda t: 1.0, 0.0, 1.0).value == pytest.approx(1.0, abs=1e-14)

    def test_kink_split_exact(self):
        spec = QuadratureSpec(kink_points=(0.5,))
        res = integrate(lambda t: abs(t - 0.5), 0.0, 1.0, spec)
        assert res.value == pytest.approx(0.25, abs=1e-14)

    def test_normal_density_normalization(self):
        res = integrate(lambda x: float(std_normal_pdf(x)), -8.0, 8.0)
        assert abs(res.value - 1.0) < 1e-10

    def test_monomials(self):
        spec = QuadratureSpec(absolute_tolerance=1e-13)
        for m in range(9):
            res = integrate(lambda t, m=m: t**m, 0.0, 1.0, spec)
            assert abs(res.value - 1.0 / (m + 1)) < 1e-12

    def test_failure_reports_best_estimate(self):
        spec = QuadratureSpec(absolute_tolerance=1e-14, max_subdivisions=3)
        with pytest.raises(QuadratureError) as exc:
            integrate(lambda t: np.sin(50 * t) ** 2, 0.0, 1.0, spec)
        result = exc.value.result
        assert not result.converged
        assert result.error_estimate > 1e-14
        assert 0.0 < result.value < 1.0

    def test_kink_outside_interval_rejected(self):
        spec = QuadratureSpec(kink_points=(2.0,))
        with pytest.raises(DomainError):
            integrate(lambda t: t, 0.0, 1.0, spec)

    def test_spec_validation(self):
        with pytest.raises(DomainError):
            QuadratureSpec(absolute_tolerance=0.0)
        with pytest.raises(DomainError):
            QuadratureSpec(max_subdivisions=0)


class TestStreams:
    def test_determinism(self):
        s = stream_for(20250101, "exp", 4)
        assert np.array_equal(uniform_stream(s, 1000), uniform_stream(s, 1000))

    def test_distinct_streams_share_nothing(self):
        a = uniform_stream(RngStream(1, 0), 1000)
        b = uniform_stream(RngStream(1, 1), 1000)
        assert len(set(a.tolist()) & set(b.tolist())) == 0

    def test_open_interval(self):
        u = uniform_stream(stream_for(9, "open", 0), 100_000)
        assert np.all(u > 0.0) and np.all(u < 1.0)

    def test_mean_in_clt_band(self):
        u = uniform_stream(stream_for(20250101, "mean-check", 0), 10**6)
        assert abs(float(u.mean()) - 0.5) < 0.002

    def test_hash_depends_on_experiment_and_replication(self):
        s1 = stream_for(7, "a", 0)
        s2 = stream_for(7, "a", 1)
        s3 = stream_for(7, "b", 0)
        assert len({s1.stream_id, s2.stream_id, s3.stream_id}) == 3
