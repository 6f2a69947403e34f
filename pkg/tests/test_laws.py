"""Law objects on [0, 1]: reference, pushforward, contaminated, empirical."""

import numpy as np
import pytest

from covlaw.laws import (
    BetaLaw,
    ContaminatedLaw,
    EmpiricalLaw,
    PointMass,
    PushforwardLaw,
    UnitLaw,
    beta_reference,
    contaminate,
    empirical_from_samples,
)
from covlaw.numerics import DomainError, stream_for
from covlaw.scale_shift import ScaleShift, scale_shift_map
from covlaw.transport import identity_map, w1_empirical

GRID = np.linspace(0.0, 1.0, 1001)
P_GRID = np.linspace(0.001, 0.999, 499)


def galois_holds(law: UnitLaw, slack: float = 1e-9) -> bool:
    """Generalized-inverse pair: cdf(quantile(p)) >= p and quantile(cdf(t)) <= t."""
    q = np.asarray(law.quantile(P_GRID), dtype=float)
    if np.any(np.asarray(law.cdf(q), dtype=float) < P_GRID - slack):
        return False
    c = np.asarray(law.cdf(GRID), dtype=float)
    return bool(np.all(np.asarray(law.quantile(c), dtype=float) <= GRID + slack))


class TestBetaLaw:
    def test_reference_mean(self):
        assert beta_reference(30, 28).mean() == pytest.approx(28 / 31, abs=1e-15)

    def test_uniform_special_case(self):
        law = beta_reference(1, 1)
        assert np.max(np.abs(np.asarray(law.cdf(GRID)) - GRID)) < 1e-14

    def test_degenerate_point_mass_at_one(self):
        law = beta_reference(10, 11)
        assert law.degenerate
        assert law.mean() == 1.0
        assert law.cdf(0.999) == 0.0 and law.cdf(1.0) == 1.0
        assert law.quantile(0.5) == 1.0

    def test_mean_formula_across_shapes(self):
        rng = np.random.default_rng(2)
        for _ in range(300):
            n = int(rng.integers(1, 501))
            k = int(rng.integers(1, n + 1))
            assert abs(BetaLaw(n=n, k=k).mean() - k / (n + 1)) < 1e-12

    def test_mean_matches_tail_integral(self):
        for n, k in [(5, 3), (30, 28), (200, 180), (1000, 901)]:
            law = beta_reference(n, k)
            assert abs(UnitLaw.mean(law) - k / (n + 1)) < 1e-9

    def test_density_integrates_against_cdf(self):
        law = beta_reference(12, 9)
        t = np.linspace(0.001, 0.999, 50)
        dens = np.asarray(law.density(t))
        assert np.all(dens >= 0.0)

    def test_galois(self):
        assert galois_holds(beta_reference(30, 28))
        assert galois_holds(beta_reference(1, 1))

    def test_validation(self):
        with pytest.raises(DomainError):
            beta_reference(0, 1)
        with pytest.raises(DomainError):
            beta_reference(5, 0)


class TestPointMass:
    def test_step_cdf(self):
        pm = PointMass(0.4)
        assert pm.cdf(0.39) == 0.0 and pm.cdf(0.4) == 1.0
        assert pm.mean() == 0.4
        assert pm.quantile(0.7) == 0.4

    def test_validation(self):
        with pytest.raises(DomainError):
            PointMass(1.2)


class TestPushforwardLaw:
    def test_identity_map_preserves_cdf(self):
        base = beta_reference(30, 28)
        law = PushforwardLaw(base, identity_map())
        assert np.max(np.abs(np.asarray(law.cdf(GRID)) - np.asarray(base.cdf(GRID)))) < 1e-12

    def test_scale_shift_pushforward_quantile_consistency(self):
        base = beta_reference(30, 28)
        law = PushforwardLaw(base, scale_shift_map(ScaleShift(1.5)))
        assert galois_holds(law)

    def test_density_via_jacobian_integrates(self):
        from covlaw.numerics import QuadratureSpec, integrate

        law = PushforwardLaw(beta_reference(30, 28), scale_shift_map(ScaleShift(1.5)))
        spec = QuadratureSpec(absolute_tolerance=1e-9).with_kinks(law.quantile_panels())
        mass = integrate(lambda z: float(law.density(z)), 1e-12, 1 - 1e-12, spec).value
        assert abs(mass - 1.0) < 1e-6

    def test_mean_between_routes(self):
        base = beta_reference(50, 46)
        law = PushforwardLaw(base, scale_shift_map(ScaleShift(0.8)))
        assert abs(law.mean() - UnitLaw.mean(law)) < 1e-8


class TestContaminatedLaw:
    def test_zero_weight_is_base(self):
        base = beta_reference(50, 46)
        law = contaminate(base, 0.0, 0.3)
        assert np.max(np.abs(np.asarray(law.cdf(GRID)) - np.asarray(base.cdf(GRID)))) == 0.0

    def test_full_weight_is_point_mass(self):
        law = contaminate(beta_reference(50, 46), 1.0, 0.3)
        assert law.cdf(0.29) == 0.0 and law.cdf(0.3) == 1.0
        assert law.mean() == pytest.approx(0.3, abs=1e-15)

    def test_mean_linearity(self):
        base = beta_reference(50, 46)
        assert contaminate(base, 0.2, 0.6).mean() == pytest.approx(
            0.8 * (46 / 51) + 0.12, abs=1e-15
        )
        for pi in (0.1, 0.37, 0.9):
            law = contaminate(base, pi, 0.25)
            expected = pi * (0.25 - base.mean())
            assert abs((law.mean() - base.mean()) - expected) < 1e-12

    def test_kinks_include_atom(self):
        law = contaminate(beta_reference(50, 46), 0.3, 0.55)
        assert 0.55 in law.kink_points()

    def test_galois(self):
        assert galois_holds(contaminate(beta_reference(50, 46), 0.3, 0.5))

    def test_validation(self):
        with pytest.raises(DomainError):
            contaminate(beta_reference(5, 4), 1.3, 0.5)
        with pytest.raises(DomainError):
            contaminate(beta_reference(5, 4), 0.5, -0.1)


class TestEmpiricalLaw:
    def test_single_point(self):
        law = empirical_from_samples([0.5])
        assert law.cdf(0.49) == 0.0 and law.cdf(0.5) == 1.0

    def test_quantile_generalized_inverse_convention(self):
        law = empirical_from_samples([0.2, 0.4, 0.6, 0.8])
        assert law.quantile(0.5) == 0.4  # index ceil(0.5 * 4) = 2
        assert law.quantile(0.51) == 0.6
        assert law.quantile(1.0) == 0.8

    def test_sorted_and_immutable(self):
        law = empirical_from_samples([0.9, 0.1, 0.5])
        assert np.array_equal(law.values, [0.1, 0.5, 0.9])
        with pytest.raises(ValueError):
            law.values[0] = 0.0

    def test_galois(self):
        rng = np.random.default_rng(8)
        assert galois_holds(empirical_from_samples(rng.random(257)))

    def test_mc_mean_within_band(self):
        g = stream_for(20250101, "law-mean", 0).generator()
        draws = g.beta(28, 3, size=50_000)
        law = empirical_from_samples(draws)
        assert abs(law.mean() - 28 / 31) < 3 * law.standard_error_of_mean

    def test_w1_convergence_with_sample_size(self):
        reference = beta_reference(30, 28)
        g = stream_for(20250101, "law-w1", 0).generator()
        small = empirical_from_samples(g.beta(28, 3, size=500))
        big = empirical_from_samples(g.beta(28, 3, size=50_000))
        d_small = w1_empirical(small, reference).distance
        d_big = w1_empirical(big, reference).distance
        assert d_big < 0.01
        assert d_big < d_small

    def test_validation(self):
        with pytest.raises(DomainError):
            empirical_from_samples([])
        with pytest.raises(DomainError):
            empirical_from_samples([0.5, 1.5])


def test_every_law_cdf_bounds():
    laws = [
        beta_reference(30, 28),
        beta_reference(1, 1),
        PointMass(0.7),
        contaminate(beta_reference(50, 46), 0.3, 0.5),
        PushforwardLaw(beta_reference(30, 28), scale_shift_map(ScaleShift(2.0))),
        empirical_from_samples([0.2, 0.4, 0.9]),
    ]
    for law in laws:
        c = np.asarray(law.cdf(GRID), dtype=float)
        assert np.all(np.diff(c) >= -1e-12), law
        assert c[0] <= 1e-12 or law.cdf(0.0) >= 0.0
        assert abs(float(law.cdf(1.0)) - 1.0) < 1e-12, law
