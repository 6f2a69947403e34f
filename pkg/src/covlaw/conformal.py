"""Conformal indexing and coverage bounds for the beta reference law.

The realized coverage of a split conformal threshold, conditional on the
calibration sample, follows Beta(k, n+1-k) in the continuous i.i.d. case.
This module holds the exact index arithmetic, the i.i.d. tail
probabilities, transport-radius coverage reports, bad-calibration bounds,
and the perfect-cluster effective-sample-size model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .laws import BetaLaw, UnitLaw, beta_reference
from .numerics import DomainError, QuadratureSpec, integrate, regularized_incomplete_beta
from .transport import w1

__all__ = [
    "DegenerateCoverageError",
    "CoverageBoundError",
    "ConformalConfig",
    "CoverageBand",
    "CoverageGapReport",
    "BadCalibrationBound",
    "conformal_index",
    "marginal_coverage_band",
    "iid_bad_calibration",
    "coverage_gap_report",
    "bad_calibration_markov",
    "bad_calibration_uniform_shift",
    "clustered_law",
    "clustered_radius",
    "counting_tail_w1",
]


class DegenerateCoverageError(ValueError):
    """k exceeds n: no finite threshold exists and coverage is exactly 1."""


class CoverageBoundError(AssertionError):
    """A computed quantity violated an inequality that holds exactly.

    Signals a numerics bug (or a broken caller-supplied input), never a
    statistical failure.
    """


def conformal_index(n: int, gamma: float) -> int:
    """Threshold index ceil((n+1) * gamma), computed in exact arithmetic.

    ``gamma`` is interpreted through its decimal literal so that grid
    values like 0.9 give exact products: ceil(10 * 0.9) must be 9, not 10.
    The result may exceed n, in which case the threshold is infinite and
    coverage is degenerate at 1.
    """
    if n < 1:
        raise DomainError("conformal_index requires n >= 1")
    if not 0.0 < gamma < 1.0:
        raise DomainError("conformal_index requires 0 < gamma < 1")
    exact = Fraction(n + 1) * Fraction(str(gamma))
    return int(math.ceil(exact))


@dataclass(frozen=True)
class CoverageBand:
    """Exact marginal coverage of the conformal threshold and its band."""

    n: int
    gamma: float
    k: int
    mean: Fraction  # k/(n+1), exactly; 1 when degenerate
    lower: float  # gamma
    upper: float  # gamma + 1/(n+1)
    degenerate: bool


def marginal_coverage_band(n: int, gamma: float) -> CoverageBand:
    """Marginal coverage k/(n+1) with the band [gamma, gamma + 1/(n+1)).

    When ceil((n+1) * gamma) > n there is no finite threshold and the
    returned band is degenerate with coverage exactly 1.
    """
    k = conformal_index(n, gamma)
    if k > n:
        return CoverageBand(
            n=n, gamma=gamma, k=k, mean=Fraction(1), lower=gamma,
            upper=gamma + 1.0 / (n + 1), degenerate=True,
        )
    return CoverageBand(
        n=n, gamma=gamma, k=k, mean=Fraction(k, n + 1), lower=gamma,
        upper=gamma + 1.0 / (n + 1), degenerate=False,
    )


def iid_bad_calibration(n: int, k: int, t: float) -> float:
    """P(realized coverage <= t) under the i.i.d. reference Beta(k, n+1-k)."""
    if not 1 <= k <= n:
        raise DomainError("iid_bad_calibration requires 1 <= k <= n")
    if not 0.0 <= t <= 1.0:
        raise DomainError("threshold t must lie in [0, 1]")
    return regularized_incomplete_beta(t, k, n + 1 - k)


@dataclass(frozen=True)
class ConformalConfig:
    """Calibration size, nominal level, and threshold index.

    If ``k`` is omitted it is derived as ceil((n+1) * gamma).
    """

    n: int
    gamma: float
    k: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("ConformalConfig requires n >= 1")
        if not 0.0 < self.gamma < 1.0:
            raise DomainError("ConformalConfig requires 0 < gamma < 1")
        if self.k is None:
            object.__setattr__(self, "k", conformal_index(self.n, self.gamma))
        if self.k < 1:
            raise DomainError("threshold index k must be at least 1")

    @property
    def degenerate(self) -> bool:
        return self.k > self.n


@dataclass(frozen=True)
class CoverageGapReport:
    """Transport radius of a realized-coverage law and the gaps it bounds."""

    n: int
    k: int
    reference_mean: float  # k/(n+1)
    realized_mean: float
    mean_gap: float
    w1_radius: float
    gap_bound: float  # equals w1_radius
    nominal_gap_bound: float | None  # w1_radius + 1/(n+1) when k = k_gamma <= n


def coverage_gap_report(nu: UnitLaw, config: ConformalConfig) -> CoverageGapReport:
    """W1 radius of ``nu`` around Beta(k, n+1-k) and the coverage gap it bounds.

    The realized mean gap |E[nu] - k/(n+1)| can never exceed the radius;
    that inequality is asserted on the computed values and a violation
    raises :class:`CoverageBoundError`.
    """
    if config.degenerate:
        raise DegenerateCoverageError("no finite threshold: k exceeds n")
    reference = beta_reference(config.n, config.k)
    radius = w1(nu, reference).distance
    realized = nu.mean()
    ref_mean = config.k / (config.n + 1)
    gap = abs(realized - ref_mean)
    if gap > radius + 1e-7:
        raise CoverageBoundError(
            f"mean gap {gap} exceeds W1 radius {radius}: numerics are inconsistent"
        )
    nominal = None
    if config.k == conformal_index(config.n, config.gamma):
        nominal = radius + 1.0 / (config.n + 1)
    return CoverageGapReport(
        n=config.n,
        k=config.k,
        reference_mean=ref_mean,
        realized_mean=realized,
        mean_gap=gap,
        w1_radius=radius,
        gap_bound=radius,
        nominal_gap_bound=nominal,
    )


@dataclass(frozen=True)
class BadCalibrationBound:
    """Upper bound on P(realized coverage <= t) around the beta reference."""

    t: float
    epsilon: float
    beta_tail: float
    penalty: float
    raw_total: float
    total: float  # clamped to 1
    variant: str  # "markov" or "uniform-shift"


def bad_calibration_markov(
    rho: float, p: float, t: float, epsilon: float, n: int, k: int
) -> BadCalibrationBound:
    """Tail bound P(B <= t + eps) + (rho/eps)^p from a W_p radius ``rho``.

    The Markov penalty can push the raw bound above one; both the raw and
    the clamped value are reported.
    """
    if epsilon <= 0.0:
        raise DomainError("bad_calibration_markov requires epsilon > 0")
    if rho < 0.0:
        raise DomainError("transport radius rho must be nonnegative")
    if p < 1.0:
        raise DomainError("order p must be at least 1")
    tail = iid_bad_calibration(n, k, min(1.0, t + epsilon))
    penalty = (rho / epsilon) ** p
    raw = tail + penalty
    return BadCalibrationBound(
        t=t, epsilon=epsilon, beta_tail=tail, penalty=penalty,
        raw_total=raw, total=min(1.0, raw), variant="markov",
    )


def bad_calibration_uniform_shift(rho: float, t: float, n: int, k: int) -> BadCalibrationBound:
    """Tail bound P(B <= t + rho) from an almost-sure transport bound ``rho``.

    When the monotone transport moves no point by more than rho, the beta
    lower tail simply shifts; no Markov penalty appears.
    """
    if rho < 0.0:
        raise DomainError("uniform transport bound rho must be nonnegative")
    tail = iid_bad_calibration(n, k, min(1.0, t + rho))
    return BadCalibrationBound(
        t=t, epsilon=rho, beta_tail=tail, penalty=0.0,
        raw_total=tail, total=min(1.0, tail), variant="uniform-shift",
    )


def clustered_law(k: int, m: int, b: int) -> BetaLaw:
    """Coverage law of the k-th of n = m*b perfectly clustered uniforms.

    With b independent cluster values each duplicated m times, the k-th
    order statistic equals the ceil(k/m)-th of the b distinct values, so
    the realized coverage follows Beta(ceil(k/m), b+1-ceil(k/m)).
    """
    if m < 1 or b < 1:
        raise DomainError("clustered_law requires m >= 1 and b >= 1")
    if not 1 <= k <= m * b:
        raise DomainError("clustered_law requires 1 <= k <= m*b")
    k_eff = -(-k // m)  # ceil(k/m) in integer arithmetic
    return beta_reference(b, k_eff)


def clustered_radius(k: int, m: int, b: int, spec: QuadratureSpec | None = None) -> float:
    """W1 between the clustered coverage law and the nominal Beta(k, mb+1-k)."""
    return w1(clustered_law(k, m, b), beta_reference(m * b, k), spec).distance


def counting_tail_w1(
    count_tail: Callable[[float], float],
    n: int,
    k: int,
    spec: QuadratureSpec | None = None,
) -> float:
    """W1 to the beta reference from a dependent-count tail function.

    ``count_tail(t)`` must return P(N_n(t) >= k) for the dependent
    calibration count N_n(t); the distance to Beta(k, n+1-k) is the
    integral of |count_tail(t) - P(Bin(n, t) >= k)|, using the binomial
    tail identity P(Bin(n, t) >= k) = I_t(k, n-k+1).
    """
    if not 1 <= k <= n:
        raise DomainError("counting_tail_w1 requires 1 <= k <= n")
    if spec is None:
        spec = QuadratureSpec()
    reference = beta_reference(n, k)
    work = spec.with_kinks([q for q in reference.quantile_panels() if 0.0 < q < 1.0])

    def integrand(t: float) -> float:
        return abs(float(count_tail(t)) - regularized_incomplete_beta(t, k, n - k + 1))

    return integrate(integrand, 0.0, 1.0, work).value
