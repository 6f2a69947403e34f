"""Exact transported coverage laws under a half-normal scale shift.

Calibration scores |N(0, s^2)| with test scores |N(0, (r*s)^2)| leave the
beta order-statistic mechanism untouched and push the coverage law
through an explicit increasing map on (0, 1). For that map the coverage
gap saturates its transport bound: W1 equals the absolute marginal
coverage loss, which this module computes from both sides and asserts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .laws import BetaLaw, PushforwardLaw, beta_reference
from .numerics import (
    DomainError,
    QuadratureSpec,
    integrate,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
)
from .transport import TransportMap, w1

__all__ = [
    "IdentityViolationError",
    "ScaleShift",
    "half_normal_quantile",
    "scale_shift_forward",
    "scale_shift_inverse",
    "scale_shift_map",
    "shifted_coverage_law",
    "transported_density",
    "shifted_coverage",
    "exact_w1_identity",
    "local_shift_gap",
]

# Phi^-1 overflows at the endpoints; the pushforward cdf extends
# continuously, so coverage arguments are clamped just inside (0, 1).
_EDGE = 1e-15


class IdentityViolationError(AssertionError):
    """The two independently computed sides of an exact identity disagree."""


@dataclass(frozen=True)
class ScaleShift:
    """Test-to-calibration scale ratio; ratio 1 is the identity regime."""

    ratio: float

    def __post_init__(self):
        if not self.ratio > 0.0:
            raise DomainError("scale ratio must be positive")


def half_normal_quantile(u):
    """Quantile of |N(0,1)| at level u in (0, 1): Phi^-1((u+1)/2)."""
    arr = np.asarray(u, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise DomainError("half_normal_quantile requires 0 < u < 1")
    out = std_normal_quantile((arr + 1.0) / 2.0)
    return out if np.ndim(out) else float(out)


def scale_shift_forward(u, shift: ScaleShift):
    """Coverage u under the calibration scale, re-read on the test scale.

    Strictly increasing in u; below the identity for ratio > 1
    (undercoverage) and above it for ratio < 1 (overcoverage).
    """
    arr = np.clip(np.asarray(u, dtype=float), _EDGE, 1.0 - _EDGE)
    out = 2.0 * std_normal_cdf(half_normal_quantile(arr) / shift.ratio) - 1.0
    return out if np.ndim(u) else float(out)


def scale_shift_inverse(z, shift: ScaleShift):
    """Inverse of :func:`scale_shift_forward`; equals the forward map at 1/r."""
    arr = np.clip(np.asarray(z, dtype=float), _EDGE, 1.0 - _EDGE)
    out = 2.0 * std_normal_cdf(shift.ratio * half_normal_quantile(arr)) - 1.0
    return out if np.ndim(z) else float(out)


def _inverse_jacobian(z, shift: ScaleShift):
    """d/dz of the inverse map: r * phi(r q(z)) / phi(q(z))."""
    arr = np.clip(np.asarray(z, dtype=float), _EDGE, 1.0 - _EDGE)
    q = half_normal_quantile(arr)
    r = shift.ratio
    out = r * np.exp(-0.5 * q * q * (r * r - 1.0))
    return out if np.ndim(z) else float(out)


def scale_shift_map(shift: ScaleShift) -> TransportMap:
    """The scale-shift coverage map packaged as a transport map."""
    return TransportMap(
        forward=lambda u: scale_shift_forward(u, shift),
        inverse=lambda z: scale_shift_inverse(z, shift),
        inverse_derivative=lambda z: _inverse_jacobian(z, shift),
    )


def shifted_coverage_law(n: int, k: int, shift: ScaleShift) -> PushforwardLaw:
    """The realized-coverage law Beta(k, n+1-k) pushed through the shift map."""
    return PushforwardLaw(base=beta_reference(n, k), map=scale_shift_map(shift))


def transported_density(z, shift: ScaleShift, n: int, k: int):
    """Density of the shifted coverage law at z in (0, 1)."""
    if not 1 <= k <= n:
        raise DomainError("transported_density requires 1 <= k <= n")
    arr = np.asarray(z, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise DomainError("transported_density requires 0 < z < 1")
    base = BetaLaw(n=n, k=k)
    out = np.asarray(base.density(scale_shift_inverse(arr, shift)), dtype=float)
    out = out * np.asarray(_inverse_jacobian(arr, shift), dtype=float)
    return out if np.ndim(z) else float(out)


def shifted_coverage(n: int, k: int, shift: ScaleShift, spec: QuadratureSpec | None = None) -> float:
    """Marginal coverage of the threshold under the shifted test law.

    Integrates the shift map against the beta density of the reference
    law; the integration domain is pre-split at the reference law's
    quantile panels because the density concentrates for large n.
    """
    if not 1 <= k <= n:
        raise DomainError("shifted_coverage requires 1 <= k <= n")
    if spec is None:
        spec = QuadratureSpec()
    base = BetaLaw(n=n, k=k)
    work = spec.with_kinks([q for q in base.quantile_panels() if 0.0 < q < 1.0])

    def integrand(u: float) -> float:
        return scale_shift_forward(u, shift) * float(base.density(u))

    return integrate(integrand, 0.0, 1.0, work).value


def exact_w1_identity(
    n: int, k: int, shift: ScaleShift, spec: QuadratureSpec | None = None
) -> tuple[float, float]:
    """Both sides of the identity W1(shifted law, reference) = |coverage gap|.

    The left side is a transport-distance quadrature on the pushforward
    law; the right side is the absolute difference of two means. Because
    the shift map minus the identity has constant sign, the two numbers
    agree exactly; a discrepancy beyond 1e-7 signals a numerics bug and
    raises :class:`IdentityViolationError`.
    """
    distance = w1(shifted_coverage_law(n, k, shift), beta_reference(n, k), spec).distance
    gap = abs(shifted_coverage(n, k, shift, spec) - k / (n + 1))
    if abs(distance - gap) > 1e-7:
        raise IdentityViolationError(
            f"W1 {distance} and coverage gap {gap} disagree beyond 1e-7"
        )
    return distance, gap


def local_shift_gap(gamma: float, delta: float) -> float:
    """First-order coverage gap -2 * delta * phi(q(gamma)) * q(gamma).

    ``delta`` is the log of the scale ratio; the quadratic-in-delta and
    1/n remainders are intentionally excluded.
    """
    if not 0.0 < gamma < 1.0:
        raise DomainError("local_shift_gap requires 0 < gamma < 1")
    q = half_normal_quantile(gamma)
    return -2.0 * delta * float(std_normal_pdf(q)) * q
