"""Probability laws on [0, 1]: the common currency of the package.

Every law exposes the same small behavioral surface (cdf, quantile, mean,
optional density, kink points), so transport distances and coverage
reports can treat analytic references, transported laws, contaminated
mixtures, point masses, and Monte Carlo samples interchangeably.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy import special as _sp

from .numerics import (
    DomainError,
    QuadratureSpec,
    RngStream,
    integrate,
    inverse_incomplete_beta,
    regularized_incomplete_beta,
)

if TYPE_CHECKING:  # pragma: no cover
    from .transport import TransportMap

__all__ = [
    "UnitLaw",
    "BetaLaw",
    "PointMass",
    "PushforwardLaw",
    "ContaminatedLaw",
    "EmpiricalLaw",
    "beta_reference",
    "contaminate",
    "empirical_from_samples",
]

# Interior quantile levels used to pre-split quadratures over a law that
# concentrates most of its mass on a narrow window (large-n beta laws).
_PANEL_PROBS = (1e-9, 1e-4, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0 - 1e-4, 1.0 - 1e-9)


class UnitLaw(ABC):
    """A probability law supported on [0, 1]."""

    @abstractmethod
    def cdf(self, t):
        """P(X <= t); array-aware, right-continuous, nondecreasing."""

    @abstractmethod
    def quantile(self, p):
        """Generalized inverse of the cdf: inf{t : cdf(t) >= p}."""

    def density(self, t):
        """Lebesgue density at t, or None when the law has no density."""
        return None

    def kink_points(self) -> tuple[float, ...]:
        """Locations in [0, 1] where the cdf is not smooth."""
        return ()

    def mean(self) -> float:
        """E[X], by default via the tail formula integral of (1 - cdf)."""
        spec = QuadratureSpec().with_kinks(
            [t for t in self.kink_points() if 0.0 < t < 1.0]
        )
        return integrate(lambda t: 1.0 - float(self.cdf(t)), 0.0, 1.0, spec).value

    def quantile_panels(self) -> tuple[float, ...]:
        """Interior quantiles marking where the law's mass sits.

        Used by integrators as pre-split points so that a concentrated law
        is never missed by coarse initial sampling.
        """
        qs = np.asarray(self.quantile(np.asarray(_PANEL_PROBS)), dtype=float)
        return tuple(sorted({float(q) for q in qs if 0.0 < q < 1.0}))


@dataclass(frozen=True)
class BetaLaw(UnitLaw):
    """Reference coverage law Beta(k, n+1-k) of the k-th of n uniforms.

    For k > n the threshold convention is "no finite threshold", which
    makes the law the point mass at coverage 1; ``degenerate`` flags that
    regime.
    """

    n: int
    k: int

    def __post_init__(self):
        if self.k < 1 or self.n < 1:
            raise DomainError("BetaLaw requires n >= 1 and k >= 1")

    @property
    def degenerate(self) -> bool:
        return self.k > self.n

    @property
    def shape_a(self) -> float:
        return float(self.k)

    @property
    def shape_b(self) -> float:
        return float(self.n + 1 - self.k)

    def cdf(self, t):
        t_arr = np.asarray(t, dtype=float)
        if self.degenerate:
            out = np.where(t_arr >= 1.0, 1.0, 0.0)
            return out if out.ndim else float(out)
        out = _sp.betainc(self.shape_a, self.shape_b, np.clip(t_arr, 0.0, 1.0))
        out = np.where(t_arr < 0.0, 0.0, np.where(t_arr >= 1.0, 1.0, out))
        return out if out.ndim else float(out)

    def quantile(self, p):
        if self.degenerate:
            p_arr = np.asarray(p, dtype=float)
            out = np.where(p_arr > 0.0, 1.0, 0.0)
            return out if out.ndim else float(out)
        return inverse_incomplete_beta(p, self.shape_a, self.shape_b)

    def density(self, t):
        if self.degenerate:
            return None
        t_arr = np.asarray(t, dtype=float)
        inside = (t_arr > 0.0) & (t_arr < 1.0)
        safe = np.where(inside, t_arr, 0.5)
        log_pdf = (
            (self.shape_a - 1.0) * np.log(safe)
            + (self.shape_b - 1.0) * np.log1p(-safe)
            - _sp.betaln(self.shape_a, self.shape_b)
        )
        out = np.where(inside, np.exp(log_pdf), 0.0)
        return out if out.ndim else float(out)

    def kink_points(self) -> tuple[float, ...]:
        return (1.0,) if self.degenerate else ()

    def mean(self) -> float:
        if self.degenerate:
            return 1.0
        return self.k / (self.n + 1)

    def quantile_panels(self) -> tuple[float, ...]:
        if self.degenerate:
            return ()
        return super().quantile_panels()


@dataclass(frozen=True)
class PointMass(UnitLaw):
    """Degenerate law concentrated at one point of [0, 1]."""

    location: float

    def __post_init__(self):
        if not 0.0 <= self.location <= 1.0:
            raise DomainError("PointMass location must lie in [0, 1]")

    def cdf(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = np.where(t_arr >= self.location, 1.0, 0.0)
        return out if out.ndim else float(out)

    def quantile(self, p):
        p_arr = np.asarray(p, dtype=float)
        out = np.where(p_arr > 0.0, self.location, 0.0)
        return out if out.ndim else float(out)

    def kink_points(self) -> tuple[float, ...]:
        return (self.location,)

    def mean(self) -> float:
        return self.location

    def quantile_panels(self) -> tuple[float, ...]:
        return ()


@dataclass(frozen=True)
class PushforwardLaw(UnitLaw):
    """Law of map(X) for X ~ base, for a strictly increasing map on (0, 1)."""

    base: UnitLaw
    map: "TransportMap"

    def cdf(self, t):
        t_arr = np.asarray(t, dtype=float)
        inner = np.clip(t_arr, 1e-15, 1.0 - 1e-15)
        out = np.asarray(self.base.cdf(self.map.inverse(inner)), dtype=float)
        out = np.where(t_arr <= 0.0, 0.0, np.where(t_arr >= 1.0, 1.0, out))
        return out if out.ndim else float(out)

    def quantile(self, p):
        base_q = np.asarray(self.base.quantile(p), dtype=float)
        out = np.asarray(self.map.forward(np.clip(base_q, 1e-15, 1.0 - 1e-15)), dtype=float)
        return out if out.ndim else float(out)

    def density(self, t):
        if self.map.inverse_derivative is None:
            return None
        base_density = self.base.density(0.5)
        if base_density is None:
            return None
        t_arr = np.asarray(t, dtype=float)
        inner = np.clip(t_arr, 1e-15, 1.0 - 1e-15)
        u = self.map.inverse(inner)
        out = np.asarray(self.base.density(u), dtype=float) * np.abs(
            np.asarray(self.map.inverse_derivative(inner), dtype=float)
        )
        return out if out.ndim else float(out)

    def kink_points(self) -> tuple[float, ...]:
        pts = []
        for t in self.base.kink_points():
            mapped = float(self.map.forward(min(max(t, 1e-15), 1.0 - 1e-15)))
            pts.append(min(max(mapped, 0.0), 1.0))
        return tuple(sorted(pts))

    def mean(self) -> float:
        # Quantile form E[map(X)] = integral of map(Q_base(p)) dp; the
        # quantile reparametrization flattens concentrated densities.
        return integrate(lambda p: float(self.quantile(p)), 0.0, 1.0).value

    def quantile_panels(self) -> tuple[float, ...]:
        qs = np.asarray(self.quantile(np.asarray(_PANEL_PROBS)), dtype=float)
        return tuple(sorted({float(q) for q in qs if 0.0 < q < 1.0}))


@dataclass(frozen=True)
class ContaminatedLaw(UnitLaw):
    """Mixture (1 - pi) * base + pi * delta_c: base law with an atom at c."""

    base: UnitLaw
    pi: float
    c: float

    def __post_init__(self):
        if not 0.0 <= self.pi <= 1.0:
            raise DomainError("contamination weight pi must lie in [0, 1]")
        if not 0.0 <= self.c <= 1.0:
            raise DomainError("contamination location c must lie in [0, 1]")

    def cdf(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = (1.0 - self.pi) * np.asarray(self.base.cdf(t_arr), dtype=float)
        out = out + self.pi * (t_arr >= self.c)
        return out if out.ndim else float(out)

    def quantile(self, p):
        p_arr = np.asarray(p, dtype=float)
        if self.pi >= 1.0:
            out = np.full_like(p_arr, self.c, dtype=float)
            return out if out.ndim else float(out)
        level = (1.0 - self.pi) * float(self.base.cdf(self.c))
        scale = 1.0 - self.pi
        below = np.asarray(self.base.quantile(np.clip(p_arr / scale, 0.0, 1.0)), dtype=float)
        above = np.asarray(
            self.base.quantile(np.clip((p_arr - self.pi) / scale, 0.0, 1.0)), dtype=float
        )
        out = np.where(p_arr <= level, below, np.where(p_arr <= level + self.pi, self.c, above))
        return out if out.ndim else float(out)

    def kink_points(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.base.kink_points()) | {self.c}))

    def mean(self) -> float:
        return (1.0 - self.pi) * self.base.mean() + self.pi * self.c

    def quantile_panels(self) -> tuple[float, ...]:
        base_panels = (
            self.base.quantile_panels() if isinstance(self.base, UnitLaw) else ()
        )
        return tuple(sorted(set(base_panels) | ({self.c} if 0.0 < self.c < 1.0 else set())))


@dataclass(frozen=True)
class EmpiricalLaw(UnitLaw):
    """Sorted Monte Carlo sample with replication metadata.

    The cdf is the right-continuous step function i/count; the quantile is
    the left-continuous generalized inverse, the value at index
    ceil(p * count).
    """

    values: np.ndarray
    provenance: RngStream | None = None
    standard_error_of_mean: float = field(default=0.0)

    @property
    def count(self) -> int:
        return int(self.values.shape[0])

    def cdf(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = np.searchsorted(self.values, t_arr, side="right") / self.count
        return out if np.ndim(t) else float(out)

    def quantile(self, p):
        p_arr = np.asarray(p, dtype=float)
        idx = np.ceil(p_arr * self.count).astype(int)
        idx = np.clip(idx, 1, self.count)
        out = np.where(p_arr <= 0.0, 0.0, self.values[idx - 1])
        return out if out.ndim else float(out)

    def kink_points(self) -> tuple[float, ...]:
        return tuple(np.unique(self.values))

    def mean(self) -> float:
        return float(np.mean(self.values))

    def quantile_panels(self) -> tuple[float, ...]:
        return ()


def beta_reference(n: int, k: int) -> BetaLaw:
    """The coverage law Beta(k, n+1-k); the point mass at 1 when k > n."""
    if n < 1 or k < 1:
        raise DomainError("beta_reference requires n >= 1 and k >= 1")
    return BetaLaw(n=int(n), k=int(k))


def contaminate(base: UnitLaw, pi: float, c: float) -> ContaminatedLaw:
    """Replace a fraction ``pi`` of ``base``'s mass by an atom at ``c``."""
    return ContaminatedLaw(base=base, pi=float(pi), c=float(c))


def empirical_from_samples(values, provenance: RngStream | None = None) -> EmpiricalLaw:
    """Empirical law of a sample of realized coverages in [0, 1]."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError("empirical_from_samples requires a nonempty 1-d sample")
    if np.any(arr < 0.0) or np.any(arr > 1.0) or not np.all(np.isfinite(arr)):
        raise DomainError("sample values must lie in [0, 1]")
    arr = np.sort(arr)
    arr.flags.writeable = False
    if arr.size > 1:
        se = float(np.std(arr, ddof=1) / np.sqrt(arr.size))
    else:
        se = 0.0
    return EmpiricalLaw(values=arr, provenance=provenance, standard_error_of_mean=se)
