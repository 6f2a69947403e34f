"""Special functions, adaptive quadrature, and reproducible random streams.

Everything downstream (laws, transport distances, Monte Carlo experiments)
is built on the primitives in this module: the standard normal family, the
regularized incomplete beta function and its inverse, a bivariate normal
CDF, an adaptive Simpson integrator that is told where integrands are
non-smooth, and counter-based random streams that make parallel Monte
Carlo runs bit-reproducible.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special as _sp

__all__ = [
    "DomainError",
    "QuadratureError",
    "QuadratureSpec",
    "IntegrationResult",
    "RngStream",
    "std_normal_cdf",
    "std_normal_pdf",
    "std_normal_quantile",
    "regularized_incomplete_beta",
    "inverse_incomplete_beta",
    "bivariate_normal_cdf",
    "integrate",
    "stream_for",
    "uniform_stream",
]

_SQRT_2PI = float(np.sqrt(2.0 * np.pi))
_MASK64 = (1 << 64) - 1

# Forced refinement before a panel may be accepted; guards against a
# concentrated integrand (e.g. a Beta(901, 100) density) being invisible
# to the first coarse Simpson estimates.
_MIN_DEPTH = 4


class DomainError(ValueError):
    """An argument lies outside the documented domain of an operation."""


class QuadratureError(RuntimeError):
    """Adaptive integration exhausted its subdivision budget."""

    def __init__(self, message: str, result: "IntegrationResult"):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerance, subdivision budget, and known non-smooth points.

    ``kink_points`` are locations inside the integration interval where the
    integrand may have a kink or jump; the interval is split there before
    any adaptive refinement happens.
    """

    absolute_tolerance: float = 1e-10
    max_subdivisions: int = 60
    kink_points: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.absolute_tolerance > 0.0:
            raise DomainError("absolute_tolerance must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be at least 1")
        object.__setattr__(
            self, "kink_points", tuple(sorted(float(t) for t in self.kink_points))
        )

    def with_kinks(self, points: Sequence[float]) -> "QuadratureSpec":
        """Copy of this spec with ``points`` merged into the kink list."""
        merged = sorted(set(self.kink_points) | {float(p) for p in points})
        return QuadratureSpec(self.absolute_tolerance, self.max_subdivisions, tuple(merged))


@dataclass(frozen=True)
class IntegrationResult:
    value: float
    error_estimate: float
    converged: bool
    evaluations: int


# ---------------------------------------------------------------------------
# standard normal family
# ---------------------------------------------------------------------------


def std_normal_cdf(x):
    """Standard normal CDF, accurate to machine precision, array-aware.

    Saturates to 0/1 in the extreme tails instead of raising.
    """
    return _sp.ndtr(x)


def std_normal_pdf(x):
    """Standard normal density (2*pi)^(-1/2) * exp(-x^2/2), array-aware."""
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x) / _SQRT_2PI
    return out if out.ndim else float(out)


def std_normal_quantile(p):
    """Inverse standard normal CDF on the open interval (0, 1)."""
    arr = np.asarray(p, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise DomainError("std_normal_quantile requires 0 < p < 1")
    out = _sp.ndtri(arr)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# regularized incomplete beta and its inverse
# ---------------------------------------------------------------------------


def _check_beta_shapes(a, b):
    if not (np.all(np.asarray(a) > 0.0) and np.all(np.asarray(b) > 0.0)):
        raise DomainError("beta shape parameters must be positive")


def regularized_incomplete_beta(x, a, b):
    """Regularized incomplete beta function I_x(a, b), array-aware.

    Backed by the continued-fraction evaluation (with the tail-symmetry
    switch) of scipy's ``betainc``.
    """
    _check_beta_shapes(a, b)
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("regularized_incomplete_beta requires 0 <= x <= 1")
    out = _sp.betainc(a, b, arr)
    return out if out.ndim else float(out)


def inverse_incomplete_beta(p, a, b):
    """Quantile of the Beta(a, b) law: solves I_x(a, b) = p for x.

    Newton iteration (started from scipy's ``betaincinv`` estimate) with a
    bisection-bracket safeguard; converges for every valid input and leaves
    the residual |I_x(a,b) - p| near machine precision.
    """
    _check_beta_shapes(a, b)
    p_arr = np.asarray(p, dtype=float)
    scalar = p_arr.ndim == 0
    p_arr = np.atleast_1d(p_arr)
    if np.any(p_arr < 0.0) or np.any(p_arr > 1.0):
        raise DomainError("inverse_incomplete_beta requires 0 <= p <= 1")

    a_arr = np.broadcast_to(np.asarray(a, dtype=float), p_arr.shape)
    b_arr = np.broadcast_to(np.asarray(b, dtype=float), p_arr.shape)
    x = np.clip(_sp.betaincinv(a_arr, b_arr, p_arr), 0.0, 1.0)

    resid = _sp.betainc(a_arr, b_arr, x) - p_arr
    rough = np.abs(resid) > 5e-13
    if np.any(rough):
        # Bracketed Newton polish on the entries scipy left imprecise.
        xs = x[rough]
        ps = p_arr[rough]
        ash = a_arr[rough]
        bsh = b_arr[rough]
        lo = np.zeros_like(xs)
        hi = np.ones_like(xs)
        rs = resid[rough]
        log_norm = _sp.betaln(ash, bsh)
        for _ in range(4):
            lo = np.where(rs < 0.0, xs, lo)
            hi = np.where(rs > 0.0, xs, hi)
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                log_dens = (ash - 1.0) * np.log(xs) + (bsh - 1.0) * np.log1p(-xs) - log_norm
                step = rs * np.exp(-log_dens)
            newton = xs - step
            bad = ~np.isfinite(newton) | (newton < lo) | (newton > hi)
            xs = np.where(bad, 0.5 * (lo + hi), newton)
            rs = _sp.betainc(ash, bsh, xs) - ps
            if np.max(np.abs(rs)) <= 5e-13:
                break
        x = x.copy()
        x[rough] = xs

    x = np.where(p_arr == 0.0, 0.0, x)
    x = np.where(p_arr == 1.0, 1.0, x)
    return float(x[0]) if scalar else x


# ---------------------------------------------------------------------------
# bivariate normal CDF via the Plackett identity
# ---------------------------------------------------------------------------


def bivariate_normal_cdf(h: float, k: float, rho: float) -> float:
    """P(Z1 <= h, Z2 <= k) for standard bivariate normal, correlation rho.

    Uses d(Phi2)/d(rho) = phi2(h, k; rho): the correlation derivative of
    the joint CDF equals the joint density, so Phi2 is recovered from
    independence by a one-dimensional quadrature along the correlation
    path. Substituting rho = sin(theta) keeps the path integrand bounded
    all the way to |rho| -> 1.
    """
    if not (np.isfinite(h) and np.isfinite(k)):
        raise DomainError("bivariate_normal_cdf requires finite h and k")
    if not abs(rho) < 1.0:
        raise DomainError("bivariate_normal_cdf requires |rho| < 1")
    base = float(_sp.ndtr(h) * _sp.ndtr(k))
    if rho == 0.0:
        return base

    def path_density(theta: float) -> float:
        # phi2(h, k; sin(theta)) * cos(theta): the cos factors cancel,
        # leaving a bounded integrand.
        s = np.sin(theta)
        c2 = np.cos(theta) ** 2
        expo = -(h * h - 2.0 * s * h * k + k * k) / (2.0 * c2)
        return float(np.exp(expo) / (2.0 * np.pi))

    upper = float(np.arcsin(rho))
    spec = QuadratureSpec(absolute_tolerance=1e-12)
    res = integrate(path_density, min(0.0, upper), max(0.0, upper), spec)
    value = base + np.sign(rho) * res.value
    return float(min(1.0, max(0.0, value)))


# ---------------------------------------------------------------------------
# adaptive Simpson quadrature
# ---------------------------------------------------------------------------


def _adaptive_panel(f, a, b, tol, max_depth):
    """Adaptive Simpson on one smooth panel; returns (value, err, ok, nev)."""
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    total = 0.0
    err = 0.0
    ok = True
    nev = 3
    while stack:
        a0, b0, f0, f1, f2, s, t, depth = stack.pop()
        m = 0.5 * (a0 + b0)
        lm = 0.5 * (a0 + m)
        rm = 0.5 * (m + b0)
        if lm <= a0 or rm >= b0 or lm >= m or rm <= m:
            # Interval has collapsed to machine resolution.
            total += s
            err += abs(s) * 1e-15
            continue
        flm = f(lm)
        frm = f(rm)
        nev += 2
        sl = (m - a0) / 6.0 * (f0 + 4.0 * flm + f1)
        sr = (b0 - m) / 6.0 * (f1 + 4.0 * frm + f2)
        delta = sl + sr - s
        # Halved tolerance keeps the total error below the panel budget; the
        # rounding floor stops the tree from expanding once |delta| is pure
        # floating-point noise (e.g. refining toward an integrable
        # singularity).
        accept = abs(delta) <= 15.0 * max(t, 1e-16 * (abs(sl) + abs(sr)))
        if depth >= _MIN_DEPTH and accept:
            total += sl + sr + delta / 15.0
            err += abs(delta) / 15.0
        elif depth >= max_depth:
            total += sl + sr
            err += abs(delta)
            ok = False
        else:
            half = 0.5 * t
            stack.append((a0, m, f0, flm, f1, sl, half, depth + 1))
            stack.append((m, b0, f1, frm, f2, sr, half, depth + 1))
    return total, err, ok, nev


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    spec: QuadratureSpec | None = None,
) -> IntegrationResult:
    """Adaptive composite Simpson integral of ``f`` over [lo, hi].

    The interval is pre-split at every kink point in ``spec`` before
    refinement, and each resulting panel is integrated to the spec's
    absolute tolerance. Raises :class:`QuadratureError` (carrying the best
    estimate and achieved tolerance) when the subdivision budget runs out.
    """
    if spec is None:
        spec = QuadratureSpec()
    if not lo < hi:
        raise DomainError("integrate requires lo < hi")
    for t in spec.kink_points:
        if not (lo <= t <= hi):
            raise DomainError(f"kink point {t} outside [{lo}, {hi}]")

    edges = [lo]
    for t in spec.kink_points:
        if edges[-1] < t < hi:
            edges.append(t)
    edges.append(hi)

    value = 0.0
    err = 0.0
    converged = True
    nev = 0
    for a, b in zip(edges[:-1], edges[1:]):
        v, e, _, n = _adaptive_panel(f, a, b, spec.absolute_tolerance, spec.max_subdivisions)
        value += v
        err += e
        # Depth-capped leaves are fine as long as the panel error they
        # leave behind still fits in the budget (2x slack for the
        # roughness of the Richardson estimate).
        converged = converged and e <= 2.0 * spec.absolute_tolerance
        nev += n
    result = IntegrationResult(value, err, converged, nev)
    if not converged:
        raise QuadratureError(
            f"integration did not converge: estimate {value!r}, achieved tolerance {err!r}",
            result,
        )
    return result


# ---------------------------------------------------------------------------
# reproducible random streams
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RngStream:
    """Immutable descriptor of one counter-based random stream.

    Distinct (master_seed, stream_id) pairs give statistically independent
    streams; an equal pair gives bit-identical output on every platform and
    under any parallel schedule.
    """

    master_seed: int
    stream_id: int

    def generator(self) -> np.random.Generator:
        key = ((self.master_seed & _MASK64) << 64) | (self.stream_id & _MASK64)
        return np.random.Generator(np.random.Philox(key=key))


def _hashed_stream_id(experiment: str, replication: int) -> int:
    payload = f"{experiment}:{replication}".encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")


def stream_for(master_seed: int, experiment: str, replication: int = 0) -> RngStream:
    """Stream for one replication of one named experiment.

    The stream id is a stable hash of (experiment, replication), so a
    worker pool can claim replications in any order without changing any
    result.
    """
    return RngStream(master_seed, _hashed_stream_id(experiment, replication))


def uniform_stream(stream: RngStream, count: int) -> np.ndarray:
    """``count`` uniforms on the open interval (0, 1) from ``stream``."""
    g = stream.generator()
    bits = g.integers(0, 1 << 53, size=int(count), dtype=np.int64)
    return (bits.astype(np.float64) + 0.5) * 2.0**-53
