"""Exact algebra of momentum-space Gaussian wavepackets.

A component is the unit-normalized function

    f(p) = N * (p - c)^degree * exp(-(p - c)^2 / (2 w^2))

with degree 0 (plain Gaussian) or 1 (the odd partner that spans the
orthogonal direction of a slightly shifted Gaussian).  Momenta are
dimensionless: one unit is the packet width of the prepared state, so
centers stay O(1) and nothing underflows.  All closed forms here assume
every component in an expression shares a single width; the width field
exists so future free-evolution variants do not break the type.

Overlaps, norms and moments reduce to Gaussian product integrals, which
are evaluated exactly (polynomial degree never exceeds four).
`quadrature_moments` provides the brute-force grid integration used as
an independent cross-check in the test suite.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.integrate import simpson

__all__ = [
    "GaussianComponent",
    "HermiteComponent",
    "WavepacketSuperposition",
    "GridSpec",
    "GridError",
    "ZeroNormError",
    "overlap",
    "norm",
    "norm_squared",
    "momentum_mean",
    "momentum_variance",
    "orthogonal_decomposition",
    "quadrature_moments",
]

_SQRT_PI = math.sqrt(math.pi)
# Relative floor below which a superposition counts as the zero state.
_ZERO_NORM_CUTOFF = 1e-20


class GridError(ValueError):
    """A quadrature grid does not cover or resolve the state."""


class ZeroNormError(ValueError):
    """Moments requested of a state with (numerically) zero norm."""


@dataclass(frozen=True)
class GaussianComponent:
    """One weighted Gaussian, center and width in packet-width units."""

    center: float
    width: float = 1.0
    weight: complex = 1.0 + 0.0j

    degree = 0  # class attribute, overridden by HermiteComponent

    def __post_init__(self):
        if not (self.width > 0):
            raise ValueError(f"width must be > 0, got {self.width}")
        if not (math.isfinite(self.center) and cmath.isfinite(self.weight)):
            raise ValueError("center and weight must be finite")

    def normalizer(self) -> float:
        """Constant N making the bare (weight-free) component unit norm."""
        if self.degree == 0:
            return (math.pi * self.width**2) ** -0.25
        return math.sqrt(2.0 / (self.width**3 * _SQRT_PI))

    def amplitude(self, p: np.ndarray) -> np.ndarray:
        """Evaluate weight * f(p) on an array of momenta."""
        u = np.asarray(p, dtype=float) - self.center
        poly = u if self.degree == 1 else 1.0
        return self.weight * self.normalizer() * poly * np.exp(-u * u / (2.0 * self.width**2))

    def shifted(self, dp: float) -> "GaussianComponent":
        return replace(self, center=self.center + dp)

    def scaled(self, factor: complex) -> "GaussianComponent":
        return replace(self, weight=self.weight * factor)


@dataclass(frozen=True)
class HermiteComponent(GaussianComponent):
    """Gaussian times a first-degree polynomial in (p - center)."""

    degree: int = 1

    def __post_init__(self):
        super().__post_init__()
        if self.degree not in (0, 1):
            raise ValueError(f"degree must be 0 or 1, got {self.degree}")


@dataclass(frozen=True)
class WavepacketSuperposition:
    """Finite weighted sum of components sharing one width."""

    components: tuple[GaussianComponent, ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("superposition needs at least one component")
        object.__setattr__(self, "components", tuple(self.components))
        _common_width(self.components)

    @classmethod
    def of(cls, *components: GaussianComponent) -> "WavepacketSuperposition":
        return cls(tuple(components))

    def amplitude(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        total = np.zeros(p.shape, dtype=complex)
        for c in self.components:
            total += c.amplitude(p)
        return total

    def scaled(self, factor: complex) -> "WavepacketSuperposition":
        return WavepacketSuperposition(tuple(c.scaled(factor) for c in self.components))

    def normalized(self) -> "WavepacketSuperposition":
        n = norm(self)
        if n == 0.0:
            raise ZeroNormError("cannot normalize the zero state")
        return self.scaled(1.0 / n)

    def __add__(self, other: "WavepacketSuperposition") -> "WavepacketSuperposition":
        return WavepacketSuperposition(self.components + other.components)


def _common_width(components) -> float:
    w0 = components[0].width
    for c in components[1:]:
        if abs(c.width - w0) > 1e-12 * w0:
            raise ValueError("mixed component widths are not supported")
    return w0


def _pair_moment(a: GaussianComponent, b: GaussianComponent, k: int) -> float:
    """Integral of p^k times the bare (unit-weight) product a(p) b(p).

    The product of the two exponentials is a Gaussian of variance w^2/2
    centered midway; the polynomial factors contract against its central
    moments, so the result is exact.
    """
    w = _common_width((a, b))
    ca, cb = a.center, b.center
    mu = 0.5 * (ca + cb)
    v = 0.5 * w * w
    pref = (
        a.normalizer()
        * b.normalizer()
        * w
        * _SQRT_PI
        * math.exp(-((ca - cb) ** 2) / (4.0 * w * w))
    )
    poly = np.array([1.0])
    if a.degree == 1:
        poly = npoly.polymul(poly, [mu - ca, 1.0])
    if b.degree == 1:
        poly = npoly.polymul(poly, [mu - cb, 1.0])
    for _ in range(k):
        poly = npoly.polymul(poly, [mu, 1.0])
    central = (1.0, 0.0, v, 0.0, 3.0 * v * v)
    return pref * sum(c * central[n] for n, c in enumerate(poly))


def overlap(a: GaussianComponent, b: GaussianComponent) -> complex:
    """Inner product <a|b>, weights included (conjugate on the left)."""
    return complex(a.weight).conjugate() * complex(b.weight) * _pair_moment(a, b, 0)


def _weighted_pair_sum(s: WavepacketSuperposition, k: int) -> float:
    total = 0.0 + 0.0j
    comps = s.components
    for i, a in enumerate(comps):
        wa = complex(a.weight).conjugate()
        for b in comps[i:]:
            m = _pair_moment(a, b, k)
            term = wa * complex(b.weight) * m
            if b is a:
                total += term
            else:
                total += term + term.conjugate()
    return total.real


def _weight_scale(s: WavepacketSuperposition) -> float:
    return sum(abs(c.weight) for c in s.components) ** 2


def norm_squared(s: WavepacketSuperposition) -> float:
    return max(_weighted_pair_sum(s, 0), 0.0)


def norm(s: WavepacketSuperposition) -> float:
    return math.sqrt(norm_squared(s))


def _moments(s: WavepacketSuperposition) -> tuple[float, float, float]:
    n2 = norm_squared(s)
    if n2 <= _ZERO_NORM_CUTOFF * _weight_scale(s):
        raise ZeroNormError("state has zero norm; moments are undefined")
    m1 = _weighted_pair_sum(s, 1) / n2
    m2 = _weighted_pair_sum(s, 2) / n2
    return n2, m1, m2 - m1 * m1


def momentum_mean(s: WavepacketSuperposition) -> float:
    """First moment of |psi(p)|^2, exact."""
    return _moments(s)[1]


def momentum_variance(s: WavepacketSuperposition) -> float:
    """Central second moment of |psi(p)|^2, exact."""
    return _moments(s)[2]


def orthogonal_decomposition(
    chi_prime: GaussianComponent, chi: GaussianComponent
) -> tuple[complex, complex, HermiteComponent]:
    """Split a kicked packet into parts along and orthogonal to the original.

    Returns (parallel, perpendicular, chi_perp) with

        chi_prime = parallel * chi + perpendicular * chi_perp + residual,

    where chi_perp is the unit-normalized odd component centered on chi
    and <chi|chi_perp> = 0 exactly.  For a kick of size r (in width
    units) the perpendicular coefficient is -(r/sqrt(2)) e^{-r^2/4} and
    the residual norm is O(r^2).
    """
    for c in (chi_prime, chi):
        if c.degree != 0:
            raise ValueError("decomposition is defined for plain Gaussians")
        if abs(abs(complex(c.weight)) - 1.0) > 1e-12:
            raise ValueError("components must be unit-normalized (|weight| = 1)")
    chi_perp = HermiteComponent(center=chi.center, width=chi.width)
    parallel = overlap(chi, chi_prime)
    perpendicular = overlap(chi_perp, chi_prime)
    return parallel, perpendicular, chi_perp


@dataclass(frozen=True)
class GridSpec:
    """Uniform momentum grid for brute-force integration.

    The grid spans `pad_widths` packet widths beyond the extreme
    component centers.  Coverage below 12 widths or resolution below
    `min_points_per_width` is rejected rather than silently accepted.
    """

    n_points: int = 16385
    pad_widths: float = 12.0
    min_points_per_width: float = 50.0


def quadrature_moments(
    s: WavepacketSuperposition, grid: GridSpec = GridSpec()
) -> tuple[float, float, float]:
    """Simpson-rule (norm, mean, variance) of |psi|^2 on a dense grid.

    This is the independent brute-force route used to validate the
    closed forms; it shares no code with them.  Returns (0, nan, nan)
    for the zero state.
    """
    if grid.pad_widths < 12.0:
        raise GridError(
            f"grid must extend >= 12 widths beyond all centers, got {grid.pad_widths}"
        )
    w = _common_width(s.components)
    lo = min(c.center for c in s.components) - grid.pad_widths * w
    hi = max(c.center for c in s.components) + grid.pad_widths * w
    span_widths = (hi - lo) / w
    per_width = grid.n_points / span_widths
    if per_width < grid.min_points_per_width:
        raise GridError(
            f"grid too coarse: {per_width:.1f} points per width over "
            f"{span_widths:.1f} widths (need >= {grid.min_points_per_width})"
        )
    p = np.linspace(lo, hi, grid.n_points)
    dens = np.abs(s.amplitude(p)) ** 2
    n2 = float(simpson(dens, x=p))
    if n2 <= _ZERO_NORM_CUTOFF * _weight_scale(s):
        return 0.0, math.nan, math.nan
    mean = float(simpson(dens * p, x=p)) / n2
    second = float(simpson(dens * p * p, x=p)) / n2
    return math.sqrt(max(n2, 0.0)), mean, second - mean * mean
