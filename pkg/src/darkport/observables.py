"""From quantum states to laboratory observables.

After release the probe flies freely for a long time T, so its position
is read in the far field: x = p T / m2.  Everything measurable is then a
rescaled momentum distribution, which is why the library only ever
compares the postselected shift with the packet width; both pick up the
same T/m2 factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .gaussian import (
    WavepacketSuperposition,
    ZeroNormError,
    momentum_mean,
    momentum_variance,
    norm_squared,
    overlap,
)

__all__ = [
    "ReadoutModel",
    "PositionDensity",
    "DetectionPlan",
    "far_field_position_density",
    "discrimination_probability",
    "leading_order_discrimination",
    "runs_estimate",
    "detection_plan",
    "detection_significance",
]


@dataclass(frozen=True)
class ReadoutModel:
    """Free-flight position readout: duration, probe mass, resolution."""

    T: float
    m2: float
    position_resolution: float = 1e-10  # the often-quoted angstrom scale

    def __post_init__(self):
        if not (self.T > 0 and self.m2 > 0 and self.position_resolution > 0):
            raise ValueError("readout parameters must all be positive")


@dataclass(frozen=True)
class PositionDensity:
    """Far-field position distribution in meters.

    `sigma_m` follows the packet-width convention, sqrt(2 Var): for a
    single Gaussian it equals the width parameter mapped to position,
    matching the usual "spreads as width * T / m2" statement.  The raw
    density callable integrates to one over x in meters.
    """

    mean_m: float
    sigma_m: float
    momentum_mean: float
    momentum_sigma: float
    scale_m_per_unit: float
    density: Callable[[np.ndarray], np.ndarray]


def far_field_position_density(
    s: WavepacketSuperposition, model: ReadoutModel, momentum_unit: float
) -> PositionDensity:
    """Map a momentum-space state to the measured position distribution.

    `momentum_unit` is the SI size (kg m/s) of one dimensionless
    momentum unit.  Assumes T is long enough that the initial position
    spread is negligible (far-field condition).
    """
    if momentum_unit <= 0:
        raise ValueError("momentum_unit must be positive")
    n2 = norm_squared(s)
    if n2 == 0.0:
        raise ZeroNormError("cannot build a position density for the zero state")
    scale = momentum_unit * model.T / model.m2  # meters per momentum unit
    mean_p = momentum_mean(s)
    sigma_p = math.sqrt(2.0 * momentum_variance(s))

    def density(x: np.ndarray) -> np.ndarray:
        p = np.asarray(x, dtype=float) / scale
        return np.abs(s.amplitude(p)) ** 2 / n2 / scale

    return PositionDensity(
        mean_m=mean_p * scale,
        sigma_m=sigma_p * scale,
        momentum_mean=mean_p,
        momentum_sigma=sigma_p,
        scale_m_per_unit=scale,
        density=density,
    )


def discrimination_probability(
    chi: WavepacketSuperposition, chi_post: WavepacketSuperposition
) -> float:
    """Probability 1 - |<chi|chi_post>|^2 of telling the packets apart.

    Exact, from normalized overlaps.  Symmetric in its arguments and
    invariant under global phases.  For a pure shift s (in width units)
    this is 1 - e^{-s^2/2}, i.e. half the squared shift at leading
    order; quoted (shift)^2 estimates run a factor two high.
    """
    na2 = norm_squared(chi)
    nb2 = norm_squared(chi_post)
    if na2 == 0.0 or nb2 == 0.0:
        raise ZeroNormError("discrimination needs two normalizable states")
    total = 0.0 + 0.0j
    for a in chi.components:
        for b in chi_post.components:
            total += overlap(a, b)
    fidelity = abs(total) ** 2 / (na2 * nb2)
    return min(max(1.0 - fidelity, 0.0), 1.0)


def leading_order_discrimination(epsilon: float, r: float) -> float:
    """Squared postselected shift (r/eps)^2, the usual quick estimate."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return (r / epsilon) ** 2


def runs_estimate(
    p_success: float, p_discriminate: float, target_successes: int = 10
) -> int:
    """Experiment repetitions needed for the target number of detections."""
    if not (0.0 < p_success <= 1.0 and 0.0 < p_discriminate <= 1.0):
        raise ValueError("probabilities must lie in (0, 1]")
    if target_successes < 1:
        raise ValueError("target_successes must be >= 1")
    return math.ceil(target_successes / (p_success * p_discriminate))


@dataclass(frozen=True)
class DetectionPlan:
    p_success: float
    p_discriminate: float
    target_successes: int
    n_runs: int

    def __post_init__(self):
        if not (0.0 <= self.p_success <= 1.0 and 0.0 <= self.p_discriminate <= 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        if self.n_runs < self.target_successes:
            raise ValueError("n_runs cannot be smaller than target_successes")


def detection_plan(
    p_success: float, p_discriminate: float, target_successes: int = 10
) -> DetectionPlan:
    return DetectionPlan(
        p_success=p_success,
        p_discriminate=p_discriminate,
        target_successes=target_successes,
        n_runs=runs_estimate(p_success, p_discriminate, target_successes),
    )


def detection_significance(
    samples: Sequence[float], null_mean: float, null_sigma: float
) -> tuple[float, float]:
    """One-sided z-test of the sample mean against a known null.

    Positive z means the sample moved up the axis, i.e. away from the
    source mass.  Returns (z, one-sided p-value).
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise ValueError("need at least 2 samples for a significance test")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    if null_sigma <= 0:
        raise ValueError("null_sigma must be positive")
    z = (float(x.mean()) - null_mean) / (null_sigma / math.sqrt(x.size))
    p = 0.5 * math.erfc(z / math.sqrt(2.0))
    return z, p
