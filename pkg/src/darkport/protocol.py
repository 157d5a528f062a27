"""The pre/postselection protocol on a two-path source and a Gaussian probe.

The source mass sits in two interferometer arms L and R; the arm near
the probe (R) imprints a small momentum kick on it.  Conditioning the
source on the nearly-dark output port turns that tiny attraction into an
amplified momentum shift of the opposite sign, which is the whole point
of the scheme.

Conventions: the positive momentum axis points from the source toward
the probe, so attraction is a kick of -r and the postselected shift
comes out at +r/epsilon.  All momenta are in packet-width units (see
`gaussian`).  After the interferometer is closed the two-level label
rides on an embedded spin rather than on the path, but the arithmetic
of pre/postselection is identical, so a single two-level state type
covers both descriptions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.integrate import quad

from .constants import CODATA2018, PhysicalConstants
from .gaussian import (
    GaussianComponent,
    WavepacketSuperposition,
    momentum_mean,
    norm_squared,
)

if TYPE_CHECKING:  # pragma: no cover
    from .params import ExperimentParams

__all__ = [
    "TwoPathState",
    "JointState",
    "SplitTrajectory",
    "OrthogonalStatesError",
    "ZeroSuccessError",
    "IntegrationError",
    "preselect",
    "dark_port",
    "gravitational_kick",
    "both_arm_kicks",
    "postselect",
    "success_probability",
    "weak_value_exact",
    "weak_value_approx",
    "postselected_state",
    "postselected_mean_exact",
    "postselected_mean_approx",
    "regime_parameter",
    "regime_ok",
    "REGIME_LIMIT",
    "sg_trajectory",
    "impulse_time_dependent",
]

# Largest r/(sqrt(2) eps) for which the first-order shift r/eps is trusted.
REGIME_LIMIT = 0.1


class OrthogonalStatesError(ValueError):
    """Weak value requested for orthogonal pre/postselection."""


class ZeroSuccessError(ValueError):
    """Postselection succeeds with probability zero."""


class IntegrationError(RuntimeError):
    """Numerical impulse integration missed its error budget."""

    def __init__(self, message: str, estimate: float, achieved_error: float):
        super().__init__(message)
        self.estimate = estimate
        self.achieved_error = achieved_error


@dataclass(frozen=True)
class TwoPathState:
    """Normalized two-level amplitude pair (arm L, arm R)."""

    amp_L: complex
    amp_R: complex

    def __post_init__(self):
        n = abs(complex(self.amp_L)) ** 2 + abs(complex(self.amp_R)) ** 2
        if abs(n - 1.0) > 1e-12:
            raise ValueError(f"two-path state must be normalized, |amp|^2 = {n}")


def preselect(epsilon: float) -> TwoPathState:
    """Source state (sqrt(1+eps)|L> + sqrt(1-eps)|R>)/sqrt(2)."""
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon must be in [0, 1), got {epsilon}")
    return TwoPathState(
        math.sqrt((1.0 + epsilon) / 2.0), math.sqrt((1.0 - epsilon) / 2.0)
    )


def dark_port() -> TwoPathState:
    """The nearly-dark output (|L> - |R>)/sqrt(2) used for postselection."""
    inv = 1.0 / math.sqrt(2.0)
    return TwoPathState(inv, -inv)


@dataclass(frozen=True)
class JointState:
    """Entangled source-path x probe-packet state.

    Each branch carries its path amplitude inside the component weights,
    so the total norm squared is ||branch_L||^2 + ||branch_R||^2 = 1.
    """

    branch_L: WavepacketSuperposition
    branch_R: WavepacketSuperposition

    def total_norm_squared(self) -> float:
        return norm_squared(self.branch_L) + norm_squared(self.branch_R)


def gravitational_kick(
    pre: TwoPathState,
    chi: GaussianComponent,
    kick_R: float,
    kick_L: float = 0.0,
) -> JointState:
    """Entangle the probe packet with the source arms.

    The R arm is the near one: its branch is shifted by -kick_R
    (attraction pulls the probe toward the source, i.e. down the axis).
    By default the far arm leaves the probe untouched; pass a nonzero
    kick_L (see `both_arm_kicks`) to keep the suppressed far-arm pull.
    """
    if abs(abs(complex(chi.weight)) - 1.0) > 1e-12:
        raise ValueError("probe packet must be unit-normalized")
    branch_L = WavepacketSuperposition.of(chi.shifted(-kick_L).scaled(pre.amp_L))
    branch_R = WavepacketSuperposition.of(chi.shifted(-kick_R).scaled(pre.amp_R))
    return JointState(branch_L=branch_L, branch_R=branch_R)


def both_arm_kicks(kick_R: float, d: float, delta_x: float) -> tuple[float, float]:
    """Near- and far-arm kicks for a collinear geometry.

    The far arm sits a superposition size further out, so its pull is
    suppressed by the squared distance ratio.
    """
    if d <= 0 or delta_x < 0:
        raise ValueError("d must be positive and delta_x non-negative")
    return kick_R, kick_R * (d / (d + delta_x)) ** 2


def postselect(
    joint: JointState, post: TwoPathState
) -> tuple[WavepacketSuperposition, float]:
    """Project the source on `post`; return the unnormalized probe state.

    The success probability is the squared norm of the returned state.
    It is returned alongside rather than folded in because callers need
    both, and normalization fails loudly only when actually requested
    at p_success = 0.
    """
    aL = complex(post.amp_L).conjugate()
    aR = complex(post.amp_R).conjugate()
    state = joint.branch_L.scaled(aL) + joint.branch_R.scaled(aR)
    return state, norm_squared(state)


def success_probability(epsilon: float, r: float) -> float:
    """Closed-form dark-port probability (1 - sqrt(1-eps^2) e^{-r^2/4}) / 2.

    Valid for the default protocol: far arm untouched, dark-port
    postselection.  Reduces to eps^2/4 for small eps and r.
    """
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon must be in [0, 1), got {epsilon}")
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r}")
    return (1.0 - math.sqrt(1.0 - epsilon**2) * math.exp(-(r**2) / 4.0)) / 2.0


def weak_value_exact(pre: TwoPathState, post: TwoPathState) -> complex:
    """Weak value of the R-arm projector between pre- and postselection."""
    num = complex(post.amp_R).conjugate() * complex(pre.amp_R)
    den = complex(post.amp_L).conjugate() * complex(pre.amp_L) + num
    if abs(den) <= 1e-15:
        raise OrthogonalStatesError(
            "pre- and postselected states are orthogonal; weak value undefined"
        )
    return num / den


def weak_value_approx(epsilon: float) -> float:
    """Leading-order weak value -1/eps of the near-arm projector."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return -1.0 / epsilon


def postselected_state(
    epsilon: float, r: float
) -> tuple[WavepacketSuperposition, float]:
    """Normalized probe state after a successful dark-port postselection."""
    p_success = success_probability(epsilon, r)
    if p_success <= 0.0:
        raise ZeroSuccessError("dark port is exactly dark; no state to condition on")
    joint = gravitational_kick(preselect(epsilon), GaussianComponent(0.0), kick_R=r)
    state, _ = postselect(joint, dark_port())
    return state.scaled(1.0 / math.sqrt(p_success)), p_success


def postselected_mean_exact(epsilon: float, r: float) -> float:
    """Momentum mean of the postselected probe, exact."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    state, _ = postselected_state(epsilon, r)
    return momentum_mean(state)


def postselected_mean_approx(epsilon: float, r: float) -> float:
    """First-order postselected shift +r/eps (reversed, amplified)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return r / epsilon


def regime_parameter(epsilon: float, r: float) -> float:
    """r / (sqrt(2) eps), the expansion parameter of the shifted-packet picture."""
    return r / (math.sqrt(2.0) * epsilon)


def regime_ok(epsilon: float, r: float) -> bool:
    return regime_parameter(epsilon, r) <= REGIME_LIMIT


# --------------------------------------------------------------------------
# Stern-Gerlach splitting trajectory and the time-dependent impulse
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SplitTrajectory:
    """Piecewise-parabolic arm separation s(t) of the open interferometer.

    Spin flips at t = flip_fraction * tau and (1 - flip_fraction) * tau
    reverse the spin-dependent force; the separation accelerates from 0,
    peaks at delta_x_max at tau/2 and closes symmetrically, with s and
    ds/dt continuous and s in [0, delta_x_max] throughout.
    """

    tau: float
    delta_x_max: float
    flip_fraction: float = 0.25

    def __post_init__(self):
        if not (self.tau > 0 and self.delta_x_max >= 0):
            raise ValueError("tau must be positive and delta_x_max non-negative")
        if not 0.0 < self.flip_fraction < 0.5:
            raise ValueError("flip_fraction must lie strictly between 0 and 0.5")

    @property
    def flip_times(self) -> tuple[float, float]:
        return self.flip_fraction * self.tau, (1.0 - self.flip_fraction) * self.tau

    def separation(self, t):
        """s(t) for scalar or array t in [0, tau]."""
        x = np.asarray(t, dtype=float) / self.tau
        if np.any((x < -1e-12) | (x > 1 + 1e-12)):
            raise ValueError("t outside [0, tau]")
        y = np.minimum(np.clip(x, 0.0, 1.0), 1.0 - np.clip(x, 0.0, 1.0))
        f = self.flip_fraction
        dx = self.delta_x_max
        opening = 2.0 * dx * y * y / f
        closing = dx - 2.0 * dx * (0.5 - y) ** 2 / (0.5 - f)
        s = np.where(y <= f, opening, closing)
        if np.ndim(t) == 0:
            return float(s)
        return s


def sg_trajectory(
    tau: float, delta_x_max: float, flip_fraction: float = 0.25
) -> SplitTrajectory:
    """Build the standard two-flip splitting trajectory."""
    return SplitTrajectory(tau=tau, delta_x_max=delta_x_max, flip_fraction=flip_fraction)


def impulse_time_dependent(
    params: "ExperimentParams",
    trajectory: SplitTrajectory | None = None,
    constants: PhysicalConstants = CODATA2018,
    rel_tol: float = 1e-6,
    offset: float = 0.0,
) -> float:
    """Impulse accumulated while the superposition opens and closes.

    The split is symmetric about the release position, which sits at
    d + delta_x/2 from the probe, so the near arm reaches the closest
    approach d exactly at maximal separation:

        d_R(t) = d + (delta_x - s(t)) / 2 + offset.

    Integrates G m1 m2 / d_R(t)^2 over the full window [0, tau].  The
    geometry choice is a convention; `offset` shifts the release point.
    """
    if trajectory is None:
        trajectory = sg_trajectory(params.tau, params.delta_x)
    gmm = constants.G * params.m1 * params.m2

    def integrand(t: float) -> float:
        d_r = params.d + (params.delta_x - trajectory.separation(t)) / 2.0 + offset
        return gmm / (d_r * d_r)

    tau = params.tau
    breakpoints = [tau / 4.0, tau / 2.0, 3.0 * tau / 4.0]
    value, abserr = quad(integrand, 0.0, tau, points=breakpoints, limit=200)
    if value > 0 and abserr > rel_tol * value:
        raise IntegrationError(
            f"impulse integration achieved relative error {abserr / value:.2e} "
            f"(budget {rel_tol:.0e})",
            estimate=value,
            achieved_error=abserr,
        )
    return value
