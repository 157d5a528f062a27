"""Experiment parameters and the derived feasibility chain, all in SI.

This module owns every dimensionful number.  It hands the dimensionless
ratios r = delta_p / big_delta_p and epsilon to the state algebra and
converts back only for reporting; squared SI momenta (~1e-54) never
appear downstream.

Two presets ship with the library:

* "paper-A": 1e-12 kg probe in a 1 rad/s trap, squeezing 0.35;
* "paper-B": 1e-14 kg probe in a 1e4 rad/s trap, squeezing 1e-3;

both with a 1e-14 kg source at 20 um closest approach, 50 um
superposition, 1 s of interferometry, bias 0.01 and 10 s of free
flight.  Trap frequencies are angular (rad/s).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace

from . import observables, protocol
from .constants import CODATA2018, DEFAULT_DENSITY, PhysicalConstants
from .gaussian import GaussianComponent, WavepacketSuperposition

__all__ = [
    "ExperimentParams",
    "DerivedQuantities",
    "Violation",
    "PRESETS",
    "get_preset",
    "params_from_dict",
    "load_params_file",
    "params_to_dict",
    "delta_p",
    "momentum_width",
    "epsilon_required",
    "radius_from_mass",
    "displacement_and_spread",
    "kick_ratio",
    "validate",
    "derive",
]


@dataclass(frozen=True)
class ExperimentParams:
    """Physical inputs of the proposal (SI units)."""

    m1: float       # source mass, kg
    m2: float       # probe mass, kg
    d: float        # closest approach, m
    delta_x: float  # superposition size, m
    tau: float      # interferometry duration, s
    omega: float    # trap angular frequency, rad/s
    eta: float      # momentum squeezing factor
    epsilon: float  # preselection bias
    T: float        # free flight before readout, s
    density: float = DEFAULT_DENSITY  # probe material density, kg/m^3

    def replace(self, **kwargs) -> "ExperimentParams":
        return replace(self, **kwargs)


_FIELD_NAMES = tuple(f.name for f in fields(ExperimentParams))
_REQUIRED = tuple(n for n in _FIELD_NAMES if n != "density")

_PAPER_COMMON = dict(
    m1=1e-14, d=20e-6, delta_x=50e-6, tau=1.0, epsilon=0.01, T=10.0
)

PRESETS: dict[str, ExperimentParams] = {
    "paper-A": ExperimentParams(m2=1e-12, omega=1.0, eta=0.35, **_PAPER_COMMON),
    "paper-B": ExperimentParams(m2=1e-14, omega=1e4, eta=1e-3, **_PAPER_COMMON),
}


def get_preset(name: str) -> ExperimentParams:
    try:
        return PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise ValueError(f"unknown preset {name!r} (available: {known})") from None


def params_from_dict(data: dict) -> ExperimentParams:
    """Build parameters from a JSON-style mapping with exact field names."""
    if not isinstance(data, dict):
        raise ValueError("parameter document must be a JSON object")
    unknown = sorted(set(data) - set(_FIELD_NAMES))
    if unknown:
        raise ValueError(f"unknown parameter keys: {', '.join(unknown)}")
    missing = sorted(set(_REQUIRED) - set(data))
    if missing:
        raise ValueError(f"missing parameter keys: {', '.join(missing)}")
    values = {}
    for key, raw in data.items():
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ValueError(f"parameter {key!r} must be a number, got {raw!r}")
        values[key] = float(raw)
    return ExperimentParams(**values)


def load_params_file(path) -> ExperimentParams:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return params_from_dict(data)


def params_to_dict(params: ExperimentParams) -> dict:
    return asdict(params)


# --------------------------------------------------------------------------
# Derived scalars
# --------------------------------------------------------------------------


def delta_p(params: ExperimentParams, constants: PhysicalConstants = CODATA2018) -> float:
    """Impulse G m1 m2 tau / d^2 picked up at constant closest approach."""
    return constants.G * params.m1 * params.m2 * params.tau / params.d**2


def momentum_width(
    params: ExperimentParams, constants: PhysicalConstants = CODATA2018
) -> float:
    """Squeezed packet width eta * sqrt(m2 omega hbar / 2)."""
    return params.eta * math.sqrt(params.m2 * params.omega * constants.hbar / 2.0)


def epsilon_required(
    params: ExperimentParams, constants: PhysicalConstants = CODATA2018
) -> float:
    """Bias that puts the postselected shift at a tenth of the packet width.

    Written out explicitly; algebraically identical to
    10 * delta_p / momentum_width.
    """
    return (
        10.0
        * constants.G
        * params.m1
        * math.sqrt(2.0 * params.m2 / (params.omega * constants.hbar))
        * params.tau
        / (params.eta * params.d**2)
    )


def radius_from_mass(mass: float, density: float) -> float:
    """Radius of a sphere of the given mass and density."""
    if mass < 0 or density <= 0:
        raise ValueError("mass must be >= 0 and density > 0")
    return (3.0 * mass / (4.0 * math.pi * density)) ** (1.0 / 3.0)


def displacement_and_spread(
    params: ExperimentParams, constants: PhysicalConstants = CODATA2018
) -> tuple[float, float]:
    """Far-field displacement (delta_p/eps) T/m2 and spread big_delta_p T/m2."""
    if params.epsilon <= 0:
        raise ValueError("epsilon must be positive")
    flight = params.T / params.m2
    return (
        delta_p(params, constants) / params.epsilon * flight,
        momentum_width(params, constants) * flight,
    )


def kick_ratio(
    params: ExperimentParams, constants: PhysicalConstants = CODATA2018
) -> float:
    """Dimensionless kick r = delta_p / big_delta_p handed to the state algebra."""
    return delta_p(params, constants) / momentum_width(params, constants)


@dataclass(frozen=True)
class Violation:
    """One broken parameter rule; data, not an exception."""

    field: str
    rule: str

    def __str__(self) -> str:
        return f"{self.field}: {self.rule}"


def validate(
    params: ExperimentParams, constants: PhysicalConstants = CODATA2018
) -> list[Violation]:
    """Check every parameter invariant; empty list means all good."""
    v: list[Violation] = []
    for name in ("m1", "m2", "d", "delta_x", "tau", "omega", "T", "density"):
        if not getattr(params, name) > 0:
            v.append(Violation(name, "must be strictly positive"))
    if not 0.0 < params.epsilon < 1.0:
        v.append(Violation("epsilon", "out of (0, 1)"))
    if not 0.0 < params.eta <= 1.0:
        v.append(Violation("eta", "out of (0, 1]"))
    if params.m2 > 0 and params.density > 0:
        radius = radius_from_mass(params.m2, params.density)
        if params.d <= radius:
            v.append(
                Violation(
                    "d",
                    f"probe radius exceeds separation ({radius:.3e} m >= {params.d:.3e} m)",
                )
            )
    return v


@dataclass(frozen=True)
class DerivedQuantities:
    """Every scalar of the feasibility chain.

    `p_discriminate` is the quick squared-shift estimate (r/epsilon)^2
    that run counts are conventionally quoted with; the overlap-exact
    value (about half of it in the weak regime) ships alongside as
    `p_discriminate_exact`, and both run counts are reported.
    """

    delta_p: float            # kg m/s
    big_delta_p: float        # kg m/s
    sigma: float              # m, position width hbar / big_delta_p
    r: float                  # dimensionless kick delta_p / big_delta_p
    epsilon_required: float
    p_success: float
    p_discriminate: float
    p_discriminate_exact: float
    n_runs: int
    n_runs_exact: int
    displacement_T: float     # m
    spread_T: float           # m
    probe_radius: float       # m
    target_successes: int


def derive(
    params: ExperimentParams,
    constants: PhysicalConstants = CODATA2018,
    target_successes: int = 10,
) -> DerivedQuantities:
    """Evaluate the whole feasibility chain at the given parameters."""
    dp = delta_p(params, constants)
    width = momentum_width(params, constants)
    r = dp / width
    eps = params.epsilon
    p_success = protocol.success_probability(eps, r)
    # The squared-shift estimate is not a probability once the shift
    # passes the packet width; saturate it for the run-count chain.
    p_disc = min(observables.leading_order_discrimination(eps, r), 1.0)
    post_state, _ = protocol.postselected_state(eps, r)
    chi = WavepacketSuperposition.of(GaussianComponent(0.0))
    p_disc_exact = observables.discrimination_probability(chi, post_state)
    displacement, spread = displacement_and_spread(params, constants)
    return DerivedQuantities(
        delta_p=dp,
        big_delta_p=width,
        sigma=constants.hbar / width,
        r=r,
        epsilon_required=epsilon_required(params, constants),
        p_success=p_success,
        p_discriminate=p_disc,
        p_discriminate_exact=p_disc_exact,
        n_runs=observables.runs_estimate(p_success, p_disc, target_successes),
        n_runs_exact=observables.runs_estimate(p_success, p_disc_exact, target_successes),
        displacement_T=displacement,
        spread_T=spread,
        probe_radius=radius_from_mass(params.m2, params.density),
        target_successes=target_successes,
    )
