"""Fundamental physical constants (CODATA 2018)."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    """Gravitational constant and reduced Planck constant, SI units."""

    G: float = 6.67430e-11        # m^3 kg^-1 s^-2
    hbar: float = 1.054571817e-34  # J s

    def __post_init__(self):
        if not (self.G > 0 and self.hbar > 0):
            raise ValueError("physical constants must be strictly positive")


CODATA2018 = PhysicalConstants()

# Standard solid density used when none is given (diamond).
DEFAULT_DENSITY = 3500.0  # kg/m^3
