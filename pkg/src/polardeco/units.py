"""Physical constants and the fixed set of unit conversions.

Everything inside the package is SI. Quantities given in laboratory units
(amu, Debye, polarizability volumes in cubic angstrom, mPa, ...) are
converted once, at the configuration boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "PhysicalConstants",
    "CONSTANTS",
    "HBAR",
    "K_B",
    "EPSILON0",
    "AMU",
    "DEBYE",
    "UnitError",
    "SUPPORTED_UNITS",
    "to_internal",
    "from_internal",
    "number_density",
    "most_probable_momentum",
]


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA 2018 values (SI).

    Attributes
    ----------
    hbar : float
        Reduced Planck constant, J s.
    k_B : float
        Boltzmann constant, J/K.
    epsilon0 : float
        Vacuum permittivity, C^2/(J m).
    amu : float
        Atomic mass constant, kg.
    debye : float
        1 Debye = 1e-21/c C m.
    """

    hbar: float = 1.054571817e-34
    k_B: float = 1.380649e-23
    epsilon0: float = 8.8541878128e-12
    amu: float = 1.66053906660e-27
    debye: float = 3.33564095198152e-30

    def __post_init__(self):
        for name in ("hbar", "k_B", "epsilon0", "amu", "debye"):
            if not getattr(self, name) > 0:
                raise ValueError(f"constant {name} must be positive")

    @property
    def angstrom3_to_SI_polarizability(self) -> float:
        """Factor turning a polarizability volume alpha/(4 pi eps0) in A^3 into alpha in SI."""
        return 4.0 * math.pi * self.epsilon0 * 1e-30


CONSTANTS = PhysicalConstants()

HBAR = CONSTANTS.hbar
K_B = CONSTANTS.k_B
EPSILON0 = CONSTANTS.epsilon0
AMU = CONSTANTS.amu
DEBYE = CONSTANTS.debye


class UnitError(ValueError):
    """Raised for an unsupported unit tag."""


# multiplicative factors to SI
_FACTORS = {
    "amu": CONSTANTS.amu,
    "K": 1.0,
    "Pa": 1.0,
    "mPa": 1e-3,
    "Debye": CONSTANTS.debye,
    "A3": CONSTANTS.angstrom3_to_SI_polarizability,
    "nm": 1e-9,
    "m/s": 1.0,
}

_ALIASES = {
    "D": "Debye",
    "debye": "Debye",
    "Å³": "A3",
    "A^3": "A3",
    "angstrom3": "A3",
    "m s-1": "m/s",
}

SUPPORTED_UNITS = tuple(_FACTORS)


def _factor(unit: str) -> float:
    key = _ALIASES.get(unit, unit)
    try:
        return _FACTORS[key]
    except KeyError:
        raise UnitError(
            f"unknown unit tag {unit!r}; supported: {', '.join(SUPPORTED_UNITS)}"
        ) from None


def to_internal(value, unit: str):
    """Convert ``value`` given in ``unit`` to SI.

    >>> round(to_internal(1.0, "Debye") / 1e-30, 5)
    3.33564
    """
    return value * _factor(unit)


def from_internal(value, unit: str):
    """Inverse of :func:`to_internal`."""
    return value / _factor(unit)


def number_density(pressure: float, temperature: float) -> float:
    """Ideal-gas number density n = P/(k_B T) in m^-3 (pressure in Pa)."""
    if pressure <= 0 or temperature <= 0:
        raise ValueError("pressure and temperature must be positive")
    return pressure / (K_B * temperature)


def most_probable_momentum(mass: float, temperature: float) -> float:
    """p_g = sqrt(2 m k_B T) of a Maxwell-Boltzmann gas."""
    return math.sqrt(2.0 * mass * K_B * temperature)
