"""Physical constants, unit system, and conversions.

All internal computation uses Hartree atomic units (hbar = m_e = e = 1,
c = 1/alpha), which keeps the rate and shift formulas free of large scale
factors.  Conversion to laboratory units goes through the CODATA factors
below.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import UnitError, ValidationError

# CODATA 2018 conversion factors (exact or recommended values).
FINE_STRUCTURE_ALPHA = 7.2973525693e-3
HARTREE_EV = 27.211386245988
HARTREE_JOULE = 4.3597447222071e-18
HARTREE_MHZ = 6.579683920502e9        # E_h / h, in MHz
HARTREE_KELVIN = 315775.02480407      # E_h / k_B
AU_TIME_S = 2.4188843265857e-17       # hbar / E_h
BOHR_M = 5.29177210903e-11

#: k_B in Hartree per Kelvin.
KB_HARTREE_PER_K = 1.0 / HARTREE_KELVIN


@dataclass(frozen=True)
class PhysicalConstants:
    """Immutable constants in Hartree atomic units.

    ``alpha`` is configurable for sensitivity studies; everything derived
    (c, tau, mc^2) follows from it.
    """

    alpha: float = FINE_STRUCTURE_ALPHA
    hbar: float = 1.0
    electron_mass: float = 1.0
    elementary_charge: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValidationError("alpha must be positive")
        # tau = 2 e^2 / 3 m c^3 must reduce to (2/3) alpha^3 in these units.
        tau_direct = (2.0 * self.elementary_charge**2
                      / (3.0 * self.electron_mass * self.c**3))
        if abs(tau_direct - self.tau) > 1e-15 * self.tau:
            raise ValidationError("tau identity violated; inconsistent constants")
        if abs(self.c * self.alpha - 1.0) > 1e-15:
            raise ValidationError("c * alpha must equal 1 in internal units")

    @property
    def c(self) -> float:
        """Speed of light, 1/alpha in atomic units."""
        return 1.0 / self.alpha

    @property
    def tau(self) -> float:
        """Radiation-reaction time 2e^2/3mc^3 = (2/3) alpha^3."""
        return (2.0 / 3.0) * self.alpha**3

    @property
    def mc2(self) -> float:
        """Electron rest energy m c^2 = 1/alpha^2 Hartree."""
        return self.electron_mass * self.c**2

    @property
    def boltzmann_kB(self) -> float:
        """k_B in Hartree per Kelvin."""
        return KB_HARTREE_PER_K

    def thermal_energy(self, temperature_k: float) -> float:
        """k_B T in Hartree."""
        return self.boltzmann_kB * temperature_k


DEFAULT_CONSTANTS = PhysicalConstants()

# Unit registry: tag -> (dimension, factor to the internal base unit of that
# dimension).  Base units: hartree (energy), au_time (time), bohr (length).
_UNITS = {
    "hartree": ("energy", 1.0),
    "ev": ("energy", 1.0 / HARTREE_EV),
    "mhz": ("energy", 1.0 / HARTREE_MHZ),
    "kelvin": ("energy", 1.0 / HARTREE_KELVIN),
    "joule": ("energy", 1.0 / HARTREE_JOULE),
    "au_time": ("time", 1.0),
    "s": ("time", 1.0 / AU_TIME_S),
    "ns": ("time", 1e-9 / AU_TIME_S),
    "bohr": ("length", 1.0),
    "m": ("length", 1.0 / BOHR_M),
    "nm": ("length", 1e-9 / BOHR_M),
    "angstrom": ("length", 1e-10 / BOHR_M),
}


def convert(value: float, from_unit: str, to_unit: str) -> float:
    """Convert ``value`` between unit tags; exact factor multiplication."""
    try:
        dim_from, f_from = _UNITS[from_unit.lower()]
    except KeyError:
        raise UnitError(f"unknown unit {from_unit!r}") from None
    try:
        dim_to, f_to = _UNITS[to_unit.lower()]
    except KeyError:
        raise UnitError(f"unknown unit {to_unit!r}") from None
    if dim_from != dim_to:
        raise UnitError(
            f"incompatible dimensions: {from_unit!r} is {dim_from}, "
            f"{to_unit!r} is {dim_to}")
    return value * f_from / f_to


@dataclass(frozen=True)
class UnitSystem:
    """Conversion bundle for the internal Hartree-atomic-unit representation."""

    tag: str = "hartree_atomic"
    hartree_to_ev: float = HARTREE_EV
    hartree_to_mhz: float = HARTREE_MHZ
    hartree_to_kelvin: float = HARTREE_KELVIN
    au_time_to_s: float = AU_TIME_S
    bohr_to_m: float = BOHR_M

    def to_si_seconds(self, t_au: float) -> float:
        return t_au * self.au_time_to_s

    def from_si_seconds(self, t_s: float) -> float:
        return t_s / self.au_time_to_s

    def rate_to_per_second(self, rate_au: float) -> float:
        return rate_au / self.au_time_to_s
