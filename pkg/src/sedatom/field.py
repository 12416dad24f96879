"""Background radiation spectra.

A spectrum is represented as rho(omega) = g(omega) * rho0(omega) *
(1 + gamma_a(omega)): ``g`` is the multiplicative mode-density factor
(1 in free space, < 1 inside a cavity), ``gamma_a`` the additive excitation
above the zero-point level (0 for the pure ZPF, the Planck factor for a
thermal field).  The two factors are kept independent so thermal-in-cavity
cases compose.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .errors import DivergenceError, DomainError, ValidationError


def zpf_density(omega, constants: PhysicalConstants = DEFAULT_CONSTANTS):
    """Zero-point spectral energy density hbar omega^3 / 2 pi^2 c^3."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise DomainError("zpf_density requires omega >= 0")
    out = constants.hbar * omega**3 / (2.0 * math.pi**2 * constants.c**3)
    return float(out) if out.ndim == 0 else out


def thermal_gamma_a(omega: float, temperature_k: float,
                    constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Planck excitation factor 2 / (exp(hbar omega / kT) - 1).

    Returns 0 at T = 0.  Raises on omega = 0 with T > 0, where the factor
    diverges (infrared divergence is signaled, not silently returned).
    """
    if omega < 0:
        raise DomainError("thermal_gamma_a requires omega >= 0")
    if temperature_k < 0:
        raise DomainError("temperature must be >= 0")
    if temperature_k == 0.0:
        return 0.0
    if omega == 0.0:
        raise DivergenceError("thermal gamma_a diverges at omega = 0 for T > 0")
    x = constants.hbar * omega / constants.thermal_energy(temperature_k)
    if x > 700.0:
        return 2.0 * math.exp(-x)
    # expm1 keeps precision for small x.
    return 2.0 / math.expm1(x)


def equilibrium_gamma_a(delta_e: float, temperature_k: float,
                        include_stimulated_emission: bool = True,
                        constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Excitation factor solving two-level detailed balance.

    With stimulated emission included, solves N_n gamma_a = N_k (2 + gamma_a)
    with N_k/N_n = exp(dE/kT), which gives the Planck form.  With it omitted,
    the balance closes on the spontaneous channel alone and yields the Wien
    form 2 exp(-dE/kT).
    """
    if delta_e <= 0:
        raise DomainError("equilibrium_gamma_a requires delta_e > 0")
    if temperature_k <= 0:
        raise DomainError("equilibrium_gamma_a requires T > 0")
    x = delta_e / constants.thermal_energy(temperature_k)
    if include_stimulated_emission:
        # N_n gamma_a = N_k (2 + gamma_a)  =>  gamma_a (e^x - 1) = 2
        if x > 700.0:
            return 2.0 * math.exp(-x)
        return 2.0 / math.expm1(x)
    return 2.0 * math.exp(-x)


def cavity_mask(bands: Sequence[tuple]) -> Callable:
    """Piecewise-constant mode-density factor from (lo, hi, g) bands.

    Defaults to 1 outside all bands.  Bands must not overlap and g >= 0.
    """
    bands = [(float(lo), float(hi), float(g)) for lo, hi, g in bands]
    for lo, hi, g in bands:
        if not (lo < hi):
            raise ValidationError(f"band ({lo}, {hi}) is empty")
        if g < 0:
            raise ValidationError("band g_value must be >= 0")
    ordered = sorted(bands)
    for (_, hi1, _), (lo2, _, _) in zip(ordered, ordered[1:]):
        if lo2 < hi1:
            raise ValidationError("cavity bands overlap")

    def g_of_omega(omega: float) -> float:
        for lo, hi, g in ordered:
            if lo <= omega < hi:
                return g
        return 1.0

    return g_of_omega


def _one(_omega: float) -> float:
    return 1.0


def _zero(_omega: float) -> float:
    return 0.0


@dataclass(frozen=True)
class FieldSpectrum:
    """Evaluable background spectrum rho = g * rho0 * (1 + gamma_a)."""

    g: Callable = _one
    gamma_a: Callable = _zero
    constants: PhysicalConstants = DEFAULT_CONSTANTS

    def rho(self, omega: float) -> float:
        """Spectral energy density at omega."""
        return (self.g(omega) * zpf_density(omega, self.constants)
                * (1.0 + self.gamma_a(omega)))

    def gamma(self, omega: float) -> float:
        """Total enhancement factor gamma = 1 + gamma_a (no mode-density)."""
        return 1.0 + self.gamma_a(omega)

    @classmethod
    def zpf(cls, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> "FieldSpectrum":
        return cls(constants=constants)

    @classmethod
    def thermal(cls, temperature_k: float,
                constants: PhysicalConstants = DEFAULT_CONSTANTS) -> "FieldSpectrum":
        if temperature_k < 0:
            raise ValidationError("temperature must be >= 0")

        def gamma_a(omega, _t=temperature_k, _c=constants):
            return thermal_gamma_a(omega, _t, _c)

        return cls(gamma_a=gamma_a, constants=constants)

    @classmethod
    def uniform_excitation(cls, gamma_a_value: float,
                           constants: PhysicalConstants = DEFAULT_CONSTANTS) -> "FieldSpectrum":
        """Frequency-independent excitation gamma_a = const >= 0."""
        if gamma_a_value < 0:
            raise ValidationError("gamma_a must be >= 0")
        return cls(gamma_a=lambda _omega, _v=gamma_a_value: _v,
                   constants=constants)

    @classmethod
    def from_csv(cls, path,
                 constants: PhysicalConstants = DEFAULT_CONSTANTS) -> "FieldSpectrum":
        """Tabulated gamma_a(omega) from a two-column CSV with a header line.

        Columns: omega_atomic_units, gamma_a.  Linear interpolation between
        samples, 0 outside the tabulated range; interpolation error is the
        caller's responsibility.
        """
        omegas, gammas = [], []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            next(reader)  # header
            for row in reader:
                if not row:
                    continue
                omegas.append(float(row[0]))
                gammas.append(float(row[1]))
        if len(omegas) < 2:
            raise ValidationError("spectrum CSV needs at least two samples")
        om = np.asarray(omegas)
        ga = np.asarray(gammas)
        if np.any(np.diff(om) <= 0):
            raise ValidationError("spectrum CSV omega column must increase")
        if np.any(ga < 0):
            raise ValidationError("spectrum CSV gamma_a must be >= 0")

        def gamma_a(omega, _om=om, _ga=ga):
            return float(np.interp(omega, _om, _ga, left=0.0, right=0.0))

        return cls(gamma_a=gamma_a, constants=constants)

    def with_cavity(self, bands: Sequence[tuple]) -> "FieldSpectrum":
        """Apply a piecewise-constant cavity mask on top of the current g."""
        mask = cavity_mask(bands)
        old_g = self.g

        def g(omega, _m=mask, _g=old_g):
            return _m(omega) * _g(omega)

        return replace(self, g=g)

    def with_uniform_g(self, g0: float) -> "FieldSpectrum":
        """Scale the mode density by a constant factor g0 >= 0."""
        if g0 < 0:
            raise ValidationError("g0 must be >= 0")
        old_g = self.g
        return replace(self, g=lambda omega, _g=old_g, _s=g0: _s * _g(omega))
