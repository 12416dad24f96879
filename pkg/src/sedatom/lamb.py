"""Radiative energy shifts.

The total shift of a state splits algebraically into a state-independent
free-particle part (the kinetic energy the background field impresses on any
charge) and the state-dependent Lamb shift proper.  Three routes to the
proper part are provided: the principal-value integral per partner, its
closed-form high-cutoff logarithm, and the contact-term approximation for
hydrogenic s states.  A fourth route recovers the total shift from the
dynamic polarizability, as an independent cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.integrate import quad

from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .errors import (DivergenceError, DomainError, PoleError,
                     UnsupportedRouteError, ValidationError)
from .field import FieldSpectrum, thermal_gamma_a
from .spectra import SpectralData

_QUAD_LIMIT = 400


@dataclass(frozen=True)
class CutoffPolicy:
    """High-frequency cutoff and resonance regularization for shift integrals."""

    omega_c: Optional[float] = None      # None -> m c^2 / hbar
    regularization: str = "principal_value"   # or "lorentzian"

    def __post_init__(self):
        if self.regularization not in ("principal_value", "lorentzian"):
            raise ValidationError(
                f"unknown regularization {self.regularization!r}")
        if self.omega_c is not None and self.omega_c <= 0:
            raise ValidationError("omega_c must be positive")

    def resolve(self, constants: PhysicalConstants) -> float:
        return self.omega_c if self.omega_c is not None else constants.mc2

    def validate_for(self, s: SpectralData, n, constants: PhysicalConstants):
        wc = self.resolve(constants)
        wmax = max((abs(w) for _k, w, _x in s.partners(n)), default=0.0)
        if wc <= wmax:
            raise DomainError(
                f"cutoff {wc:g} must exceed the largest transition frequency "
                f"{wmax:g} in the basis")
        return wc


@dataclass
class ShiftResult:
    """Decomposed radiative shift of one state (atomic units)."""

    state: int
    state_label: str
    total: float
    free_particle: float
    lamb_proper: float
    contributions: List[Tuple[int, float, float]]  # (k, omega_kn, contribution)
    cutoff: float
    route: str
    basis_size: int
    meta: dict = field(default_factory=dict)


def pv_integral(omega_kn: float, omega_c: float,
                weight: Optional[Callable] = None) -> float:
    """PV integral of w(omega) * omega / (omega_kn^2 - omega^2) on [0, omega_c].

    Without a weight the closed form -(1/2) ln((wc^2 - a^2)/a^2) is used;
    with a weight the pole at |omega_kn| is excised symmetrically and the
    excision radius Richardson-extrapolated to zero.
    """
    a = abs(omega_kn)
    if a == 0.0 or a >= omega_c:
        raise DomainError(
            f"pole |omega_kn|={a:g} must lie inside (0, omega_c={omega_c:g})")
    if weight is None:
        return -0.5 * math.log((omega_c**2 - a**2) / a**2)
    return _pv_numeric(a, omega_c, weight)


def _pv_numeric(a: float, wc: float, weight: Callable) -> float:
    def f(w):
        return weight(w) * w / ((a - w) * (a + w))

    def excised(h):
        left, _ = quad(f, 0.0, a - h, limit=_QUAD_LIMIT, epsabs=1e-13,
                       epsrel=1e-11)
        right, _ = quad(f, a + h, wc, limit=_QUAD_LIMIT, epsabs=1e-13,
                        epsrel=1e-11)
        return left + right

    h0 = 1e-2 * min(a, wc - a)
    i1 = excised(h0)
    i2 = excised(h0 / 2.0)
    i3 = excised(h0 / 4.0)
    # Excision error is c1 h + c3 h^3 + ... (even orders cancel by symmetry
    # of the pole); two Richardson levels remove the h and h^3 terms.
    a1 = 2.0 * i2 - i1
    a2 = 2.0 * i3 - i2
    return (8.0 * a2 - a1) / 7.0


def _shift_coefficient(constants: PhysicalConstants) -> float:
    # 2 e^2 / 3 pi c^3 = m tau / pi
    return (2.0 * constants.elementary_charge**2
            / (3.0 * math.pi * constants.c**3))


def total_shift(s: SpectralData, n, cutoff: CutoffPolicy = CutoffPolicy(),
                constants: PhysicalConstants = DEFAULT_CONSTANTS) -> ShiftResult:
    """Total radiative shift with its per-partner decomposition.

    The omega^3 kernel is split as -omega + omega_kn^2 omega/(omega_kn^2 -
    omega^2), so total == free_particle + lamb_proper holds by construction.
    The Larmor term contributes nothing to the shift of a stationary state.
    """
    n_idx = s.index(n)
    wc = cutoff.validate_for(s, n_idx, constants)
    coeff = _shift_coefficient(constants)
    contributions = []
    fp_terms = []
    proper_terms = []
    for k, w_nk, x2 in s.partners(n_idx):
        w_kn = -w_nk
        if w_kn == 0.0 or x2 == 0.0:
            continue
        ipv = pv_integral(w_kn, wc)
        fp_k = coeff * x2 * w_kn * (wc**2 / 2.0)
        proper_k = -coeff * x2 * w_kn**3 * ipv
        contributions.append((k, w_kn, fp_k + proper_k))
        fp_terms.append(fp_k)
        proper_terms.append(proper_k)
    fp = math.fsum(fp_terms)
    proper = math.fsum(proper_terms)
    return ShiftResult(state=n_idx, state_label=str(s.labels[n_idx]),
                       total=fp + proper, free_particle=fp, lamb_proper=proper,
                       contributions=contributions, cutoff=wc, route="direct",
                       basis_size=s.basis_size)


def free_particle_shift(cutoff: CutoffPolicy = CutoffPolicy(),
                        spectrum: Optional[FieldSpectrum] = None,
                        constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """State-independent shift (e^2 hbar / pi m c^3) int g(w) (1+gamma_a) w dw.

    For the pure ZPF with the standard cutoff this is (alpha/2 pi) m c^2.
    The zero-point part is evaluated in closed form; any excitation gamma_a
    is added by quadrature (raises if that integral diverges).
    """
    wc = cutoff.resolve(constants)
    pref = (constants.elementary_charge**2 * constants.hbar
            / (math.pi * constants.electron_mass * constants.c**3))
    if spectrum is None:
        return pref * wc**2 / 2.0

    def zpf_part(w):
        return spectrum.g(w) * w

    def excited_part(w):
        return spectrum.g(w) * spectrum.gamma_a(w) * w

    base, _ = quad(zpf_part, 0.0, wc, limit=_QUAD_LIMIT)
    return pref * base + excited_free_particle_delta(spectrum, cutoff,
                                                     constants)


def excited_free_particle_delta(spectrum: FieldSpectrum,
                                cutoff: CutoffPolicy = CutoffPolicy(),
                                constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Excitation increment (e^2 hbar / pi m c^3) int g gamma_a w dw alone.

    Kept separate from the zero-point part because the increment can be
    fourteen orders of magnitude below it; computing it directly avoids the
    cancellation a subtraction of two totals would suffer.
    """
    wc = cutoff.resolve(constants)
    pref = (constants.elementary_charge**2 * constants.hbar
            / (math.pi * constants.electron_mass * constants.c**3))

    def excited_part(w):
        return spectrum.g(w) * spectrum.gamma_a(w) * w

    extra = _decade_quad(excited_part, wc)
    if not math.isfinite(extra):
        raise DivergenceError("excitation integral for the free-particle "
                              "shift does not converge")
    return pref * extra


def _decade_quad(f, upper: float) -> float:
    """Integrate f on (0, upper] decade by decade.

    A thermal excitation factor lives many orders of magnitude below a
    relativistic cutoff; a single adaptive pass over [0, upper] never
    samples it.  Splitting at powers of ten guarantees every scale is seen.
    """
    edges = [upper * 10.0**(-k) for k in range(18, -1, -1)]
    pieces = [quad(f, lo, hi, limit=_QUAD_LIMIT, epsabs=0.0, epsrel=1e-12)[0]
              for lo, hi in zip(edges, edges[1:])]
    return math.fsum(pieces)


def thermal_free_particle_delta(temperature_k: float,
                                constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Closed-form thermal increment (pi alpha / 3 m c^2) (k_B T)^2."""
    kt = constants.thermal_energy(temperature_k)
    return (math.pi * constants.alpha
            / (3.0 * constants.electron_mass * constants.c**2)) * kt * kt


def lamb_proper(s: SpectralData, n, cutoff: CutoffPolicy = CutoffPolicy(),
                route: str = "direct", log_factor: Optional[float] = None,
                constants: PhysicalConstants = DEFAULT_CONSTANTS) -> ShiftResult:
    """Lamb shift proper by one of three routes.

    "direct": principal-value integral per partner (Lorentzian resonance
    regularization if the policy selects it); "bethe_log": closed-form
    ln|mc^2 / hbar omega_kn| per partner, asymptotically equal to direct for
    omega_c >> |omega_kn|; "laplacian_V": hydrogenic s-state contact term,
    with the k-independent log factor supplied by the caller.
    """
    n_idx = s.index(n)
    wc = cutoff.validate_for(s, n_idx, constants)
    coeff = _shift_coefficient(constants)

    if route == "laplacian_V":
        return _lamb_laplacian(s, n_idx, wc, log_factor, constants)
    if route not in ("direct", "bethe_log"):
        raise UnsupportedRouteError(f"unknown route {route!r}")

    contributions = []
    for k, w_nk, x2 in s.partners(n_idx):
        w_kn = -w_nk
        if w_kn == 0.0 or x2 == 0.0:
            continue
        if route == "bethe_log":
            term = coeff * x2 * w_kn**3 * math.log(wc / abs(w_kn))
        elif cutoff.regularization == "lorentzian":
            term = -coeff * x2 * w_kn**3 * _lorentzian_integral(
                w_kn, wc, constants.tau)
        else:
            term = -coeff * x2 * w_kn**3 * pv_integral(w_kn, wc)
        contributions.append((k, w_kn, term))
    proper = math.fsum(t for _k, _w, t in contributions)
    return ShiftResult(state=n_idx, state_label=str(s.labels[n_idx]),
                       total=math.nan, free_particle=math.nan,
                       lamb_proper=proper, contributions=contributions,
                       cutoff=wc, route=route, basis_size=s.basis_size)


def _lorentzian_integral(w_kn: float, wc: float, tau: float) -> float:
    """int_0^wc w (a^2-w^2) / ((a^2-w^2)^2 + tau^2 w^6) dw; PV at tau -> 0."""
    a = abs(w_kn)

    def f(w):
        d = (a - w) * (a + w)
        return w * d / (d * d + tau**2 * w**6)

    near = [max(a - 10 * tau * a**2, 0.0), a, min(a + 10 * tau * a**2, wc)]
    val, _ = quad(f, 0.0, wc, points=sorted(set(near)), limit=_QUAD_LIMIT)
    return val


def _lamb_laplacian(s: SpectralData, n_idx: int, wc: float,
                    log_factor: Optional[float],
                    constants: PhysicalConstants) -> ShiftResult:
    if s.meta.get("backend") != "hydrogen":
        raise UnsupportedRouteError(
            "laplacian_V route is only defined for the Coulomb backend")
    if log_factor is None:
        raise ValidationError("laplacian_V route needs a caller-supplied "
                              "log_factor")
    if s.angular_momenta is None or s.angular_momenta[n_idx] != 0:
        raise UnsupportedRouteError(
            "laplacian_V contact term vanishes except for s states")
    psi0_sq = _psi0_squared(s, n_idx)
    z = s.meta["Z"]
    e2 = constants.elementary_charge**2
    # (alpha hbar^2 L / 3 pi c^2 m^2) <grad^2 V>, <grad^2 V> = 4 pi Z e^2 |psi(0)|^2
    proper = (constants.alpha * constants.hbar**2 * log_factor
              / (3.0 * math.pi * constants.c**2 * constants.electron_mass**2)
              * 4.0 * math.pi * z * e2 * psi0_sq)
    return ShiftResult(state=n_idx, state_label=str(s.labels[n_idx]),
                       total=math.nan, free_particle=math.nan,
                       lamb_proper=proper, contributions=[], cutoff=wc,
                       route="laplacian_V", basis_size=s.basis_size,
                       meta={"psi0_squared": psi0_sq})


def _psi0_squared(s: SpectralData, n_idx: int) -> float:
    """|psi_n(0)|^2 for an s state, from u(r)/r extrapolated to the origin."""
    if s.wavefunctions is None or n_idx not in s.wavefunctions:
        raise DomainError("no stored radial wavefunction for state")
    u = s.wavefunctions[n_idx]
    r = s.grid
    # u/r -> psi(0) sqrt(4 pi) as r -> 0, with analytic O(r) and O(r^2)
    # corrections; fit a quadratic outside the inner boundary layer of the
    # hard wall at r_min and take the intercept.
    z = s.meta.get("Z", 1.0)
    mask = (r > 50.0 * r[0]) & (r < 0.2 / z)
    if mask.sum() < 10:
        raise DomainError("grid too coarse near the origin for psi(0)")
    coeffs = np.polyfit(r[mask], u[mask] / r[mask], 2)
    ratio = coeffs[-1]
    return float(ratio * ratio / (4.0 * math.pi))


def polarizability(s: SpectralData, n, omega: float,
                   regularized: bool = False,
                   constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Kramers-Heisenberg polarizability (2/dim hbar) sum |d|^2 w_mn/(w_mn^2-w^2).

    The 1/dim factor is the orientation average, so the 1D oscillator
    recovers the classical static value e^2 / m w0^2.  Off resonance only,
    unless ``regularized`` selects the Lorentzian denominator carrying the
    radiation-reaction width.
    """
    n_idx = s.index(n)
    e2 = constants.elementary_charge**2
    tau = constants.tau
    total = 0.0
    for m_k, w_nm, x2 in s.partners(n_idx):
        w_mn = -w_nm
        if x2 == 0.0:
            continue
        d = w_mn * w_mn - omega * omega
        if regularized:
            total += x2 * w_mn * d / (d * d + tau**2 * omega**6)
        else:
            if abs(d) <= 1e-12 * max(w_mn * w_mn, omega * omega):
                raise PoleError(
                    f"omega={omega:g} hits the resonance with partner "
                    f"{s.labels[m_k]!r}; select Lorentzian regularization")
            total += x2 * w_mn / d
    return 2.0 * e2 * total / (s.dimension * constants.hbar)


def refractive_index(s: SpectralData, n, omega: float,
                     constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """n(omega) = 1 + 2 pi alpha_n(omega) in the dilute approximation."""
    return 1.0 + 2.0 * math.pi * polarizability(s, n, omega,
                                                constants=constants)


def total_shift_from_polarizability(s: SpectralData, n,
                                    cutoff: CutoffPolicy = CutoffPolicy(),
                                    constants: PhysicalConstants = DEFAULT_CONSTANTS) -> ShiftResult:
    """Total shift as -2 pi PV int rho0(w) alpha_n(w) dw (mode-shift route).

    Evaluated per partner by numeric PV quadrature with the w^3 kernel, so
    it is an independent check on the closed-form direct route.
    """
    n_idx = s.index(n)
    wc = cutoff.validate_for(s, n_idx, constants)
    coeff = _shift_coefficient(constants)
    contributions = []
    for k, w_nk, x2 in s.partners(n_idx):
        w_kn = -w_nk
        if w_kn == 0.0 or x2 == 0.0:
            continue
        integral = pv_integral(w_kn, wc, weight=lambda w: w * w)
        contributions.append((k, w_kn, -coeff * x2 * w_kn * integral))
    total = math.fsum(t for _k, _w, t in contributions)
    fp = math.fsum(coeff * x2 * (-w_nk) * wc**2 / 2.0
                   for _k, w_nk, x2 in s.partners(n_idx)
                   if w_nk != 0.0 and x2 != 0.0)
    return ShiftResult(state=n_idx, state_label=str(s.labels[n_idx]),
                       total=total, free_particle=fp,
                       lamb_proper=total - fp, contributions=contributions,
                       cutoff=wc, route="polarizability",
                       basis_size=s.basis_size)


def thermal_lamb_delta(s: SpectralData, n, temperature_k: float,
                       cutoff: CutoffPolicy = CutoffPolicy(),
                       constants: PhysicalConstants = DEFAULT_CONSTANTS,
                       thermal_truncation: bool = False) -> float:
    """Thermal change of the Lamb shift proper.

    Numeric PV integral per partner with the Planck weight; zero at T = 0.
    With ``thermal_truncation`` the integral stops at 50 k_B T / hbar
    instead of the cutoff (the Bose factor has killed the integrand there,
    so both choices agree; exposing both makes that checkable).
    """
    if temperature_k < 0:
        raise DomainError("temperature must be >= 0")
    if temperature_k == 0.0:
        return 0.0
    n_idx = s.index(n)
    wc = cutoff.validate_for(s, n_idx, constants)
    kt = constants.thermal_energy(temperature_k)
    upper = min(wc, 50.0 * kt / constants.hbar) if thermal_truncation else wc
    coeff = _shift_coefficient(constants)

    def weight(w, _t=temperature_k, _c=constants):
        return thermal_gamma_a(w, _t, _c) if w > 0 else 0.0

    terms = []
    for k, w_nk, x2 in s.partners(n_idx):
        w_kn = -w_nk
        if w_kn == 0.0 or x2 == 0.0:
            continue
        if abs(w_kn) >= upper:
            # Bose weight is already ~exp(-50); the pole lies beyond the
            # truncated domain, so plain quadrature applies.
            val, _ = quad(lambda w: weight(w) * w / ((w_kn - w) * (w_kn + w)),
                          0.0, upper, limit=_QUAD_LIMIT)
        else:
            val = pv_integral(w_kn, upper, weight=weight)
        terms.append(-coeff * x2 * w_kn**3 * val)
    return math.fsum(terms)


def mass_renormalization_constant(cutoff: CutoffPolicy = CutoffPolicy(),
                                  constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Classical electromagnetic mass (4 e^2 / 3 pi c^3) omega_c.

    Reported for comparison only; the equation of motion already has this
    contribution subtracted, so nothing downstream ever removes it again.
    """
    wc = cutoff.resolve(constants)
    return (4.0 * constants.elementary_charge**2
            / (3.0 * math.pi * constants.c**3)) * wc
