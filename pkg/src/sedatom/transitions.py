"""Einstein coefficients, lifetimes, and field-modified transition rates."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import List, Optional

from .constants import DEFAULT_CONSTANTS, AU_TIME_S, PhysicalConstants
from .errors import DegeneracyError, DomainError
from .field import FieldSpectrum, zpf_density
from .spectra import SpectralData

_OMEGA_TOL = 1e-9


def einstein_A(s: SpectralData, n, k,
               constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Spontaneous emission coefficient 4 e^2 |w_nk|^3 |x_nk|^2 / 3 hbar c^3.

    Defined for downward pairs only (the atom does not spontaneously
    absorb); raises on an upward pair.  Result in atomic units (1/time).
    """
    n_i, k_i = s.index(n), s.index(k)
    w = s.omega(n_i, k_i)
    if w <= 0:
        raise DomainError(
            f"einstein_A needs a downward pair; E({n}) <= E({k})")
    e2 = constants.elementary_charge**2
    return 4.0 * e2 * abs(w)**3 * s.x2(n_i, k_i) / (3.0 * constants.hbar * constants.c**3)


def einstein_B(s: SpectralData, n, k,
               constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Stimulated coefficient 4 pi^2 e^2 |x_nk|^2 / 3 hbar^2, symmetric in (n,k)."""
    n_i, k_i = s.index(n), s.index(k)
    w = s.omega(n_i, k_i)
    if abs(w) <= _OMEGA_TOL:
        raise DegeneracyError(f"zero-frequency pair ({n}, {k})")
    e2 = constants.elementary_charge**2
    return 4.0 * math.pi**2 * e2 * s.x2(n_i, k_i) / (3.0 * constants.hbar**2)


def induced_rate(s: SpectralData, n, k, spectrum: FieldSpectrum,
                 constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Stimulated rate g rho0 gamma_a B at the transition frequency.

    Identical for upward and downward pairs.
    """
    n_i, k_i = s.index(n), s.index(k)
    w = abs(s.omega(n_i, k_i))
    if w <= _OMEGA_TOL:
        raise DegeneracyError(f"zero-frequency pair ({n}, {k})")
    b = einstein_B(s, n_i, k_i, constants)
    return (spectrum.g(w) * zpf_density(w, constants)
            * spectrum.gamma_a(w) * b)


@dataclass
class DecayChannel:
    partner: int
    omega_nk: float
    direction: str           # "down" | "up"
    spontaneous: float       # g * A, zero for upward channels
    induced: float
    zpf_half: float          # diagnostic: ZPF-fluctuation half of the
    larmor_half: float       # spontaneous weight (each = spontaneous / 2)

    @property
    def total(self) -> float:
        return self.spontaneous + self.induced


@dataclass
class DecaySummary:
    state: int
    state_label: str
    gamma_total: float       # 1/time, atomic units
    stable: bool
    channels: List[DecayChannel]

    @property
    def lifetime(self) -> float:
        """Lifetime in atomic units; math.inf when the state is stable."""
        return math.inf if self.stable else 1.0 / self.gamma_total

    @property
    def lifetime_seconds(self) -> float:
        return math.inf if self.stable else self.lifetime * AU_TIME_S


def decay_summary(s: SpectralData, n, spectrum: FieldSpectrum,
                  constants: PhysicalConstants = DEFAULT_CONSTANTS,
                  include_upward: bool = True) -> DecaySummary:
    """Total depletion rate and per-channel breakdown for one state.

    Gamma_n = sum_{down} g (A + induced) + sum_{up} induced; upward channels
    deplete the state too whenever the field is excited.  A pure-ZPF ground
    state comes back stable (Gamma = 0, infinite-lifetime flag).
    """
    n_idx = s.index(n)
    channels = []
    for k, w_nk, x2 in s.partners(n_idx):
        if abs(w_nk) <= _OMEGA_TOL:
            continue
        aw = abs(w_nk)
        g = spectrum.g(aw)
        ind = induced_rate(s, n_idx, k, spectrum, constants)
        if w_nk > 0:
            spont = g * einstein_A(s, n_idx, k, constants)
            channels.append(DecayChannel(k, w_nk, "down", spont, ind,
                                         spont / 2.0, spont / 2.0))
        elif include_upward:
            channels.append(DecayChannel(k, w_nk, "up", 0.0, ind, 0.0, 0.0))
    gamma = math.fsum(c.total for c in channels)
    return DecaySummary(state=n_idx, state_label=str(s.labels[n_idx]),
                        gamma_total=gamma, stable=(gamma == 0.0),
                        channels=channels)


@dataclass
class RateTable:
    """Einstein coefficients and induced rates for every nondegenerate pair."""

    rows: List[dict] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {"rows": self.rows}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "k", "omega_au", "A_per_s", "B_au", "induced_per_s"])
        for r in self.rows:
            writer.writerow([r["n"], r["k"], repr(r["omega_au"]),
                             repr(r["A_per_s"]), repr(r["B_au"]),
                             repr(r["induced_per_s"])])
        return buf.getvalue()


def build_rate_table(s: SpectralData, spectrum: Optional[FieldSpectrum] = None,
                     constants: PhysicalConstants = DEFAULT_CONSTANTS,
                     states=None) -> RateTable:
    """Rates for all stored ordered pairs (restricted to ``states`` if given)."""
    if spectrum is None:
        spectrum = FieldSpectrum.zpf(constants)
    if states is None:
        indices = sorted({i for i, _ in s.dipole_sq})
    else:
        indices = [s.index(x) for x in states]
    table = RateTable()
    for n_idx in indices:
        for k, w_nk, x2 in s.partners(n_idx):
            if abs(w_nk) <= _OMEGA_TOL or x2 == 0.0:
                continue
            a_au = (einstein_A(s, n_idx, k, constants) * spectrum.g(abs(w_nk))
                    if w_nk > 0 else 0.0)
            table.rows.append({
                "n": str(s.labels[n_idx]),
                "k": str(s.labels[k]),
                "omega_au": w_nk,
                "A_per_s": a_au / AU_TIME_S,
                "B_au": einstein_B(s, n_idx, k, constants),
                "induced_per_s": induced_rate(s, n_idx, k, spectrum, constants) / AU_TIME_S,
            })
    return table
