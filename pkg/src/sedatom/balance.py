"""Energy gain/loss rates and term-by-term detailed balance.

For a state n, each partner k contributes a Larmor (emission into available
modes) term and a diffusion (absorption from the field) term.  With the pure
zero-point spectrum the two cancel per partner for the ground state; excited
states lose energy through their downward channels.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import List, Tuple

from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .field import FieldSpectrum
from .spectra import SpectralData

#: Pairs closer in frequency than this are treated as degenerate and
#: excluded from the rate sums (the sign/gamma expressions are singular
#: at omega = 0).
OMEGA_DEGENERATE = 1e-9


@dataclass
class BalanceReport:
    """Per-partner energy-flow decomposition for one state."""

    state: int
    state_label: str
    basis_size: int
    rows: List[Tuple[int, float, float, float, float]]  # (k, w_nk, larmor, diffusion, net)
    skipped_pairs: List[int] = field(default_factory=list)

    @property
    def total_dH_dt(self) -> float:
        return math.fsum(r[4] for r in self.rows)

    def to_json_dict(self) -> dict:
        return {
            "state": self.state,
            "state_label": self.state_label,
            "basis_size": self.basis_size,
            "total_dH_dt": self.total_dH_dt,
            "rows": [
                {"k": k, "omega_nk": w, "larmor_term": lt,
                 "diffusion_term": dt, "net": net}
                for k, w, lt, dt, net in self.rows
            ],
            "skipped_degenerate_partners": self.skipped_pairs,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["k", "omega_nk", "larmor_term", "diffusion_term", "net"])
        for k, w, lt, dt, net in self.rows:
            writer.writerow([k, repr(w), repr(lt), repr(dt), repr(net)])
        return buf.getvalue()


def larmor_rate(s: SpectralData, n,
                constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Larmor dissipation -m tau sum_k omega_nk^4 |x_nk|^2 (always <= 0)."""
    m = s.mass
    tau = constants.tau
    total = 0.0
    for _k, w_nk, x2 in s.partners(n):
        if abs(w_nk) <= OMEGA_DEGENERATE:
            continue
        total += w_nk**4 * x2
    return -m * tau * total


def diffusion_rate(s: SpectralData, n, spectrum: FieldSpectrum,
                   constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Field-absorption rate m tau sum_k w^4 |x|^2 g (1+gamma_a) sign(w_kn).

    Cancels the Larmor rate exactly for the ground state in the pure ZPF.
    """
    m = s.mass
    tau = constants.tau
    total = 0.0
    for _k, w_nk, x2 in s.partners(n):
        if abs(w_nk) <= OMEGA_DEGENERATE:
            continue
        aw = abs(w_nk)
        sign = -1.0 if w_nk > 0 else 1.0  # sign(omega_kn) = -sign(omega_nk)
        total += w_nk**4 * x2 * spectrum.g(aw) * (1.0 + spectrum.gamma_a(aw)) * sign
    return m * tau * total


def energy_flow(s: SpectralData, n, spectrum: FieldSpectrum,
                constants: PhysicalConstants = DEFAULT_CONSTANTS) -> BalanceReport:
    """Per-partner combination of both terms.

    net_k = -m tau w_nk^4 |x_nk|^2 [g_k - g_k (1+gamma_a,k) sign(w_kn)];
    the ground state with the pure ZPF balances row by row.
    """
    n_idx = s.index(n)
    m = s.mass
    tau = constants.tau
    rows = []
    skipped = []
    for k, w_nk, x2 in s.partners(n_idx):
        if abs(w_nk) <= OMEGA_DEGENERATE:
            skipped.append(k)
            continue
        aw = abs(w_nk)
        g = spectrum.g(aw)
        ga = spectrum.gamma_a(aw)
        sign = -1.0 if w_nk > 0 else 1.0
        pref = m * tau * w_nk**4 * x2
        larmor_term = -pref * g
        diffusion_term = pref * g * (1.0 + ga) * sign
        rows.append((k, w_nk, larmor_term, diffusion_term,
                     larmor_term + diffusion_term))
    return BalanceReport(state=n_idx, state_label=str(s.labels[n_idx]),
                         basis_size=s.basis_size, rows=rows,
                         skipped_pairs=skipped)
