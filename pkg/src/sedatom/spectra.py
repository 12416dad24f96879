"""Eigenenergies and dipole matrix elements.

Three backends produce the (E_n, omega_nk, |x_nk|^2) data every rate and
shift formula consumes: a closed-form harmonic oscillator, a hydrogen radial
solver with a box-discretized pseudostate continuum, and a generic 1D
finite-difference solver for sampled potentials.

Conventions
-----------
1D backends store plain |x_ik|^2; no angular factors, and the
Thomas-Reiche-Kuhn sum is hbar/2m.  The hydrogen backend stores the
m-averaged 3D quantity for the ordered pair (initial, final):

    dipole_sq(n l, n' l') = max(l, l') / (2 l + 1) * R^2,

with R the radial integral and l the *initial* state's angular momentum.
This makes the spontaneous-emission formula reproduce the standard hydrogen
A coefficients and makes the 3D sum rule 3 hbar/2m hold from any initial
state.  The price is that the stored map is direction-dependent for pairs of
different l; the symmetric invariant is (2l_i+1) dipole_sq(i,k) ==
(2l_k+1) dipole_sq(k,i).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DiscretizationError, DomainError, NumericalError, ValidationError

_L_LETTERS = "spdfghiklmnoq"


@dataclass(frozen=True)
class PotentialModel:
    """Potential specification for the spectral backends."""

    kind: str  # "harmonic" | "coulomb" | "custom_1d"
    mass: float = 1.0
    omega0: Optional[float] = None
    Z: Optional[float] = None
    x_grid: Optional[np.ndarray] = None
    v_grid: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.mass <= 0:
            raise ValidationError("mass must be positive")
        if self.kind == "harmonic":
            if self.omega0 is None or self.omega0 <= 0:
                raise ValidationError("harmonic potential needs omega0 > 0")
        elif self.kind == "coulomb":
            if self.Z is None or self.Z <= 0:
                raise ValidationError("coulomb potential needs Z > 0")
        elif self.kind == "custom_1d":
            if self.x_grid is None or self.v_grid is None:
                raise ValidationError("custom_1d potential needs sampled V(x)")
            x = np.asarray(self.x_grid, float)
            if x.size < 3 or np.any(np.diff(x) <= 0):
                raise ValidationError(
                    "custom grid must be strictly increasing with >= 3 points")
            if len(self.x_grid) != len(self.v_grid):
                raise ValidationError("x and V grids must have equal length")
        else:
            raise ValidationError(f"unknown potential kind {self.kind!r}")

    @staticmethod
    def harmonic(omega0: float, mass: float = 1.0) -> "PotentialModel":
        return PotentialModel(kind="harmonic", omega0=omega0, mass=mass)

    @staticmethod
    def coulomb(Z: float, mass: float = 1.0) -> "PotentialModel":
        return PotentialModel(kind="coulomb", Z=Z, mass=mass)

    @staticmethod
    def custom_1d(x_grid, v_grid, mass: float = 1.0) -> "PotentialModel":
        return PotentialModel(kind="custom_1d",
                              x_grid=np.asarray(x_grid, float),
                              v_grid=np.asarray(v_grid, float), mass=mass)


@dataclass
class SpectralData:
    """Eigenenergies and dipole matrix elements of a bound system.

    ``dipole_sq`` is a sparse map over ordered pairs of state indices; rows
    are stored for every state the solver designated as an "initial" state
    (all states for the 1D backends, bound states for hydrogen).  Immutable
    by convention after construction.
    """

    labels: List
    energies: np.ndarray
    dipole_sq: Dict[Tuple[int, int], float]
    mass: float = 1.0
    dimension: int = 1
    angular_momenta: Optional[np.ndarray] = None
    is_pseudostate: Optional[np.ndarray] = None
    wavefunctions: Optional[Dict[int, np.ndarray]] = None
    grid: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)
    _adjacency: Dict[int, List[int]] = field(default_factory=dict, repr=False)
    _label_index: Dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.energies = np.asarray(self.energies, float)
        if self.is_pseudostate is None:
            self.is_pseudostate = np.zeros(len(self.energies), dtype=bool)
        for (i, k), v in self.dipole_sq.items():
            if v < 0:
                raise ValidationError(f"dipole_sq({i},{k}) negative")
            self._adjacency.setdefault(i, []).append(k)
        for ks in self._adjacency.values():
            ks.sort()
        self._label_index = {lab: i for i, lab in enumerate(self.labels)}

    @property
    def basis_size(self) -> int:
        return len(self.energies)

    def index(self, state) -> int:
        """Resolve a state label or integer index to an index."""
        if isinstance(state, (int, np.integer)) and state in self._label_index:
            return self._label_index[state]
        if state in self._label_index:
            return self._label_index[state]
        if isinstance(state, (int, np.integer)) and 0 <= state < self.basis_size:
            return int(state)
        raise DomainError(f"unknown state {state!r}")

    def omega(self, i, k) -> float:
        """Transition frequency omega_ik = (E_i - E_k) / hbar."""
        return float(self.energies[self.index(i)] - self.energies[self.index(k)])

    def x2(self, i, k) -> float:
        """|x_ik|^2 for the ordered pair; 0 if not stored."""
        return self.dipole_sq.get((self.index(i), self.index(k)), 0.0)

    def partners(self, n):
        """Yield (k, omega_nk, |x_nk|^2) over the stored row of state n."""
        n = self.index(n)
        e_n = self.energies[n]
        for k in self._adjacency.get(n, []):
            yield k, float(e_n - self.energies[k]), self.dipole_sq[(n, k)]

    def to_json_dict(self) -> dict:
        triplets = [[int(i), int(k), v] for (i, k), v in sorted(self.dipole_sq.items())]
        return {
            "labels": [str(l) for l in self.labels],
            "energies_hartree": self.energies.tolist(),
            "dipole_sq": triplets,
            "mass": self.mass,
            "dimension": self.dimension,
            "angular_momenta": (self.angular_momenta.tolist()
                                if self.angular_momenta is not None else None),
            "is_pseudostate": self.is_pseudostate.astype(int).tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, d: dict) -> "SpectralData":
        return cls(
            labels=list(d["labels"]),
            energies=np.asarray(d["energies_hartree"], float),
            dipole_sq={(int(i), int(k)): float(v) for i, k, v in d["dipole_sq"]},
            mass=float(d.get("mass", 1.0)),
            dimension=int(d.get("dimension", 1)),
            angular_momenta=(np.asarray(d["angular_momenta"], float)
                             if d.get("angular_momenta") is not None else None),
            is_pseudostate=np.asarray(d.get("is_pseudostate", []), bool)
            if d.get("is_pseudostate") is not None else None,
        )


def solve_harmonic(omega0: float, mass: float, n_max: int) -> SpectralData:
    """Closed-form oscillator spectrum for states 0..n_max.

    E_n = omega0 (n + 1/2); |x_{n,n+1}|^2 = (n+1)/(2 m omega0), all other
    elements zero.  Exact, no numerics.
    """
    if n_max < 1:
        raise ValidationError("n_max must be >= 1")
    if omega0 <= 0 or mass <= 0:
        raise ValidationError("omega0 and mass must be positive")
    a = 1.0 / (2.0 * mass * omega0)
    n_states = n_max + 1
    energies = omega0 * (np.arange(n_states) + 0.5)
    dipole_sq = {}
    for n in range(n_states - 1):
        dipole_sq[(n, n + 1)] = a * (n + 1)
        dipole_sq[(n + 1, n)] = a * (n + 1)
    return SpectralData(labels=list(range(n_states)), energies=energies,
                        dipole_sq=dipole_sq, mass=mass, dimension=1,
                        meta={"backend": "harmonic", "omega0": omega0})


def solve_custom_1d(potential: PotentialModel, n_states: int) -> SpectralData:
    """Finite-difference eigensolver for a sampled 1D potential.

    Second-order three-point Hamiltonian with hard-wall boundaries; dipole
    matrix elements by trapezoidal quadrature between all stored states.
    """
    if potential.kind != "custom_1d":
        raise ValidationError("solve_custom_1d needs a custom_1d potential")
    x = np.asarray(potential.x_grid, float)
    v = np.asarray(potential.v_grid, float)
    if n_states > x.size - 2:
        raise ValidationError("n_states must be <= grid size - 2")
    h = x[1] - x[0]
    if not np.allclose(np.diff(x), h, rtol=1e-10):
        raise ValidationError("custom_1d grid must be uniform")
    m = potential.mass
    diag = v + 1.0 / (m * h * h)
    off = np.full(x.size - 1, -0.5 / (m * h * h))
    try:
        evals, evecs = eigh_tridiagonal(diag, off, select="i",
                                        select_range=(0, n_states - 1),
                                        tol=1e-12)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"1D eigensolver failed: {exc}") from exc
    # Normalize so that h * sum psi^2 = 1.
    psi = evecs / math.sqrt(h)
    xw = x  # hard wall: psi vanishes at the box edge, trapezoid = plain sum
    dipole_sq = {}
    xel = psi.T * xw  # (n_states, n_grid)
    xmat = h * (xel @ psi)
    for i in range(n_states):
        for k in range(n_states):
            if i != k:
                dipole_sq[(i, k)] = float(xmat[i, k] ** 2)
    wavefunctions = {i: psi[:, i].copy() for i in range(n_states)}
    return SpectralData(labels=list(range(n_states)), energies=evals,
                        dipole_sq=dipole_sq, mass=m, dimension=1,
                        wavefunctions=wavefunctions, grid=x,
                        meta={"backend": "custom_1d", "grid_step": h})


def solve_hydrogen_radial(Z: float, l_max: int, box_radius: float,
                          grid_points: int, r_min: float = 1e-4,
                          energy_cap: float = 1000.0,
                          mass: float = 1.0) -> SpectralData:
    """Hydrogenic spectrum on an exponentially mapped radial grid.

    Each angular-momentum channel is diagonalized inside a hard-wall box;
    negative-energy states approximate the bound levels and positive-energy
    states form the pseudostate continuum (flagged).  Dipole rows are built
    for every bound state against all states in adjacent channels.

    ``energy_cap`` truncates the stored pseudostates; it must stay below any
    shift-integral cutoff used downstream (default mc^2 ~ 1.9e4 Hartree).
    """
    if grid_points < 200:
        raise ValidationError("grid_points must be >= 200")
    if l_max < 0:
        raise ValidationError("l_max must be >= 0")
    if box_radius <= 0 or r_min <= 0 or r_min >= box_radius:
        raise ValidationError("need 0 < r_min < box_radius")

    # Exponential map r = r_min * exp(j * delta): resolves the nucleus and
    # the tail with one uniform grid in x = ln r.
    xg = np.linspace(math.log(r_min), math.log(box_radius), grid_points)
    h = xg[1] - xg[0]
    r = np.exp(xg)
    r2 = r * r

    channels = []  # per l: (evals, w_vectors)
    for l in range(l_max + 1):
        w_eff = l * (l + 1) / (2.0 * mass * r2) - Z / r
        # -(1/2m) v'' + (1/8m + r^2 W) v = E r^2 v, then symmetrized by
        # the diagonal metric S = r^2 into a standard tridiagonal problem.
        hdiag = 1.0 / (mass * h * h) + 1.0 / (8.0 * mass) + r2 * w_eff
        hoff = np.full(grid_points - 1, -0.5 / (mass * h * h))
        d = hdiag / r2
        e = hoff / np.sqrt(r2[:-1] * r2[1:])
        try:
            # Explicit tight tolerance: the matrix norm blows up near r_min
            # and LAPACK's default bisection abstol would quantize the
            # eigenvalues at the 1e-4 level.
            evals, evecs = eigh_tridiagonal(
                d, e, select="v", select_range=(-2.0 * Z * Z * mass, energy_cap),
                tol=1e-12)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                f"radial eigensolver failed in l={l} channel: {exc}") from exc
        channels.append((evals, evecs))

    e0 = channels[0][0][0]
    e_exact = -0.5 * Z * Z * mass
    if abs(e0 - e_exact) > 1e-3 * abs(e_exact):
        raise DiscretizationError(
            f"ground-state energy {e0:.6f} deviates from {e_exact:.6f} by more "
            f"than 0.1%; use a finer grid or larger box")

    # Global index layout: channels concatenated, each sorted ascending.
    offsets, labels, energies, lvals, pseudo = [], [], [], [], []
    idx = 0
    for l, (evals, _) in enumerate(channels):
        offsets.append(idx)
        for i, en in enumerate(evals):
            if en < 0:
                labels.append(f"{l + 1 + i}{_L_LETTERS[l]}")
            else:
                labels.append(f"l{l}:c{i}")
            energies.append(en)
            lvals.append(l)
            pseudo.append(en > 0)
            idx += 1

    energies = np.asarray(energies)
    dipole_sq: Dict[Tuple[int, int], float] = {}
    wavefunctions: Dict[int, np.ndarray] = {}

    for l, (evals, evecs) in enumerate(channels):
        bound = np.where(evals < 0)[0]
        for i_loc in bound:
            i_glob = offsets[l] + int(i_loc)
            w_i = evecs[:, i_loc]
            # u(r) = w / sqrt(h r), normalized so that int u^2 dr = 1
            wavefunctions[i_glob] = w_i / np.sqrt(h * r)
            for lp in (l - 1, l + 1):
                if lp < 0 or lp > l_max:
                    continue
                evals_p, evecs_p = channels[lp]
                radial = (w_i * r) @ evecs_p  # R_ik for all k in channel lp
                lmax_pair = max(l, lp)
                f_i = lmax_pair / (2.0 * l + 1.0)
                f_k = lmax_pair / (2.0 * lp + 1.0)
                for k_loc, rint in enumerate(radial):
                    k_glob = offsets[lp] + k_loc
                    r2int = float(rint * rint)
                    dipole_sq[(i_glob, k_glob)] = f_i * r2int
                    dipole_sq[(k_glob, i_glob)] = f_k * r2int

    return SpectralData(labels=labels, energies=energies, dipole_sq=dipole_sq,
                        mass=mass, dimension=3,
                        angular_momenta=np.asarray(lvals, float),
                        is_pseudostate=np.asarray(pseudo, bool),
                        wavefunctions=wavefunctions, grid=r,
                        meta={"backend": "hydrogen", "Z": Z,
                              "box_radius": box_radius, "r_min": r_min,
                              "grid_points": grid_points, "grid_step": h,
                              "energy_cap": energy_cap})


def trk_sum(s: SpectralData, n) -> float:
    """Sum_k omega_kn |x_nk|^2 over the stored basis.

    Compare against hbar/2m for 1D data or 3 hbar/2m for 3D data with
    pseudostates included.  Empty rows give 0.
    """
    total = 0.0
    for _k, omega_nk, x2 in s.partners(n):
        total += -omega_nk * x2  # omega_kn = -omega_nk
    return total


def virial_check(s: SpectralData, potential: PotentialModel, n) -> float:
    """Residual <p^2>/m + <x f> for a bound state; near zero when converged.

    <p^2> comes from the basis-truncated sum m^2 sum_k omega_kn^2 |x_nk|^2;
    <x f> from quadrature over the stored wavefunction (closed form for the
    oscillator and Coulomb backends).
    """
    n = s.index(n)
    if s.is_pseudostate is not None and s.is_pseudostate[n]:
        raise DomainError("virial_check requires a bound state")
    m = s.mass
    p2_over_m = m * sum(om * om * x2 for _k, om, x2 in s.partners(n))
    if potential.kind == "harmonic":
        # <x f> = -2 <V> = -E_n exactly
        xf = -float(s.energies[n])
    elif potential.kind == "coulomb":
        if s.wavefunctions is None or n not in s.wavefunctions:
            raise DomainError("no stored wavefunction for state")
        u = s.wavefunctions[n]
        r = s.grid
        h = s.meta["grid_step"]
        # <x.f> = -<r V'(r)> = -Z <1/r>;  dr = r h on the log grid
        xf = -potential.Z * float(np.sum(u * u * h))  # u^2/r * r h
    elif potential.kind == "custom_1d":
        if s.wavefunctions is None or n not in s.wavefunctions:
            raise DomainError("no stored wavefunction for state")
        psi = s.wavefunctions[n]
        x = s.grid
        f = -np.gradient(np.asarray(potential.v_grid, float), x)
        h = x[1] - x[0]
        xf = float(h * np.sum(psi * psi * x * f))
    else:
        raise ValidationError(f"unsupported potential kind {potential.kind!r}")
    return p2_over_m + xf


def oscillator_strength(s: SpectralData, i, k) -> float:
    """Absorption oscillator strength f_ik = (2 m / 3) omega_ki |x_ik|^2 (3D)."""
    om = -s.omega(i, k)
    factor = 2.0 * s.mass / s.dimension
    return factor * om * s.x2(i, k)
