"""Trajectory ensembles of a charged particle in a sampled background field.

The field is a finite sum of cosine modes whose amplitudes reproduce the
spectral density over a band around the oscillator resonance.  Radiation
reaction enters through the order-reduced substitution (damping force
tau f'(x) v), which has no runaway solutions.  The observable of interest
is the stationary ensemble energy: for the harmonic oscillator in the pure
zero-point spectrum it settles at half the resonance quantum.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

# The default TBB layer emits a version warning on some hosts; OpenMP is
# quieter and equally parallel.  An explicit user setting still wins.
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

from numba import njit, prange

from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .errors import RunawayError, ValidationError
from .field import FieldSpectrum
from .spectra import PotentialModel

_MASK64 = (1 << 64) - 1
_RUNAWAY_FACTOR = 1.0e6
_N_WINDOWS = 50


def mix_seed(seed: int, index: int) -> int:
    """Sub-seed for trajectory ``index``: splitmix64 of seed + (i+1)*golden.

    This is the documented splitting rule; identical (seed, index) always
    maps to the same stream on every platform.
    """
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass(frozen=True)
class FieldRealization:
    """One draw of the band-limited random field."""

    omegas: np.ndarray
    amplitudes: np.ndarray
    phases: np.ndarray
    seed: int

    def evaluate(self, t):
        """E(t) = sum_j E_j cos(omega_j t + phi_j) (reference implementation)."""
        t = np.asarray(t, dtype=float)
        phase = np.multiply.outer(t, self.omegas) + self.phases
        out = np.cos(phase) @ self.amplitudes
        return float(out) if out.ndim == 0 else out


def sample_field(spectrum: FieldSpectrum, band: Tuple[float, float],
                 n_modes: int, seed: int) -> FieldRealization:
    """Equal-spaced modes over ``band`` with E_j^2 = (8 pi / 3) rho(w_j) dw_j.

    End modes carry half the interior spacing (trapezoid weighting), so
    sum E_j^2 / 2 equals (4 pi / 3) int_band rho dw up to quadrature error.
    Phases are uniform on [0, 2 pi), drawn from a PCG64 stream on ``seed``.
    """
    lo, hi = band
    if not (0.0 < lo < hi):
        raise ValidationError("band must satisfy 0 < omega_lo < omega_hi")
    if n_modes < 2:
        raise ValidationError("need at least two field modes")
    omegas = np.linspace(lo, hi, n_modes)
    dw = np.full(n_modes, (hi - lo) / (n_modes - 1))
    dw[0] *= 0.5
    dw[-1] *= 0.5
    rho = np.array([spectrum.rho(w) for w in omegas])
    amplitudes = np.sqrt(8.0 * math.pi / 3.0 * rho * dw)
    rng = np.random.Generator(np.random.PCG64(seed))
    phases = rng.uniform(0.0, 2.0 * math.pi, n_modes)
    return FieldRealization(omegas=omegas, amplitudes=amplitudes,
                            phases=phases, seed=seed)


@dataclass(frozen=True)
class SimConfig:
    """Everything needed to reproduce an ensemble run bit for bit."""

    potential: PotentialModel
    spectrum: FieldSpectrum = field(default_factory=FieldSpectrum.zpf)
    n_modes: int = 401
    band: Optional[Tuple[float, float]] = None   # None -> [0.5, 1.5] omega0
    dt: Optional[float] = None                   # None -> 2 pi / (100 omega_hi)
    t_total: float = 1000.0
    n_trajectories: int = 200
    seed: int = 0
    damping: str = "order_reduced"               # or "none"
    tau: Optional[float] = None                  # None -> constants.tau
    charge: float = 1.0
    record_every: int = 100
    x0: float = 0.0
    v0: float = 0.0
    constants: PhysicalConstants = DEFAULT_CONSTANTS

    def __post_init__(self):
        if self.damping not in ("order_reduced", "none"):
            raise ValidationError(f"unknown damping model {self.damping!r}")
        if self.n_trajectories < 1 or self.t_total <= 0:
            raise ValidationError("need n_trajectories >= 1 and t_total > 0")

    def resolved(self) -> "SimConfig":
        """Materialize band/dt/tau defaults; validate the resolution bound."""
        band = self.band
        if band is None:
            w0 = self.potential.omega0
            if w0 is None:
                raise ValidationError("explicit band required for "
                                      "non-harmonic potentials")
            band = (0.5 * w0, 1.5 * w0)
        if not (0.0 < band[0] < band[1]):
            raise ValidationError("band must satisfy 0 < omega_lo < omega_hi")
        w0 = self.potential.omega0
        if w0 is not None and not (band[0] <= w0 <= band[1]):
            raise ValidationError("band must contain the resonance omega0")
        dt = self.dt if self.dt is not None else 2.0 * math.pi / (100.0 * band[1])
        if dt * band[1] >= 0.1:
            raise ValidationError(
                f"dt*omega_hi = {dt * band[1]:.3g} >= 0.1: step too coarse "
                "for the highest sampled mode")
        tau = self.tau if self.tau is not None else self.constants.tau
        return replace(self, band=band, dt=dt, tau=tau)


@dataclass
class SimResult:
    """Ensemble statistics over the stationary half of each trajectory."""

    mean_x2: float
    mean_p2: float
    mean_H: float
    stderr_x2: float
    stderr_p2: float
    stderr_H: float
    h_series: np.ndarray          # windowed ensemble-mean H(t)
    h_series_times: np.ndarray
    larmor_power: float
    absorbed_power: float
    balance_residual: float
    balance_sigma: float          # standard error of larmor + absorbed
    n_trajectories: int
    config: SimConfig

    def energy_ratio(self) -> float:
        """<H> / (hbar omega0 / 2) for the harmonic oscillator."""
        w0 = self.config.potential.omega0
        if w0 is None:
            raise ValidationError("energy_ratio defined for harmonic runs")
        return self.mean_H / (0.5 * self.config.constants.hbar * w0)

    def to_json_dict(self) -> dict:
        return {
            "mean_x2": self.mean_x2, "mean_p2": self.mean_p2,
            "mean_H": self.mean_H,
            "stderr_x2": self.stderr_x2, "stderr_p2": self.stderr_p2,
            "stderr_H": self.stderr_H,
            "h_series": list(self.h_series),
            "h_series_times": list(self.h_series_times),
            "larmor_power": self.larmor_power,
            "absorbed_power": self.absorbed_power,
            "balance_residual": self.balance_residual,
            "balance_sigma": self.balance_sigma,
            "n_trajectories": self.n_trajectories,
        }


# Kernel state/stat layout (one row per trajectory):
#   stats[:, 0..1]  sum x^2, sum v^2 over the stationary half
#   stats[:, 2]     sum of damping power  tau f'(x) v^2
#   stats[:, 3]     sum of absorbed power e E v
#   stats[:, 4]     sample count
#   stats[:, 5]     runaway flag (1.0 if |H| exploded)
#   stats[:, 6]     sum of H over the stationary half
@njit(cache=True)
def _integrate_one(kind, mass, omega0, charge, tau_damp,
                   xg, fg, dfg, vg,
                   omegas, amps, phases, dt, n_steps,
                   x0, v0, h_windows, stats_row, h_row,
                   rec_every, rec_x, rec_p):
    n_modes = omegas.shape[0]
    # Phasor state z_j = exp(i (omega_j t + phi_j)); one complex multiply
    # per mode per half-step replaces a cos() call.
    zr = np.cos(phases)
    zi = np.sin(phases)
    hr = np.cos(omegas * dt * 0.5)
    hi_ = np.sin(omegas * dt * 0.5)

    e_now = 0.0
    for j in range(n_modes):
        e_now += amps[j] * zr[j]

    x = x0
    v = v0
    half = n_steps // 2
    win_len = max(n_steps // h_windows, 1)
    n_rec = rec_x.shape[0]

    for step in range(n_steps):
        # All per-step statistics sample the consistent state (x, v, E) at
        # the start of the step, before the update.
        if n_rec > 0 and step % rec_every == 0 and step // rec_every < n_rec:
            rec_x[step // rec_every] = x
            rec_p[step // rec_every] = mass * v

        ax1, dfv1 = _accel(kind, mass, omega0, charge, tau_damp,
                           xg, fg, dfg, x, v, e_now)
        h = 0.5 * mass * v * v + _potential(kind, mass, omega0, xg, vg, x)
        if step >= half:
            stats_row[0] += x * x
            stats_row[1] += v * v
            stats_row[2] += tau_damp * dfv1 * v
            stats_row[3] += charge * e_now * v
            stats_row[4] += 1.0
            stats_row[6] += h
        w = step // win_len
        if w < h_windows:
            h_row[w] += h

        # advance phasors to t + dt/2 and t + dt
        e_half = 0.0
        for j in range(n_modes):
            tr = zr[j] * hr[j] - zi[j] * hi_[j]
            zi[j] = zr[j] * hi_[j] + zi[j] * hr[j]
            zr[j] = tr
            e_half += amps[j] * zr[j]
        e_full = 0.0
        for j in range(n_modes):
            tr = zr[j] * hr[j] - zi[j] * hi_[j]
            zi[j] = zr[j] * hi_[j] + zi[j] * hr[j]
            zr[j] = tr
            e_full += amps[j] * zr[j]

        # RK4 on (x, v); field frozen at its three sample times
        x2_ = x + 0.5 * dt * v
        v2_ = v + 0.5 * dt * ax1
        ax2, _ = _accel(kind, mass, omega0, charge, tau_damp,
                        xg, fg, dfg, x2_, v2_, e_half)
        x3_ = x + 0.5 * dt * v2_
        v3_ = v + 0.5 * dt * ax2
        ax3, _ = _accel(kind, mass, omega0, charge, tau_damp,
                        xg, fg, dfg, x3_, v3_, e_half)
        x4_ = x + dt * v3_
        v4_ = v + dt * ax3
        ax4, _ = _accel(kind, mass, omega0, charge, tau_damp,
                        xg, fg, dfg, x4_, v4_, e_full)
        x = x + dt * (v + 2.0 * v2_ + 2.0 * v3_ + v4_) / 6.0
        v = v + dt * (ax1 + 2.0 * ax2 + 2.0 * ax3 + ax4) / 6.0
        e_now = e_full

        h = 0.5 * mass * v * v + _potential(kind, mass, omega0, xg, vg, x)
        if not math.isfinite(h) or h > 1.0e300:
            stats_row[5] = 1.0
            return
        if kind == 0 and h > _RUNAWAY_FACTOR * omega0:
            stats_row[5] = 1.0
            return


@njit(cache=True)
def _accel(kind, mass, omega0, charge, tau_damp, xg, fg, dfg, x, v, e):
    """Acceleration and the f'(x) v factor used by the damping-power stat."""
    if kind == 0:
        fx = -mass * omega0 * omega0 * x
        dfv = -mass * omega0 * omega0 * v
    else:
        fx = np.interp(x, xg, fg)
        dfv = np.interp(x, xg, dfg) * v
    a = (fx + tau_damp * dfv + charge * e) / mass
    return a, dfv


@njit(cache=True)
def _potential(kind, mass, omega0, xg, vg, x):
    if kind == 0:
        return 0.5 * mass * omega0 * omega0 * x * x
    return np.interp(x, xg, vg)


@njit(cache=True, parallel=True)
def _ensemble_kernel(kind, mass, omega0, charge, tau_damp,
                     xg, fg, dfg, vg,
                     omegas, amps, phase_matrix, dt, n_steps,
                     x0, v0, h_windows):
    n_traj = phase_matrix.shape[0]
    stats = np.zeros((n_traj, 7))
    h_series = np.zeros((n_traj, h_windows))
    empty = np.empty(0)
    for i in prange(n_traj):
        _integrate_one(kind, mass, omega0, charge, tau_damp,
                       xg, fg, dfg, vg,
                       omegas, amps, phase_matrix[i], dt, n_steps,
                       x0, v0, h_windows, stats[i], h_series[i],
                       1, empty, empty)
    return stats, h_series


def _unpack_potential(potential: PotentialModel):
    if potential.kind == "harmonic":
        return 0, potential.omega0, np.empty(0), np.empty(0), np.empty(0), np.empty(0)
    if potential.kind == "custom_1d":
        xg = np.asarray(potential.x_grid, dtype=float)
        vg = np.asarray(potential.v_grid, dtype=float)
        fg = -np.gradient(vg, xg)
        dfg = np.gradient(fg, xg)
        return 1, 0.0, xg, fg, dfg, vg
    raise ValidationError(
        f"simulator supports harmonic or custom_1d potentials, "
        f"not {potential.kind!r}")


def integrate_trajectory(cfg: SimConfig, realization: FieldRealization):
    """Integrate one trajectory; returns decimated (t, x, p) arrays.

    Raises a runaway error if the energy exceeds 1e6 resonance quanta
    (or overflows, for non-harmonic potentials).
    """
    cfg = cfg.resolved()
    kind, w0, xg, fg, dfg, vg = _unpack_potential(cfg.potential)
    tau_damp = cfg.tau if cfg.damping == "order_reduced" else 0.0
    n_steps = max(int(round(cfg.t_total / cfg.dt)), 1)
    n_rec = n_steps // cfg.record_every + 1
    rec_x = np.zeros(n_rec)
    rec_p = np.zeros(n_rec)
    stats = np.zeros(7)
    h_row = np.zeros(_N_WINDOWS)
    _integrate_one(kind, cfg.potential.mass, w0, cfg.charge, tau_damp,
                   xg, fg, dfg, vg,
                   realization.omegas, realization.amplitudes,
                   realization.phases, cfg.dt, n_steps,
                   cfg.x0, cfg.v0, _N_WINDOWS, stats, h_row,
                   cfg.record_every, rec_x, rec_p)
    if stats[5] != 0.0:
        raise RunawayError("trajectory energy blew up; reduce dt or check "
                           "the damping model")
    t = np.arange(n_rec) * cfg.record_every * cfg.dt
    return t, rec_x, rec_p


def run_ensemble(cfg: SimConfig) -> SimResult:
    """Independent trajectories, statistics over the stationary half.

    Trajectory i draws its phases from the stream mix_seed(cfg.seed, i);
    the cross-trajectory reduction uses compensated summation, so the
    result is independent of scheduling order.
    """
    cfg = cfg.resolved()
    kind, w0, xg, fg, dfg, vg = _unpack_potential(cfg.potential)
    tau_damp = cfg.tau if cfg.damping == "order_reduced" else 0.0
    n_steps = max(int(round(cfg.t_total / cfg.dt)), 1)

    base = sample_field(cfg.spectrum, cfg.band, cfg.n_modes, cfg.seed)
    phase_matrix = np.empty((cfg.n_trajectories, cfg.n_modes))
    for i in range(cfg.n_trajectories):
        sub = mix_seed(cfg.seed, i)
        rng = np.random.Generator(np.random.PCG64(sub))
        phase_matrix[i] = rng.uniform(0.0, 2.0 * math.pi, cfg.n_modes)

    stats, h_series = _ensemble_kernel(
        kind, cfg.potential.mass, w0, cfg.charge, tau_damp,
        xg, fg, dfg, vg,
        base.omegas, base.amplitudes, phase_matrix, cfg.dt, n_steps,
        cfg.x0, cfg.v0, _N_WINDOWS)

    bad = np.nonzero(stats[:, 5])[0]
    if bad.size:
        raise RunawayError(f"trajectory {int(bad[0])} energy blew up; "
                           "reduce dt or check the damping model")

    counts = stats[:, 4]
    x2_i = stats[:, 0] / counts
    v2_i = stats[:, 1] / counts
    damp_i = stats[:, 2] / counts
    abs_i = stats[:, 3] / counts
    h_i = stats[:, 6] / counts
    m = cfg.potential.mass

    def mean_and_err(vals):
        n = len(vals)
        mean = math.fsum(vals) / n
        if n < 2:
            return mean, math.inf
        var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1)
        return mean, math.sqrt(var / n)

    mean_x2, err_x2 = mean_and_err(x2_i)
    mean_v2, err_v2 = mean_and_err(v2_i)
    mean_h, err_h = mean_and_err(h_i)
    larmor, _ = mean_and_err(damp_i)
    net, err_net = mean_and_err(damp_i + abs_i)
    absorbed = net - larmor
    scale = max(abs(larmor), abs(absorbed), 1e-300)

    win_len = max(n_steps // _N_WINDOWS, 1)
    h_mean_series = h_series.mean(axis=0) / win_len
    h_times = (np.arange(_N_WINDOWS) + 0.5) * win_len * cfg.dt

    return SimResult(
        mean_x2=mean_x2, mean_p2=m * m * mean_v2, mean_H=mean_h,
        stderr_x2=err_x2, stderr_p2=m * m * err_v2, stderr_H=err_h,
        h_series=h_mean_series, h_series_times=h_times,
        larmor_power=larmor, absorbed_power=absorbed,
        balance_residual=net / scale, balance_sigma=err_net / scale,
        n_trajectories=cfg.n_trajectories, config=cfg)
