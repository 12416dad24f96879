"""Acceptance suite: one printed PASS/FAIL line per criterion.

Each test evaluates one end-to-end criterion at its stated tolerance and
prints a single summary line directly to the terminal (bypassing capture),
so `pytest -v` shows the scoreboard alongside the test results.
"""
import math
import time

import numpy as np
import pytest
from scipy.integrate import quad

from sedatom.balance import energy_flow
from sedatom.constants import (AU_TIME_S, DEFAULT_CONSTANTS, HARTREE_EV,
                               HARTREE_MHZ)
from sedatom.field import FieldSpectrum, equilibrium_gamma_a, thermal_gamma_a
from sedatom.lamb import (excited_free_particle_delta, free_particle_shift,
                          lamb_proper, thermal_free_particle_delta,
                          total_shift, total_shift_from_polarizability)
from sedatom.sedsim import SimConfig, run_ensemble
from sedatom.spectra import (PotentialModel, oscillator_strength,
                             solve_custom_1d, solve_harmonic,
                             solve_hydrogen_radial, trk_sum)
from sedatom.transitions import decay_summary, einstein_A, einstein_B
from sedatom.field import zpf_density

ALPHA = DEFAULT_CONSTANTS.alpha
TAU = DEFAULT_CONSTANTS.tau
MC2 = DEFAULT_CONSTANTS.mc2


def _report(capsys, num, desc, ok, detail=""):
    line = f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'} - {desc}"
    if detail:
        line += f" ({detail})"
    with capsys.disabled():
        print(line, flush=True)
    assert ok, line


@pytest.fixture(scope="module")
def sho():
    return solve_harmonic(1.0, 1.0, 10)


@pytest.fixture(scope="module")
def hyd():
    t0 = time.perf_counter()
    s = solve_hydrogen_radial(1.0, l_max=1, box_radius=200.0,
                              grid_points=3000, r_min=1e-5)
    return s, time.perf_counter() - t0


def test_criterion_01_ground_state_detailed_balance(capsys, sho, hyd):
    t0 = time.perf_counter()
    ok = True
    for s, state in ((sho, 0), (hyd[0], "1s")):
        report = energy_flow(s, state, FieldSpectrum.zpf())
        for _k, _w, larmor, _diff, net in report.rows:
            ok &= abs(net) <= 1e-14 * abs(larmor)
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 1.0
    _report(capsys, 1, "ground-state detailed balance per partner (1e-14)",
            ok, f"{elapsed:.2f}s")


def test_criterion_02_sho_equilibrium_hierarchy(capsys, sho):
    t0 = time.perf_counter()
    ok = True
    for n in range(1, 8):
        stationary = energy_flow(
            sho, n, FieldSpectrum.uniform_excitation(2.0 * n)).total_dH_dt
        ok &= abs(stationary) <= 1e-14 * 0.5 * TAU * (2 * n + 1)
        zpf = energy_flow(sho, n, FieldSpectrum.zpf()).total_dH_dt
        expected = -0.5 * TAU * ((2 * n + 1) - 1.0)
        ok &= zpf < 0.0
        ok &= abs(zpf - expected) <= 1e-12 * abs(expected)
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 1.0
    _report(capsys, 2, "SHO equilibrium hierarchy and cascade rate (1e-12)",
            ok, f"{elapsed:.2f}s")


def test_criterion_03_einstein_relations(capsys, sho, hyd):
    t0 = time.perf_counter()
    ok = True
    for s in (sho, hyd[0]):
        ls = s.angular_momenta
        for (n, k), x2 in s.dipole_sq.items():
            w = s.omega(n, k)
            if abs(w) <= 1e-9 or x2 == 0.0:
                continue
            ratio = einstein_B(s, n, k)
            if w > 0:
                ok &= abs(einstein_A(s, n, k) / ratio
                          - 2.0 * zpf_density(abs(w))) \
                    <= 1e-12 * 2.0 * zpf_density(abs(w))
            # B symmetry; for the m-averaged 3D data the invariant carries
            # the degeneracy weights
            gi = 1.0 if ls is None else 2.0 * ls[n] + 1.0
            gk = 1.0 if ls is None else 2.0 * ls[k] + 1.0
            b_rev = s.dipole_sq.get((k, n))
            if b_rev:
                ok &= abs(gi * x2 - gk * b_rev) <= 1e-12 * gi * x2
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 1.0
    _report(capsys, 3, "Einstein relations A/B = 2 rho0 and B symmetry "
            "(1e-12)", ok, f"{elapsed:.2f}s")


def test_criterion_04_hydrogen_2p_rate_and_lifetime(capsys, hyd):
    s, solve_seconds = hyd
    t0 = time.perf_counter()
    u1 = lambda r: 2.0 * r * np.exp(-r)
    u2 = lambda r: r**2 * np.exp(-r / 2.0) / (2.0 * math.sqrt(6.0))
    radial, _ = quad(lambda r: u1(r) * r * u2(r), 0.0, 80.0, limit=200)
    oracle_a = (4.0 / 3.0) * 0.375**3 * (radial**2 / 3.0) * ALPHA**3 / AU_TIME_S
    a = einstein_A(s, "2p", "1s") / AU_TIME_S
    tau_s = decay_summary(s, "2p", FieldSpectrum.zpf()).lifetime_seconds
    ok = abs(a - oracle_a) <= 1e-2 * oracle_a
    ok &= abs(a - 6.2649e8) <= 1e-2 * 6.2649e8
    ok &= abs(tau_s - 1.596e-9) <= 1e-2 * 1.596e-9
    elapsed = time.perf_counter() - t0 + solve_seconds
    ok &= elapsed < 10.0
    _report(capsys, 4, "hydrogen 2p rate 6.2649e8/s and 1.596 ns lifetime "
            "(1%)", ok, f"A={a:.4g}/s, {elapsed:.1f}s incl. solve")


def test_criterion_05_sum_rules(capsys, sho, hyd):
    t0 = time.perf_counter()
    ok = abs(trk_sum(hyd[0], "1s") - 1.5) <= 1e-3 * 1.5
    ok &= abs(trk_sum(sho, 0) - 0.5) <= 1e-3 * 0.5
    x = np.linspace(-8.0, 8.0, 1500)
    quartic = solve_custom_1d(PotentialModel.custom_1d(x, 0.25 * x**4), 30)
    ok &= abs(trk_sum(quartic, 0) - 0.5) <= 1e-3 * 0.5
    f = oscillator_strength(hyd[0], "1s", "2p")
    ok &= abs(f - 0.4162) <= 5e-3 * 0.4162
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30.0
    _report(capsys, 5, "TRK sum rules (1e-3) and f(1s->2p) = 0.4162 (0.5%)",
            ok, f"TRK(1s)={trk_sum(hyd[0], '1s'):.5f}, f={f:.5f}, "
            f"{elapsed:.1f}s")


def test_criterion_06_free_particle_shift(capsys):
    t0 = time.perf_counter()
    fp = free_particle_shift()
    ok = abs(fp - ALPHA / (2.0 * math.pi) * MC2) <= 1e-12 * fp
    ok &= abs(fp * HARTREE_EV - 593.48) <= 0.01
    delta = thermal_free_particle_delta(300.0)
    ok &= abs(delta * HARTREE_EV - 1.0e-11) <= 0.1e-11
    quad_delta = excited_free_particle_delta(FieldSpectrum.thermal(300.0))
    ok &= abs(quad_delta - delta) <= 1e-9 * delta
    bose, _ = quad(lambda y: y / math.expm1(y), 1e-12, 60.0, limit=200)
    ok &= abs(bose - math.pi**2 / 6.0) <= 1e-9
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 1.0
    _report(capsys, 6, "free-particle shift 593.48 eV, thermal 1.0e-11 eV, "
            "Bose quadrature (1e-9)", ok, f"{elapsed:.2f}s")


def test_criterion_07_lamb_splitting(capsys):
    t0 = time.perf_counter()

    def splitting_mhz(s):
        d2s = total_shift(s, "2s").lamb_proper
        d2p = total_shift(s, "2p").lamb_proper
        return (d2s - d2p) * HARTREE_MHZ

    # the 2p shift needs the l=2 channel, so these bases carry l_max=2
    base = splitting_mhz(solve_hydrogen_radial(
        1.0, l_max=2, box_radius=200.0, grid_points=3000, r_min=1e-5))
    doubled = splitting_mhz(solve_hydrogen_radial(
        1.0, l_max=2, box_radius=100.0, grid_points=4000, r_min=1e-5,
        energy_cap=4000.0))
    ok = abs(base - 1040.0) <= 0.10 * 1040.0
    ok &= abs(base - doubled) <= 0.03 * abs(doubled)
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 120.0
    _report(capsys, 7, "2s-2p Lamb splitting 1040 MHz (10%), basis-stable "
            "(3%)", ok, f"base={base:.1f} MHz, doubled={doubled:.1f} MHz, "
            f"{elapsed:.1f}s")


def test_criterion_08_route_equivalence(capsys, sho, hyd):
    t0 = time.perf_counter()
    ok = True
    for s, state in ((sho, 0), (hyd[0], "1s"), (hyd[0], "2s"),
                     (hyd[0], "2p")):
        direct = total_shift(s, state).lamb_proper
        bethe = lamb_proper(s, state, route="bethe_log").lamb_proper
        ok &= abs(bethe - direct) <= 1e-2 * abs(direct)
    for s, state in ((sho, 0), (hyd[0], "1s"), (hyd[0], "2s")):
        direct = total_shift(s, state)
        power = total_shift_from_polarizability(s, state)
        ok &= abs(power.total - direct.total) <= 1e-2 * abs(direct.total)
    # the proper part is a subtraction of near-equal totals, so compare it
    # only where it is large enough for that route to resolve
    for s, state in ((sho, 0), (hyd[0], "1s")):
        direct = total_shift(s, state).lamb_proper
        power = total_shift_from_polarizability(s, state).lamb_proper
        ok &= abs(power - direct) <= 1e-2 * abs(direct)
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60.0
    _report(capsys, 8, "direct-PV, Bethe-log, and polarizability routes "
            "agree (1%)", ok, f"{elapsed:.1f}s")


def test_criterion_09_planck_wien_solver(capsys):
    t0 = time.perf_counter()
    T = 300.0
    ok = True
    for x in (0.5, 3.0, 20.0):
        de = x * DEFAULT_CONSTANTS.thermal_energy(T)
        planck = equilibrium_gamma_a(de, T)
        ok &= abs(planck - thermal_gamma_a(de, T)) <= 1e-12 * planck
        wien = equilibrium_gamma_a(de, T, include_stimulated_emission=False)
        ok &= abs(wien - 2.0 * math.exp(-x)) <= 1e-12 * wien
    ratios = []
    for x in (5.0, 15.0, 40.0):
        de = x * DEFAULT_CONSTANTS.thermal_energy(T)
        ratios.append(
            equilibrium_gamma_a(de, T, include_stimulated_emission=False)
            / equilibrium_gamma_a(de, T))
    ok &= ratios[0] < ratios[1] < ratios[2]
    ok &= abs(ratios[2] - 1.0) <= 1e-12
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 1.0
    _report(capsys, 9, "Planck/Wien equilibrium gamma_a (1e-12), ratio -> 1",
            ok, f"{elapsed:.2f}s")


def test_criterion_10_simulator_equilibrium(capsys):
    t0 = time.perf_counter()
    tau_sim = 0.02
    boost = tau_sim / TAU   # equilibrium depends only on rho/tau
    pot = PotentialModel.harmonic(1.0, 1.0)

    def cfg(spectrum, **kw):
        base = dict(potential=pot, tau=tau_sim, t_total=50.0 / tau_sim,
                    n_trajectories=200, seed=7,
                    spectrum=spectrum.with_uniform_g(boost))
        base.update(kw)
        return SimConfig(**base)

    r_zpf = run_ensemble(cfg(FieldSpectrum.zpf()))
    r_hot = run_ensemble(cfg(FieldSpectrum.uniform_excitation(2.0)))
    r_rep = run_ensemble(cfg(FieldSpectrum.zpf(), n_trajectories=16,
                             t_total=300.0))
    r_rep2 = run_ensemble(cfg(FieldSpectrum.zpf(), n_trajectories=16,
                              t_total=300.0))
    ok = abs(r_zpf.energy_ratio() - 1.0) <= 0.05
    # gamma = 3 triples the mode energy: <H> = 3 x (hbar w0 / 2)
    ok &= abs(r_hot.energy_ratio() - 3.0) <= 0.07 * 3.0
    ok &= abs(r_zpf.balance_residual) <= 3.0 * r_zpf.balance_sigma
    ok &= r_rep.mean_H == r_rep2.mean_H
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 120.0
    _report(capsys, 10, "simulator ground-state energy (5%), gamma=3 (7%), "
            "balance 3-sigma, deterministic", ok,
            f"ratio={r_zpf.energy_ratio():.3f}, "
            f"hot={r_hot.energy_ratio():.3f}, {elapsed:.0f}s")


def test_criterion_11_cavity_suppression(capsys, sho):
    t0 = time.perf_counter()
    g0 = 0.125
    plain = decay_summary(sho, 1, FieldSpectrum.uniform_excitation(1.0))
    scaled = decay_summary(
        sho, 1, FieldSpectrum.uniform_excitation(1.0).with_uniform_g(g0))
    ok = True
    for cp, cs in zip(plain.channels, scaled.channels):
        ok &= abs(cs.induced - g0 * cp.induced) <= 1e-12 * cs.induced
        if cp.spontaneous:
            ok &= abs(cs.spontaneous - g0 * cp.spontaneous) \
                <= 1e-12 * cs.spontaneous
            ok &= abs(cs.spontaneous / cs.induced
                      - cp.spontaneous / cp.induced) \
                <= 1e-12 * cp.spontaneous / cp.induced
    blocked = decay_summary(sho, 1, FieldSpectrum.zpf().with_uniform_g(0.0))
    ok &= blocked.stable and math.isinf(blocked.lifetime)
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 1.0
    _report(capsys, 11, "cavity g0 scales rates exactly, g0=0 gives "
            "infinite lifetime", ok, f"{elapsed:.2f}s")
