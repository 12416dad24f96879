import csv
import io
import math

import numpy as np
import pytest

from sedatom.balance import (OMEGA_DEGENERATE, diffusion_rate, energy_flow,
                             larmor_rate)
from sedatom.constants import DEFAULT_CONSTANTS
from sedatom.field import FieldSpectrum
from sedatom.spectra import SpectralData, solve_harmonic, solve_hydrogen_radial

TAU = DEFAULT_CONSTANTS.tau


@pytest.fixture(scope="module")
def sho():
    return solve_harmonic(1.0, 1.0, 10)


@pytest.fixture(scope="module")
def hydrogen():
    return solve_hydrogen_radial(1.0, l_max=1, box_radius=100.0,
                                 grid_points=1200, r_min=1e-4)


def test_ground_state_balances_per_row(sho):
    report = energy_flow(sho, 0, FieldSpectrum.zpf())
    assert len(report.rows) == 1
    for _k, _w, larmor, diffusion, net in report.rows:
        assert abs(net) <= 1e-14 * abs(larmor)


def test_hydrogen_ground_state_balances_per_row(hydrogen):
    report = energy_flow(hydrogen, "1s", FieldSpectrum.zpf())
    assert len(report.rows) > 50
    for _k, _w, larmor, diffusion, net in report.rows:
        assert abs(net) <= 1e-14 * abs(larmor)


def test_larmor_always_dissipative(sho):
    for n in range(5):
        assert larmor_rate(sho, n) < 0.0


def test_sho_zpf_cascade_rate(sho):
    # dH/dt = -1/2 tau omega0^3 [(2n+1) - gamma]; pure ZPF has gamma = 1
    spec = FieldSpectrum.zpf()
    for n in range(1, 6):
        total = energy_flow(sho, n, spec).total_dH_dt
        expected = -0.5 * TAU * ((2 * n + 1) - 1.0)
        assert total == pytest.approx(expected, rel=1e-12)
        assert total < 0.0


def test_sho_excited_field_equilibrium(sho):
    # gamma_a = 2n makes level n stationary
    for n in range(1, 6):
        spec = FieldSpectrum.uniform_excitation(2.0 * n)
        total = energy_flow(sho, n, spec).total_dH_dt
        assert abs(total) <= 1e-14 * 0.5 * TAU * (2 * n + 1)


def test_sho_general_gamma(sho):
    for gamma_a in (0.5, 3.0, 10.0):
        spec = FieldSpectrum.uniform_excitation(gamma_a)
        for n in range(4):
            total = energy_flow(sho, n, spec).total_dH_dt
            expected = -0.5 * TAU * ((2 * n + 1) - (1.0 + gamma_a))
            assert total == pytest.approx(expected, rel=1e-12, abs=1e-25)


def test_total_equals_row_sum(hydrogen):
    report = energy_flow(hydrogen, "2p", FieldSpectrum.thermal(6000.0))
    assert report.total_dH_dt == pytest.approx(
        math.fsum(r[4] for r in report.rows), rel=1e-14)


def test_rates_split_consistency(sho):
    spec = FieldSpectrum.uniform_excitation(1.5)
    n = 2
    report = energy_flow(sho, n, spec)
    assert report.total_dH_dt == pytest.approx(
        larmor_rate(sho, n) + diffusion_rate(sho, n, spec), rel=1e-12)


def test_degenerate_pairs_skipped():
    s = SpectralData(labels=[0, 1, 2],
                     energies=np.array([0.0, 1e-12, 1.0]),
                     dipole_sq={(0, 1): 0.3, (1, 0): 0.3,
                                (0, 2): 0.2, (2, 0): 0.2})
    report = energy_flow(s, 0, FieldSpectrum.zpf())
    assert report.skipped_pairs == [1]
    assert len(report.rows) == 1
    assert abs(1e-12) < OMEGA_DEGENERATE  # the pair really is sub-threshold


def test_report_serialization(sho):
    report = energy_flow(sho, 1, FieldSpectrum.zpf())
    d = report.to_json_dict()
    assert d["state_label"] == "1"
    assert len(d["rows"]) == 2
    reader = csv.reader(io.StringIO(report.to_csv()))
    rows = list(reader)
    assert rows[0] == ["k", "omega_nk", "larmor_term", "diffusion_term", "net"]
    assert len(rows) == 3
    # CSV numbers round-trip exactly (repr formatting)
    assert float(rows[1][4]) == report.rows[0][4]


def test_cavity_suppression_zeroes_channel(sho):
    spec = FieldSpectrum.zpf().with_cavity([(0.9, 1.1, 0.0)])
    report = energy_flow(sho, 1, spec)
    for _k, _w, larmor, diffusion, net in report.rows:
        assert larmor == 0.0 and diffusion == 0.0 and net == 0.0
