import csv
import io
import json
import math

import pytest

from sedatom.cli import main
from sedatom.constants import HARTREE_EV


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert "sedatom" in out and "alpha=" in out


def test_equilibrium_wien_example(capsys):
    code, out, _ = run_cli(capsys, "equilibrium", "--delta-e-ev", "1.0",
                           "--temperature-k", "300", "--no-stimulated")
    assert code == 0
    doc = json.loads(out)
    x = (1.0 / HARTREE_EV) / (300.0 / 315775.02480407)
    assert doc["gamma_a"] == pytest.approx(2.0 * math.exp(-x), rel=1e-12)
    assert doc["provenance"]["equilibrium"]["stimulated"] is False


def test_lamb_decomposition_identity(capsys):
    code, out, _ = run_cli(capsys, "lamb", "--system", "harmonic",
                           "--omega0", "1", "--state", "0",
                           "--cutoff-au", "100")
    assert code == 0
    doc = json.loads(out)
    assert doc["total_au"] == pytest.approx(
        doc["free_particle_au"] + doc["lamb_proper_au"], rel=1e-12)
    assert doc["provenance"]["lamb"]["cutoff_au"] == 100.0


def test_rates_hydrogen_csv(capsys):
    code, out, _ = run_cli(capsys, "rates", "--system", "hydrogen",
                           "--state", "2p", "--field", "zpf",
                           "--emit", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    by_pair = {(r[0], r[1]): r for r in rows[1:]}
    assert float(by_pair[("2p", "1s")][3]) == pytest.approx(6.2649e8,
                                                            rel=1e-2)


def test_csv_and_table_agree(capsys):
    code, csv_out, _ = run_cli(capsys, "balance", "--system", "harmonic",
                               "--state", "1", "--emit", "csv")
    assert code == 0
    code, tbl_out, _ = run_cli(capsys, "balance", "--system", "harmonic",
                               "--state", "1", "--emit", "table")
    assert code == 0
    csv_rows = list(csv.reader(io.StringIO(csv_out)))
    tbl_lines = [l for l in tbl_out.splitlines() if l and "---" not in l]
    assert len(csv_rows) == len(tbl_lines)
    for crow, tline in zip(csv_rows[1:], tbl_lines[1:]):
        assert crow == tline.split()


def test_provenance_round_trip(capsys, tmp_path):
    out_path = tmp_path / "run.json"
    code, _, _ = run_cli(capsys, "balance", "--system", "harmonic",
                         "--state", "2", "--gamma-a", "1.5",
                         "--field", "uniform", "--output", str(out_path))
    assert code == 0
    first = json.loads(out_path.read_text())
    code, out, _ = run_cli(capsys, "balance", "--from-provenance",
                           str(out_path))
    assert code == 0
    second = json.loads(out)
    assert first["rows"] == second["rows"]
    assert first["total_dH_dt"] == second["total_dH_dt"]


def test_provenance_subcommand_mismatch(capsys, tmp_path):
    out_path = tmp_path / "run.json"
    run_cli(capsys, "balance", "--system", "harmonic", "--output",
            str(out_path))
    code, _, err = run_cli(capsys, "rates", "--from-provenance",
                           str(out_path))
    assert code == 2
    assert "subcommand" in err


def test_unknown_config_key_rejected(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"system": {"wavelength": 3}}))
    code, _, err = run_cli(capsys, "spectrum", "--config", str(cfg))
    assert code == 2
    assert "wavelength" in err


def test_config_file_with_flag_override(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"system": {"kind": "harmonic", "omega0": 2.0,
                                          "n_max": 3}}))
    code, out, _ = run_cli(capsys, "spectrum", "--config", str(cfg),
                           "--n-max", "2")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["levels"]) == 3              # flag overrode the file
    assert doc["levels"][0]["energy_au"] == 1.0  # omega0 from the file


def test_numerical_error_exit_code(capsys):
    code, _, err = run_cli(capsys, "spectrum", "--system", "hydrogen",
                           "--grid-points", "200", "--r-min", "0.01")
    assert code == 3
    assert "finer grid" in err


def test_validation_error_exit_code(capsys):
    code, _, err = run_cli(capsys, "lamb", "--system", "harmonic",
                           "--cutoff-au", "100", "--cutoff-ev", "100")
    assert code == 2


def test_cavity_band_flag(capsys):
    code, out, _ = run_cli(capsys, "balance", "--system", "harmonic",
                           "--state", "1", "--cavity-band", "0.9,1.1,0.0")
    assert code == 0
    doc = json.loads(out)
    assert doc["total_dH_dt"] == 0.0
    assert doc["provenance"]["field"]["cavity_bands"] == [[0.9, 1.1, 0.0]]


def test_spectrum_levels(capsys):
    code, out, _ = run_cli(capsys, "spectrum", "--system", "harmonic",
                           "--omega0", "1", "--n-max", "4")
    assert code == 0
    doc = json.loads(out)
    assert [lv["energy_au"] for lv in doc["levels"]] == [
        0.5, 1.5, 2.5, 3.5, 4.5]


def test_simulate_small_run(capsys, tmp_path):
    dump = tmp_path / "traj.csv"
    code, out, _ = run_cli(capsys, "simulate", "--tau", "0.05",
                           "--t-total", "50", "--n-traj", "2", "--seed", "4",
                           "--every", "100", "--dump-trajectory", str(dump))
    assert code == 0
    doc = json.loads(out)
    assert doc["n_trajectories"] == 2
    assert doc["provenance"]["simulate"]["seed"] == 4
    rows = list(csv.reader(io.StringIO(dump.read_text())))
    assert rows[0] == ["t", "x", "p"]
    assert len(rows) > 3
