"""Command-line front end.

Every run resolves flags, an optional JSON config file, and defaults into a
single fully-materialized configuration, which is echoed under the
``provenance`` key of every JSON output.  Re-running with
``--from-provenance output.json`` reproduces the numbers bit for bit.
Exit codes: 0 success, 2 validation error, 3 numerical error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Optional

from . import __version__
from . import balance as balance_mod
from . import lamb as lamb_mod
from . import sedsim, transitions
from .constants import (AU_TIME_S, DEFAULT_CONSTANTS, HARTREE_EV,
                        PhysicalConstants)
from .errors import NumericalError, ValidationError
from .field import FieldSpectrum, equilibrium_gamma_a
from .spectra import (PotentialModel, SpectralData, solve_harmonic,
                      solve_hydrogen_radial)

# Fully-materialized defaults; also the whitelist for strict config parsing.
_SCHEMA = {
    "constants": {"alpha": DEFAULT_CONSTANTS.alpha},
    "system": {
        "kind": "harmonic",
        "omega0": 1.0, "mass": 1.0, "n_max": 10,
        "Z": 1.0, "l_max": 1, "box_radius": 200.0, "grid_points": 3000,
        "r_min": 1e-5, "energy_cap": 1000.0,
    },
    "field": {
        "kind": "zpf",
        "temperature_k": 300.0, "gamma_a": 0.0, "csv_path": None,
        "g0": None, "cavity_bands": None,
    },
    "rates": {"state": None},
    "balance": {"state": "0"},
    "lamb": {
        "state": "0", "cutoff_au": None, "route": "direct",
        "temperature_k": None, "log_factor": None,
    },
    "equilibrium": {
        "delta_e_au": 1.0, "temperature_k": 300.0, "stimulated": True,
    },
    "simulate": {
        "omega0": 1.0, "mass": 1.0, "tau": None, "n_modes": 401,
        "band": None, "dt": None, "t_total": 1000.0, "n_trajectories": 200,
        "seed": 0, "gamma_a": 0.0, "g0": None, "every": 100,
        "dump_trajectory": None,
    },
    "spectrum": {},
}
_COMMON = ("constants", "system", "field")


def _deep_default(subcommand: str) -> dict:
    cfg = {"subcommand": subcommand, "emit": "json", "output": None,
           "threads": None}
    for sec in _COMMON + (subcommand,):
        cfg[sec] = dict(_SCHEMA[sec])
    return cfg


def _overlay(cfg: dict, patch: dict, source: str):
    """Merge ``patch`` into ``cfg``, rejecting unknown sections/keys."""
    for sec, val in patch.items():
        if sec in ("subcommand", "emit", "output", "threads"):
            if sec != "subcommand":
                cfg[sec] = val
            continue
        if sec not in cfg or not isinstance(cfg[sec], dict):
            raise ValidationError(f"unknown config section {sec!r} in {source}")
        if not isinstance(val, dict):
            raise ValidationError(f"section {sec!r} in {source} must be an object")
        for key, v in val.items():
            if key not in cfg[sec]:
                raise ValidationError(
                    f"unknown config key {sec}.{key} in {source}")
            cfg[sec][key] = v
    return cfg


def _build_constants(cfg: dict) -> PhysicalConstants:
    return PhysicalConstants(alpha=float(cfg["constants"]["alpha"]))


def _build_system(cfg: dict, constants: PhysicalConstants) -> SpectralData:
    sc = cfg["system"]
    if sc["kind"] == "harmonic":
        return solve_harmonic(float(sc["omega0"]), float(sc["mass"]),
                              int(sc["n_max"]))
    if sc["kind"] == "hydrogen":
        return solve_hydrogen_radial(float(sc["Z"]), int(sc["l_max"]),
                                     float(sc["box_radius"]),
                                     int(sc["grid_points"]),
                                     r_min=float(sc["r_min"]),
                                     energy_cap=float(sc["energy_cap"]),
                                     mass=float(sc["mass"]))
    raise ValidationError(f"unknown system kind {sc['kind']!r}")


def _build_field(cfg: dict, constants: PhysicalConstants) -> FieldSpectrum:
    fc = cfg["field"]
    kind = fc["kind"]
    if kind == "zpf":
        spec = FieldSpectrum.zpf(constants)
    elif kind == "thermal":
        spec = FieldSpectrum.thermal(float(fc["temperature_k"]), constants)
    elif kind == "uniform":
        spec = FieldSpectrum.uniform_excitation(float(fc["gamma_a"]), constants)
    elif kind == "csv":
        if not fc["csv_path"]:
            raise ValidationError("field kind 'csv' needs field.csv_path")
        spec = FieldSpectrum.from_csv(fc["csv_path"], constants)
    else:
        raise ValidationError(f"unknown field kind {kind!r}")
    if fc["cavity_bands"]:
        spec = spec.with_cavity([tuple(b) for b in fc["cavity_bands"]])
    if fc["g0"] is not None:
        spec = spec.with_uniform_g(float(fc["g0"]))
    return spec


def _render_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _render_table(header, rows) -> str:
    cells = [list(header)] + [[_fmt(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()
             for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _emit(cfg: dict, header, rows, json_body: dict) -> str:
    mode = cfg["emit"]
    if mode == "json":
        json_body = dict(json_body)
        json_body["provenance"] = cfg
        return json.dumps(json_body, indent=2) + "\n"
    if mode == "csv":
        return _render_csv(header, rows)
    if mode == "table":
        return _render_table(header, rows)
    raise ValidationError(f"unknown emit mode {cfg['emit']!r}")


def _cmd_spectrum(cfg: dict) -> str:
    constants = _build_constants(cfg)
    s = _build_system(cfg, constants)
    header = ["index", "label", "energy_au", "energy_ev", "l", "pseudostate"]
    rows = []
    for i, label in enumerate(s.labels):
        l = s.angular_momenta[i] if s.angular_momenta is not None else ""
        ps = bool(s.is_pseudostate[i]) if s.is_pseudostate is not None else False
        rows.append([i, label, float(s.energies[i]),
                     float(s.energies[i]) * HARTREE_EV, l, ps])
    body = {"levels": [dict(zip(header, r)) for r in rows]}
    return _emit(cfg, header, rows, body)


def _cmd_rates(cfg: dict) -> str:
    constants = _build_constants(cfg)
    s = _build_system(cfg, constants)
    spectrum = _build_field(cfg, constants)
    state = cfg["rates"]["state"]
    states = None if state is None else [_state_id(s, state)]
    table = transitions.build_rate_table(s, spectrum, constants, states=states)
    header = ["n", "k", "omega_au", "A_per_s", "B_au", "induced_per_s"]
    rows = [[r[h] for h in header] for r in table.rows]
    return _emit(cfg, header, rows, table.to_json_dict())


def _state_id(s: SpectralData, token: str):
    """A state flag is either an integer index or a label like '2p'."""
    try:
        return int(token)
    except ValueError:
        return token


def _cmd_balance(cfg: dict) -> str:
    constants = _build_constants(cfg)
    s = _build_system(cfg, constants)
    spectrum = _build_field(cfg, constants)
    report = balance_mod.energy_flow(
        s, _state_id(s, cfg["balance"]["state"]), spectrum, constants)
    header = ["k", "omega_nk", "larmor_term", "diffusion_term", "net"]
    rows = [list(r) for r in report.rows]
    return _emit(cfg, header, rows, report.to_json_dict())


def _cmd_lamb(cfg: dict) -> str:
    constants = _build_constants(cfg)
    s = _build_system(cfg, constants)
    lc = cfg["lamb"]
    cutoff = lamb_mod.CutoffPolicy(
        omega_c=None if lc["cutoff_au"] is None else float(lc["cutoff_au"]))
    state = _state_id(s, lc["state"])
    route = {"direct": "direct", "bethe": "bethe_log",
             "laplacian": "laplacian_V"}.get(lc["route"])
    if route is None:
        raise ValidationError(f"unknown lamb route {lc['route']!r}")
    total = lamb_mod.total_shift(s, state, cutoff, constants)
    if route == "direct":
        proper = total.lamb_proper
        contributions = total.contributions
    else:
        r = lamb_mod.lamb_proper(s, state, cutoff, route=route,
                                 log_factor=lc["log_factor"],
                                 constants=constants)
        proper = r.lamb_proper
        contributions = r.contributions
    body = {
        "state": total.state, "state_label": total.state_label,
        "route": route, "cutoff_au": total.cutoff,
        "total_au": total.total, "free_particle_au": total.free_particle,
        "lamb_proper_au": proper,
        "lamb_proper_ev": proper * HARTREE_EV,
        "contributions": [
            {"k": k, "omega_kn": w, "contribution_au": c}
            for k, w, c in contributions],
    }
    if lc["temperature_k"] is not None:
        t = float(lc["temperature_k"])
        body["thermal_free_particle_delta_au"] = \
            lamb_mod.thermal_free_particle_delta(t, constants)
        body["thermal_lamb_delta_au"] = lamb_mod.thermal_lamb_delta(
            s, state, t, cutoff, constants)
    header = ["k", "omega_kn", "contribution_au"]
    rows = [[k, w, c] for k, w, c in contributions]
    return _emit(cfg, header, rows, body)


def _cmd_equilibrium(cfg: dict) -> str:
    constants = _build_constants(cfg)
    ec = cfg["equilibrium"]
    gamma = equilibrium_gamma_a(float(ec["delta_e_au"]),
                                float(ec["temperature_k"]),
                                include_stimulated_emission=bool(ec["stimulated"]),
                                constants=constants)
    header = ["delta_e_au", "temperature_k", "stimulated", "gamma_a"]
    row = [float(ec["delta_e_au"]), float(ec["temperature_k"]),
           bool(ec["stimulated"]), gamma]
    return _emit(cfg, header, [row], dict(zip(header, row)))


def _cmd_simulate(cfg: dict) -> str:
    constants = _build_constants(cfg)
    sc = cfg["simulate"]
    spectrum = _build_field(cfg, constants)
    pot = PotentialModel.harmonic(float(sc["omega0"]), float(sc["mass"]))
    sim_cfg = sedsim.SimConfig(
        potential=pot, spectrum=spectrum, n_modes=int(sc["n_modes"]),
        band=None if sc["band"] is None else tuple(sc["band"]),
        dt=None if sc["dt"] is None else float(sc["dt"]),
        t_total=float(sc["t_total"]),
        n_trajectories=int(sc["n_trajectories"]), seed=int(sc["seed"]),
        tau=None if sc["tau"] is None else float(sc["tau"]),
        record_every=int(sc["every"]), constants=constants)
    result = sedsim.run_ensemble(sim_cfg)
    if sc["dump_trajectory"]:
        realization = sedsim.sample_field(
            spectrum, sim_cfg.resolved().band, sim_cfg.n_modes,
            sedsim.mix_seed(sim_cfg.seed, 0))
        t, x, p = sedsim.integrate_trajectory(sim_cfg, realization)
        with open(sc["dump_trajectory"], "w") as fh:
            fh.write(_render_csv(["t", "x", "p"],
                                 [[float(a), float(b), float(c)]
                                  for a, b, c in zip(t, x, p)]))
    header = ["t", "mean_H"]
    rows = [[float(t), float(h)] for t, h in
            zip(result.h_series_times, result.h_series)]
    return _emit(cfg, header, rows, result.to_json_dict())


_HANDLERS = {
    "spectrum": _cmd_spectrum,
    "rates": _cmd_rates,
    "balance": _cmd_balance,
    "lamb": _cmd_lamb,
    "equilibrium": _cmd_equilibrium,
    "simulate": _cmd_simulate,
}


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file (strict schema)")
    p.add_argument("--from-provenance",
                   help="JSON output of a previous run; reproduces it")
    p.add_argument("--emit", choices=["json", "csv", "table"])
    p.add_argument("--output", help="write to file instead of stdout")
    p.add_argument("--threads", type=int, help="cap worker thread count")
    p.add_argument("--alpha", type=float, help="fine-structure constant")
    p.add_argument("--system", choices=["harmonic", "hydrogen"])
    p.add_argument("--omega0", type=float)
    p.add_argument("--mass", type=float)
    p.add_argument("--n-max", type=int)
    p.add_argument("--z", type=float)
    p.add_argument("--l-max", type=int)
    p.add_argument("--box-radius", type=float)
    p.add_argument("--grid-points", type=int)
    p.add_argument("--r-min", type=float)
    p.add_argument("--field", choices=["zpf", "thermal", "uniform", "csv"])
    p.add_argument("--temperature-k", type=float)
    p.add_argument("--gamma-a", type=float)
    p.add_argument("--field-csv")
    p.add_argument("--g0", type=float)
    p.add_argument("--cavity-band", action="append", metavar="LO,HI,G",
                   help="repeatable; piecewise-constant mode density")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sedatom",
        description="Radiative rates, energy balance, and shifts of bound "
                    "charges in a zero-point background field.")
    parser.add_argument(
        "--version", action="version",
        version=(f"sedatom {__version__} (alpha={DEFAULT_CONSTANTS.alpha}, "
                 f"default cutoff mc^2 = {DEFAULT_CONSTANTS.mc2} E_h)"))
    sub = parser.add_subparsers(dest="subcommand", required=True)

    for name in ("spectrum", "rates", "balance", "lamb", "equilibrium",
                 "simulate"):
        p = sub.add_parser(name)
        _add_common(p)
        if name == "rates":
            p.add_argument("--state")
        if name == "balance":
            p.add_argument("--state")
        if name == "lamb":
            p.add_argument("--state")
            p.add_argument("--cutoff-au", type=float)
            p.add_argument("--cutoff-ev", type=float)
            p.add_argument("--route", choices=["direct", "bethe", "laplacian"])
            p.add_argument("--log-factor", type=float)
        if name == "equilibrium":
            p.add_argument("--delta-e-au", type=float)
            p.add_argument("--delta-e-ev", type=float)
            p.add_argument("--no-stimulated", action="store_true",
                           default=None)
        if name == "simulate":
            p.add_argument("--tau", type=float)
            p.add_argument("--n-modes", type=int)
            p.add_argument("--band", metavar="LO,HI")
            p.add_argument("--dt", type=float)
            p.add_argument("--t-total", type=float)
            p.add_argument("--n-traj", type=int)
            p.add_argument("--seed", type=int)
            p.add_argument("--every", type=int)
            p.add_argument("--dump-trajectory")
    return parser


def _flags_to_patch(args: argparse.Namespace) -> dict:
    """Translate non-None CLI flags into a config overlay."""
    patch: dict = {}

    def put(section, key, value):
        if value is not None:
            patch.setdefault(section, {})[key] = value

    put("constants", "alpha", args.alpha)
    put("system", "kind", args.system)
    sub = args.subcommand
    if sub == "simulate":
        put("simulate", "omega0", args.omega0)
        put("simulate", "mass", args.mass)
    else:
        put("system", "omega0", args.omega0)
        put("system", "mass", args.mass)
    put("system", "n_max", getattr(args, "n_max", None))
    put("system", "Z", getattr(args, "z", None))
    put("system", "l_max", getattr(args, "l_max", None))
    put("system", "box_radius", getattr(args, "box_radius", None))
    put("system", "grid_points", getattr(args, "grid_points", None))
    put("system", "r_min", getattr(args, "r_min", None))
    put("field", "kind", args.field)
    if sub not in ("lamb", "equilibrium"):
        put("field", "temperature_k", args.temperature_k)
    if sub != "simulate":
        put("field", "gamma_a", args.gamma_a)
    put("field", "csv_path", args.field_csv)
    put("field", "g0", args.g0)
    if args.cavity_band:
        bands = []
        for spec in args.cavity_band:
            parts = spec.split(",")
            if len(parts) != 3:
                raise ValidationError(
                    f"--cavity-band expects LO,HI,G, got {spec!r}")
            bands.append([float(x) for x in parts])
        put("field", "cavity_bands", bands)

    if sub in ("rates", "balance", "lamb"):
        put(sub, "state", args.state)
    if sub == "lamb":
        put("lamb", "route", args.route)
        put("lamb", "log_factor", args.log_factor)
        put("lamb", "temperature_k", args.temperature_k)
        if args.cutoff_au is not None and args.cutoff_ev is not None:
            raise ValidationError("give --cutoff-au or --cutoff-ev, not both")
        put("lamb", "cutoff_au", args.cutoff_au)
        if args.cutoff_ev is not None:
            put("lamb", "cutoff_au", args.cutoff_ev / HARTREE_EV)
    if sub == "equilibrium":
        if args.delta_e_au is not None and args.delta_e_ev is not None:
            raise ValidationError("give --delta-e-au or --delta-e-ev, not both")
        put("equilibrium", "delta_e_au", args.delta_e_au)
        if args.delta_e_ev is not None:
            put("equilibrium", "delta_e_au", args.delta_e_ev / HARTREE_EV)
        put("equilibrium", "temperature_k", args.temperature_k)
        if args.no_stimulated:
            put("equilibrium", "stimulated", False)
    if sub == "simulate":
        put("simulate", "tau", args.tau)
        put("simulate", "n_modes", args.n_modes)
        if args.band is not None:
            lo, hi = (float(x) for x in args.band.split(","))
            put("simulate", "band", [lo, hi])
        put("simulate", "dt", args.dt)
        put("simulate", "t_total", args.t_total)
        put("simulate", "n_trajectories", args.n_traj)
        put("simulate", "seed", args.seed)
        put("simulate", "gamma_a", args.gamma_a)
        put("simulate", "every", args.every)
        put("simulate", "dump_trajectory", args.dump_trajectory)
        # simulate's gamma_a feeds the field section
        if args.gamma_a is not None:
            patch.setdefault("field", {})["kind"] = "uniform"
            patch["field"]["gamma_a"] = args.gamma_a

    if args.emit is not None:
        patch["emit"] = args.emit
    if args.output is not None:
        patch["output"] = args.output
    if args.threads is not None:
        patch["threads"] = args.threads
    return patch


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = _deep_default(args.subcommand)
    if args.config:
        with open(args.config) as fh:
            _overlay(cfg, json.load(fh), f"config file {args.config}")
    if args.from_provenance:
        with open(args.from_provenance) as fh:
            doc = json.load(fh)
        prov = doc.get("provenance", doc)
        if prov.get("subcommand") not in (None, args.subcommand):
            raise ValidationError(
                f"provenance subcommand {prov.get('subcommand')!r} does not "
                f"match {args.subcommand!r}")
        prov = {k: v for k, v in prov.items() if k != "output"}
        _overlay(cfg, prov, f"provenance file {args.from_provenance}")
    _overlay(cfg, _flags_to_patch(args), "command line")

    if cfg["threads"] is not None:
        import numba
        numba.set_num_threads(int(cfg["threads"]))

    text = _HANDLERS[args.subcommand](cfg)
    if cfg["output"]:
        with open(cfg["output"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    try:
        return run(argv)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
