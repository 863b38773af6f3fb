"""Command line interface.

Every subcommand reads one JSON file given by ``--config`` and writes its
artifacts into ``--out``. Exit codes: 0 success, 2 schema error, 3 violated
precondition or hypothesis, 4 numerical failure.
"""

import argparse
import os
import sys

import numpy as np

from . import artifacts as io_
from .draws import random_pair
from .errors import HypothesisViolation, ResonanceError, SchemaError
from .glm import QUAD_TOL, glm_kernel_F, recover_perturbation
from .perturbed import JostFamily, perturbed_polys, validate_class
from .reconstruct import ReconstructionInput, extract_input, reconstruct
from .scattering import ScatteringData, assemble_scattering_data, data_from_pair, check_hypothesis1, scattering_grid
from .states import locate_states, validate_state_laws

SUBCOMMANDS = ("bands", "states", "scatter", "invert", "reconstruct", "roundtrip")


def _config(args, need_perturbation=False):
    try:
        cfg = io_.load_config(args.config, need_perturbation)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    if args.grid is not None:
        if args.grid < 16:
            raise SchemaError("--grid must be at least 16")
        cfg.grid = args.grid
    if args.tol is not None:
        cfg.tolerances["quadrature_tol"] = args.tol
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _out(args, name):
    return os.path.join(args.out, name)


def cmd_bands(args):
    cfg = _config(args)
    bg = cfg.background
    bands = bg.bands.to_json()
    payload = {"background": bg.to_json(), "bands": bands,
               "intervals": [list(bg.bands.band(j)) for j in range(1, bg.q + 1)]}
    io_.write_json(_out(args, "bands.json"), payload, "bands")
    if args.format == "csv":
        rows = [(j, *bg.bands.band(j)) for j in range(1, bg.q + 1)]
        io_.write_csv(_out(args, "bands.csv"), ["band", "lo", "hi"], rows)
    if args.plot:
        from .plotting import plot_bands
        plot_bands(bg, _out(args, "bands.svg"))
    return payload


def cmd_states(args):
    cfg = _config(args, need_perturbation=True)
    bg, pert = cfg.background, cfg.perturbation
    validate_class(bg, pert)
    tol = cfg.tolerances
    catalog = locate_states(bg, pert, tol["cluster_radius"], tol["lift_tol"])
    fam = perturbed_polys(bg, pert)
    laws = validate_state_laws(catalog, bg, fam.f_poly, grid=cfg.grid, strict=False)
    payload = {"background": bg.to_json(), "perturbation": pert.to_json(), "nu": pert.nu,
               "catalog": catalog.to_json(), "laws": laws}
    try:
        inp = extract_input(bg, pert)
        doc = inp.to_json()
        doc["background"] = bg.to_json()
        io_.write_json(_out(args, "reconstruction_input.json"), doc, "reconstruction_input")
        payload["reconstruction_input"] = "reconstruction_input.json"
    except ResonanceError as exc:
        payload["reconstruction_input"] = None
        payload["reconstruction_input_error"] = str(exc)
    io_.write_json(_out(args, "states.json"), payload, "states")
    if args.format == "csv":
        rows = [(s.lam.real, s.lam.imag, s.location.sheet, s.multiplicity) for s in catalog.states]
        io_.write_csv(_out(args, "states.csv"), ["lambda_re", "lambda_im", "sheet", "multiplicity"], rows)
    if args.plot:
        from .plotting import plot_states
        plot_states(bg, catalog, _out(args, "states.svg"))
    return payload


def cmd_scatter(args):
    cfg = _config(args, need_perturbation=True)
    bg, pert = cfg.background, cfg.perturbation
    if pert.is_zero:
        # outside every class; kept as the reflectionless reference case
        data = data_from_pair(bg, JostFamily(bg, pert).pair, [], cfg.side)
    else:
        validate_class(bg, pert)
        data = assemble_scattering_data(bg, pert, cfg.side)
    report = check_hypothesis1(data, bg, grid=cfg.grid, strict=False)
    grid = scattering_grid(data, cfg.grid)
    t, rm, rp = grid["T"], grid["R_minus"], grid["R_plus"]
    dev = max(float(np.max(np.abs(np.abs(t) ** 2 + np.abs(rm) ** 2 - 1))),
              float(np.max(np.abs(np.abs(t) ** 2 + np.abs(rp) ** 2 - 1))))
    payload = data.to_json()
    payload.update({"perturbation": pert.to_json(), "hypothesis": report, "unitarity_max_deviation": dev,
                    "grid_size": cfg.grid})
    io_.write_json(_out(args, "scattering.json"), payload, "scattering")
    header = ["z_re", "z_im", "T_re", "T_im", "Rm_re", "Rm_im", "Rp_re", "Rp_im"]
    rows = [(z.real, z.imag, a.real, a.imag, b.real, b.imag, c.real, c.imag)
            for z, a, b, c in zip(grid["z"], t, rm, rp)]
    if args.format == "csv":
        io_.write_csv(_out(args, "scattering.csv"), header, rows)
    else:
        io_.write_json(_out(args, "scattering_grid.json"), {"columns": header, "rows": rows}, "scattering_grid")
    return payload


def _report(pert, rep, extra=None):
    out = {"recovered": pert.to_json(), "report": rep}
    if extra:
        out.update(extra)
    return out


def cmd_invert(args):
    doc = io_.read_json(args.config, "scattering")
    try:
        bg = io_.parse_background(io_.require(doc, "background", dict))
        data = ScatteringData.from_json(doc, bg)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"scattering data: {exc}") from exc
    hyp = check_hypothesis1(data, bg, grid=args.grid or 200, strict=True)
    kernel = glm_kernel_F(data, bg, tol=args.tol or QUAD_TOL)
    pert, rep = recover_perturbation(bg, kernel)
    payload = _report(pert, rep, {"hypothesis": hyp})
    if "perturbation" in doc:
        src = io_.parse_perturbation(doc["perturbation"])
        payload["max_error"] = _error(src, pert)
    io_.write_json(_out(args, "glm_report.json"), payload, "glm_report")
    return payload


def cmd_reconstruct(args):
    doc = io_.read_json(args.config, "reconstruction_input")
    for key in ("background", "states", "r_zeros", "A", "phi0_plus", "c3", "v0"):
        io_.require(doc, key, (dict, list, int, float), "reconstruction input")
    try:
        bg = io_.parse_background(doc["background"])
        inp = ReconstructionInput.from_json(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"reconstruction input: {exc}") from exc
    pert, rep = reconstruct(inp, bg)
    payload = _report(pert, rep)
    io_.write_json(_out(args, "glm_report.json"), payload, "glm_report")
    return payload


def _error(a, b):
    if a.p != b.p:
        n = max(a.p, b.p) + 1
        ua, va = np.pad(a.u, (0, n - a.p - 1)), np.pad(a.v, (0, n - a.p - 1))
        ub, vb = np.pad(b.u, (0, n - b.p - 1)), np.pad(b.v, (0, n - b.p - 1))
    else:
        ua, va, ub, vb = a.u, a.v, b.u, b.v
    return float(max(np.max(np.abs(np.subtract(ua, ub))), np.max(np.abs(np.subtract(va, vb)))))


def roundtrip_one(bg, pert, tol=QUAD_TOL):
    """Errors of the two inverse routes and the reconstruction route."""
    out = {"q": bg.q, "p": pert.p, "nu": pert.nu}
    recovered = {}
    for side in ("right", "left"):
        data = assemble_scattering_data(bg, pert, side)
        rec, _ = recover_perturbation(bg, glm_kernel_F(data, bg, tol=tol))
        recovered[side] = rec
        out[f"error_{side}"] = _error(pert, rec)
    out["side_agreement"] = _error(recovered["right"], recovered["left"])
    try:
        rec, _ = reconstruct(extract_input(bg, pert), bg)
        out["error_reconstruct"] = _error(pert, rec)
    except HypothesisViolation as exc:
        out["error_reconstruct"] = None
        out["reconstruct_rejected"] = str(exc)
    return out


def cmd_roundtrip(args):
    cfg = _config(args)
    tol = cfg.tolerances["quadrature_tol"]
    payload = {"seed": cfg.seed}
    if cfg.perturbation is not None:
        payload["config_case"] = roundtrip_one(cfg.background, cfg.perturbation, tol)
    draws = cfg.draws if cfg.draws is not None else (0 if cfg.perturbation is not None else 30)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for k in range(draws):
        bg, pert = random_pair(rng)
        try:
            row = roundtrip_one(bg, pert, tol)
        except ResonanceError as exc:
            row = {"q": bg.q, "p": pert.p, "nu": pert.nu, "failure": f"{type(exc).__name__}: {exc}"}
        row["draw"] = k
        rows.append(row)
    if draws:
        ok = [r for r in rows if "failure" not in r]
        rec = [r["error_reconstruct"] for r in ok if r.get("error_reconstruct") is not None]
        payload["suite"] = {
            "draws": draws,
            "failures": draws - len(ok),
            "max_error_right": max([r["error_right"] for r in ok], default=None),
            "max_error_left": max([r["error_left"] for r in ok], default=None),
            "max_error_reconstruct": max(rec, default=None),
            "reconstruct_rejection_rate": (len(ok) - len(rec)) / len(ok) if ok else None,
            "rows": rows,
        }
    io_.write_json(_out(args, "roundtrip.json"), payload, "roundtrip")
    if args.format == "csv" and rows:
        cols = ["draw", "q", "p", "nu", "error_right", "error_left", "error_reconstruct"]
        table = [[r.get(c) if r.get(c) is not None else float("nan") for c in cols] for r in rows]
        io_.write_csv(_out(args, "roundtrip.csv"), cols, table)
    return payload


COMMANDS = {
    "bands": cmd_bands,
    "states": cmd_states,
    "scatter": cmd_scatter,
    "invert": cmd_invert,
    "reconstruct": cmd_reconstruct,
    "roundtrip": cmd_roundtrip,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="jacobi-resonance",
                                     description="Direct and inverse resonance problems for periodic Jacobi operators.")
    parser.add_argument("command", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="input JSON file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--grid", type=int, default=None, help="grid size for sampled checks and tables")
    parser.add_argument("--tol", type=float, default=None, help="quadrature tolerance")
    parser.add_argument("--seed", type=int, default=None, help="seed for randomized suites")
    parser.add_argument("--format", choices=("json", "csv"), default="csv", help="encoding of tabular outputs")
    parser.add_argument("--plot", action="store_true", help="write SVG figures")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.tol is not None and not args.tol > 0:
        print("error: --tol must be positive", file=sys.stderr)
        return 2
    try:
        with np.errstate(all="ignore"):
            COMMANDS[args.command](args)
    except ResonanceError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (np.linalg.LinAlgError, ArithmeticError, ValueError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
