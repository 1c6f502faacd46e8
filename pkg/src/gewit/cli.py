"""Command-line front end.

Exit codes: 0 success, 1 I/O or parse failure, 2 invalid state input.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import bloch
from . import criteria
from . import matcore as mc
from . import scan
from . import simplex3 as s3
from . import witness as wt

EXIT_OK, EXIT_IO, EXIT_INVALID = 0, 1, 2


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_IO):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for invalid states here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(f"{self.prog}: error: {message}", EXIT_IO)


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    _write(text, out)


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}") from exc


def _load_matrix(path: str) -> tuple[np.ndarray, tuple[int, int]]:
    try:
        with open(path) as fh:
            obj = json.load(fh)
        mat = mc.matrix_from_json(obj)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CliError(f"cannot read matrix from {path}: {exc}") from exc
    if "dims" in obj:
        dims = tuple(int(x) for x in obj["dims"])
    else:
        d = math.isqrt(mat.shape[0])
        if d * d != mat.shape[0]:
            raise CliError(f"{path}: size {mat.shape[0]} is not a square; give \"dims\"")
        dims = (d, d)
    if dims[0] * dims[1] != mat.shape[0] or mat.shape[0] != mat.shape[1]:
        raise CliError(f"{path}: dims {dims} do not match shape {mat.shape}")
    return mat, dims


def _point_from_args(args) -> s3.FamilyPoint | None:
    if args.horodecki_b is not None:
        try:
            return s3.horodecki_point(args.horodecki_b)
        except ValueError as exc:
            raise CliError(str(exc)) from exc
    vals = (args.alpha, args.beta, args.gamma)
    if all(v is None for v in vals):
        return None
    return s3.FamilyPoint(*(0.0 if v is None else float(v) for v in vals))


def _state_from_args(args) -> tuple[np.ndarray, tuple[int, int], s3.FamilyPoint | None]:
    if args.matrix:
        mat, dims = _load_matrix(args.matrix)
        return mat, dims, None
    p = _point_from_args(args)
    if p is None:
        raise CliError("give --alpha/--beta/--gamma, --horodecki-b or --matrix")
    return s3.family_state(p), s3.DIMS, p


def _floats(xs) -> list:
    return [float(x) for x in xs]


# -- subcommands -------------------------------------------------------------------


def cmd_classify(args) -> int:
    mat, dims, p = _state_from_args(args)
    verdict = criteria.classify(mat, dims)
    out = verdict.to_json()
    if p is not None:
        out["point"] = dict(zip(("alpha", "beta", "gamma"), _floats(p)))
        out["euclid"] = dict(zip(("a", "b", "c"), _floats(s3.to_euclid(p))))
    _emit(out, args.out)
    return EXIT_INVALID if verdict.label is criteria.Label.INVALID_STATE else EXIT_OK


def cmd_scan(args) -> int:
    try:
        box = scan.parse_box(args.box) if args.box else ((-1.0, 1.0),) * 3
        cfg = scan.ScanConfig(
            grid=args.grid, box=box, out=args.out, fmt=args.format, jobs=args.jobs, seed=args.seed, restarts=args.restarts
        )
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    rows = scan.run_scan(cfg)
    _write(scan.rows_to_text(rows, cfg.fmt), cfg.out)
    return EXIT_OK


def _horodecki_row(b: float) -> dict:
    p, rho = s3.horodecki(b)
    v = criteria.classify(rho, s3.DIMS)
    return {
        "b": b,
        "alpha": p.alpha,
        "beta": p.beta,
        "gamma": p.gamma,
        "ppt_margin": v.ppt_margin,
        "realign_sum": v.realignment_sum,
        "label": v.label.value,
    }


def cmd_horodecki(args) -> int:
    if args.horodecki_b is not None:
        bs = [float(args.horodecki_b)]
    else:
        bs = [float(b) for b in np.linspace(0, 5, args.grid)]
    try:
        rows = [_horodecki_row(b) for b in bs]
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    _emit({"rows": rows, "ppt_edges": s3.horodecki_ppt_edges(args.tol)}, args.out)
    return EXIT_OK


def _named_operator(name: str, args) -> np.ndarray:
    if name in s3.POLYGON_NAMES:
        return s3.polygon_ops()[name]
    if name == "g_re":
        if args.beta is None or args.gamma is None:
            raise CliError("g_re needs --beta and --gamma (the tangent point)")
        try:
            return s3.g_re(args.beta, args.gamma)
        except s3.DomainError as exc:
            raise CliError(str(exc)) from exc
    raise CliError(f"unknown operator {name!r}")


def cmd_witness_check(args) -> int:
    if args.matrix:
        op, dims = _load_matrix(args.matrix)
    elif args.op:
        op, dims = _named_operator(args.op, args), s3.DIMS
    else:
        raise CliError("give --matrix or --op")
    if not mc.is_hermitian(op, 1e-10):
        raise CliError("operator is not Hermitian", EXIT_INVALID)
    res = wt.is_witness(op, dims, restarts=args.restarts, seed=args.seed)
    out = {
        "is_witness": res.is_witness,
        "optimal": res.optimal,
        "detecting": res.detecting,
        "min_value": res.optimum.value,
        "relative_min": res.relative_min,
        "s_min": res.optimum.s_min,
    }
    if dims[0] == dims[1] and abs(np.trace(op)) > 1e-12:
        basis = bloch.pauli_basis() if dims[0] == 2 else bloch.weyl_basis(dims[0])
        form = bloch.svo_witness(bloch.witness_form(op, basis, basis))
        out["svo_singular_values"] = _floats(form.s)
        local = max(np.max(np.abs(form.r), initial=0.0), np.max(np.abs(form.t), initial=0.0))
        out["singular_value_bound"] = bloch.singular_value_bound(form) if local <= 1e-10 else None
    _emit(out, args.out)
    return EXIT_OK


def _endpoint(spec: str) -> tuple[np.ndarray, tuple[int, int]]:
    """``b=<value>``, ``p=<alpha>,<beta>,<gamma>``, ``mixed`` or a matrix file."""
    try:
        if spec.startswith("b="):
            return s3.horodecki(float(spec[2:]))[1], s3.DIMS
        if spec.startswith("p="):
            vals = [float(v) for v in spec[2:].split(",")]
            if len(vals) != 3:
                raise ValueError("p= needs three numbers")
            return s3.family_state(vals), s3.DIMS
    except ValueError as exc:
        raise CliError(f"bad endpoint {spec!r}: {exc}") from exc
    if spec == "mixed":
        return np.eye(9) / 9, s3.DIMS
    return _load_matrix(spec)


def _shift_report(fam: wt.ShiftFamily, cr: wt.Crossing) -> dict:
    state = fam.state(cr.lam)
    p = s3.project_to_family(state) if fam.dims == s3.DIMS else None
    out = {
        "mode": cr.mode,
        "lambda": cr.lam,
        "bracket": [cr.lower, cr.upper],
        "upper_open": cr.upper_open,
        "iterations": cr.iterations,
        "trace": [{"lambda": lam, "relative_min": m, "is_witness": w} for lam, m, w in cr.trace],
    }
    if p is not None:
        out["crossing_point"] = dict(zip(("alpha", "beta", "gamma"), _floats(p)))
        out["crossing_euclid"] = dict(zip(("a", "b", "c"), _floats(s3.to_euclid(p))))
    return out


def cmd_shift(args) -> int:
    if args.polygon:
        if args.polygon not in s3.POLYGON_NAMES:
            raise CliError(f"unknown polygon operator {args.polygon!r}")
        G = s3.polygon_ops()[args.polygon]
        rho, rho_tilde = s3.plane_normal_shift(G)
        dims, mode = s3.DIMS, "inside_out"
    else:
        if not (args.rho and args.rho_tilde):
            raise CliError("give --rho and --rho-tilde, or --polygon")
        rho, dims = _endpoint(args.rho)
        rho_tilde, dims2 = _endpoint(args.rho_tilde)
        if dims != dims2:
            raise CliError("endpoints have different dimensions")
        for m in (rho, rho_tilde):
            if not mc.DensityMatrix(m, dims).is_valid():
                raise CliError("endpoint is not a valid state", EXIT_INVALID)
        mode = args.mode
    try:
        fam = wt.ShiftFamily(rho, rho_tilde, dims)
        cr = wt.find_witness_crossing(fam, mode, tol=args.tol, restarts=args.restarts, seed=args.seed)
    except ValueError as exc:
        _emit({"error": str(exc)}, args.out)
        return EXIT_IO
    out = _shift_report(fam, cr)
    if args.polygon:
        touch = s3.project_to_family(cr.upper_check.optimum.state)
        out["tangent_point"] = dict(zip(("alpha", "beta", "gamma"), _floats(touch)))
    _emit(out, args.out)
    return EXIT_OK


def cmd_mesh(args) -> int:
    _write(scan.meshes_to_obj(scan.default_meshes(max(2, args.grid))), args.out)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--alpha", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--gamma", type=float)
    common.add_argument("--horodecki-b", type=float, dest="horodecki_b")
    common.add_argument("--matrix", help="JSON matrix file {rows, cols, re, im[, dims]}")
    common.add_argument("--grid", type=int, default=21)
    common.add_argument("--box", help="lo,hi or a0,a1,b0,b1,g0,g1")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=wt.DEFAULT_SEED)
    common.add_argument("--restarts", type=int, default=wt.DEFAULT_RESTARTS)
    common.add_argument("--tol", type=float, default=1e-6)
    common.add_argument("--jobs", type=int, default=1, help="worker processes (GEW_JOBS overrides)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="gewit", description="Geometric entanglement witnesses for bipartite states.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("classify", parents=[common], help="classify a family point, Horodecki state or matrix")
    sub.add_parser("scan", parents=[common], help="grid scan of the three-parameter family")
    sub.add_parser("horodecki", parents=[common], help="sweep the Horodecki line")
    p = sub.add_parser("witness-check", parents=[common], help="test an operator for the witness property")
    p.add_argument("--op", help="u+, u-, d+, d- or g_re")
    p = sub.add_parser("shift", parents=[common], help="bisect a shift family for the witness crossing")
    p.add_argument("--rho", help="endpoint: b=<v>, p=<a>,<b>,<g>, mixed or a matrix file")
    p.add_argument("--rho-tilde", dest="rho_tilde")
    p.add_argument("--mode", choices=("outside_in", "inside_out"), default="outside_in")
    p.add_argument("--polygon", help="push a kernel-polygon face outward (u+, u-, d+, d-)")
    sub.add_parser("mesh", parents=[common], help="OBJ meshes of the pyramid and constraint surfaces")
    return parser


COMMANDS = {
    "classify": cmd_classify,
    "scan": cmd_scan,
    "horodecki": cmd_horodecki,
    "witness-check": cmd_witness_check,
    "shift": cmd_shift,
    "mesh": cmd_mesh,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
