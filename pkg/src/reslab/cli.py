"""Command-line interface.

Every subcommand reads a JSON map spec, runs one pipeline, and writes a
CSV or JSON artifact whose first line (or "header" field) records the tool
version, the map hash, and the parameters, so identical configurations
produce byte-identical files.  Exit codes: 0 success, 2 validation error,
3 numeric failure; errors are emitted as a JSON body on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .affine import WeightMode, resonance_set, topological_entropy
from .correlations import correlation_sequence, fit_decay
from .discretize import discretize_spectrum
from .maps import (MapSpecError, MapValidationError, MarkovAffineMap,
                   parse_map_spec, spec_hash)
from .mme import mme_iterate
from .smooth import (TransferContext, exclusion_regions, gap_params,
                     resonance_scan, xi_function)
from .utils import NumericError, fmt_float

_TOOL = f"reslab {__version__}"


# ---------------------------------------------------------------------------
# plumbing


def _load_map(path: str):
    if not os.path.isfile(path):
        raise MapSpecError("map spec not found")
    with open(path, "r", encoding="utf-8") as fh:
        return parse_map_spec(fh.read())


def _header(m, cmd: str, params: dict) -> str:
    parts = [f"# {_TOOL}", f"map={spec_hash(m)}", f"cmd={cmd}"]
    parts += [f"{k}={v}" for k, v in params.items()]
    return " ".join(parts)


def _write_text(path: str | None, text: str):
    if path is None:
        sys.stdout.write(text)
        return
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
        raise MapSpecError(f"output directory not writable: {parent}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _write_json(path: str | None, header: str, body: dict):
    doc = {"header": header}
    doc.update(body)
    _write_text(path, json.dumps(doc, indent=2, sort_keys=False) + "\n")


def _write_csv(path: str | None, header: str, columns: list[str], rows):
    lines = [header, ",".join(columns)]
    for row in rows:
        lines.append(",".join(
            fmt_float(v) if isinstance(v, float) else str(v) for v in row))
    _write_text(path, "\n".join(lines) + "\n")


def _parse_range(text: str, what: str) -> np.ndarray:
    """lo:hi:count -> inclusive linspace; a bare number -> one value."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return np.asarray([float(parts[0])])
        if len(parts) == 3:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValueError
            return np.linspace(lo, hi, count)
    except ValueError:
        pass
    raise MapSpecError(f"bad {what} range {text!r}; use lo:hi:count or a number")


# ---------------------------------------------------------------------------
# subcommands


def cmd_resonances(args) -> int:
    m = _load_map(args.map)
    rep = resonance_set(m, args.mode, args.r, exact=args.exact or None)
    body = rep.to_json_dict()
    hdr = _header(m, "resonances", {"mode": args.mode, "r": args.r,
                                    "exact": bool(args.exact)})
    _write_json(args.out, hdr, body)
    return 0


def cmd_regions(args) -> int:
    m = _load_map(args.map)
    params = gap_params(m)
    regions = exclusion_regions(params)
    rows = []
    for name, a, b in regions.boundaries(n_points=args.grid):
        rows.extend((name, float(x), float(y)) for x, y in zip(a, b))
    hdr = _header(m, "regions", {
        "grid": args.grid,
        "mu_star": fmt_float(params.mu_star),
        "tau": fmt_float(params.tau),
        "essential_bound": fmt_float(params.essential_bound),
        "mu2": fmt_float(params.mu2),
    })
    _write_csv(args.out, hdr, ["region", "a", "b"], rows)
    return 0


def cmd_xi_scan(args) -> int:
    m = _load_map(args.map)
    res = _parse_range(args.re, "--re")
    ims = _parse_range(args.im, "--im")
    params = gap_params(m, estimate_mu2=False)
    ctx = TransferContext(m)
    rows = []
    for re in res:
        for im in ims:
            z = complex(re, im)
            val, tail = xi_function(m, z, tail_tol=args.tol, ctx=ctx,
                                    params=params)
            rows.append((float(re), float(im), float(val.real),
                         float(val.imag), float(tail)))
    hdr = _header(m, "xi-scan", {"re": args.re, "im": args.im,
                                 "tol": fmt_float(args.tol)})
    _write_csv(args.out, hdr, ["re", "im", "xi_re", "xi_im", "tail_bound"], rows)
    return 0


def cmd_scan(args) -> int:
    m = _load_map(args.map)
    res = _parse_range(args.nu_re, "--nu-re")
    ims = _parse_range(args.nu_im, "--nu-im")
    nus = [complex(a, b) for a in res for b in ims]
    result = resonance_scan(m, nus, size=args.size, tol_scan=args.tol)
    rows = [(float(p.nu.real), float(p.nu.imag), p.distance, p.drift)
            for p in result.points]
    hdr = _header(m, "scan", {"size": args.size, "tol": fmt_float(args.tol)})
    _write_csv(args.out, hdr, ["nu_re", "nu_im", "test_eig_distance", "drift"],
               rows)
    summary = {
        "candidates": [[c.real, c.imag] for c in result.candidates],
        "error_scale": result.error_scale,
    }
    sys.stdout.write(json.dumps(summary) + "\n")
    return 0


def cmd_correlate(args) -> int:
    m = _load_map(args.map)
    trace = correlation_sequence(m, args.phi, args.psi, args.measure,
                                 n_max=args.n, method=args.method)
    rep = resonance_set(m, args.measure, r=3)
    rep.sort()
    sub = [g for g in rep.eigenvalues
           if g.trusted and abs(abs(g.value) - trace.gamma) > 1e-10]
    predicted_rho = abs(sub[0].value) / trace.gamma if sub else 0.0
    predicted_power = max(sub[0].jordan) - 1 if sub and sub[0].jordan else 0
    rows = trace.to_rows(predicted_rho, predicted_power)
    hdr = _header(m, "correlate", {
        "phi": json.dumps(args.phi), "psi": json.dumps(args.psi),
        "measure": args.measure, "n": args.n, "method": args.method,
    })
    _write_csv(args.out, hdr,
               ["n", "C_re", "C_im", "abs", "predicted_bound"], rows)
    c = trace.centered()
    summary: dict = {"predicted_rho": predicted_rho,
                     "predicted_power": predicted_power}
    try:
        fit = fit_decay(c, noise_floor=trace.noise_floor)
        summary["fit"] = fit.to_json_dict()
    except NumericError as e:
        summary["fit"] = {"error": str(e)}
    sys.stdout.write(json.dumps(summary) + "\n")
    return 0


def cmd_mme(args) -> int:
    m = _load_map(args.map)
    approx = mme_iterate(m, args.phi, n_max=args.n_max)
    hdr = _header(m, "mme", {"phi": json.dumps(args.phi),
                             "n_max": args.n_max})
    cols = ["n"] + [f"mu_{i}" for i in range(len(args.phi))]
    rows = [tuple([k] + [float(v) for v in vals])
            for k, vals in enumerate(approx.history)]
    _write_csv(args.out, hdr, cols, rows)
    summary = approx.to_json_dict()
    summary["observables"] = args.phi
    sys.stdout.write(json.dumps(summary) + "\n")
    return 0


def cmd_entropy(args) -> int:
    m = _load_map(args.map)
    if isinstance(m, MarkovAffineMap):
        body = topological_entropy(m)
        body["method"] = "adjacency spectral radius"
    else:
        n = m.n_branches
        body = {"rho": float(n), "h_top": float(np.log(n)),
                "method": "full-branch count"}
    _write_json(args.out, _header(m, "entropy", {}), body)
    return 0


def cmd_discretize(args) -> int:
    m = _load_map(args.map)
    rep = discretize_spectrum(m, args.op, args.size, mode=args.mode,
                              method=args.method)
    hdr = _header(m, "discretize", {"op": args.op, "size": args.size,
                                    "method": args.method, "mode": args.mode})
    _write_json(args.out, hdr, rep.to_json_dict())
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="reslab",
        description="transfer-operator resonances for interval maps")
    sub = p.add_subparsers(dest="cmd", required=True)

    def add(name, fn, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(fn=fn)
        sp.add_argument("--map", required=True, help="JSON map-spec path")
        sp.add_argument("--out", default=None,
                        help="output file (default stdout)")
        return sp

    sp = add("resonances", cmd_resonances,
             "exact resonance set of an affine Markov map")
    sp.add_argument("--mode", required=True, choices=["srb", "mme"])
    sp.add_argument("--r", required=True, type=int,
                    help="polynomial degree of the broken space")
    sp.add_argument("--exact", action="store_true",
                    help="rational eigenvalues where available")

    sp = add("regions", cmd_regions,
             "point-spectrum exclusion region boundaries")
    sp.add_argument("--grid", required=True, type=int,
                    help="points per boundary curve")

    sp = add("xi-scan", cmd_xi_scan, "perturbation determinant on a grid")
    sp.add_argument("--re", required=True, help="lo:hi:count or a number")
    sp.add_argument("--im", required=True, help="lo:hi:count or a number")
    sp.add_argument("--tol", type=float, default=1e-8,
                    help="truncation tail bound")

    sp = add("scan", cmd_scan, "annulus scan for point spectrum")
    sp.add_argument("--nu-re", required=True, help="lo:hi:count or a number")
    sp.add_argument("--nu-im", default="0", help="lo:hi:count or a number")
    sp.add_argument("--size", required=True, type=int,
                    help="collocation degree N (drift uses 2N)")
    sp.add_argument("--tol", type=float, default=1e-3,
                    help="flag threshold on |test eigenvalue - 1|")

    sp = add("correlate", cmd_correlate, "correlation sequence and decay fit")
    sp.add_argument("--phi", required=True)
    sp.add_argument("--psi", required=True)
    sp.add_argument("--measure", required=True, choices=["srb", "mme"])
    sp.add_argument("--n", required=True, type=int, help="largest time lag")
    sp.add_argument("--method", default="exact",
                    choices=["exact", "cylinder"])

    sp = add("mme", cmd_mme, "maximal-entropy pairings")
    sp.add_argument("--phi", action="append", required=True,
                    help="observable (repeatable)")
    sp.add_argument("--n-max", type=int, default=80)

    add("entropy", cmd_entropy, "topological entropy")

    sp = add("discretize", cmd_discretize, "discretized operator spectrum")
    sp.add_argument("--op", required=True,
                    help="L0..L3 (as 0..3), star, plus, or K")
    sp.add_argument("--size", required=True, type=int)
    sp.add_argument("--method", required=True, choices=["cheb", "ulam"])
    sp.add_argument("--mode", default="srb", choices=["srb", "mme"])
    return p


def _emit_error(msg: str, code: int):
    sys.stderr.write(json.dumps({"error": msg, "exit_code": code}) + "\n")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        if e.code in (0, None):
            return 0
        _emit_error("invalid arguments", 2)
        return 2
    op = args.op if hasattr(args, "op") else None
    if op is not None and op.upper().startswith("L") and op[1:].isdigit():
        args.op = int(op[1:])
    elif op is not None and op.isdigit():
        args.op = int(op)
    try:
        return args.fn(args)
    except NumericError as e:
        _emit_error(str(e), 3)
        return 3
    except (MapSpecError, MapValidationError, ValueError, TypeError, OSError) as e:
        _emit_error(str(e), 2)
        return 2


if __name__ == "__main__":
    sys.exit(main())
