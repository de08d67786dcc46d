"""Command-line front end.

Every subcommand produces one CSV table (``--out`` or standard output) and
a one-line JSON summary on standard output. Exit status is 0 on success,
2 on validation errors and 3 on numerical failures.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from .config import DEFAULTS, RunConfig, parse_config, parse_datum
from .errors import HyperlabError, InvalidArgumentError, NumericalFailure
from .evolution import DatumSpec, Gaussian, build_datum, evolve, mass
from .geometry import Geometry, make_grid
from .norms import is_admissible

log = logging.getLogger("hyperlab")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int
    version: str = __version__
    duration: float = 0.0
    warnings: list = field(default_factory=list)


@dataclass
class Result:
    header: tuple
    rows: list
    summary: dict
    plot: dict | None = None


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def render_csv(header, rows) -> str:
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(fmt(v) for v in row) + "\n")
    return out.getvalue()


def _floats(text: str):
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise InvalidArgumentError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _exponent(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity", "oo"):
        return np.inf
    try:
        return float(t)
    except ValueError:
        raise InvalidArgumentError(f"bad exponent {text!r}") from None


def _load_config(args) -> RunConfig:
    text = ""
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    overrides = dict(kv.split("=", 1) for kv in args.set or [] if "=" in kv)
    if any("=" not in kv for kv in args.set or []):
        raise InvalidArgumentError("--set expects KEY=VALUE")
    overrides = {k.strip(): v.strip() for k, v in overrides.items()}
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    return parse_config(text, overrides)


def _grid(args, geometry=None):
    return make_grid(geometry or args.geometry, args.r_max, args.n)


# ----------------------------------------------------------------- commands

def cmd_simulate(args, manifest):
    rc = _load_config(args)
    manifest.config, manifest.seed = rc.values, rc.seed
    manifest.warnings += rc.warnings
    traj = evolve(rc.sim)
    idx = np.rint(traj.times / rc.sim.dt).astype(int)
    rows = [(t, m, e, traj.z_density[k]) for t, m, e, k in
            zip(traj.times, traj.mass_series, traj.energy_series, idx)]
    m0 = traj.mass_series[0]
    summary = {
        "steps": rc.sim.steps,
        "mass_drift": float(np.max(np.abs(traj.mass_series - m0)) / m0) if m0 else 0.0,
        "energy_drift": float(np.max(np.abs(traj.energy_series - traj.energy_series[0]))),
    }
    return Result(("t", "mass", "energy", "z_density"), rows, summary,
                  dict(x="t", ys=["mass", "energy", "z_density"]))


def cmd_dispersive(args, manifest):
    from .estimates import dispersive_fit, predicted_dispersive_exponent
    grid = _grid(args)
    times = np.geomspace(args.t_min, args.t_max, args.samples)
    fit = dispersive_fit(parse_datum(args.datum), args.p, times, grid, args.wall_tol)
    pred = predicted_dispersive_exponent(args.p)
    rows = [(t, v, fit.constant * t**fit.exponent) for t, v in zip(fit.times, fit.values)]
    summary = {"exponent": fit.exponent, "constant": fit.constant,
               "residual": fit.residual, "predicted_exponent": pred}
    return Result(("t", "norm_ratio", "fit"), rows, summary,
                  dict(x="t", ys=["norm_ratio", "fit"], logx=True, logy=True))


def cmd_bilinear(args, manifest):
    from .estimates import SweepTable, bilinear_sweep
    grid = _grid(args)
    table = bilinear_sweep(args.q, _floats(args.N), _floats(args.L), args.band_width, grid)
    ratios = table.column("ratio")
    summary = {"max_over_min": float(ratios.max() / ratios.min()), "cells": len(ratios)}
    return Result(SweepTable.HEADER, table.as_tuples(), summary,
                  dict(x="L", ys=["ratio"], logx=True))


def cmd_improved(args, manifest):
    from .estimates import improved_strichartz_terms
    f = build_datum(parse_datum(args.datum), _grid(args))
    rows = []
    for q in _floats(args.q):
        lhs, rhs = improved_strichartz_terms(f, q)
        rows.append((q, lhs, rhs, lhs / rhs))
    return Result(("q", "lhs", "rhs", "ratio"), rows,
                  {"max_ratio": max(r[3] for r in rows)}, dict(x="q", ys=["ratio"]))


def cmd_morawetz(args, manifest):
    from .estimates import morawetz_defect, morawetz_ratio, nonlinear_flux
    rc = _load_config(args)
    manifest.config, manifest.seed = rc.values, rc.seed
    manifest.warnings += rc.warnings
    if args.suite > 0:
        rng = np.random.default_rng(rc.seed)
        rows = []
        for i in range(args.suite):
            a = float(rng.uniform(1.5, 3.0))
            m = float(rng.uniform(0.05, 1.0))
            sim = replace(rc.sim, datum=DatumSpec(Gaussian(a), np.sqrt(m)))
            rows.append((i, a, m, morawetz_ratio(evolve(sim))))
        return Result(("index", "width", "mass", "ratio"), rows,
                      {"max_ratio": max(r[3] for r in rows)}, dict(x="index", ys=["ratio"]))
    traj = evolve(rc.sim)
    rows = [(T, *morawetz_defect(traj, T)) for T in _floats(args.cutoffs)]
    summary = {"ratio": morawetz_ratio(traj), "nonlinear_flux": nonlinear_flux(traj)}
    return Result(("T_cutoff", "defect_u", "defect_grad"), rows, summary,
                  dict(x="T_cutoff", ys=["defect_u", "defect_grad"], logx=True, logy=True))


def cmd_lts(args, manifest):
    from .estimates import lts_norm
    rc = _load_config(args)
    manifest.config, manifest.seed = rc.values, rc.seed
    manifest.warnings += rc.warnings
    traj = evolve(rc.sim)
    T = rc.sim.t_end if args.T is None else args.T
    rows = []
    for N in _floats(args.N):
        norm = lts_norm(traj, N, T, args.r)
        rows.append((N, T, args.r, norm, norm / (1 + np.sqrt(T / N))))
    return Result(("N", "T", "r", "norm", "ratio"), rows,
                  {"max_ratio": max(r[4] for r in rows)}, dict(x="N", ys=["ratio"], logx=True))


def cmd_smoothing(args, manifest):
    from .estimates import local_smoothing_ratio
    f = build_datum(parse_datum(args.datum), _grid(args))
    rows = [(w, args.epsilon, local_smoothing_ratio(f, args.epsilon, w))
            for w in _floats(args.window)]
    return Result(("window", "epsilon", "ratio"), rows,
                  {"max_ratio": max(r[2] for r in rows)}, dict(x="window", ys=["ratio"]))


def cmd_scatter(args, manifest):
    from .estimates import scattering_diagnostic
    rc = _load_config(args)
    manifest.config, manifest.seed = rc.values, rc.seed
    manifest.warnings += rc.warnings
    traj = evolve(rc.sim)
    cauchy, u_plus = scattering_diagnostic(traj)
    rows = list(zip(traj.times[1:], cauchy))
    summary = {"final": float(cauchy[-1]) if len(cauchy) else 0.0,
               "decreasing": bool(np.all(np.diff(cauchy) < 0)),
               "mass_u_plus": mass(u_plus)}
    return Result(("t", "cauchy"), rows, summary, dict(x="t", ys=["cauchy"], logy=True))


def cmd_profiles(args, manifest):
    from .profiles import greedy_decompose, transplant
    hgrid = _grid(args, Geometry.HYPERBOLIC3)
    egrid = hgrid.with_geometry(Geometry.EUCLIDEAN3)
    phi = build_datum(DatumSpec(Gaussian(args.width)), egrid)
    f = hgrid.zeros()
    for N in _floats(args.N):
        b = transplant(phi, N, hgrid)
        f = f + b * (1.0 / np.sqrt(mass(b)))
    dec = greedy_decompose(f, args.max_atoms, args.delta)
    summary = {"input_mass": dec.input_mass, "atoms": len(dec.atoms),
               "defect": dec.pythagorean_defect, "residual_mass": mass(dec.residual)}
    return Result(("N", "t_offset", "mass_captured", "defect"), dec.csv_rows(), summary,
                  dict(x="N", ys=["mass_captured"], logx=True))


def cmd_lp_check(args, manifest):
    from .propagators import LPBand, lp_multiplier, reproducing_error
    grid = _grid(args)
    rows = []
    for N in _floats(args.N):
        part = np.max(np.abs(lp_multiplier(grid, LPBand.low(N))
                             + lp_multiplier(grid, LPBand.high(N)) - 1.0))
        rows.append((N, part, reproducing_error(grid, N / 2, 2 * N, args.points_per_octave)))
    summary = {"max_partition_error": max(r[1] for r in rows),
               "max_reproducing_error": max(r[2] for r in rows)}
    return Result(("N", "partition_error", "reproducing_error"), rows, summary)


def cmd_admissible(args, manifest):
    q, r = _exponent(args.q), _exponent(args.r)
    e = is_admissible(q, r, Geometry.EUCLIDEAN3)
    h = is_admissible(q, r, Geometry.HYPERBOLIC3)
    return Result(("q", "r", "euclidean3", "hyperbolic3"), [(q, r, e, h)],
                  {"euclidean3": e, "hyperbolic3": h})


# ------------------------------------------------------------------ parsing

def _grid_args(p, geometry="hyperbolic3", r_max=40.0, n=4095):
    p.add_argument("--geometry", default=geometry, type=Geometry.parse)
    p.add_argument("--r-max", type=float, default=r_max)
    p.add_argument("--n", type=int, default=n)


def _config_args(p):
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help=f"override a config key ({', '.join(DEFAULTS)})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyperlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hyperlab {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="CSV destination (default: standard output)")
    common.add_argument("--manifest", help="write the run manifest as JSON here")
    common.add_argument("--plot", help="also render a PNG figure of the table here")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="evolve the NLS")
    _config_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dispersive", parents=[common], help="decay-rate fit")
    _grid_args(p, "euclidean3", 80.0, 8192)
    p.add_argument("--p", type=float, default=1.2)
    p.add_argument("--datum", default="band:0.8:1.0")
    p.add_argument("--t-min", type=float, default=1.0)
    p.add_argument("--t-max", type=float, default=20.0)
    p.add_argument("--samples", type=int, default=12)
    p.add_argument("--wall-tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_dispersive)

    p = sub.add_parser("bilinear", parents=[common], help="bilinear Strichartz sweep")
    _grid_args(p)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--N", required=True)
    p.add_argument("--L", required=True)
    p.add_argument("--band-width", type=float, default=0.25)
    p.set_defaults(func=cmd_bilinear)

    p = sub.add_parser("improved", parents=[common], help="improved Strichartz ratio")
    _grid_args(p)
    p.add_argument("--q", default="1.4,1.5,1.6")
    p.add_argument("--datum", default="gaussian:1")
    p.set_defaults(func=cmd_improved)

    p = sub.add_parser("morawetz", parents=[common], help="Morawetz ratio and defects")
    _config_args(p)
    p.add_argument("--cutoffs", default="2,4,8,16,32,64")
    p.add_argument("--suite", type=int, default=0, help="random Gaussian data drawn from the seed")
    p.set_defaults(func=cmd_morawetz)

    p = sub.add_parser("lts", parents=[common], help="long-time Strichartz ratios")
    _config_args(p)
    p.add_argument("--N", default="8,16,32,64")
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--r", type=float, default=6.0)
    p.set_defaults(func=cmd_lts)

    p = sub.add_parser("smoothing", parents=[common], help="local smoothing ratio")
    _grid_args(p, r_max=80.0)
    p.add_argument("--datum", default="band:4")
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--window", default="2.5,5,10")
    p.set_defaults(func=cmd_smoothing)

    p = sub.add_parser("scatter", parents=[common], help="pull-back Cauchy differences")
    _config_args(p)
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("profiles", parents=[common], help="planted-bubble decomposition")
    _grid_args(p, n=8191)
    p.add_argument("--N", default="4,64", help="planted transplant scales")
    p.add_argument("--width", type=float, default=1.0)
    p.add_argument("--max-atoms", type=int, default=12)
    p.add_argument("--delta", type=float, default=1e-3)
    p.set_defaults(func=cmd_profiles)

    p = sub.add_parser("lp-check", parents=[common], help="Littlewood-Paley identities")
    _grid_args(p)
    p.add_argument("--N", default="1,2,4,8,16,32,64")
    p.add_argument("--points-per-octave", type=int, default=32)
    p.set_defaults(func=cmd_lp_check)

    p = sub.add_parser("admissible", parents=[common], help="Strichartz admissibility")
    p.add_argument("--q", required=True)
    p.add_argument("--r", required=True)
    p.set_defaults(func=cmd_admissible)
    return parser


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    manifest = RunManifest(args.command, {k: str(v) for k, v in sorted(vars(args).items())
                                          if k not in ("func", "out", "manifest", "plot")},
                           args.seed or 0)
    start = time.perf_counter()
    try:
        result = args.func(args, manifest)
    except NumericalFailure as exc:
        print(f"hyperlab {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (HyperlabError, ValueError, OSError) as exc:
        print(f"hyperlab {args.command}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    manifest.duration = time.perf_counter() - start
    for w in manifest.warnings:
        print(f"hyperlab {args.command}: warning: {w}", file=sys.stderr)

    if args.command == "admissible":
        s = result.summary
        print(f"euclidean3={fmt(s['euclidean3'])} hyperbolic3={fmt(s['hyperbolic3'])}")
    csv_text = render_csv(result.header, result.rows)
    try:
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(csv_text)
        elif args.command != "admissible":
            sys.stdout.write(csv_text)
        if args.manifest:
            with open(args.manifest, "w", encoding="utf-8") as fh:
                json.dump(asdict(manifest), fh, indent=2, sort_keys=True)
        if args.plot and result.plot:
            from .plotting import plot_table
            plot_table(result.header, result.rows, path=args.plot,
                       title=f"hyperlab {args.command}", **result.plot)
    except OSError as exc:
        print(f"hyperlab {args.command}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.command != "admissible":
        print(json.dumps({"command": args.command, "seed": manifest.seed,
                          "version": manifest.version, **result.summary}, sort_keys=True))
    return EXIT_OK


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
