"""Command line interface.

    stokespec eigs --sigma 0 --lmax 4 --per-l 3 --out table.csv
    stokespec annulus-eigs --sigma 0.5 --lmax 2 --per-l 2 --verify
    stokespec mode toroidal 1 0 1 --nr 32 --out mode.json
    stokespec decompose mode.json --out parts
    stokespec verify --suite identities --seed 7

Settings come from defaults, then ``--config file.json``, then flags.
Exit status: 0 ok, 2 configuration, 3 numerical failure, 4 invalid input.
"""
import argparse
from dataclasses import fields
import os
import sys
import warnings

import numpy as np

from . import fileio
from .config import JobConfig, load_config
from .errors import ConfigurationError, ConvergenceError, StokespecError
from .mie import decompose
from .spectrum import DomainSpec, FAMILIES, eigen_table, first_modes, stokes_mode
from .sphgrid import build_shell_grid
from .verify import (
    bump_field, identity_suite, merge_reports, orthogonality_matrix, projection_completeness,
    scalar_problem_residuals,
)

SUITES = ("identities", "orthogonality", "completeness", "residuals", "all")
EXIT_NUMERICAL = 3


def _common(p):
    g = p.add_argument_group("job settings")
    g.add_argument("--config", help="JSON file with job settings")
    g.add_argument("--sigma", type=float, help="inner radius; 0 selects the unit ball")
    g.add_argument("--lmax", type=int, help="largest harmonic degree")
    g.add_argument("--per-l", dest="per_l", type=int, help="radial modes per (family, l)")
    g.add_argument("--nr", type=int, help="radial nodes")
    g.add_argument("--ntheta", type=int, help="colatitude nodes")
    g.add_argument("--nphi", type=int, help="longitude nodes")
    g.add_argument("--out", help="output path (or prefix)")
    g.add_argument("--seed", type=int, help="random seed")
    g.add_argument("--tol", type=float, help="tolerance for solenoidal and gauge checks")
    g.add_argument("--count", type=int, help="number of modes")
    g.add_argument("--trials", type=int, help="random trials for the identity suite")


def build_parser():
    parser = argparse.ArgumentParser(prog="stokespec", description="Stokes eigenmodes on balls and shells")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigs", help="eigenvalue table")
    _common(p)
    p.add_argument("--verify", action="store_true", help="check residuals and boundary values of every row")

    p = sub.add_parser("annulus-eigs", help="eigenvalue table on a shell (sigma > 0)")
    _common(p)
    p.add_argument("--verify", action="store_true", help="check residuals and boundary values of every row")

    p = sub.add_parser("mode", help="sample one normalized mode to a field file")
    _common(p)
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("l", type=int)
    p.add_argument("k", type=int)
    p.add_argument("j", type=int)

    p = sub.add_parser("decompose", help="split a field file into toroidal and poloidal parts")
    _common(p)
    p.add_argument("input", help="field file")

    p = sub.add_parser("verify", help="run verification suites")
    _common(p)
    p.add_argument("--suite", default="all", choices=SUITES)
    return parser


def resolve_config(args):
    cfg = load_config(args.config) if args.config else JobConfig()
    for f in fields(JobConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            setattr(cfg, f.name, val)
    return cfg.validate()


def _grid(cfg):
    return build_shell_grid(cfg.sigma, cfg.nr, cfg.ntheta, cfg.nphi)


def _print_report(report):
    for line in report.lines():
        print(line)
    print(f"overall: {'pass' if report.passed else 'FAIL'}")


def _table(cfg, command):
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            table = eigen_table(DomainSpec(cfg.sigma), cfg.lmax, per_l=cfg.per_l)
    except ConvergenceError as exc:
        raise ConvergenceError(f"root search failed ({exc}); j up to {cfg.per_l}",
                               interval=exc.interval) from None
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return table


def cmd_eigs(args, cfg, command="eigs"):
    if command == "annulus-eigs" and cfg.sigma <= 0:
        raise ConfigurationError("annulus-eigs needs --sigma in (0, 1)")
    table = _table(cfg, command)
    head = fileio.header(command, cfg.echo())
    print(f"{'rank':>4} {'lambda':>22} {'family':>9} {'l':>3} {'j':>3} {'mult':>4}")
    for row in list(fileio.table_rows(table))[:10]:
        rank, lam, _, fam, l, j, mult = row
        print(f"{rank:>4} {lam:>22.15g} {fam:>9} {l:>3} {j:>3} {mult:>4}")
    if cfg.out:
        stem = cfg.out[:-4] if cfg.out.endswith(".csv") else cfg.out
        fileio.write_table_csv(stem + ".csv", table, head)
        fileio.write_table_json(stem + ".json", table, head)
    if args.verify:
        dom = table.domain
        reps = [scalar_problem_residuals(stokes_mode(dom, e.family, e.l, 0, e.j)) for e in table]
        report = merge_reports("table", reps)
        if cfg.out:
            fileio.write_report(stem + ".verify.json", report, head)
        bad = report.failures()
        print(f"verified {len(reps)} rows: {'pass' if not bad else 'FAIL ' + ', '.join(bad)}")
        if bad:
            return EXIT_NUMERICAL
    return 0


def cmd_mode(args, cfg):
    mode = stokes_mode(DomainSpec(cfg.sigma), args.family, args.l, args.k, args.j)
    grid = _grid(cfg)
    u = mode.sample(grid)
    out = cfg.out or f"mode_{args.family}_l{args.l}_k{args.k}_j{args.j}.json"
    head = fileio.header("mode", cfg.echo())
    head["mode"] = {"family": mode.family, "l": mode.l, "k": mode.k, "j": mode.j,
                    "mu": mode.mu, "lambda": mode.lam, "coefficients": list(mode.coeffs)}
    fileio.write_field(out, u, grid.max_degree, head)
    print(f"{mode.family} l={mode.l} k={mode.k} j={mode.j}: lambda = {mode.lam:.15g}; wrote {out}")
    return 0


def cmd_decompose(args, cfg):
    u, meta = fileio.read_field(args.input)
    lmax = args.lmax if args.lmax is not None else min(meta.get("lmax", u.grid.max_degree), u.grid.max_degree)
    res = decompose(u, lmax, tol=cfg.tol)
    en = res.energy()
    total = en["toroidal"] + en["poloidal"]
    frac = {k: (v / total if total > 0 else 0.0) for k, v in en.items()}
    head = fileio.header("decompose", cfg.echo())
    head["input"] = os.path.basename(args.input)
    stem = cfg.out or os.path.splitext(args.input)[0]
    grid = u.grid
    fileio.write_coefficients(stem + ".psi.json", res.potentials.psi.coeffs, res.lmax, grid, head, "psi")
    fileio.write_coefficients(stem + ".chi.json", res.potentials.chi.coeffs, res.lmax, grid, head, "chi")
    fileio.write_field(stem + ".toroidal.json", res.toroidal, res.lmax, head)
    fileio.write_field(stem + ".poloidal.json", res.poloidal, res.lmax, head)
    summary = {"residual": res.residual, "gauge_report": res.gauge_report,
               "energy": en, "energy_fraction": frac, "lmax": res.lmax}
    fileio.write_json(stem + ".report.json", summary, head)
    print(f"residual {res.residual:.3e}; toroidal fraction {frac['toroidal']:.3e}, "
          f"poloidal fraction {frac['poloidal']:.3e}")
    return 0


def run_suite(name, cfg):
    dom = DomainSpec(cfg.sigma)
    if name == "identities":
        return identity_suite(_grid(cfg), trials=cfg.trials, seed=cfg.seed)
    if name == "orthogonality":
        return orthogonality_matrix(first_modes(dom, cfg.count))
    if name == "completeness":
        n = max(cfg.count, 80)
        modes = first_modes(dom, n)
        lmax = max(m.l for m in modes)
        grid = build_shell_grid(cfg.sigma, 96, lmax + 2, 2 * lmax + 4)
        return projection_completeness(bump_field(grid), modes)
    if name == "residuals":
        table = _table(cfg, "verify")
        return merge_reports("residuals", [
            scalar_problem_residuals(stokes_mode(dom, e.family, e.l, 0, e.j)) for e in table])
    raise ConfigurationError(f"unknown suite {name!r}; valid suites: {', '.join(SUITES)}")


def cmd_verify(args, cfg):
    names = SUITES[:-1] if args.suite == "all" else (args.suite,)
    report = merge_reports(args.suite, [run_suite(n, cfg) for n in names])
    _print_report(report)
    if cfg.out:
        fileio.write_report(cfg.out, report, fileio.header("verify", cfg.echo()))
    return 0 if report.passed else EXIT_NUMERICAL


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command in ("eigs", "annulus-eigs"):
            return cmd_eigs(args, cfg, args.command)
        if args.command == "mode":
            return cmd_mode(args, cfg)
        if args.command == "decompose":
            return cmd_decompose(args, cfg)
        return cmd_verify(args, cfg)
    except StokespecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
