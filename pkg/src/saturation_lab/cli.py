"""Command-line front end.

Exit codes: 0 success, 1 property failure, 2 configuration error,
3 system not admissible, 4 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
import warnings
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import ConfigError, RunConfig, SystemSpec, load_config_file, parse_eps_list, parse_pair
from .coupled import sc_run_basic, sc_run_one_sided
from .errors import AdmissibilityError, DomainError
from .export import (
    write_potential_curve,
    write_sc_state,
    write_sc_trace,
    write_stationary_points,
    write_thresholds,
)
from .models import GldpcParams, gldpc_threshold, maxwell_threshold
from .numerics import Tolerances
from .single import potential_curve, threshold_report
from .system import ScalarSystem, check_admissible
from .verify import CHECKS, VerifyContext, run_checks

log = logging.getLogger("saturation_lab")

EXIT_OK, EXIT_PROPERTY, EXIT_CONFIG, EXIT_ADMISSIBLE, EXIT_IO = 0, 1, 2, 3, 4

# lattice used by the admissibility gate before every command
GATE_GRID = 1024
DEFAULT_POTENTIAL_EPS = [0.40, 0.4294, 0.45, 0.4881, 0.55]


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("system")
    g.add_argument("--ldpc", metavar="DV,DC", help="regular LDPC ensemble on the BEC (default 3,6)")
    g.add_argument("--gldpc", metavar="N,T", help="GLDPC with bounded-distance component decoding")
    g.add_argument("--isi", metavar="NAME", help="erasure ISI channel with a built-in detector map (memoryless, linear)")
    g.add_argument("--config", type=Path, help="JSON configuration file; flags override its values")
    r = p.add_argument_group("run")
    r.add_argument("--eps", help="channel parameters: comma list or start:stop:step")
    r.add_argument("--L", type=int, help="coupled chain half-length")
    r.add_argument("--w", type=int, help="coupling width")
    r.add_argument("--tol", type=float, help="absolute tolerance (default 1e-12)")
    r.add_argument("--grid", type=int, help="scan grid size (default 4096)")
    r.add_argument("--seed", type=int, help="seed for randomised checks (default 0)")
    r.add_argument("--out", type=Path, help="output directory (default ./out)")
    r.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="saturation-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("thresholds", help="single-system, potential and Maxwell thresholds; gaps and minimum widths")
    _common(p)
    p = sub.add_parser("potential", help="write potential curves and stationary points as CSV")
    _common(p)
    p = sub.add_parser("simulate", help="run the coupled recursion and write trace and final-state CSVs")
    _common(p)
    p.add_argument("--mode", choices=["basic", "one-sided", "both"], default="both")
    p = sub.add_parser("verify", help="run the property-check suite")
    _common(p)
    p.add_argument("--lemma", action="append", choices=sorted(CHECKS), help="run only this check (repeatable)")
    p.add_argument("--trials", type=int, help="override the number of random trials per check")
    p.add_argument("--corrupt-matrix", action="store_true", help=argparse.SUPPRESS)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config_file(args.config) if args.config else RunConfig()
    chosen = [k for k in ("gldpc", "isi") if getattr(args, k)]
    if len(chosen) > 1:
        raise ConfigError("choose at most one of --gldpc and --isi")
    if args.gldpc and args.ldpc:
        raise ConfigError("--ldpc and --gldpc are mutually exclusive")
    system = cfg.system
    if args.ldpc:
        dv, dc = parse_pair(args.ldpc, "--ldpc")
        if dv < 2 or dc < 2:
            raise ConfigError("--ldpc degrees must be at least 2")
        lam = (0.0,) * (dv - 1) + (1.0,)
        rho = (0.0,) * (dc - 1) + (1.0,)
        system = replace(system, kind="isi" if args.isi else "ldpc", lam=lam, rho=rho)
    if args.gldpc:
        n, t = parse_pair(args.gldpc, "--gldpc")
        system = SystemSpec("gldpc", n=n, t=t)
    if args.isi:
        system = replace(system, kind="isi", channel=args.isi)
    cfg.system = system
    if args.eps is not None:
        cfg.eps = parse_eps_list(args.eps)
    if args.L is not None:
        cfg.L = args.L
    if args.w is not None:
        cfg.w = args.w
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.output = args.out
    try:
        if args.tol is not None:
            cfg.tol = replace(cfg.tol, abs_tol=args.tol)
        if args.grid is not None:
            cfg.tol = replace(cfg.tol, grid_n=args.grid)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    return cfg.validate()


def _build_system(cfg: RunConfig) -> ScalarSystem:
    sysm = cfg.system.build(cfg.tol)
    gate = Tolerances(cfg.tol.abs_tol, min(cfg.tol.grid_n, GATE_GRID), cfg.tol.max_iter)
    report = check_admissible(sysm, gate)
    if not report.passed:
        raise AdmissibilityError(f"{sysm.name} is not admissible:\n{report}")
    return sysm


def _outdir(cfg: RunConfig) -> Path:
    cfg.output.mkdir(parents=True, exist_ok=True)
    return cfg.output


def _f(v: float) -> str:
    return f"{v:.6f}"


def cmd_thresholds(cfg: RunConfig, args) -> int:
    sysm = _build_system(cfg)
    rep = threshold_report(sysm, cfg.eps, cfg.tol)
    print(f"system            {sysm.name}")
    print(f"eps_s*            {_f(rep.eps_s_star)}")
    print(f"eps*              {_f(rep.eps_star)}{'  (capped at 1)' if rep.eps_star_capped else ''}")
    if cfg.system.kind == "ldpc":
        print(f"eps_Maxwell       {_f(maxwell_threshold(cfg.system.degree_distribution(), cfg.tol))}")
    if cfg.system.kind == "gldpc":
        print(f"eps_bar           {_f(gldpc_threshold(GldpcParams(cfg.system.n, cfg.system.t), cfg.tol))}")
    print(f"K                 {rep.K:.6g}")
    if rep.gap_at:
        print(f"{'eps':>10} {'u(eps)':>12} {'gap':>14} {'w_min':>10}")
        for r in rep.gap_at:
            wm = str(r.w_min) if r.w_min is not None else "-"
            print(f"{r.eps:>10.6g} {r.u:>12.6f} {r.gap:>14.6e} {wm:>10}")
    if args.out is not None or args.config is not None:
        path = write_thresholds(_outdir(cfg) / "thresholds.csv", rep, cfg.seed)
        print(f"wrote {path}")
    return EXIT_OK


def cmd_potential(cfg: RunConfig, args) -> int:
    sysm = _build_system(cfg)
    eps = cfg.eps or DEFAULT_POTENTIAL_EPS
    curve = potential_curve(sysm, eps, tol=cfg.tol)
    out = _outdir(cfg)
    p1 = write_potential_curve(out / "potential.csv", curve, cfg.seed)
    p2 = write_stationary_points(out / "stationary.csv", curve, cfg.seed)
    for sp in curve.stationary:
        pts = ", ".join(f"{p.x:.6f} ({p.kind})" for p in sp.nonzero()) or "none"
        print(f"eps={sp.eps:g}: stationary points {pts}")
    print(f"wrote {p1} and {p2}")
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, args) -> int:
    sysm = _build_system(cfg)
    if not cfg.eps:
        raise ConfigError("simulate needs --eps")
    if cfg.w == 1:
        log.warning("w=1: the coupled chain is 2L+1 uncoupled copies")
    modes = ["basic", "one-sided"] if args.mode == "both" else [args.mode]
    out = _outdir(cfg)
    for eps in cfg.eps:
        for mode in modes:
            run = sc_run_basic if mode == "basic" else sc_run_one_sided
            res = run(sysm, cfg.L, cfg.w, eps, cfg.tol)
            stem = f"sc_{mode}_eps{eps:g}_L{cfg.L}_w{cfg.w}"
            write_sc_trace(out / f"{stem}_trace.csv", res, sysm.name, cfg.seed)
            write_sc_state(out / f"{stem}_state.csv", res, sysm.name, cfg.seed)
            cap = " (iteration cap reached)" if res.hit_cap else ""
            print(
                f"{mode} eps={eps:g} L={cfg.L} w={cfg.w}: converged_to_zero={str(res.converged_to_zero).lower()} "
                f"iterations={res.iterations} max_entry={res.fixed_point.max():.6e}{cap}"
            )
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    ctx = VerifyContext(seed=cfg.seed, trials=args.trials, corrupt_matrix=args.corrupt_matrix, tol=cfg.tol)
    results = run_checks(args.lemma, ctx)
    for r in results:
        print(r.line())
        if r.detail:
            print(f"     {r.detail}")
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_PROPERTY if failed else EXIT_OK


COMMANDS = {"thresholds": cmd_thresholds, "potential": cmd_potential, "simulate": cmd_simulate, "verify": cmd_verify}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    warnings.simplefilter("default")
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, DomainError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except AdmissibilityError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ADMISSIBLE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
