"""Command-line entry point.

    qhefcs <subcommand> [--config PATH] [--seed N] [--count N] [--eta X]
                        [--paper-literal] [--out DIR]

Exit status: 0 on success, 1 on invalid input, 2 when a solver refuses.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import CSV_FIELDS, RANGES, constancy, random_sweep
from .config import RunConfig, load_config, parse_config
from .efficiency import (
    coherence_ratio,
    current_ratio_efficiency,
    efficiency_cumulants,
    efficiency_grid,
    ldf_curve,
    _initial_lambda,
)
from .engine import derived_quantities
from .errors import NoNullVector, PoleAtCarnot, SolverError, ValidationError
from .generator import RawFields, build_generator, EfficiencyTracking, ParticleCold, ParticleHot, efficiency_family, heat_family, work_family
from .io import write_csv, write_json
from .spectral import NULL_TOL, cgf, cgf_cumulants, propagate_cgf_oracle, spectral_solve, verify_gc_symmetry
from .svg import PlotSpec, emit_svg_plot

log = logging.getLogger("qhefcs")

_UNSET = object()
STATE_LABELS = ("rho_11", "rho_22", "rho_aa", "rho_bb", "Re rho_12")


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors: status 1, keeping 2 for solver failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _eta_arg(text: str):
    if text in ("carnot", "eta_star"):
        return None if text == "eta_star" else text
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number, 'carnot' or 'eta_star'")
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"{text!r} is not finite")
    return v


def _resolve_eta(cfg: RunConfig) -> float:
    d = derived_quantities(cfg.params)
    if cfg.eta is None:
        return current_ratio_efficiency(cfg.params)
    if cfg.eta == "carnot":
        return d.eta_C
    return float(cfg.eta)


def cmd_steady(cfg: RunConfig, out: Path) -> list[Path]:
    G = build_generator(None, cfg.params, RawFields(0.0, 0.0), paper_literal=cfg.paper_literal)
    sol = spectral_solve(G)
    d = derived_quantities(cfg.params)
    report = {
        "fingerprint": cfg.params.fingerprint(),
        "paper_literal": cfg.paper_literal,
        "params": asdict(cfg.params),
        "labels": list(STATE_LABELS),
        "steady_state": sol.right.tolist(),
        "S0": sol.S,
        "derived": {k: v for k, v in asdict(d).items() if k != "params"},
    }
    if abs(sol.S) > NULL_TOL * max(np.linalg.norm(G.M), 1.0):
        # report first so the offending vector can be inspected
        path = write_json(out / "steady.json", report)
        raise NoNullVector(f"zero-field generator has no null vector (S = {sol.S:.3e}); wrote {path}")
    return [write_json(out / "steady.json", report)]


def cmd_cgf_scan(cfg: RunConfig, out: Path) -> list[Path]:
    eta = _resolve_eta(cfg)
    Lam = _initial_lambda(cfg.params)
    lams = np.linspace(-Lam, Lam, 201)
    rows = [(lam, cgf(cfg.params, EfficiencyTracking(lam, eta), cfg.paper_literal)) for lam in lams]
    path = write_csv(out / "cgf_scan.csv", ("lambda", "S"), rows)
    svg = emit_svg_plot(PlotSpec((("lambda", "S"),), "lambda", f"S(lambda, {eta:.4g} lambda)", "cgf_scan.svg"), path)
    return [path, svg]


def cmd_ldf(cfg: RunConfig, out: Path) -> list[Path]:
    p = cfg.params
    d = derived_quantities(p)
    etas = efficiency_grid(p)
    pts = ldf_curve(p, etas)
    rows = [(pt.eta, pt.lambda_star, pt.I, pt.I0) for pt in pts]
    path = write_csv(out / "ldf.csv", ("eta", "lambda_star", "I", "I0"), rows)
    files = [path]
    if all(math.isfinite(v) for row in rows for v in row):
        spec = PlotSpec((("eta", "I"), ("eta", "I0")), "eta", "I(eta)", "ldf.svg", markers=(d.eta_C,))
        files.append(emit_svg_plot(spec, path))
    else:
        log.warning("ldf curve has unbracketed points; skipping the plot")
    return files


def _test_efficiencies(cfg: RunConfig) -> list[float]:
    if cfg.eta is not None:
        return [_resolve_eta(cfg)]
    d = derived_quantities(cfg.params)
    return [0.25, 1.0 - math.sqrt(1.0 - d.eta_C), current_ratio_efficiency(cfg.params), d.eta_C]


def cmd_cumulants(cfg: RunConfig, out: Path) -> list[Path]:
    etas = _test_efficiencies(cfg)
    ratio = coherence_ratio(cfg.params, etas)
    rows = []
    for eta, K1, K2 in zip(ratio.etas, ratio.K1, ratio.K2):
        e = efficiency_cumulants(cfg.params, eta)
        rows.append((eta, e.eta1, e.eta1_o, K1, e.eta2, e.eta2_o, K2))
    header = ("eta", "eta1", "eta1_o", "K1", "eta2", "eta2_o", "K2")
    return [write_csv(out / "cumulants.csv", header, rows)]


def cmd_constancy(cfg: RunConfig, out: Path) -> list[Path]:
    d = derived_quantities(cfg.params)
    etas = [_resolve_eta(cfg)] if cfg.eta is not None else np.linspace(0.0, d.eta_C, 201)[:-1]
    rows = []
    for eta in etas:
        try:
            rows.append((eta, constancy(cfg.params, eta)))
        except PoleAtCarnot:
            rows.append((eta, math.nan))
    path = write_csv(out / "constancy.csv", ("eta", "C_N"), rows)
    files = [path]
    if len(rows) > 1 and all(math.isfinite(c) for _, c in rows):
        files.append(emit_svg_plot(PlotSpec((("eta", "C_N"),), "eta", "C_N", "constancy.svg"), path))
    return files


def cmd_sweep(cfg: RunConfig, out: Path) -> list[Path]:
    records = random_sweep(RANGES[cfg.ranges], cfg.count, cfg.seed, template=cfg.params, eta=cfg.eta)
    return [write_csv(out / "sweep.csv", CSV_FIELDS, (r.row() for r in records))]


def _relative(a: float, b: float, scale: float) -> float:
    return abs(a - b) / max(abs(b), scale)


def verify_report(cfg: RunConfig) -> dict:
    p = cfg.params
    d = derived_quantities(p)
    G = build_generator(d, p, RawFields(0.0, 0.0), paper_literal=cfg.paper_literal)
    s0 = abs(cgf(p, RawFields(0.0, 0.0), cfg.paper_literal))
    sym = verify_gc_symmetry(p)

    # relative to the cumulant itself, floored at 1e-3 of the family's scale
    delta = 0.0
    families = (ParticleCold, ParticleHot, heat_family, work_family, efficiency_family(0.25))
    for fam in families:
        pert = cgf_cumulants(p, fam, method="perturbative")
        fd = cgf_cumulants(p, fam, method="fd")
        floor = 1e-3 * max(abs(pert.c1), abs(pert.c2), 1e-12)
        delta = max(delta, _relative(fd.c1, pert.c1, floor), _relative(fd.c2, pert.c2, floor))

    mode = ParticleCold(0.1)
    traj = propagate_cgf_oracle(p, mode)
    prop = abs(traj[-1, 1] - cgf(p, mode))
    return {
        "fingerprint": p.fingerprint(),
        "paper_literal": cfg.paper_literal,
        "s0_residual": s0,
        "gc_residual": sym.residual,
        "affinity_empirical": sym.affinity_empirical,
        "affinity_printed": sym.affinity_printed,
        "cumulant_method_delta": delta,
        "propagation_delta": prop,
        "generator_norm": float(np.linalg.norm(G.M)),
    }


def cmd_verify(cfg: RunConfig, out: Path) -> list[Path]:
    return [write_json(out / "verify.json", verify_report(cfg))]


COMMANDS = {
    "steady": cmd_steady,
    "cgf-scan": cmd_cgf_scan,
    "ldf": cmd_ldf,
    "cumulants": cmd_cumulants,
    "constancy": cmd_constancy,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file (default: preset = fig2)")
    common.add_argument("--seed", type=int, help="sweep seed (overrides config)")
    common.add_argument("--count", type=int, help="number of sweep draws (overrides config)")
    common.add_argument("--eta", type=_eta_arg, default=_UNSET, help="efficiency: a number, 'carnot' or 'eta_star'")
    common.add_argument("--paper-literal", action="store_true", help="use the uncorrected hot-decay rate (not trace preserving)")
    common.add_argument("--out", help="output directory (default: $QHEFCS_OUT or .)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="qhefcs", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    plot = sub.add_parser("plot", parents=[common], help="render CSV columns as SVG")
    plot.add_argument("csv")
    plot.add_argument("--x", required=True)
    plot.add_argument("--y", required=True, help="comma-separated y columns")
    plot.add_argument("--name", default=None, help="output file name")
    plot.add_argument("--marker", type=float, action="append", default=[])
    return parser


def _merge(cfg: RunConfig, args) -> RunConfig:
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.count is not None:
        if args.count < 1:
            raise ValidationError("--count must be at least 1")
        changes["count"] = args.count
    if args.eta is not _UNSET:
        changes["eta"] = args.eta
    if args.paper_literal:
        changes["paper_literal"] = True
    return replace(cfg, **changes)


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else parse_config("preset = fig2")
        cfg = _merge(cfg, args)
        out = Path(args.out or cfg.out or os.environ.get("QHEFCS_OUT") or ".")
        if args.command == "plot":
            name = args.name or Path(args.csv).with_suffix(".svg").name
            series = tuple((args.x, y) for y in args.y.split(","))
            files = [emit_svg_plot(PlotSpec(series, args.x, args.y, name, tuple(args.marker)), args.csv, out)]
        else:
            files = COMMANDS[args.command](cfg, out)
    except ValidationError as e:
        print(f"qhefcs: invalid input: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"qhefcs: {e}", file=sys.stderr)
        return 1
    except SolverError as e:
        print(f"qhefcs: solver error ({type(e).__name__}): {e}", file=sys.stderr)
        return 2
    for f in files:
        print(f)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
