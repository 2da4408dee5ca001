"""Command line entry point: ``cfnl <command> [options]``.

Exit status: 0 all checks pass, 1 some claim failed, 2 bad configuration
or input, 3 internal consistency failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import yaml

from . import suites
from .errors import ConfigError, InternalConsistencyError
from .gridcheck import GridField
from .radial import RadialProfile
from .report import dump_reports

log = logging.getLogger("cfnl")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_INTERNAL = 0, 1, 2, 3

DEFAULTS = {
    "seed": 0,
    "signs": {"n_max": 16},
    "invariance": {"n": 5, "k": 2, "trials": 50},
    "radial": {"n": 5, "k": 2, "r_stop": 0.01, "steps_per_decade": 4096},
    "msphere": {"n": 5, "k": 2, "x": [0.05, 0.1, 0.25, 0.5], "points": 10_000},
    "holder": {"n": 3, "k": 2, "alpha": None, "profile": None, "synthetic": False},
    "gridcheck": {"mu": [1e-2, 1e-3], "extent": 64, "a": 1.0,
                  "p": [0.2, 0.1, 0.0], "q": [0.0, 0.1, 0.0], "grid": None, "h": None},
}

COMMANDS = tuple(k for k in DEFAULTS if k != "seed")


def _floats(text):
    return [float(t) for t in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML file with global keys and per-command sections")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", type=Path, help="directory for report.json and artefacts")
    common.add_argument("--json", action="store_true", help="print the JSON report to stdout")
    common.add_argument("--csv", action="store_true", help="also write CSV artefacts to --out")
    common.add_argument("--timings", action="store_true", help="include runtime_ms in reports")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="cfnl", description="Numerical checks for conformal Hessian equations.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("signs", parents=[common], help="sign table of sigma_k at (-1, 1, ..., 1)")
    s.add_argument("--n-max", type=int)

    s = sub.add_parser("invariance", parents=[common], help="Moebius invariance of F_k(A^u)")
    s.add_argument("--n", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--trials", type=int)

    s = sub.add_parser("radial", parents=[common], help="radial shooting towards the puncture")
    s.add_argument("--n", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--r-stop", type=float)
    s.add_argument("--steps-per-decade", type=int)

    s = sub.add_parser("msphere", parents=[common], help="critical moving-sphere radius")
    s.add_argument("--n", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--x", type=_floats, help="comma separated |x| values")
    s.add_argument("--points", type=int)

    s = sub.add_parser("holder", parents=[common], help="Hoelder regularity of u^(-2/(n-2))")
    s.add_argument("--n", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--alpha", type=float)
    s.add_argument("--profile", type=Path, help="profile CSV written by the radial command")
    s.add_argument("--synthetic", action="store_true", default=None)

    s = sub.add_parser("gridcheck", parents=[common], help="two-plane lower bound on a grid")
    s.add_argument("--mu", type=_floats)
    s.add_argument("--extent", type=int)
    s.add_argument("--a", type=float)
    s.add_argument("--p", type=_floats)
    s.add_argument("--q", type=_floats)
    s.add_argument("--grid", type=Path, help="grid CSV (i1,...,in,value) to check instead")
    s.add_argument("--h", type=float, help="grid spacing for --grid")
    return p


def resolve(args) -> dict:
    """Merge defaults < config file < command line for the chosen command."""
    cfg = {"seed": DEFAULTS["seed"], **DEFAULTS[args.command]}
    if args.config is not None:
        try:
            raw = yaml.safe_load(args.config.read_text()) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a mapping")
        unknown = set(raw) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "seed" in raw:
            cfg["seed"] = raw["seed"]
        section = raw.get(args.command) or {}
        bad = set(section) - set(cfg)
        if bad:
            raise ConfigError(f"unknown keys in [{args.command}]: {sorted(bad)}")
        cfg.update(section)
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def run_command(command: str, cfg: dict):
    """Return (reports, artefacts) where artefacts maps file name to content."""
    seed = int(cfg["seed"])
    if command == "signs":
        reports, tables = suites.run_signs(cfg["n_max"])
        rows = {str(n): [{"k": r.k, "sign": r.sign, "value": r.value_direct} for r in t]
                for n, t in tables.items()}
        return reports, {"sign_table.json": json.dumps(rows, indent=2)}
    if command == "invariance":
        return suites.run_invariance(cfg["n"], cfg["k"], cfg["trials"], seed), {}
    if command == "radial":
        reports, profiles = suites.run_radial(cfg["n"], cfg["k"], cfg["r_stop"], cfg["steps_per_decade"])
        return reports, {f"profile_{tag}.csv": prof for tag, prof in profiles.items()}
    if command == "msphere":
        reports, results = suites.run_msphere(cfg["n"], cfg["k"], cfg["x"], cfg["points"], seed)
        return reports, {"spheres.json": json.dumps(results, indent=2)}
    if command == "holder":
        prof = None
        if cfg["profile"]:
            path = Path(cfg["profile"])
            if not path.is_file():
                raise ConfigError(f"profile not found: {path}")
            try:
                prof = RadialProfile.from_csv(path, cfg["n"], cfg["k"])
            except (ValueError, OSError) as exc:
                raise ConfigError(f"cannot read profile {path}: {exc}") from None
        return suites.run_holder(cfg["n"], cfg["k"], prof, cfg["alpha"], bool(cfg["synthetic"])), {}
    if command == "gridcheck":
        grid = None
        if cfg["grid"]:
            if not cfg["h"]:
                raise ConfigError("--grid needs --h")
            try:
                grid = GridField.from_csv(Path(cfg["grid"]), float(cfg["h"]))
            except (ValueError, OSError) as exc:
                raise ConfigError(f"cannot read grid {cfg['grid']}: {exc}") from None
        reports, shells = suites.run_gridcheck(cfg["mu"], cfg["extent"], cfg["a"], cfg["p"], cfg["q"],
                                               grid=grid)
        return reports, {"shells.json": json.dumps(shells, indent=2)}
    raise ConfigError(f"unknown command {command!r}")


def _write(out: Path, reports, artefacts, timings: bool, csv: bool):
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(dump_reports(reports, timings) + "\n")
    for name, content in artefacts.items():
        if isinstance(content, RadialProfile):
            if csv:
                content.to_csv(out / name)
        else:
            (out / name).write_text(content + "\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
        reports, artefacts = run_command(args.command, cfg)
        if args.out is not None:
            _write(args.out, reports, artefacts, args.timings, args.csv)
    except ConfigError as exc:
        print(f"cfnl: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InternalConsistencyError as exc:
        print(f"cfnl: internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL

    if args.json:
        print(dump_reports(reports, args.timings))
    else:
        for rep in reports:
            print(f"{'PASS' if rep.passed else 'FAIL'} {rep.claim_id}")
            for c in rep.checks:
                if not c.ok:
                    print(f"  failed: {c.name}: computed {c.computed!r}, reference {c.reference!r} "
                          f"({c.relation}, tol {c.tolerance:g})")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
