"""Command-line front end.

    sazf run     [--config PATH] [--seed N] [--trials N] [--out PATH]
    sazf sweep   [--config PATH] [--seed N] [--trials N] [--out PATH]
    sazf verify  [--config PATH] [--seed N] [--trials N]
    sazf figures [--seed N] [--trials N] [--out DIR]
"""

import argparse
import datetime as _dt
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .channel import NetworkConfig
from .errors import SazfError
from .experiments import protocol_invariant_suite, sweep, wishart_identity_check
from .scenario_io import (
    DEFAULT_SEED,
    emit_csv,
    emit_summary,
    figure_scenarios,
    parse_scenario,
    parse_scenario_text,
    scenario_to_toml,
    write_manifest,
)

VERIFY_CONFIG = NetworkConfig(K=3, N_R=32, theta_BR=3.0)
VERIFY_REALIZATIONS = 100


def _now():
    return _dt.datetime.now(_dt.timezone.utc)


def _load(args):
    scenario = parse_scenario(args.config) if args.config else parse_scenario_text("")
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.trials is not None:
        changes["trials"] = args.trials
    return replace(scenario, **changes) if changes else scenario


def _run_sweep(scenario, args):
    started = _now()

    def progress(index, value):
        logging.info("point %d/%d (%s) done", index + 1, len(scenario.axis_values), value)

    result = sweep(scenario, workers=args.workers, progress=progress)
    sys.stdout.write(emit_summary(result))
    if args.out:
        out = Path(args.out)
        emit_csv(result, out)
        write_manifest(out.with_name(out.name + ".manifest.json"), scenario, [out], started)
        print(f"wrote {out}")
    return 0


def cmd_run(args):
    scenario = _load(args)
    return _run_sweep(replace(scenario, axis_values=scenario.axis_values[:1]), args)


def cmd_sweep(args):
    return _run_sweep(_load(args), args)


def cmd_verify(args):
    config = parse_scenario(args.config).base if args.config else VERIFY_CONFIG
    seed = DEFAULT_SEED if args.seed is None else args.seed
    realizations = VERIFY_REALIZATIONS if args.trials is None else args.trials
    worst = protocol_invariant_suite(config, realizations, seed)
    checks = [
        ("alignment identity", worst["alignment"], 1e-9),
        ("relay zero-forcing", worst["relay_zf"], 1e-9),
        ("end-to-end zero-forcing", worst["end_to_end_zf"], 1e-9),
        ("BS self-interference residual", worst["si_residual_B"], 1e-18),
        ("user self-interference residual", worst["si_residual_U"], 1e-18),
        ("BS power (instantaneous)", worst["bs_power_error"], 0.01),
        ("relay power (instantaneous)", worst["relay_power_error"], 0.01),
        ("BS power (symbol level)", worst["bs_power_mc_error"], 0.01),
        ("relay power (symbol level)", worst["relay_power_mc_error"], 0.01),
    ]
    wishart = wishart_identity_check(3, 200, 10_000, seed)
    checks.append(("Wishart inverse-trace identity", wishart.rel_error, 0.02))
    failed = 0
    for name, value, tol in checks:
        ok = value < tol
        failed += not ok
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {value:.3e} (tolerance {tol:g})")
    return 1 if failed else 0


def cmd_figures(args):
    started = _now()
    out = Path(args.out or "figures")
    out.mkdir(parents=True, exist_ok=True)
    seed = DEFAULT_SEED if args.seed is None else args.seed
    kwargs = {"seed": seed}
    if args.trials is not None:
        kwargs["trials"] = args.trials
    written = []
    for name, scenario in figure_scenarios(**kwargs).items():
        path = out / f"{name}.toml"
        path.write_text(scenario_to_toml(scenario), encoding="utf-8")
        written.append(path)
        print(f"wrote {path}")
    write_manifest(out / "manifest.json", None, written, started)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="sazf", description=__doc__.splitlines()[0] or None)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    handlers = {
        "run": (cmd_run, "evaluate the first point of a scenario"),
        "sweep": (cmd_sweep, "evaluate every point of a scenario sweep"),
        "verify": (cmd_verify, "check protocol identities, power constraints and the Wishart identity"),
        "figures": (cmd_figures, "write scenario files for the four result figures"),
    }
    for name, (func, help_text) in handlers.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, help="scenario TOML file")
        p.add_argument("--seed", type=int, help=f"master seed (default {DEFAULT_SEED})")
        p.add_argument("--trials", type=int, help="Monte Carlo trials per point")
        p.add_argument("--out", help="output path")
        p.add_argument("--workers", type=int, default=1, help="worker processes")
        p.set_defaults(func=func)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SazfError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
