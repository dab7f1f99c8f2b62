"""Command-line entry point: ``levyheat <subcommand> [options]``.

Subcommands
-----------
symbol       Psi / h tables and the Psi sandwich for a measure
density      invert the configured sweep (CSV, plot data, binary dumps)
bounds       envelope fits configured under [checks]
validate     full preset or config runs; ``--acceptance`` runs the 12 criteria
assumptions  measure-level assumption checkers

Exit status is 0 iff every executed check passes, 1 if any fails and 2 for
usage or configuration errors.  The default output directory is read from
``$LEVYHEAT_OUT`` (falling back to ``./levyheat-out``).
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .checks import REGISTRY
from .config import ConfigError, ExperimentConfig, load_config
from .presets import PRESETS, load_preset
from .runner import OUT_ENV, render_report, resolve_out_dir, run

_DEFAULT_STAGE_CHECKS = {
    "symbol": ["symbol.tables", "symbol.psi_sandwich"],
    "density": ["density.sweep"],
    "assumptions": ["measure.profile_bound", "measure.tech_assumption", "measure.lower_measure_bound"],
}
_STAGE = {"symbol": "symbol", "density": "density", "bounds": "bounds", "assumptions": "measure"}


def _common(p):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", metavar="PATH", help="INI experiment config")
    src.add_argument("--preset", choices=sorted(PRESETS), action="append",
                     help="built-in preset (repeatable for validate)")
    p.add_argument("--out", metavar="DIR", help=f"output directory (default ${OUT_ENV} or ./levyheat-out)")
    p.add_argument("--threads", metavar="N", type=int, default=1, help="worker threads for density sweeps")
    p.add_argument("--tol-scale", metavar="FACTOR", type=float, default=1.0,
                   help="multiply every check tolerance by FACTOR")
    p.add_argument("-q", "--quiet", action="store_true", help="only print the summary")


def build_parser():
    parser = argparse.ArgumentParser(prog="levyheat", description="Heat-kernel bound validation for Levy processes")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("symbol", "Psi and h tables"), ("density", "density inversion over the sweep"),
                           ("bounds", "envelope fits"), ("validate", "full runs"),
                           ("assumptions", "measure assumption checkers")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        if name == "validate":
            p.add_argument("--acceptance", action="store_true", help="run the 12 acceptance criteria")
            p.add_argument("--criteria", type=int, nargs="+", metavar="K", help="subset of criteria")
            p.add_argument("--all-presets", action="store_true", help="run every built-in preset")
    sub.add_parser("list-checks", help="print the check registry")
    return parser


def _configs(args):
    if args.config:
        return [(args.config, load_config(args.config))]
    names = args.preset or []
    if getattr(args, "all_presets", False):
        names = list(PRESETS)
    if not names:
        raise ConfigError("give --config PATH or --preset NAME")
    return [(n, load_preset(n)) for n in names]


def _restrict(cfg: ExperimentConfig, command) -> ExperimentConfig:
    if command == "validate":
        return cfg
    stage = _STAGE[command]
    chosen = [(n, o) for n, o in cfg.checks if REGISTRY[n].stage == stage]
    if command == "symbol" and "symbol.tables" not in dict(chosen):
        chosen.insert(0, ("symbol.tables", {}))
    if not chosen:
        if command not in _DEFAULT_STAGE_CHECKS:
            raise ConfigError(f"no {stage}.* checks configured", section="checks", source=cfg.source)
        chosen = [(n, {}) for n in _DEFAULT_STAGE_CHECKS[command]]
    formats = cfg.formats
    if command == "density" and "csv" not in formats:
        formats = formats + ("csv",)
    return dataclasses.replace(cfg, checks=chosen, formats=formats)


def _acceptance(args):
    from .acceptance import run_all

    results = run_all(args.criteria)
    for r in results:
        print(r.line(), flush=True)
    n_ok = sum(r.passed for r in results)
    print(f"{n_ok}/{len(results)} criteria passed")
    return 0 if n_ok == len(results) else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "list-checks":
        for name, chk in REGISTRY.items():
            opts = ", ".join(f"{k}={v}" for k, v in chk.defaults.items())
            print(f"{name}: {chk.doc.splitlines()[0] if chk.doc else ''}\n    options: {opts or '-'}")
        return 0
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    if not args.tol_scale > 0:
        parser.error("--tol-scale must be positive")
    if args.command == "validate" and args.acceptance:
        return _acceptance(args)
    try:
        configs = _configs(args)
        configs = [(label, _restrict(cfg, args.command)) for label, cfg in configs]
    except ConfigError as exc:
        print(f"levyheat: config error: {exc}", file=sys.stderr)
        return 2
    status = 0
    for label, cfg in configs:
        out = resolve_out_dir(args.out, cfg)
        if len(configs) > 1:
            out = out / label
        try:
            manifest = run(cfg, out_dir=out, threads=args.threads, tol_scale=args.tol_scale)
        except ConfigError as exc:
            print(f"levyheat: config error: {exc}", file=sys.stderr)
            return 2
        print(f"== {label} -> {out}")
        print(render_report(manifest), end="")
        status = max(status, manifest.exit_code)
    return status


if __name__ == "__main__":
    sys.exit(main())
