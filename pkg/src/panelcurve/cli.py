"""Command-line interface: ``panelcurve <command> [options]``.

Exit codes: 0 success, 2 configuration or usage error, 3 data error,
4 numerical error.
"""
import argparse
import dataclasses
import sys

from . import __version__
from .config import KEYS, AnalysisConfig, describe_keys, from_mapping, load_config, parse_assignment
from .errors import ConfigError, DataError, PanelCurveError
from .panel import to_csv
from .pipeline import SECTIONS, run_analysis
from .report import FORMATS, load_report, render_report
from .simulate import SimConfig, regime_config, simulate_panel

COMMAND_SECTIONS = {
    "run": SECTIONS,
    "unitroot": ("unit_root",),
    "estimate": ("estimates", "combined"),
    "spectest": ("spec_tests", "model_choice"),
}
COMMAND_HELP = {
    "run": "full analysis: unit roots, estimates, tests and model choice",
    "unitroot": "ADF and PP tests per entity and variable",
    "estimate": "pooled, fixed and random-effects estimates with combined coefficients",
    "spectest": "redundant FE, LM and Hausman tests with the model decision",
}


def _flag(key):
    return "--" + key.replace(".", "-").replace("_", "-")


def _add_config_options(p):
    p.add_argument("input", nargs="?", help="input CSV (overrides the 'input' key)")
    p.add_argument("-c", "--config", help="config file with dotted keys")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key (repeatable)")
    p.add_argument("-o", "--output", help="write to this file instead of stdout")
    g = p.add_argument_group("config keys")
    for key, (_, help_text) in KEYS.items():
        if key in ("input", "format"):
            continue
        g.add_argument(_flag(key), dest=f"key:{key}", metavar="VALUE", help=help_text)
    p.add_argument("-f", "--format", dest="key:format", choices=FORMATS, help="report format")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="panelcurve",
        description="Regime-aware panel Phillips-curve analysis.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="config keys (file, --set KEY=VALUE, or the matching --flag):\n" + describe_keys(),
    )
    parser.add_argument("--version", action="version", version=f"panelcurve {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in COMMAND_HELP.items():
        p = sub.add_parser(name, help=help_text, description=help_text,
                           formatter_class=argparse.RawDescriptionHelpFormatter,
                           epilog="config keys:\n" + describe_keys())
        _add_config_options(p)

    p = sub.add_parser("simulate", help="write a synthetic panel CSV")
    p.add_argument("-o", "--output", help="output CSV (default stdout)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--entities", type=int, default=SimConfig.n_entities)
    p.add_argument("--periods", type=int, default=SimConfig.n_periods)
    p.add_argument("--expectation", choices=("backward", "forward"), default="backward")
    p.add_argument("--regime", action="store_true",
                   help="tranquil-only Phillips slope with noisy recessions")
    p.add_argument("--sigma-u", type=float, help="entity-effect SD")
    p.add_argument("--sigma-e", type=float, help="noise SD")

    p = sub.add_parser("report", help="re-render a saved json report")
    p.add_argument("report", help="json report written by 'run -f json'")
    p.add_argument("-f", "--format", choices=FORMATS, default="text")
    p.add_argument("-o", "--output")
    return parser


def resolve_config(args):
    """Defaults < config file < --set < explicit flags < positional input."""
    cfg = load_config(args.config) if args.config else AnalysisConfig()
    sets = dict(parse_assignment(s) for s in args.set)
    cfg = from_mapping(sets, cfg)
    flags = {k[4:]: v for k, v in vars(args).items() if k.startswith("key:") and v is not None}
    cfg = from_mapping(flags, cfg)
    if args.input:
        cfg = cfg.updated(input=args.input)
    return cfg


def _write(data, path):
    if path:
        with open(path, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _simulate(args):
    changes = {"seed": args.seed, "n_entities": args.entities, "n_periods": args.periods}
    if args.sigma_u is not None:
        changes["sigma_u"] = args.sigma_u
    if args.sigma_e is not None:
        changes["sigma_e"] = args.sigma_e
    try:
        if args.regime:
            cfg = regime_config(**changes)
        else:
            cfg = SimConfig(expectation=args.expectation, **changes)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    _write(to_csv(simulate_panel(cfg)), args.output)


def _report(args):
    try:
        report = load_report(args.report)
    except OSError as exc:
        raise DataError(f"cannot read {args.report}: {exc}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise DataError(f"malformed report {args.report}: {exc}") from None
    _write(render_report(report, args.format), args.output)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            _simulate(args)
        elif args.command == "report":
            _report(args)
        else:
            cfg = resolve_config(args)
            if cfg.input is None:
                raise ConfigError("no input file: pass a CSV path or set the 'input' key")
            report = run_analysis(cfg, sections=COMMAND_SECTIONS[args.command])
            _write(render_report(report, cfg.format), args.output)
    except PanelCurveError as exc:
        print(f"panelcurve: error: {exc}", file=sys.stderr)
        return getattr(exc, "exit_code", 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
