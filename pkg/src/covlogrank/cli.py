"""Command-line entry point: ``covlogrank analyze | simulate | randomize``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical degeneracy. ``COVLOGRANK_OUT`` sets the default output
directory of ``simulate`` and of the JSON report written by ``analyze``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .dataio import parse_trial_csv
from .errors import ConfigError, DataError, DegenerateError, InvalidMarginVector
from .randomization import KINDS, AssignmentState, SchemeConfig
from .report import analyze
from .simulation import ScenarioConfig, default_workers, run_power_curve, run_scenario, write_csv

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DEGENERATE = 0, 1, 2, 3
OUT_ENV = "COVLOGRANK_OUT"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _rename(pairs):
    out = {}
    for item in pairs or ():
        old, sep, new = item.partition("=")
        if not sep or not old or not new:
            raise ConfigError(f"--rename expects OLD=NEW, got {item!r}")
        out[old] = new
    return out


def _out_dir(arg):
    if arg:
        return Path(arg)
    env = os.environ.get(OUT_ENV)
    return Path(env) if env else None


# analyze

def cmd_analyze(args) -> int:
    rename = _rename(args.rename)
    data = parse_trial_csv(args.data, covariates=args.covariates,
                           stratum_col=args.stratum_col, rename=rename)
    report = analyze(data, pi=args.pi, subgroups=args.subgroups, alpha=args.alpha, level=args.level)
    if args.json:
        print(report.to_json())
    else:
        print(report.format_table())
    target = Path(args.json_out) if args.json_out else None
    if target is None and (d := _out_dir(None)) is not None:
        target = d / "analysis.json"
    if target is not None:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(report.to_json() + "\n", encoding="utf-8")
    return EXIT_DEGENERATE if report.degenerate() else EXIT_OK


# simulate

def load_scenarios(path):
    """Scenario list from a JSON config.

    The file holds either one scenario object or
    ``{"defaults": {...}, "scenarios": [{...}, ...], "theta_grid": [...]}``.
    Every scenario field is optional; missing fields take the defaults of
    ``ScenarioConfig``. With ``theta_grid`` each scenario becomes a power curve.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    if "scenarios" not in doc and "defaults" not in doc:
        doc = {"scenarios": [doc]}
    defaults = doc.get("defaults", {})
    grid = doc.get("theta_grid")
    scenarios = []
    for entry in doc.get("scenarios") or [{}]:
        merged = {**defaults, **entry}
        if "theta_grid" in merged:
            merged.pop("theta_grid")
        try:
            scenarios.append(ScenarioConfig.from_dict(merged))
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
    extra = set(doc) - {"defaults", "scenarios", "theta_grid"}
    if extra:
        raise ConfigError(f"unknown top-level config keys: {sorted(extra)}")
    return scenarios, grid


def cmd_simulate(args) -> int:
    scenarios, grid = load_scenarios(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.alpha is not None:
        overrides["alpha"] = args.alpha
    if args.replications is not None:
        overrides["replications"] = args.replications
    scenarios = [replace(s, **overrides) for s in scenarios]
    out = _out_dir(args.out)
    if out is None:
        raise ConfigError(f"give --out or set {OUT_ENV}")
    out.mkdir(parents=True, exist_ok=True)
    workers = args.threads or default_workers()

    reports = []
    for cfg in scenarios:
        if grid is not None:
            reports.extend(run_power_curve(cfg, grid, workers))
        else:
            reports.append(run_scenario(cfg, workers))
    path = out / "results.csv"
    write_csv(reports, path)
    for rep in reports:
        rates = "  ".join(f"{t}={100 * r['rate']:.2f}%" for t, r in zip(
            ("T_L", "T_CL", "T_SL", "T_CSL"), rep.rows()))
        print(f"{rep.config.label:<12}{rep.config.scheme.kind:<16}theta={rep.config.theta:<6g}"
              f"{rates}  ({rep.runtime:.1f}s)")
    print(f"wrote {path}")
    return EXIT_OK


# randomize

def _parse_levels(line, lineno, m):
    tokens = line.replace(",", " ").split()
    try:
        levels = [int(t) for t in tokens]
    except ValueError:
        raise InvalidMarginVector(f"line {lineno}: expected {m} integer margin levels, got {line!r}") from None
    if len(levels) != m:
        raise InvalidMarginVector(f"line {lineno}: expected {m} margin levels, got {len(levels)}")
    return levels


def cmd_randomize(args, stdin=None, stdout=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    config = SchemeConfig(args.scheme, pi=args.pi, block_size=args.block_size,
                          p_prefer=args.p_prefer, margins=args.margins or ())
    state = AssignmentState.start(config, seed=args.seed, replication=args.replication)
    m = len(config.margins)
    for lineno, line in enumerate(stdin, start=1):
        line = line.strip()
        if not line:
            continue
        if config.kind == "minimization":
            levels = _parse_levels(line, lineno, m)
            try:
                arm = state.assign_next(levels)
            except InvalidMarginVector as exc:
                raise InvalidMarginVector(f"line {lineno}: {exc}") from None
        elif config.kind == "permuted_block":
            arm = state.assign_next(line)
        else:
            arm = state.assign_next()
        stdout.write(f"{arm}\n")
        stdout.flush()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="covlogrank", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="four tests and hazard-ratio estimates for a trial CSV")
    a.add_argument("--data", required=True, help="trial CSV (time, event, arm[, stratum, x1..])")
    a.add_argument("--pi", type=float, default=None,
                   help="target allocation to arm 1 (default: observed fraction)")
    a.add_argument("--covariates", default="auto",
                   help="comma-separated covariate columns, 'auto' (x1, x2, ...) or 'none'")
    a.add_argument("--stratum-col", default="stratum", help="stratum column (optional if 'stratum')")
    a.add_argument("--rename", action="append", metavar="OLD=NEW",
                   help="rename a CSV column before parsing; repeatable")
    a.add_argument("--subgroups", action="store_true", help="also analyze each stratum separately")
    a.add_argument("--alpha", type=float, default=0.05,
                   help="significance level for the reject flags (default 0.05)")
    a.add_argument("--level", type=float, default=0.95, help="confidence level of the intervals")
    a.add_argument("--json", action="store_true", help="print the JSON report instead of the table")
    a.add_argument("--json-out", help=f"write the JSON report here (default: ${OUT_ENV}/analysis.json)")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="Monte Carlo type I error / power from a JSON config")
    s.add_argument("--config", required=True, help="scenario JSON file")
    s.add_argument("--out", help=f"output directory (default: ${OUT_ENV})")
    s.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    s.add_argument("--seed", type=int, default=None, help="override the config seed")
    s.add_argument("--alpha", type=float, default=None, help="override the config alpha")
    s.add_argument("--replications", type=int, default=None, help="override the config replications")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("randomize", help="assign arriving patients read line by line from stdin")
    r.add_argument("--scheme", choices=sorted(KINDS), default="simple")
    r.add_argument("--pi", type=float, default=0.5)
    r.add_argument("--block-size", type=int, default=4)
    r.add_argument("--p-prefer", type=float, default=0.8)
    r.add_argument("--margins", type=_int_list, default=None,
                   help="levels per margin, e.g. 2,3 (minimization)")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--replication", type=int, default=0, help=argparse.SUPPRESS)
    r.set_defaults(func=cmd_randomize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"covlogrank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"covlogrank: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DegenerateError as exc:
        print(f"covlogrank: degenerate: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
