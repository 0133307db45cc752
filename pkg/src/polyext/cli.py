"""Command-line front end.

Subcommands: constants, rn, simulate, extremes, gaussian, moments,
lower-tail, variational, brw, ew-cov, domination, multiscale.

Configuration is a flat UTF-8 ``key = value`` file (# comments allowed)
whose keys are exactly the ExperimentConfig fields; command-line flags
override file values, and the effective config is echoed into the run
manifest.  Exit codes: 0 success, 1 validation error, 2 budget error.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from .experiments import ExperimentConfig, run
from .polymer import BudgetError
from .theory import (
    VariationalInstance,
    lambda_sq,
    naive_bound,
    sigma_star,
    variational_bound,
    variational_search,
)
from .walk import overlap_R


class CliError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}


def load_config(path: str) -> dict:
    """Parse a flat key = value config file against the typed schema.

    Every offending key (unknown name or uncoercible value) is reported in
    one error; missing keys fall back to the documented defaults.
    """
    if not os.path.exists(path):
        raise CliError(f"config file not found: {path}")
    values: dict = {}
    problems: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                problems.append(f"line {lineno}: expected 'key = value', got {line!r}")
                continue
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in _FIELD_TYPES:
                problems.append(f"line {lineno}: unknown key {key!r}")
                continue
            typ = _FIELD_TYPES[key]
            try:
                if typ in ("int", int):
                    values[key] = int(val)
                elif typ in ("float", float):
                    values[key] = float(val)
                else:
                    values[key] = val
            except ValueError:
                problems.append(f"line {lineno}: cannot parse {key} = {val!r} as {typ}")
    if problems:
        raise CliError("config errors:\n  " + "\n  ".join(problems))
    return values


_OVERRIDE_FLAGS = [
    ("--seed", "seed", int, "master seed"),
    ("--replicas", "replicas", int, "number of disorder replicas"),
    ("--n", "N", int, "polymer horizon N"),
    ("--beta-hat", "beta_hat", float, "disorder strength beta-hat in (0,1)"),
    ("--m-scales", "M", int, "number of scale bands M"),
    ("--out", "out", str, "output CSV path (manifest written alongside)"),
    ("--threads", "threads", int, "worker threads (default: POLYEXT_THREADS or 1)"),
    ("--wall-mode", "wall_mode", str, "wall centering: start|origin"),
    ("--window-mode", "window_mode", str, "window policy: certified|stat"),
    ("--window-kappa", "window_kappa", float, "stat-mode window width factor"),
    ("--stride", "stride", int, "extremes start-grid stride"),
    ("--grid-h", "grid_h", float, "macroscopic grid resolution"),
    ("--depth", "depth", int, "BRW depth n"),
    ("--branching", "branching", int, "BRW branching b"),
    ("--profile", "profile", str, "BRW profile: const|increasing|zero"),
    ("--profile-beta", "profile_beta", float, "beta-hat of the increasing BRW profile"),
]

_KIND_OF_COMMAND = {
    "simulate": "simulate",
    "extremes": "extremes",
    "gaussian": "gaussian-limit",
    "moments": "moment-identity",
    "lower-tail": "lower-tail",
    "brw": "brw",
    "ew-cov": "ew-cov",
    "domination": "domination",
    "multiscale": "multiscale",
}


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    for flag, dest, typ, helptext in _OVERRIDE_FLAGS:
        p.add_argument(flag, dest=dest, type=typ, default=None, help=helptext)


def _build_parser() -> _Parser:
    top = _Parser(prog="polyext", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="print the limit constants for beta-hat")
    p.add_argument("--beta-hat", type=float, default=0.5)

    p = sub.add_parser("rn", help="print the exact overlap sum R_n")
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("variational", help="solve one variational instance")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--f", type=str, required=True, help="comma-separated f(t..M)")
    p.add_argument("--grid-step", type=float, default=0.05)
    p.add_argument("--method", choices=("grid", "descent"), default="grid")

    for cmd in _KIND_OF_COMMAND:
        p = sub.add_parser(cmd, help=f"run the {_KIND_OF_COMMAND[cmd]} experiment")
        _add_experiment_flags(p)
    return top


def _effective_config(args) -> ExperimentConfig:
    values: dict = {}
    if args.config:
        values.update(load_config(args.config))
    for _, dest, _, _ in _OVERRIDE_FLAGS:
        v = getattr(args, dest, None)
        if v is not None:
            values[dest] = v
    if "threads" not in values:
        env_threads = os.environ.get("POLYEXT_THREADS")
        if env_threads:
            try:
                values["threads"] = int(env_threads)
            except ValueError:
                raise CliError(f"POLYEXT_THREADS must be an integer, got {env_threads!r}")
    values["kind"] = _KIND_OF_COMMAND[args.command]
    try:
        return ExperimentConfig(**values)
    except (TypeError, ValueError) as exc:
        raise CliError(str(exc))


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        if args.command == "constants":
            bh = args.beta_hat
            nb = naive_bound(bh)
            print(f"beta_hat      = {bh:.6f}")
            print(f"lambda^2      = {lambda_sq(bh):.6f}")
            print(f"sigma_star    = {sigma_star(bh):.6f}")
            print(f"naive_literal = {nb.literal:.6f}")
            print(f"naive_normalized = {nb.normalized:.6f}")
            return 0
        if args.command == "rn":
            if args.n < 1:
                raise CliError(f"--n must be >= 1, got {args.n}")
            print(f"R_{args.n} = {overlap_R(args.n):.12g}")
            return 0
        if args.command == "variational":
            f = [float(v) for v in args.f.split(",")]
            inst = VariationalInstance(M=args.m, t=args.t, a=args.a, f=f)
            g, val = variational_search(inst, args.grid_step, method=args.method)
            print(f"bound = {variational_bound(inst):.10g}")
            print(f"value = {val:.10g}")
            print("g     = " + ",".join(f"{v:.6g}" for v in g))
            return 0
        cfg = _effective_config(args)
        rec = run(cfg)
        for key in sorted(rec.aggregates):
            print(f"{key} = {rec.aggregates[key]}")
        if cfg.out:
            print(f"wrote {cfg.out} and {cfg.out}.manifest.json")
        return 0
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return 2
    except (CliError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
