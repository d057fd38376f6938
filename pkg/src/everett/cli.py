"""``everett`` command line entry point.

Exit status: 0 when every check passed, 1 when a check failed, 2 for usage,
configuration or I/O errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import ConfigInvalid, EverettError, IoFailure
from .report import (
    ScenarioConfig,
    emit_report,
    operator_from_json,
    run_decompose,
    run_demo_ambiguity,
    run_sweep,
    run_verify,
    vector_from_json,
)
from .tensor import DEFAULT_TOLERANCES

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _tolerance_pair(text: str):
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected KEY=VAL, got {text!r}")
    try:
        return key.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance value must be a number: {text!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", action="append", type=_tolerance_pair, default=[], metavar="KEY=VAL",
                        help="override a tolerance (eq_tol, residual_tol, degeneracy_gap, max_retries)")
    common.add_argument("-o", "--output", default="-", help="report destination (default: stdout)")

    parser = argparse.ArgumentParser(prog="everett", description="Verify ideal-measurement models and Everett-copy structure.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="check M1-M4, branch form and picture consistency")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("demo-ambiguity", parents=[common], help="reproduce the two-outcome basis-ambiguity example")
    p.add_argument("--m", type=int, default=2)

    p = sub.add_parser("decompose", parents=[common], help="extract the Everett-copy structure of an operator")
    p.add_argument("--operator", required=True)
    p.add_argument("--ready", required=True)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("sweep", parents=[common], help="randomized falsification sweeps")
    p.add_argument("--config", required=True)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    return parser


def _load_json(path: str, what: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read {what} file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigInvalid({what: f"invalid JSON: {exc}"}) from exc


def _env_seed():
    raw = os.environ.get("EVERETT_SEED")
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigInvalid({"EVERETT_SEED": f"must be an integer, got {raw!r}"}) from None


def _load_config(args, overrides: dict) -> ScenarioConfig:
    doc = _load_json(args.config, "config")
    if not isinstance(doc, dict):
        raise ConfigInvalid({"config": "top level must be a JSON object"})
    doc = dict(doc)
    if getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        doc["trials"] = args.trials
    if overrides:
        doc["tolerances"] = {**doc.get("tolerances", {}), **overrides}
    return ScenarioConfig.from_dict(doc, seed_fallback=_env_seed())


def _run(args) -> int:
    overrides = dict(args.tolerance)
    if args.command == "verify":
        report = run_verify(_load_config(args, overrides))
    elif args.command == "sweep":
        report = run_sweep(_load_config(args, overrides))
    elif args.command == "demo-ambiguity":
        doc = {"m": args.m}
        if overrides:
            doc["tolerances"] = overrides
        report = run_demo_ambiguity(ScenarioConfig.from_dict(doc))
    else:
        try:
            tol = DEFAULT_TOLERANCES.replace(**overrides)
        except ValueError as exc:
            raise ConfigInvalid({"tolerance": str(exc)}) from exc
        op = operator_from_json(_load_json(args.operator, "operator"))
        ready = vector_from_json(_load_json(args.ready, "ready"))
        seed = args.seed if args.seed is not None else (_env_seed() or 0)
        report = run_decompose(op, ready, seed, tol)
    return emit_report(report, args.output)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_PASS
    try:
        return _run(args)
    except ConfigInvalid as exc:
        print(f"everett: invalid configuration: {exc}", file=sys.stderr)
    except IoFailure as exc:
        print(f"everett: {exc}", file=sys.stderr)
    except EverettError as exc:
        print(f"everett: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
