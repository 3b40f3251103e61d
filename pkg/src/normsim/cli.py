"""Command-line front end: ``normsim run | check | validate``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from . import dsl
from .engine import NormStore
from .errors import (
    EvaluationError,
    FormatError,
    LexError,
    NormsimError,
    ParseError,
    ValidationError,
)
from .norms import DEFAULT_DOMAIN, ActionDescriptor, RegulatoryStatus
from .scenario import (
    check_norm_file,
    load_norm_file,
    load_scenario,
    parse_condition,
    resolve_path,
    run_simulation,
    summarize,
)

EXIT_CODES = {
    RegulatoryStatus.NOT_REGULATED: 0,
    RegulatoryStatus.ALLOWED: 0,
    RegulatoryStatus.FORBIDDEN: 1,
    RegulatoryStatus.INVIOLABLE: 2,
}
EXIT_ERROR = 3


def parse_bindings(text: str) -> dict[str, dsl.Value]:
    """Parse ``k=v,k2=v2`` where each value is a boolean or number literal."""
    out: dict[str, dsl.Value] = {}
    if not text.strip():
        return out
    for item in text.split(","):
        key, sep, raw = item.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key:
            raise ValueError(f"binding {item!r} is not of the form key=value")
        if key in out:
            raise ValueError(f"binding {key!r} given twice")
        try:
            expr = parse_condition(raw)
        except (LexError, ParseError) as exc:
            raise ValueError(f"binding {key}: {exc}") from None
        if not isinstance(expr, dsl.Literal):
            raise ValueError(f"binding {key}: {raw!r} is not a literal")
        out[key] = expr.value
    return out


def _split(text: str) -> frozenset[str]:
    return frozenset(r.strip() for r in text.split(",") if r.strip())


def _env_seed() -> int | None:
    raw = os.environ.get("NORMSIM_SEED")
    return int(raw, 0) if raw else None


def cmd_run(args: argparse.Namespace) -> int:
    try:
        config = load_scenario(resolve_path(args.scenario))
    except (OSError, NormsimError) as exc:
        _report_load_error(args.scenario, exc)
        return EXIT_ERROR
    seed = args.seed if args.seed is not None else _env_seed()
    log_path = args.log or os.environ.get("NORMSIM_LOG")
    try:
        if log_path:
            with open(log_path, "w", encoding="utf-8", newline="\n") as fh:
                runtime, events = run_simulation(config, args.ticks, seed, fh)
        else:
            runtime, events = run_simulation(config, args.ticks, seed, sys.stdout)
    except (OSError, NormsimError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if not args.quiet:
        print(json.dumps(summarize(runtime, events), indent=2), file=sys.stderr)
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    try:
        norm_file = load_norm_file(resolve_path(args.norms))
        bindings = parse_bindings(args.state or "")
    except (OSError, NormsimError, ValueError) as exc:
        _report_load_error(args.norms, exc)
        return EXIT_ERROR
    store = NormStore(norm_file.mode, norm_file.norms)
    store.register_action(args.action, args.domain)
    action = ActionDescriptor(args.action, args.domain)
    ctx = dsl.EvaluationContext(environment=bindings)
    try:
        response = store.check_action(action, _split(args.roles or ""), ctx)
    except EvaluationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.json:
        print(json.dumps(response.to_dict()))
    else:
        print(f"status: {response.status.name}")
        print(f"allowing: {', '.join(response.allowing) or '-'}")
        print(f"forbidding: {', '.join(response.forbidding) or '-'}")
        print(f"total_reward: {response.total_reward:g}")
        print(f"total_penalty: {response.total_penalty:g}")
    return EXIT_CODES[response.status]


def cmd_validate(args: argparse.Namespace) -> int:
    diagnostics = check_norm_file(resolve_path(args.path))
    for line in diagnostics:
        print(line)
    if diagnostics:
        return 1
    print(f"{args.path}: ok")
    return 0


def _report_load_error(path: str, exc: BaseException) -> None:
    if isinstance(exc, ValidationError):
        for d in exc.diagnostics:
            print(f"{path}: {d}", file=sys.stderr)
    elif isinstance(exc, FormatError):
        print(f"{path}: {exc}", file=sys.stderr)
    elif isinstance(exc, OSError):
        print(f"error: cannot read {path}: {exc.strerror or exc}", file=sys.stderr)
    else:
        print(f"error: {exc}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="normsim", description="Normative multi-agent simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write its event log")
    run.add_argument("--scenario", required=True, help="scenario file (bundled: taxi.scenario)")
    run.add_argument("--ticks", type=int, help="override the scenario's tick count")
    run.add_argument("--seed", type=lambda s: int(s, 0), help="override the seed (env NORMSIM_SEED)")
    run.add_argument("--log", help="event log path, JSON lines (env NORMSIM_LOG); default stdout")
    run.add_argument("-q", "--quiet", action="store_true", help="do not print the summary")
    run.set_defaults(func=cmd_run)

    check = sub.add_parser("check", help="evaluate one action against a norm file")
    check.add_argument("--norms", required=True)
    check.add_argument("--action", required=True)
    check.add_argument("--domain", default=DEFAULT_DOMAIN)
    check.add_argument("--roles", default="", help="comma-separated role names")
    check.add_argument("--state", default="", help="bindings k=v,... with DSL literals")
    check.add_argument("--json", action="store_true", help="print the response as JSON")
    check.set_defaults(func=cmd_check)

    validate = sub.add_parser("validate", help="validate a norm or scenario file")
    validate.add_argument("path")
    validate.set_defaults(func=cmd_validate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
