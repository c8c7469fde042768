"""Command-line interface: ``ssi <command> ...``.

Exit codes: 0 success, 1 negative answer (invalid model, unreachable
states, achievement not met, replay mismatch), 2 bad input, 3 simulation
error, 4 no path.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .core import StateSpace, ValidationReport, reachable_states, validate
from .errors import InteractiveAbort, ReplayMismatch, ScriptInapplicable, SSIError
from .formats import (
    atomic_write,
    load_model,
    load_spec,
    parse_trace,
    serialize_trace,
)
from .paths import check_achievement, speedrun
from .quantum import correspondence_table, run_qct
from .simulate import (
    InteractivePolicy,
    ScriptedPolicy,
    UniformRandomPolicy,
    replay_trace,
    simulate,
    trace_to_path,
)

EXIT_OK, EXIT_NO, EXIT_INPUT, EXIT_SIM, EXIT_NOPATH = 0, 1, 2, 3, 4


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def format_report(report: ValidationReport, model=None) -> list:
    lines = []
    where = (lambda s, o: f" (line {model.source_lines[(s, o)]})" if model and (s, o) in model.source_lines else "")
    for s, o, detail in report.closure_violations:
        lines.append(f"closure violation: {s} {o}: {detail}{where(s, o)}")
    for s, o, total in report.probability_errors:
        lines.append(f"probability error: {s} {o}: outcomes sum to {total}{where(s, o)}")
    if report.unreachable_states:
        lines.append("unreachable: " + ", ".join(report.unreachable_states))
    return lines


def _load(path, lenient=False):
    try:
        return load_model(path, allow_undeclared_targets=lenient)
    except OSError as e:
        raise _Fail(EXIT_INPUT, f"cannot read {path}: {e.strerror}") from None
    except SSIError as e:
        raise _Fail(EXIT_INPUT, f"{path}: {e}") from None


def _space(path) -> StateSpace:
    model = _load(path)
    result = validate(model)
    if isinstance(result, ValidationReport):
        raise _Fail(EXIT_NO, "\n".join([f"{path}: model does not validate"] + format_report(result, model)))
    return result


def _resolve(space: StateSpace, names) -> set:
    """Each name is a state id, or a label (``#label`` forces the label reading)."""
    out = set()
    for name in names:
        if not name.startswith("#") and space.has_state(name):
            out.add(name)
            continue
        ids = space.model.with_label(name.lstrip("#"))
        if not ids:
            raise _Fail(EXIT_INPUT, f"{name!r} is neither a state nor a label")
        out.update(ids)
    return out


def cmd_validate(args, out):
    model = _load(args.model, lenient=True)
    result = validate(model)
    if isinstance(result, StateSpace):
        print("OK: closure and reachability hold", file=out)
        return EXIT_OK
    for line in format_report(result, model):
        print(line, file=out)
    return EXIT_NO


def cmd_reach(args, out):
    model = _load(args.model, lenient=True)
    reached = reachable_states(model)
    reached_set = set(reached)
    missing = [s for s in model.state_ids if s not in reached_set]
    print("reachable: " + ", ".join(reached), file=out)
    print("unreachable: " + (", ".join(missing) if missing else "(none)"), file=out)
    return EXIT_NO if missing else EXIT_OK


def cmd_simulate(args, out):
    space = _space(args.model)
    if args.script is not None:
        policy = ScriptedPolicy([op for op in args.script.split(",") if op])
    elif args.interactive:
        policy = InteractivePolicy()
    else:
        policy = UniformRandomPolicy()
    try:
        trace = simulate(space, args.start, policy, args.max_steps, args.seed)
    except (ScriptInapplicable, InteractiveAbort) as e:
        raise _Fail(EXIT_SIM, str(e)) from None
    except SSIError as e:
        raise _Fail(EXIT_INPUT, str(e)) from None
    text = serialize_trace(trace)
    if args.trace:
        atomic_write(args.trace, text)
        print(f"wrote {len(trace.steps)} steps to {args.trace} (stop: {trace.stop_reason})", file=out)
    else:
        out.write(text)
    return EXIT_OK


def cmd_replay(args, out):
    space = _space(args.model)
    trace = _read_trace(args.trace)
    try:
        replay_trace(space, trace)
    except ReplayMismatch as e:
        raise _Fail(EXIT_NO, f"replay mismatch: {e}") from None
    except SSIError as e:
        raise _Fail(EXIT_NO, f"replay failed: {e}") from None
    print(f"OK: {len(trace.steps)} steps reproduced", file=out)
    return EXIT_OK


def _read_trace(path):
    try:
        return parse_trace(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise _Fail(EXIT_INPUT, f"cannot read {path}: {e.strerror}") from None
    except SSIError as e:
        raise _Fail(EXIT_INPUT, f"{path}: {e}") from None


def cmd_speedrun(args, out):
    space = _space(args.model)
    sources = _resolve(space, args.from_) if args.from_ else set(space.initial)
    targets = _resolve(space, args.to)
    avoid = _resolve(space, args.avoid) if args.avoid else set()
    kinds = args.kinds.split(",") if args.kinds else None
    try:
        result = speedrun(space, sources, targets, avoid, kinds)
    except (SSIError, ValueError) as e:
        raise _Fail(EXIT_INPUT, str(e)) from None
    if not result.found:
        print(f"no path (expanded {result.visited_count} states)", file=sys.stderr)
        return EXIT_NOPATH
    p = result.path
    route = p.start + "".join(f" -{s.op}-> {s.outcome}" for s in p.steps)
    print(f"cost {result.total_cost}: {' '.join(p.ops) or '(no operations)'}", file=out)
    print(route, file=out)
    return EXIT_OK


def cmd_achieve(args, out):
    space = _space(args.model)
    trace = _read_trace(args.trace)
    try:
        spec = load_spec(args.spec)
        replay_trace(space, trace)
    except OSError as e:
        raise _Fail(EXIT_INPUT, f"cannot read {args.spec}: {e.strerror}") from None
    except SSIError as e:
        raise _Fail(EXIT_INPUT, str(e)) from None
    path = trace_to_path(space, trace)
    achieved, witness = check_achievement(path, spec)
    if not achieved:
        print(f"{spec.id}: not achieved", file=out)
        return EXIT_NO
    route = witness.start + "".join(f" -{s.op}-> {s.outcome}" for s in witness.steps)
    # the witness is the earliest qualifying subpath, so its first occurrence is it
    n = len(witness)
    start = next(i for i in range(len(path) - n + 1) if path.subpath(i, i + n) == witness)
    print(f"{spec.id}: achieved", file=out)
    print(f"witness (from step {start}): {route}", file=out)
    return EXIT_OK


def cmd_qct(args, out):
    if args.table:
        rows = correspondence_table()
        width = max(len(r.step) for r in rows)
        qwidth = max(len(r.quantum) for r in rows)
        print(f"{'Step':<{width}}  {'Quantum':<{qwidth}}  Classical", file=out)
        for r in rows:
            print(f"{r.step:<{width}}  {r.quantum:<{qwidth}}  {r.classical}", file=out)
    if args.trials < 1:
        raise _Fail(EXIT_INPUT, "--trials must be at least 1")
    freq, _ = run_qct(args.trials, args.seed)
    print(f"Head {freq['Head']:.4f} Tail {freq['Tail']:.4f} (trials={args.trials}, seed={args.seed})", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssi", description="Model games as state spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check operation closure and reachability")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("reach", help="list states reachable from the initial set")
    p.add_argument("model")
    p.set_defaults(func=cmd_reach)

    p = sub.add_parser("simulate", help="run a seeded simulation and emit a trace")
    p.add_argument("model")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--script", help="comma-separated operation ids")
    mode.add_argument("--random", action="store_true", help="uniform random policy (default)")
    mode.add_argument("--interactive", action="store_true", help="read operation ids from stdin")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=100)
    p.add_argument("--start", default="uniform", help="start state id, or 'uniform' over the initial set")
    p.add_argument("--trace", help="write the trace here instead of stdout")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("replay", help="check that a trace reproduces against a model")
    p.add_argument("model")
    p.add_argument("trace")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("speedrun", help="minimum-cost path to a target set")
    p.add_argument("model")
    p.add_argument("--to", action="append", required=True, help="target state or label (repeatable)")
    p.add_argument("--avoid", action="append", help="forbidden state or label (repeatable)")
    p.add_argument("--from", dest="from_", action="append", help="source state or label (default: initial set)")
    p.add_argument("--kinds", help="restrict to operation kinds, e.g. 'player'")
    p.set_defaults(func=cmd_speedrun)

    p = sub.add_parser("achieve", help="check a trace against an achievement spec")
    p.add_argument("model")
    p.add_argument("--trace", required=True)
    p.add_argument("--spec", required=True)
    p.set_defaults(func=cmd_achieve)

    p = sub.add_parser("qct", help="run the quantum coin toss")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--table", action="store_true", help="print the quantum/classical correspondence")
    p.set_defaults(func=cmd_qct)
    return parser


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except _Fail as e:
        print(str(e), file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
