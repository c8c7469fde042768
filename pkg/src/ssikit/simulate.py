"""Seeded simulation driven by an operation-selection policy.

Two independent streams are derived from one seed: stream 0 samples
transition outcomes (the same stream :func:`ssikit.paths.record_path`
uses), stream 1 drives the policy and the choice of start state.  A trace
can therefore be replayed from its seed and operation list alone.
"""
from __future__ import annotations

import sys
from typing import TextIO

from .core import StateSpace, make_rng, step
from .errors import InteractiveAbort, ReplayMismatch, ScriptInapplicable, UnknownId
from .formats import StepRecord, TraceDocument, model_hash
from .paths import EvolutionPath, PathStep, record_path

STOP_BUDGET = "step budget"
STOP_DEAD_END = "dead end"
STOP_FINAL = "final state"
STOP_SCRIPT_END = "script end"


class ScriptedPolicy:
    def __init__(self, ops):
        self.ops = tuple(ops)

    def check(self, space: StateSpace) -> None:
        for op in self.ops:
            space.operation(op)

    def choose(self, space, state, index, rng):
        if index >= len(self.ops):
            return None
        op = self.ops[index]
        if space.distribution(state, op) is None:
            raise ScriptInapplicable(index, state, op)
        return op

    def describe(self) -> str:
        return "scripted " + ",".join(self.ops)


class UniformRandomPolicy:
    """Uniform choice among the non-identity operations applicable in the current state."""

    def check(self, space):
        pass

    def choose(self, space, state, index, rng):
        ops = space.applicable(state)
        return ops[int(rng.integers(len(ops)))]

    def describe(self) -> str:
        return "random"


class InteractivePolicy:
    """Reads one operation id per line; unknown or inapplicable ids are re-prompted."""

    def __init__(self, stdin: TextIO | None = None, prompt: TextIO | None = None):
        self.stdin = stdin if stdin is not None else sys.stdin
        self.prompt = prompt if prompt is not None else sys.stderr

    def check(self, space):
        pass

    def choose(self, space, state, index, rng):
        options = space.applicable(state)
        while True:
            print(f"[{index}] {state}: choose one of {', '.join(options)}", file=self.prompt)
            line = self.stdin.readline()
            if not line:
                raise InteractiveAbort(f"input ended at step {index}")
            op = line.strip()
            if op in options:
                return op
            print(f"  {op!r} is not applicable here", file=self.prompt)

    def describe(self) -> str:
        return "interactive"


def simulate(space: StateSpace, start, policy, max_steps: int, seed: int) -> TraceDocument:
    """Run ``policy`` from ``start`` (a state id, or ``"uniform"`` over the initial set).

    Stops at the step budget, in a state with no applicable non-identity
    operation, on entering the final set, or when a script runs out.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    policy.check(space)
    policy_rng = make_rng(seed, stream=1)
    if start == "uniform":
        start = space.initial[int(policy_rng.integers(len(space.initial)))]
    elif not space.has_state(start):
        raise UnknownId(start)
    outcome_rng = make_rng(seed)
    final = set(space.final)

    cur, records, reason = start, [], None
    while reason is None:
        index = len(records)
        if index >= max_steps:
            reason = STOP_BUDGET
            break
        if not space.applicable(cur):
            reason = STOP_DEAD_END
            break
        op = policy.choose(space, cur, index, policy_rng)
        if op is None:
            reason = STOP_SCRIPT_END
            break
        cur, draw = step(space, cur, op, outcome_rng)
        records.append(StepRecord(index, op, cur, draw))
        if cur in final:
            reason = STOP_FINAL
    return TraceDocument(model_hash(space.model), seed, policy.describe(), start, reason, tuple(records))


def replay_trace(space: StateSpace, trace: TraceDocument) -> None:
    """Re-run the trace's operations from its seed; raise ``ReplayMismatch`` on any difference."""
    expected = model_hash(space.model)
    if trace.model_hash != expected:
        raise ReplayMismatch(f"trace was recorded against {trace.model_hash}, model is {expected}")
    path = record_path(space, trace.start, trace.ops, trace.seed)
    for rec, st in zip(trace.steps, path.steps):
        if rec.outcome != st.outcome or rec.draw != st.draw:
            raise ReplayMismatch(
                f"step {rec.index}: trace has {rec.op}->{rec.outcome} (u={rec.draw.uniform!r}), "
                f"replay gives {st.outcome} (u={st.draw.uniform!r})"
            )


def trace_to_path(space: StateSpace, trace: TraceDocument) -> EvolutionPath:
    steps = tuple(PathStep(r.op, r.outcome, r.draw) for r in trace.steps)
    return EvolutionPath(trace.start, steps, trace.seed, space)
