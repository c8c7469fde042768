"""Game models, validation into state spaces, and single-step evolution.

A :class:`GameModel` is a declared (unchecked) collection of states,
operations and stochastic transitions.  :func:`validate` checks it for
operation closure and reachability from the initial set and returns either
an immutable :class:`StateSpace` or a :class:`ValidationReport` listing every
violation.

All iteration is in lexicographic id order so reports, traversals and
sampled outcomes are stable across runs.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    DanglingReference,
    DuplicateId,
    EmptyInitialSet,
    InapplicableOperation,
    ModelError,
    ModelTooLarge,
    UnknownId,
)
from .kernels import bfs_distances, build_csr

IDENTITY_ID = "identity"
DEFAULT_MAX_EDGES = 10_000_000


class OpKind(str, Enum):
    PLAYER = "player"
    GAME = "game"
    IDENTITY = "identity"


@dataclass(frozen=True)
class State:
    id: str
    labels: frozenset = frozenset()

    def __post_init__(self):
        if not self.id:
            raise ModelError("state id must be non-empty")
        object.__setattr__(self, "labels", frozenset(self.labels))


@dataclass(frozen=True)
class OperationDef:
    id: str
    kind: OpKind = OpKind.PLAYER
    cost: Fraction = Fraction(1)

    def __post_init__(self):
        if not self.id:
            raise ModelError("operation id must be non-empty")
        object.__setattr__(self, "kind", OpKind(self.kind))
        cost = Fraction(self.cost)
        if cost < 0:
            raise ModelError(f"operation {self.id!r} has negative cost {cost}")
        if self.kind is OpKind.IDENTITY and cost != 0:
            raise ModelError("the identity operation must have cost 0")
        object.__setattr__(self, "cost", cost)


@dataclass(frozen=True)
class Transition:
    """Applying ``op`` in state ``source`` leads to each outcome with its probability."""

    source: str
    op: str
    outcomes: tuple  # ((target, Fraction), ...) sorted by target

    def __post_init__(self):
        if not self.outcomes:
            raise ModelError(f"transition ({self.source}, {self.op}) has no outcomes")
        outs = tuple(sorted((str(t), Fraction(p)) for t, p in self.outcomes))
        targets = [t for t, _ in outs]
        if len(set(targets)) != len(targets):
            dup = next(t for t in targets if targets.count(t) > 1)
            raise DuplicateId(f"{self.source} {self.op} -> {dup}")
        object.__setattr__(self, "outcomes", outs)

    @property
    def total(self) -> Fraction:
        return sum((p for _, p in self.outcomes), Fraction(0))


@dataclass(frozen=True)
class GameModel:
    """Declared model; build it with :func:`build_model`."""

    states: tuple
    operations: tuple
    transitions: tuple
    initial: tuple
    final: tuple
    # (source, op) -> line number in the document the model was parsed from
    source_lines: Mapping = field(default_factory=dict, compare=False, repr=False)

    @cached_property
    def state_ids(self) -> tuple:
        return tuple(s.id for s in self.states)

    @cached_property
    def operation_ids(self) -> tuple:
        return tuple(o.id for o in self.operations)

    @cached_property
    def _state_index(self) -> dict:
        return {s.id: s for s in self.states}

    @property
    def identity_op(self) -> OperationDef:
        return next(o for o in self.operations if o.kind is OpKind.IDENTITY)

    def state(self, sid: str) -> State:
        try:
            return self._state_index[sid]
        except KeyError:
            raise UnknownId(sid) from None

    def with_label(self, label: str) -> tuple:
        return tuple(s.id for s in self.states if label in s.labels)

    def edge_count(self) -> int:
        return sum(len(t.outcomes) for t in self.transitions)


def _coerce_state(s) -> State:
    if isinstance(s, State):
        return s
    if isinstance(s, str):
        return State(s)
    sid, labels = s
    return State(sid, frozenset(labels))


def _coerce_op(o) -> OperationDef:
    if isinstance(o, OperationDef):
        return o
    if isinstance(o, str):
        return OperationDef(o)
    return OperationDef(*o)


def _coerce_transition(t) -> Transition:
    if isinstance(t, Transition):
        return t
    source, op, outs = t
    if isinstance(outs, Mapping):
        outs = outs.items()
    elif isinstance(outs, str):
        outs = [(outs, 1)]
    return Transition(source, op, tuple(outs))


def build_model(
    states: Iterable,
    operations: Iterable,
    transitions: Iterable,
    initial: Iterable[str],
    final: Iterable[str] = (),
    *,
    allow_undeclared_targets: bool = False,
    source_lines: Mapping | None = None,
) -> GameModel:
    """Assemble a :class:`GameModel`.

    States may be given as ``State`` objects, bare ids, or ``(id, labels)``
    pairs; operations as ``OperationDef`` objects, ids, or ``(id, kind, cost)``
    tuples; transitions as ``Transition`` objects or ``(source, op, outcomes)``
    where ``outcomes`` is a mapping ``{target: prob}``, a list of pairs, or a
    single target id (probability 1).

    The identity operation is added if no identity-kind operation is declared,
    and an identity self-loop is synthesized for every state.

    Outcome targets that are not declared states raise ``DanglingReference``
    unless ``allow_undeclared_targets`` is set, in which case they are kept so
    that :func:`validate` can report them as closure violations.
    """
    states = [_coerce_state(s) for s in states]
    ops = [_coerce_op(o) for o in operations]
    trans = [_coerce_transition(t) for t in transitions]

    state_ids = set()
    for s in states:
        if s.id in state_ids:
            raise DuplicateId(s.id)
        state_ids.add(s.id)
    op_ids = set()
    for o in ops:
        if o.id in op_ids:
            raise DuplicateId(o.id)
        op_ids.add(o.id)

    identities = [o for o in ops if o.kind is OpKind.IDENTITY]
    if len(identities) > 1:
        raise ModelError(f"more than one identity operation: {sorted(o.id for o in identities)}")
    if not identities:
        if IDENTITY_ID in op_ids:
            raise ModelError(f"operation id {IDENTITY_ID!r} is reserved for the identity operation")
        identity = OperationDef(IDENTITY_ID, OpKind.IDENTITY, Fraction(0))
        ops.append(identity)
    else:
        identity = identities[0]

    seen_pairs = set()
    for t in trans:
        if t.source not in state_ids:
            raise DanglingReference(t.source, f"transition ({t.source}, {t.op})")
        if t.op not in op_ids and t.op != identity.id:
            raise DanglingReference(t.op, f"transition ({t.source}, {t.op})")
        if (t.source, t.op) in seen_pairs:
            raise DuplicateId(f"{t.source} {t.op}")
        seen_pairs.add((t.source, t.op))
        if t.op == identity.id and t.outcomes != ((t.source, Fraction(1)),):
            raise ModelError(f"identity transition from {t.source!r} must be a certain self-loop")
        if not allow_undeclared_targets:
            for target, _ in t.outcomes:
                if target not in state_ids:
                    raise DanglingReference(target, f"transition ({t.source}, {t.op})")

    for s in states:
        if (s.id, identity.id) not in seen_pairs:
            trans.append(Transition(s.id, identity.id, ((s.id, Fraction(1)),)))

    initial = sorted(set(initial))
    final = sorted(set(final))
    if not initial:
        raise EmptyInitialSet()
    for sid in itertools.chain(initial, final):
        if sid not in state_ids:
            raise DanglingReference(sid, "initial/final set")

    return GameModel(
        states=tuple(sorted(states, key=lambda s: s.id)),
        operations=tuple(sorted(ops, key=lambda o: o.id)),
        transitions=tuple(sorted(trans, key=lambda t: (t.source, t.op))),
        initial=tuple(initial),
        final=tuple(final),
        source_lines=MappingProxyType(dict(source_lines or {})),
    )


def ground_operations(name: str, kind=OpKind.PLAYER, cost=1, **domains) -> list:
    """Flatten a parameterized operation into one ``OperationDef`` per binding.

    >>> [o.id for o in ground_operations("place", x=[0, 1], y=[2])]
    ['place[x=0,y=2]', 'place[x=1,y=2]']
    """
    keys = sorted(domains)
    out = []
    for values in itertools.product(*(domains[k] for k in keys)):
        binding = ",".join(f"{k}={v}" for k, v in zip(keys, values))
        out.append(OperationDef(f"{name}[{binding}]", kind, cost))
    return out


@dataclass(frozen=True)
class ValidationReport:
    closure_violations: tuple = ()  # (source, op, detail)
    unreachable_states: tuple = ()
    probability_errors: tuple = ()  # (source, op, sum-or-detail)
    reachable_states: tuple = field(default=(), compare=False)

    @property
    def ok(self) -> bool:
        return not (self.closure_violations or self.unreachable_states or self.probability_errors)


def max_edges() -> int:
    raw = os.environ.get("SSI_MAX_EDGES")
    return int(raw) if raw else DEFAULT_MAX_EDGES


def _check_scale(model: GameModel, cap: int | None) -> None:
    cap = max_edges() if cap is None else cap
    edges = model.edge_count()
    if edges > cap:
        raise ModelTooLarge(edges, cap)


def _possibilistic_csr(model: GameModel, kinds=None):
    """CSR over state indices with one edge per prob>0 outcome, identity excluded."""
    index = {sid: i for i, sid in enumerate(model.state_ids)}
    op_kind = {o.id: o.kind for o in model.operations}
    src, dst = [], []
    for t in model.transitions:
        kind = op_kind[t.op]
        if kind is OpKind.IDENTITY or (kinds is not None and kind not in kinds):
            continue
        for target, p in t.outcomes:
            if p > 0 and target in index:
                src.append(index[t.source])
                dst.append(index[target])
    return build_csr(len(index), src, dst)


def reachable_states(model: GameModel, sources: Iterable[str] | None = None) -> tuple:
    """Ids reachable from ``sources`` (default: the initial set) over non-identity edges."""
    ids = model.state_ids
    index = {sid: i for i, sid in enumerate(ids)}
    sources = model.initial if sources is None else sources
    indptr, indices = _possibilistic_csr(model)
    dist = bfs_distances(indptr, indices, np.array([index[s] for s in sources], dtype=np.int64))
    return tuple(sid for sid, d in zip(ids, dist) if d >= 0)


def validate(model: GameModel, *, max_edges: int | None = None):
    """Return a :class:`StateSpace` if the model is valid, else a :class:`ValidationReport`.

    Closure is checked per (state, operation) pair, which by induction covers
    every applicable operation sequence.  Raises ``ModelTooLarge`` above the
    edge cap.
    """
    _check_scale(model, max_edges)
    declared = set(model.state_ids)
    closure, prob_errors = [], []
    for t in model.transitions:
        for target, _ in t.outcomes:
            if target not in declared:
                closure.append((t.source, t.op, f"undeclared state {target!r}"))
        bad = [(target, p) for target, p in t.outcomes if not 0 < p <= 1]
        if bad:
            prob_errors.append((t.source, t.op, f"probability out of (0,1] for {bad[0][0]!r}: {bad[0][1]}"))
        elif t.total != 1:
            prob_errors.append((t.source, t.op, t.total))
    reached = reachable_states(model)
    reached_set = set(reached)
    unreachable = tuple(sid for sid in model.state_ids if sid not in reached_set)
    report = ValidationReport(tuple(closure), unreachable, tuple(prob_errors), reached)
    if not report.ok:
        return report
    return StateSpace(model)


class StateSpace:
    """A validated model.  Immutable; safe to share between threads."""

    __slots__ = ("_model", "_adj", "_ops", "_kind", "_csr_cache", "certificate")

    def __init__(self, model: GameModel):
        # Only validate() should call this; it does not re-check the axioms.
        object.__setattr__(self, "_model", model)
        adj = {}
        for t in model.transitions:
            adj[(t.source, t.op)] = MappingProxyType(dict(t.outcomes))
        object.__setattr__(self, "_adj", MappingProxyType(adj))
        ops_by_state = {sid: [] for sid in model.state_ids}
        for source, op in sorted(adj):
            ops_by_state[source].append(op)
        object.__setattr__(self, "_ops", MappingProxyType({k: tuple(v) for k, v in ops_by_state.items()}))
        object.__setattr__(self, "_kind", MappingProxyType({o.id: o for o in model.operations}))
        object.__setattr__(self, "_csr_cache", {})
        object.__setattr__(self, "certificate", MappingProxyType({"closure": True, "reachability": True}))

    def __setattr__(self, name, value):
        raise AttributeError("StateSpace is immutable")

    def __repr__(self):
        m = self._model
        return f"StateSpace(states={len(m.states)}, operations={len(m.operations)}, transitions={len(m.transitions)})"

    @property
    def model(self) -> GameModel:
        return self._model

    @property
    def state_ids(self) -> tuple:
        return self._model.state_ids

    @property
    def operation_ids(self) -> tuple:
        return self._model.operation_ids

    @property
    def initial(self) -> tuple:
        return self._model.initial

    @property
    def final(self) -> tuple:
        return self._model.final

    @property
    def identity(self) -> str:
        return self._model.identity_op.id

    def operation(self, op: str) -> OperationDef:
        try:
            return self._kind[op]
        except KeyError:
            raise UnknownId(op) from None

    def has_state(self, sid: str) -> bool:
        return (sid, self.identity) in self._adj

    def applicable(self, sid: str, include_identity: bool = False, kinds=None) -> tuple:
        """Operation ids with a declared transition from ``sid``, sorted."""
        if sid not in self._ops:
            raise UnknownId(sid)
        ops = self._ops[sid]
        if not include_identity:
            ops = tuple(o for o in ops if o != self.identity)
        if kinds is not None:
            ops = tuple(o for o in ops if self._kind[o].kind in kinds)
        return ops

    def distribution(self, sid: str, op: str):
        return self._adj.get((sid, op))

    def csr(self, kinds=None):
        """Cached ``(indptr, indices)`` of the possibilistic graph, identity excluded."""
        key = None if kinds is None else frozenset(OpKind(k) for k in kinds)
        if key not in self._csr_cache:
            self._csr_cache[key] = _possibilistic_csr(self._model, key)
        return self._csr_cache[key]


def outcomes(space: StateSpace, s: str, o: str):
    """Outcome distribution ``{state: Fraction}`` of applying ``o`` in ``s``.

    Returns ``None`` when no transition is declared for the pair (the
    operation is inapplicable there).  The identity always yields ``{s: 1}``.
    """
    if not space.has_state(s):
        raise UnknownId(s)
    space.operation(o)
    dist = space.distribution(s, o)
    return None if dist is None else dict(dist)


@dataclass(frozen=True)
class Draw:
    """Provenance of one sampled step: the uniform draw and the chosen outcome's probability."""

    uniform: float
    prob: Fraction


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """PCG64 generator for ``seed``.  ``stream > 0`` gives an independent sub-stream."""
    if stream == 0:
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def sample_outcome(dist: Mapping, u: float) -> str:
    """Pick the outcome whose cumulative-probability bucket contains ``u`` (ids sorted)."""
    exact = Fraction(u)
    acc = Fraction(0)
    last = None
    for target in sorted(dist):
        acc += dist[target]
        last = target
        if exact < acc:
            return target
    return last


def step(space: StateSpace, s: str, o: str, rng: np.random.Generator):
    """Apply ``o`` in ``s``; returns ``(next_state, Draw)``.

    Exactly one uniform draw is consumed from ``rng`` per call, whatever the
    number of outcomes, so a replay only needs the seed and operation list.
    """
    dist = outcomes(space, s, o)
    if dist is None:
        raise InapplicableOperation(s, o)
    u = float(rng.random())
    target = sample_outcome(dist, u)
    return target, Draw(u, dist[target])
