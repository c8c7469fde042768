"""Evolution paths and the queries asked of them.

* :func:`record_path` plays a fixed operation script through :func:`ssikit.core.step`.
* :func:`check_achievement` looks for the earliest, shortest contiguous
  subpath that starts in an achievement's initial set, uses only its allowed
  operations and ends in its finish set.
* :func:`speedrun` finds a minimum-cost potential path between two state
  sets, optionally avoiding a forbidden region (one-life runs).
* :func:`enumerate_paths` lists every bounded path; it is the brute-force
  oracle for the other two.

Searches run over the possibilistic graph: every outcome with nonzero
probability is an edge, and identity self-loops are ignored.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator

import numpy as np

from .core import Draw, OpKind, State, StateSpace, make_rng, step
from .errors import CapExceeded, InapplicableAt, InapplicableOperation, UnknownId
from .kernels import bfs_distances, reverse_csr

DEFAULT_ENUMERATION_CAP = 12


@dataclass(frozen=True)
class PathStep:
    op: str
    outcome: str
    draw: Draw | None = None


@dataclass(frozen=True)
class EvolutionPath:
    start: str
    steps: tuple = ()
    seed: int | None = None
    space: StateSpace | None = field(default=None, compare=False, repr=False)

    @property
    def states(self) -> tuple:
        return (self.start,) + tuple(s.outcome for s in self.steps)

    @property
    def ops(self) -> tuple:
        return tuple(s.op for s in self.steps)

    def __len__(self):
        return len(self.steps)

    def subpath(self, i: int, j: int) -> "EvolutionPath":
        """States ``i..j`` inclusive (``j - i`` steps)."""
        return EvolutionPath(self.states[i], self.steps[i:j], None, self.space)

    def extend(self, *steps: PathStep) -> "EvolutionPath":
        return EvolutionPath(self.start, self.steps + steps, self.seed, self.space)

    def cost(self, space: StateSpace | None = None) -> Fraction:
        space = space or self.space
        return sum((space.operation(op).cost for op in self.ops), Fraction(0))


def path_is_valid(space: StateSpace, path: EvolutionPath) -> bool:
    """Every step is a declared transition whose outcome has probability > 0."""
    if not space.has_state(path.start):
        return False
    cur = path.start
    for st in path.steps:
        dist = space.distribution(cur, st.op)
        if dist is None or dist.get(st.outcome, 0) <= 0:
            return False
        cur = st.outcome
    return True


def record_path(space: StateSpace, start: str, script: Iterable[str], seed: int) -> EvolutionPath:
    """Apply ``script`` from ``start``, sampling outcomes from the seed's outcome stream.

    Raises ``InapplicableAt`` at the first operation that cannot be applied;
    the exception's ``path`` holds the prefix recorded so far.
    """
    if not space.has_state(start):
        raise UnknownId(start)
    rng = make_rng(seed)
    path = EvolutionPath(start, (), seed, space)
    cur = start
    for i, op in enumerate(script):
        try:
            nxt, draw = step(space, cur, op, rng)
        except InapplicableOperation:
            raise InapplicableAt(i, cur, op, path) from None
        path = path.extend(PathStep(op, nxt, draw))
        cur = nxt
    return path


@dataclass(frozen=True)
class StateQuery:
    """Matches a state by id membership or by carrying any of the given labels."""

    ids: frozenset = frozenset()
    labels: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "ids", frozenset(self.ids))
        object.__setattr__(self, "labels", frozenset(self.labels))

    def __call__(self, state: State) -> bool:
        return state.id in self.ids or bool(self.labels & state.labels)

    def resolve(self, space: StateSpace) -> tuple:
        return tuple(sid for sid in space.state_ids if self(space.model.state(sid)))


@dataclass(frozen=True)
class AchievementSpec:
    id: str
    initial_pred: Callable[[State], bool]
    allowed_ops: frozenset
    finish_pred: Callable[[State], bool]

    def __post_init__(self):
        object.__setattr__(self, "allowed_ops", frozenset(self.allowed_ops))
        if not self.allowed_ops:
            raise ValueError(f"achievement {self.id!r} needs at least one allowed operation")


def _state_lookup(path: EvolutionPath, space: StateSpace | None):
    space = space or path.space
    if space is None:
        return State
    return space.model.state


def check_achievement(path: EvolutionPath, spec: AchievementSpec, space: StateSpace | None = None):
    """Return ``(achieved, witness)``.

    The witness is the qualifying contiguous subpath with the earliest start,
    then the fewest steps.  A subpath needs at least one step.  Without a
    space (neither passed nor attached to the path) states carry no labels.
    """
    lookup = _state_lookup(path, space)
    states = [lookup(s) for s in path.states]
    ops = path.ops
    for i, first in enumerate(states):
        if not spec.initial_pred(first):
            continue
        for j in range(i + 1, len(states)):
            if ops[j - 1] not in spec.allowed_ops:
                break
            if spec.finish_pred(states[j]):
                return True, path.subpath(i, j)
    return False, None


@dataclass(frozen=True)
class PathQueryResult:
    found: bool
    path: EvolutionPath | None
    total_cost: Fraction | None
    visited_count: int


def _check_ids(space: StateSpace, ids: Iterable[str]) -> frozenset:
    ids = frozenset(ids)
    for sid in ids:
        if not space.has_state(sid):
            raise UnknownId(sid)
    return ids


def _costs_to_target(space, index, targets, blocked, kinds):
    """Least cost from each state to the target set; ``None`` where unreachable."""
    ids = space.state_ids
    ops = {
        o.id: o.cost
        for o in space.model.operations
        if o.kind is not OpKind.IDENTITY and (kinds is None or o.kind in kinds)
    }
    distinct = set(ops.values())
    if len(distinct) <= 1 and 0 not in distinct:
        unit = distinct.pop() if distinct else Fraction(1)
        indptr, indices = space.csr(kinds)
        rptr, rind = reverse_csr(indptr, indices)
        mask = np.zeros(len(ids), dtype=np.bool_)
        mask[[index[s] for s in blocked]] = True
        dist = bfs_distances(rptr, rind, np.array(sorted(index[t] for t in targets), dtype=np.int64), mask)
        return [None if d < 0 else unit * int(d) for d in dist]

    # general non-negative costs: Dijkstra on the reversed graph
    preds = {sid: [] for sid in ids}
    for sid in ids:
        if sid in blocked:
            continue
        for op in space.applicable(sid):
            if op not in ops:
                continue
            for target, p in space.distribution(sid, op).items():
                if p > 0 and target not in blocked:
                    preds[target].append((ops[op], sid))
    best = [None] * len(ids)
    heap = [(Fraction(0), t) for t in sorted(targets)]
    while heap:
        c, sid = heapq.heappop(heap)
        if best[index[sid]] is not None:
            continue
        best[index[sid]] = c
        for w, pred in preds[sid]:
            if best[index[pred]] is None:
                heapq.heappush(heap, (c + w, pred))
    return best


def speedrun(
    space: StateSpace,
    from_set: Iterable[str],
    to_set: Iterable[str],
    forbidden: Iterable[str] | None = None,
    kinds: Iterable | None = None,
) -> PathQueryResult:
    """Minimum-cost potential path from ``from_set`` to ``to_set``.

    Never enters a ``forbidden`` state.  ``kinds`` restricts the usable
    operations (e.g. ``{"player"}``).  Among minimum-cost paths the
    lexicographically smallest operation sequence wins, then the smallest
    state sequence.  Zero-cost non-identity operations are supported, but
    then ties fall back to fewest steps before the lexicographic rule.
    """
    sources = _check_ids(space, from_set)
    targets = _check_ids(space, to_set)
    blocked = _check_ids(space, forbidden or ())
    if sources & blocked:
        raise ValueError(f"from_set and forbidden overlap: {sorted(sources & blocked)}")
    kinds = None if kinds is None else frozenset(OpKind(k) for k in kinds)
    targets = targets - blocked

    ids = space.state_ids
    index = {sid: i for i, sid in enumerate(ids)}
    if not targets:
        return PathQueryResult(False, None, None, 0)
    h = _costs_to_target(space, index, targets, blocked, kinds)
    visited = sum(c is not None for c in h)
    live = [s for s in sorted(sources) if h[index[s]] is not None]
    if not live:
        return PathQueryResult(False, None, None, visited)
    best = min(h[index[s]] for s in live)
    starts = [s for s in live if h[index[s]] == best]

    def usable(op):
        o = space.operation(op)
        return kinds is None or o.kind in kinds

    def tight(sid, op):
        # outcomes of (sid, op) lying on some minimum-cost path
        cost = space.operation(op).cost
        hs = h[index[sid]]
        return sorted(
            t
            for t, p in space.distribution(sid, op).items()
            if p > 0 and t not in blocked and h[index[t]] is not None and cost + h[index[t]] == hs
        )

    has_zero = any(
        space.operation(o).cost == 0 for o in space.operation_ids if o != space.identity and usable(o)
    )
    if has_zero:
        path = _dijkstra_path(space, starts, targets, blocked, usable)
        return PathQueryResult(True, path, best, visited)

    # Walk the tight-edge DAG one layer at a time, taking the smallest
    # operation available from any state of the current frontier.
    layers, chosen = [sorted(starts)], []
    while not targets & set(layers[-1]):
        frontier = layers[-1]
        op = min(op for s in frontier for op in space.applicable(s) if usable(op) and tight(s, op))
        nxt = sorted({t for s in frontier if space.distribution(s, op) is not None for t in tight(s, op)})
        chosen.append(op)
        layers.append(nxt)

    # Keep only states that lead to a target along the chosen ops, then pick
    # the smallest state at each layer.
    viable = [None] * len(layers)
    viable[-1] = set(layers[-1]) & targets
    for k in range(len(chosen) - 1, -1, -1):
        viable[k] = {
            s for s in layers[k]
            if space.distribution(s, chosen[k]) is not None and set(tight(s, chosen[k])) & viable[k + 1]
        }
    cur = min(viable[0])
    steps = []
    for k, op in enumerate(chosen):
        nxt = min(set(tight(cur, op)) & viable[k + 1])
        steps.append(PathStep(op, nxt))
        cur = nxt
    return PathQueryResult(True, EvolutionPath(min(viable[0]), tuple(steps), None, space), best, visited)


def _dijkstra_path(space, starts, targets, blocked, usable):
    heap = [(Fraction(0), 0, (), (s,)) for s in sorted(starts)]
    done = set()
    while heap:
        cost, n, ops, states = heapq.heappop(heap)
        cur = states[-1]
        if cur in done:
            continue
        done.add(cur)
        if cur in targets:
            steps = tuple(PathStep(o, s) for o, s in zip(ops, states[1:]))
            return EvolutionPath(states[0], steps, None, space)
        for op in space.applicable(cur):
            if not usable(op):
                continue
            w = space.operation(op).cost
            for t, p in sorted(space.distribution(cur, op).items()):
                if p > 0 and t not in blocked and t not in done:
                    heapq.heappush(heap, (cost + w, n + 1, ops + (op,), states + (t,)))
    return None


def enumerate_paths(
    space: StateSpace,
    from_set: Iterable[str],
    max_steps: int,
    *,
    cap: int = DEFAULT_ENUMERATION_CAP,
    forbidden: Iterable[str] = (),
    kinds: Iterable | None = None,
) -> Iterator[EvolutionPath]:
    """Yield every path of at most ``max_steps`` steps, prefixes first.

    Order is depth-first over sorted start states, then sorted
    ``(op, outcome)`` pairs, so the stream is deterministic.  Cycles are
    allowed; only the step bound stops them.
    """
    if max_steps > cap:
        raise CapExceeded(max_steps, cap)
    if max_steps < 0:
        raise ValueError("max_steps must be non-negative")
    blocked = _check_ids(space, forbidden)
    kinds = None if kinds is None else frozenset(OpKind(k) for k in kinds)
    starts = sorted(_check_ids(space, from_set) - blocked)

    def edges(sid):
        for op in space.applicable(sid, kinds=kinds):
            for t, p in sorted(space.distribution(sid, op).items()):
                if p > 0 and t not in blocked:
                    yield op, t

    def walk(path, cur):
        yield path
        if len(path) == max_steps:
            return
        for op, t in edges(cur):
            yield from walk(path.extend(PathStep(op, t)), t)

    for s in starts:
        yield from walk(EvolutionPath(s, (), None, space), s)
