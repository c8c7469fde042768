import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssikit import (
    AchievementSpec,
    CapExceeded,
    EvolutionPath,
    InapplicableAt,
    PathStep,
    StateQuery,
    StateSpace,
    UniformRandomPolicy,
    UnknownId,
    check_achievement,
    enumerate_paths,
    path_is_valid,
    record_path,
    simulate,
    speedrun,
    validate,
)

from _models import brute_min_cost, random_model, restrict, warshall_reachable


def hand_path(space, start, *pairs):
    return EvolutionPath(start, tuple(PathStep(op, s) for op, s in pairs), None, space)


CONFORMING = [
    ("advance", "warrior-5m"),
    ("fire-rifle", "warrior-5m"),
    ("advance", "warrior-1m"),
    ("fire-shotgun", "warrior-1m"),
    ("fire-shotgun", "warrior-dead"),
]
MUTATIONS = {
    "wrong-op": CONFORMING[:4] + [("fire-rifle", "warrior-dead")],
    "missed-finish": CONFORMING[:4] + [("fire-shotgun", "warrior-1m")],
    "never-close": [
        ("advance", "warrior-5m"),
        ("fire-rifle", "warrior-5m"),
        ("fire-shotgun", "warrior-5m"),
        ("fire-shotgun", "warrior-5m"),
        ("fire-shotgun", "warrior-dead"),
    ],
}


def brute_witness(space, path, spec):
    """Scan every (i, j) pair; first qualifying in (start, length) order."""
    states = [space.model.state(s) for s in path.states]
    hits = []
    for i, j in itertools.combinations(range(len(states)), 2):
        if (
            spec.initial_pred(states[i])
            and spec.finish_pred(states[j])
            and all(op in spec.allowed_ops for op in path.ops[i:j])
        ):
            hits.append((i, j - i))
    return min(hits) if hits else None


def test_record_path(coin):
    p = record_path(coin, "Tail", ["Toss", "Drop"], seed=11)
    assert p.states[:2] == ("Tail", "Rolling")
    assert p.states[2] in {"Head", "Tail", "Standing"}
    assert p.seed == 11 and path_is_valid(coin, p)
    assert record_path(coin, "Tail", ["Toss", "Drop"], seed=11) == p


def test_record_empty_script(coin):
    p = record_path(coin, "Tail", [], seed=0)
    assert p.states == ("Tail",) and len(p) == 0


def test_record_inapplicable(coin):
    with pytest.raises(InapplicableAt) as e:
        record_path(coin, "Tail", ["Drop"], seed=0)
    assert (e.value.index, e.value.state, e.value.op) == (0, "Tail", "Drop")
    with pytest.raises(InapplicableAt) as e:
        record_path(coin, "Tail", ["Toss", "Toss"], seed=0)
    assert e.value.index == 1 and e.value.path.states == ("Tail", "Rolling")


def test_achievement_conforming(warrior, eat_this):
    path = hand_path(warrior, "warrior-far", *CONFORMING)
    assert path_is_valid(warrior, path)
    achieved, witness = check_achievement(path, eat_this)
    assert achieved
    assert witness.states == ("warrior-1m", "warrior-1m", "warrior-dead")
    assert witness.ops == ("fire-shotgun", "fire-shotgun")
    assert brute_witness(warrior, path, eat_this) == (3, 2)


@pytest.mark.parametrize("name", sorted(MUTATIONS))
def test_achievement_mutations(warrior, eat_this, name):
    path = hand_path(warrior, "warrior-far", *MUTATIONS[name])
    assert path_is_valid(warrior, path)
    assert check_achievement(path, eat_this) == (False, None)
    assert brute_witness(warrior, path, eat_this) is None


def test_achievement_by_ids_without_space():
    spec = AchievementSpec("x", StateQuery({"a"}), {"go"}, StateQuery({"c"}))
    path = EvolutionPath("a", (PathStep("go", "b"), PathStep("go", "c")))
    achieved, w = check_achievement(path, spec)
    assert achieved and w.states == ("a", "b", "c")


def test_achievement_needs_an_allowed_op():
    with pytest.raises(ValueError):
        AchievementSpec("x", StateQuery({"a"}), set(), StateQuery({"b"}))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 10))
def test_witness_minimal_and_monotone(warrior, eat_this, seed, extra):
    trace = simulate(warrior, "warrior-far", UniformRandomPolicy(), 10, seed)
    path = hand_path(warrior, trace.start, *[(s.op, s.outcome) for s in trace.steps])
    achieved, witness = check_achievement(path, eat_this)
    expected = brute_witness(warrior, path, eat_this)
    if expected is None:
        assert not achieved
    else:
        i, n = expected
        assert achieved and witness == path.subpath(i, i + n)
        longer = path.extend(*[PathStep("retreat", "warrior-5m")] * (extra > 5))
        assert check_achievement(longer, eat_this) == (True, witness)


def test_speedrun_coin(coin):
    r = speedrun(coin, {"Tail"}, {"Head"})
    assert r.found and r.total_cost == 2
    assert r.path.ops == ("Toss", "Drop") and r.path.states == ("Tail", "Rolling", "Head")


def test_speedrun_coin_brute_force(coin):
    # every path of at most 3 steps, listed directly from the transition table
    costs = []
    frontier = [("Tail", 0)]
    for _ in range(3):
        nxt = []
        for s, c in frontier:
            for op in ("Drop", "Toss"):
                dist = coin.distribution(s, op) or {}
                for t in dist:
                    nxt.append((t, c + 1))
                    if t == "Head":
                        costs.append(c + 1)
        frontier = nxt
    assert min(costs) == 2


def test_speedrun_trivial_and_blocked(coin):
    r = speedrun(coin, {"Tail"}, {"Tail"})
    assert r.found and r.total_cost == 0 and r.path.ops == ()
    r = speedrun(coin, {"Tail"}, {"Head"}, forbidden={"Rolling"})
    assert not r.found and r.path is None and r.visited_count >= 1


def test_speedrun_bad_arguments(coin):
    with pytest.raises(ValueError):
        speedrun(coin, {"Tail"}, {"Head"}, forbidden={"Tail"})
    with pytest.raises(UnknownId):
        speedrun(coin, {"Tail"}, {"Nowhere"})


def test_one_life_run(warrior):
    r = speedrun(warrior, warrior.initial, {"warrior-dead"}, forbidden={"player-dead"})
    assert r.path.ops == ("advance", "fire-rifle") and r.total_cost == 2
    r = speedrun(warrior, {"warrior-1m"}, {"player-dead"}, kinds={"player"})
    assert not r.found
    r = speedrun(warrior, {"warrior-1m"}, {"player-dead"}, kinds={"game"})
    assert r.path.ops == ("advance",)


def test_speedrun_weighted_costs():
    from ssikit import build_model

    m = build_model(
        ["a", "b", "c", "d"],
        [("slow", "player", 5), ("hop", "player", 1)],
        [("a", "slow", "d"), ("a", "hop", "b"), ("b", "hop", "c"), ("c", "hop", "d")],
        ["a"],
    )
    r = speedrun(validate(m), {"a"}, {"d"})
    assert r.total_cost == 3 and r.path.ops == ("hop", "hop", "hop")


def test_speedrun_lexicographic_across_outcomes():
    # 'a' fans out to x and y; only y continues with the smaller op 'b'
    from ssikit import build_model

    m = build_model(
        ["s", "x", "y", "t"],
        ["a", "b", "z"],
        [("s", "a", {"x": Fraction(1, 2), "y": Fraction(1, 2)}), ("x", "z", "t"), ("y", "b", "t")],
        ["s"],
    )
    r = speedrun(validate(m), {"s"}, {"t"})
    assert r.path.ops == ("a", "b") and r.path.states == ("s", "y", "t")


def test_enumerate_paths(coin):
    paths = list(enumerate_paths(coin, {"Tail"}, 2))
    assert [p.states for p in paths] == [
        ("Tail",),
        ("Tail", "Rolling"),
        ("Tail", "Rolling", "Head"),
        ("Tail", "Rolling", "Standing"),
        ("Tail", "Rolling", "Tail"),
    ]
    assert [p.states for p in enumerate_paths(coin, {"Tail", "Head"}, 0)] == [("Head",), ("Tail",)]
    with pytest.raises(CapExceeded):
        list(enumerate_paths(coin, {"Tail"}, 13))
    assert len(list(enumerate_paths(coin, {"Tail"}, 13, cap=13))) > 0


def _random_space(seed, costs):
    rng = np.random.default_rng(seed)
    m = random_model(rng, costs=costs)
    space = validate(restrict(m, warshall_reachable(m)))
    assert isinstance(space, StateSpace)
    return space, rng


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32), st.booleans())
def test_speedrun_matches_enumeration(seed, costs):
    space, rng = _random_space(seed, costs)
    ids = space.state_ids
    target = {ids[int(rng.integers(len(ids)))]}
    forbidden = {s for s in ids if rng.random() < 0.2} - set(space.initial)
    r = speedrun(space, space.initial, target, forbidden)

    assert (r.total_cost if r.found else None) == brute_min_cost(space, space.initial, target - forbidden, forbidden)
    hits = [
        (p.cost(space), p.ops, p.states)
        for p in enumerate_paths(space, space.initial, len(ids) - 1, forbidden=forbidden)
        if p.states[-1] in target - forbidden
    ]
    if not r.found:
        assert hits == []
        return
    best = min(hits)
    assert (r.total_cost, r.path.ops, r.path.states) == best
    assert not set(r.path.states) & forbidden
    assert path_is_valid(space, r.path)
