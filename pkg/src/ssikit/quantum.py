"""Single-qubit statevector simulation of the quantum coin toss.

The circuit is: prepare |0>, apply the Hadamard gate, measure.  Measuring
+1 leaves the qubit in |0> (mapped to Head), -1 leaves it in |1> (Tail).
"""
from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .core import make_rng

TOL = 1e-9


@dataclass(frozen=True)
class Ket:
    c0: complex
    c1: complex

    def __post_init__(self):
        object.__setattr__(self, "c0", complex(self.c0))
        object.__setattr__(self, "c1", complex(self.c1))
        if abs(self.norm() - 1.0) > TOL:
            raise ValueError(f"ket is not normalized (norm {self.norm():.12g})")

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.c0, self.c1], dtype=complex)

    def norm(self) -> float:
        return sqrt(abs(self.c0) ** 2 + abs(self.c1) ** 2)

    def probabilities(self) -> tuple:
        return abs(self.c0) ** 2, abs(self.c1) ** 2

    def isclose(self, other: "Ket", tol: float = TOL) -> bool:
        return abs(self.c0 - other.c0) <= tol and abs(self.c1 - other.c1) <= tol


class NonUnitaryGate(ValueError):
    pass


class Gate:
    """A 2x2 unitary; unitarity is checked on construction."""

    __slots__ = ("name", "matrix")

    def __init__(self, matrix, name: str = ""):
        m = np.array(matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"gate must be 2x2, got {m.shape}")
        if not np.allclose(m @ m.conj().T, np.eye(2), rtol=0, atol=TOL):
            raise NonUnitaryGate(f"gate {name or m.tolist()} is not unitary")
        m.setflags(write=False)
        self.matrix = m
        self.name = name

    def __repr__(self):
        return f"Gate({self.name or self.matrix.tolist()})"

    def __matmul__(self, other: "Gate") -> "Gate":
        return Gate(self.matrix @ other.matrix, f"{self.name}{other.name}")

    def dagger(self) -> "Gate":
        return Gate(self.matrix.conj().T, f"{self.name}†")


X = Gate([[0, 1], [1, 0]], "X")
H = Gate(np.array([[1, 1], [1, -1]]) / sqrt(2), "H")
I2 = Gate(np.eye(2), "I")


def ket_basis(label) -> Ket:
    if label in ("zero", 0, "0"):
        return Ket(1, 0)
    if label in ("one", 1, "1"):
        return Ket(0, 1)
    raise ValueError(f"unknown basis label {label!r}")


def apply_gate(g: Gate, k: Ket) -> Ket:
    # No renormalisation: a unitary preserves the norm and Ket re-checks it.
    c0, c1 = g.matrix @ k.vector
    return Ket(c0, c1)


@dataclass(frozen=True)
class MeasurementRecord:
    outcome_sign: int
    collapsed: Ket
    drawn_uniform: float


def measure(k: Ket, rng: np.random.Generator) -> MeasurementRecord:
    """Born-rule measurement: |0> (sign +1) iff the uniform draw is below |c0|^2."""
    u = float(rng.random())
    if u < abs(k.c0) ** 2:
        return MeasurementRecord(+1, ket_basis("zero"), u)
    return MeasurementRecord(-1, ket_basis("one"), u)


@dataclass(frozen=True)
class QctTrialTrace:
    initial: Ket
    post_toss: Ket
    measurement: MeasurementRecord
    coin_face: str


def run_qct(trials: int, seed: int):
    """Run the coin-toss circuit ``trials`` times from one seeded stream.

    Returns ``({"Head": f, "Tail": f}, [QctTrialTrace, ...])``.
    """
    if not isinstance(trials, (int, np.integer)) or trials < 1:
        raise ValueError(f"trials must be a positive integer, got {trials!r}")
    rng = make_rng(seed)
    traces = []
    heads = 0
    for _ in range(int(trials)):
        start = ket_basis("zero")
        tossed = apply_gate(H, start)
        m = measure(tossed, rng)
        face = "Head" if m.outcome_sign == +1 else "Tail"
        heads += face == "Head"
        traces.append(QctTrialTrace(start, tossed, m, face))
    freq = {"Head": heads / trials, "Tail": (trials - heads) / trials}
    return freq, traces


def run_qct_batched(trials: int, seed: int, batches: int):
    """Split ``trials`` over independently seeded sub-streams ``(seed, batch)``.

    Each batch is reproducible on its own, so batches may run in parallel.
    """
    sizes = [trials // batches + (i < trials % batches) for i in range(batches)]
    seeds = np.random.SeedSequence(seed).spawn(batches)
    heads = 0
    traces = []
    for size, ss in zip(sizes, seeds):
        if not size:
            continue
        _, tr = run_qct(size, int(ss.generate_state(1, np.uint64)[0]))
        heads += sum(t.coin_face == "Head" for t in tr)
        traces.extend(tr)
    return {"Head": heads / trials, "Tail": (trials - heads) / trials}, traces


@dataclass(frozen=True)
class CorrespondenceRow:
    step: str
    quantum: str
    classical: str


CORRESPONDENCE = (
    CorrespondenceRow("Initial State", "|0⟩", "Head"),
    CorrespondenceRow("Action", "H", "Toss"),
    CorrespondenceRow("Intermediate State", "(1/√2)(|0⟩+|1⟩)", "Rolling"),
    CorrespondenceRow("Process", "Measure", "Drop"),
    CorrespondenceRow("Final State", "|1⟩", "Tail"),
)


def correspondence_table() -> tuple:
    return CORRESPONDENCE


def classical_face(k: Ket) -> str:
    if k.isclose(ket_basis("zero")):
        return "Head"
    if k.isclose(ket_basis("one")):
        return "Tail"
    if k.isclose(apply_gate(H, ket_basis("zero"))):
        return "Rolling"
    raise ValueError(f"ket {k} has no classical counterpart")


def trace_to_coin_steps(trace: QctTrialTrace):
    """Map a trial through the correspondence table: ``(start, [(op, state), ...])``."""
    ops = {row.quantum: row.classical for row in CORRESPONDENCE}
    start = classical_face(trace.initial)
    return start, [
        (ops["H"], classical_face(trace.post_toss)),
        (ops["Measure"], classical_face(trace.measurement.collapsed)),
    ]
