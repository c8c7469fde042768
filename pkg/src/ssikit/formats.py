"""Line-oriented text formats.

Model documents (``.ssi``)::

    ; comment
    [states]
    Head #landed
    Rolling
    [operations]
    Toss player 1          ; id kind cost (kind and cost optional)
    [transitions]
    Rolling Drop -> Head:1/2, Tail:1/2
    [initial]
    Tail                   ; a state id or a #label query
    [final]
    #landed

Probabilities and costs are integers or ``p/q`` rationals; decimals are
rejected.  Achievement documents (``.spec``) have ``[initial]``, ``[ops]``
and ``[finish]`` sections plus an optional ``[id]``.  Trace documents
(``.trace``) have a ``[header]`` and ``[steps]``.
"""
from __future__ import annotations

import hashlib
import os
import re
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .core import Draw, GameModel, OperationDef, OpKind, build_model
from .errors import ParseError, SSIError
from .paths import AchievementSpec, StateQuery

_ID = re.compile(r"[^\s#;\[\],:]+")
_RATIONAL = re.compile(r"^(0|[1-9][0-9]*)(?:/([1-9][0-9]*))?$")


def _strip_comment(line: str) -> str:
    i = line.find(";")
    return line if i < 0 else line[:i]


def _sections(text: str, allowed: tuple, required: tuple = ()):
    """Split ``text`` into ``{section: [(lineno, col, content), ...]}``."""
    out = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).rstrip()
        content = line.lstrip()
        if not content:
            continue
        col = len(line) - len(content) + 1
        if content.startswith("["):
            m = re.fullmatch(r"\[([a-z]+)\]", content)
            if not m or m.group(1) not in allowed:
                raise ParseError(lineno, col, f"unknown section header {content!r}")
            current = m.group(1)
            if current in out:
                raise ParseError(lineno, col, f"section [{current}] appears twice")
            out[current] = []
            continue
        if current is None:
            raise ParseError(lineno, col, "content before the first section header")
        out[current].append((lineno, col, content))
    for name in required:
        if name not in out:
            line = len(text.splitlines()) or 1
            raise ParseError(line, 1, f"missing [{name}] section")
    return out


def _parse_id(token: str, lineno: int, col: int, what: str) -> str:
    if not _ID.fullmatch(token) or "->" in token:
        raise ParseError(lineno, col, f"invalid {what} id {token!r}")
    return token


def _parse_rational(token: str, lineno: int, col: int) -> Fraction:
    m = _RATIONAL.match(token)
    if not m:
        raise ParseError(lineno, col, f"expected an integer or p/q rational, got {token!r}")
    return Fraction(int(m.group(1)), int(m.group(2) or 1))


def _tokens(content: str, col: int):
    """Whitespace-separated tokens with their 1-based column."""
    for m in re.finditer(r"\S+", content):
        yield m.group(0), col + m.start()


def _query_lines(entries, labels_to_ids, known_ids, what):
    ids = []
    for lineno, col, content in entries:
        toks = list(_tokens(content, col))
        if len(toks) != 1:
            raise ParseError(lineno, col, f"expected one state id or #label per line in [{what}]")
        tok, c = toks[0]
        if tok.startswith("#"):
            label = tok[1:]
            if label not in labels_to_ids:
                raise ParseError(lineno, c, f"label query {tok!r} matches no state")
            ids.extend(labels_to_ids[label])
        else:
            sid = _parse_id(tok, lineno, c, "state")
            if sid not in known_ids:
                raise ParseError(lineno, c, f"undeclared state {sid!r} in [{what}]")
            ids.append(sid)
    return ids


def parse_model(text: str, *, allow_undeclared_targets: bool = False) -> GameModel:
    """Parse a model document into a :class:`GameModel`.

    ``allow_undeclared_targets`` keeps transitions into undeclared states so
    that validation can report them as closure violations.
    """
    secs = _sections(
        text,
        ("states", "operations", "transitions", "initial", "final"),
        ("states",),
    )
    states, labels_to_ids = [], {}
    for lineno, col, content in secs["states"]:
        toks = list(_tokens(content, col))
        sid = _parse_id(toks[0][0], lineno, toks[0][1], "state")
        labels = []
        for tok, c in toks[1:]:
            if not tok.startswith("#") or len(tok) < 2:
                raise ParseError(lineno, c, f"expected #label, got {tok!r}")
            labels.append(_parse_id(tok[1:], lineno, c + 1, "label"))
            labels_to_ids.setdefault(tok[1:], []).append(sid)
        states.append((sid, labels))

    ops = []
    for lineno, col, content in secs.get("operations", []):
        toks = list(_tokens(content, col))
        if len(toks) > 3:
            raise ParseError(lineno, toks[3][1], "expected 'id [kind] [cost]'")
        oid = _parse_id(toks[0][0], lineno, toks[0][1], "operation")
        kind = OpKind.PLAYER
        cost = None
        if len(toks) > 1:
            tok, c = toks[1]
            try:
                kind = OpKind(tok)
            except ValueError:
                raise ParseError(lineno, c, f"unknown operation kind {tok!r}") from None
        if len(toks) > 2:
            cost = _parse_rational(toks[2][0], lineno, toks[2][1])
        if cost is None:
            cost = Fraction(0) if kind is OpKind.IDENTITY else Fraction(1)
        try:
            ops.append(OperationDef(oid, kind, cost))
        except SSIError as e:
            raise ParseError(lineno, col, str(e)) from None

    transitions, lines = [], {}
    for lineno, col, content in secs.get("transitions", []):
        head, arrow, tail = content.partition("->")
        if not arrow:
            raise ParseError(lineno, col, "expected 'state op -> target:p/q, ...'")
        htoks = list(_tokens(head, col))
        if len(htoks) != 2:
            raise ParseError(lineno, col, "expected exactly a state and an operation before '->'")
        source = _parse_id(htoks[0][0], lineno, htoks[0][1], "state")
        op = _parse_id(htoks[1][0], lineno, htoks[1][1], "operation")
        outs = []
        offset = col + len(head) + 2
        for part in tail.split(","):
            item = part.strip()
            c = offset + (len(part) - len(part.lstrip()))
            offset += len(part) + 1
            if not item:
                raise ParseError(lineno, c, "empty outcome")
            target, _, prob = item.partition(":")
            target = _parse_id(target.strip(), lineno, c, "state")
            p = _parse_rational(prob.strip(), lineno, c + len(target) + 1) if prob else Fraction(1)
            outs.append((target, p))
        transitions.append((source, op, outs))
        lines[(source, op)] = lineno

    known = {sid for sid, _ in states}
    initial = _query_lines(secs.get("initial", []), labels_to_ids, known, "initial")
    final = _query_lines(secs.get("final", []), labels_to_ids, known, "final")
    return build_model(
        states, ops, transitions, initial, final,
        allow_undeclared_targets=allow_undeclared_targets,
        source_lines=lines,
    )


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _check_token(tok: str, what: str) -> str:
    if not _ID.fullmatch(tok) or "->" in tok:
        raise ValueError(f"{what} id {tok!r} cannot be written to a model document")
    return tok


def serialize_model(model: GameModel) -> str:
    """Canonical document text; identity self-loops are implied and omitted."""
    identity = model.identity_op.id
    out = ["[states]"]
    for s in model.states:
        labels = "".join(f" #{_check_token(lb, 'label')}" for lb in sorted(s.labels))
        out.append(_check_token(s.id, "state") + labels)
    out.append("[operations]")
    for o in model.operations:
        out.append(f"{_check_token(o.id, 'operation')} {o.kind.value} {_fmt(o.cost)}")
    out.append("[transitions]")
    for t in model.transitions:
        if t.op == identity:
            continue
        outs = ", ".join(f"{target}:{_fmt(p)}" for target, p in t.outcomes)
        out.append(f"{t.source} {t.op} -> {outs}")
    out.append("[initial]")
    out.extend(model.initial)
    out.append("[final]")
    out.extend(model.final)
    return "\n".join(out) + "\n"


def model_hash(model: GameModel) -> str:
    return "sha256:" + hashlib.sha256(serialize_model(model).encode("utf-8")).hexdigest()


def load_model(path, **kwargs) -> GameModel:
    return parse_model(Path(path).read_text(encoding="utf-8"), **kwargs)


def atomic_write(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _query_from_lines(entries) -> StateQuery:
    ids, labels = set(), set()
    for lineno, col, content in entries:
        for tok, c in _tokens(content, col):
            if tok.startswith("#"):
                labels.add(_parse_id(tok[1:], lineno, c + 1, "label"))
            else:
                ids.add(_parse_id(tok, lineno, c, "state"))
    return StateQuery(frozenset(ids), frozenset(labels))


def parse_spec(text: str, default_id: str = "achievement") -> AchievementSpec:
    secs = _sections(text, ("id", "initial", "ops", "finish"), ("initial", "ops", "finish"))
    ident = default_id
    if secs.get("id"):
        lineno, col, content = secs["id"][0]
        ident = _parse_id(content.strip(), lineno, col, "achievement")
    ops = set()
    for lineno, col, content in secs["ops"]:
        for tok, c in _tokens(content, col):
            ops.add(_parse_id(tok, lineno, c, "operation"))
    if not ops:
        raise ParseError(1, 1, "[ops] must list at least one operation")
    return AchievementSpec(ident, _query_from_lines(secs["initial"]), frozenset(ops), _query_from_lines(secs["finish"]))


def serialize_spec(spec: AchievementSpec) -> str:
    def query(q: StateQuery):
        return sorted(q.ids) + [f"#{lb}" for lb in sorted(q.labels)]

    if not isinstance(spec.initial_pred, StateQuery) or not isinstance(spec.finish_pred, StateQuery):
        raise ValueError("only StateQuery predicates can be serialized")
    lines = ["[id]", spec.id, "[initial]", *query(spec.initial_pred), "[ops]", *sorted(spec.allowed_ops)]
    lines += ["[finish]", *query(spec.finish_pred)]
    return "\n".join(lines) + "\n"


def load_spec(path) -> AchievementSpec:
    path = Path(path)
    return parse_spec(path.read_text(encoding="utf-8"), default_id=path.stem)


@dataclass(frozen=True)
class StepRecord:
    index: int
    op: str
    outcome: str
    draw: Draw


@dataclass(frozen=True)
class TraceDocument:
    model_hash: str
    seed: int
    policy: str
    start: str
    stop_reason: str
    steps: tuple = ()

    @property
    def ops(self) -> tuple:
        return tuple(s.op for s in self.steps)

    @property
    def states(self) -> tuple:
        return (self.start,) + tuple(s.outcome for s in self.steps)


def serialize_trace(trace: TraceDocument) -> str:
    lines = [
        "[header]",
        f"model {trace.model_hash}",
        f"seed {trace.seed}",
        f"policy {trace.policy}",
        f"start {trace.start}",
        f"stop {trace.stop_reason}",
        "[steps]",
    ]
    for s in trace.steps:
        lines.append(f"{s.index} {s.op} {s.outcome} {s.draw.uniform!r} {_fmt(s.draw.prob)}")
    return "\n".join(lines) + "\n"


def parse_trace(text: str) -> TraceDocument:
    secs = _sections(text, ("header", "steps"), ("header", "steps"))
    header = {}
    for lineno, col, content in secs["header"]:
        key, _, value = content.partition(" ")
        if key not in {"model", "seed", "policy", "start", "stop"}:
            raise ParseError(lineno, col, f"unknown header field {key!r}")
        header[key] = (lineno, value.strip())
    for key in ("model", "seed", "policy", "start", "stop"):
        if key not in header:
            raise ParseError(1, 1, f"trace header lacks {key!r}")
    lineno, seed = header["seed"]
    try:
        seed = int(seed)
    except ValueError:
        raise ParseError(lineno, 6, f"seed must be an integer, got {seed!r}") from None
    steps = []
    for lineno, col, content in secs["steps"]:
        toks = list(_tokens(content, col))
        if len(toks) != 5:
            raise ParseError(lineno, col, "expected 'index op outcome uniform prob'")
        (idx, c0), (op, c1), (outcome, c2), (u, c3), (p, c4) = toks
        if not idx.isdigit() or int(idx) != len(steps):
            raise ParseError(lineno, c0, f"expected step index {len(steps)}, got {idx!r}")
        try:
            uniform = float(u)
        except ValueError:
            raise ParseError(lineno, c3, f"bad uniform draw {u!r}") from None
        draw = Draw(uniform, _parse_rational(p, lineno, c4))
        steps.append(StepRecord(len(steps), _parse_id(op, lineno, c1, "operation"),
                                _parse_id(outcome, lineno, c2, "state"), draw))
    return TraceDocument(
        header["model"][1], seed, header["policy"][1], header["start"][1], header["stop"][1], tuple(steps)
    )
