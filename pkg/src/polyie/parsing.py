"""Fault-tolerant parsing of model completions back into annotation sets.

Only the output-collection grammar is parsed; everything else in a completion
is chatter. Malformed or off-schema terms never raise — they become
diagnostics and the parser resynchronizes at the next top-level comma.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .model import (
    Annotation,
    Dialect,
    Entity,
    EventArgument,
    EventTrigger,
    LabelSchema,
    Relation,
    TaskKind,
)
from .compiler import TERM_NAME, render_gold_output

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_JAVA_OPEN = re.compile(r"List\.of\s*\(")

_ARITY = {TaskKind.NER: 2, TaskKind.RE: 3, TaskKind.EE: 2, TaskKind.EAE: 3}


@dataclass(frozen=True)
class Diagnostic:
    span: tuple[int, int]
    message: str


@dataclass(frozen=True)
class PredictionSet:
    instance_id: str
    dialect: Dialect
    annotations: frozenset[Annotation]
    diagnostics: tuple[Diagnostic, ...] = ()
    truncated: bool = False


class _Scanner:
    def __init__(self, text: str, close: str):
        self.text = text
        self.close = close
        self.i = 0
        self.truncated = False

    def eof(self) -> bool:
        return self.i >= len(self.text)

    def peek(self) -> str:
        return self.text[self.i] if self.i < len(self.text) else ""

    def skip_ws(self) -> None:
        while not self.eof() and self.text[self.i].isspace():
            self.i += 1

    def read_string(self) -> str | None:
        """Read a double-quoted string literal with backslash escapes."""
        if self.peek() != '"':
            return None
        self.i += 1
        out = []
        while True:
            if self.eof():
                self.truncated = True
                return None
            c = self.text[self.i]
            if c == "\\" and self.i + 1 < len(self.text):
                nxt = self.text[self.i + 1]
                out.append({"n": "\n", "r": "\r", "t": "\t"}.get(nxt, nxt))
                self.i += 2
                continue
            if c == '"':
                self.i += 1
                return "".join(out)
            out.append(c)
            self.i += 1

    def resync(self) -> None:
        """Advance to just past the next top-level comma, or stop at the
        closing delimiter / EOF. String contents are skipped opaquely."""
        depth = 0
        while not self.eof():
            c = self.text[self.i]
            if c == '"':
                self.read_string()
                continue
            if c == "(":
                depth += 1
            elif c == ")" and depth > 0:
                depth -= 1
            elif depth == 0 and c == ",":
                self.i += 1
                return
            elif depth == 0 and c == self.close:
                return
            self.i += 1
        self.truncated = True

    def read_term(self) -> tuple[str, list[str]] | None:
        """One constructor term: ``[new ]Name("a", "b", ...)``."""
        if self.text.startswith("new", self.i):
            after = self.i + 3
            if after < len(self.text) and self.text[after].isspace():
                self.i = after
                self.skip_ws()
        m = _IDENT.match(self.text, self.i)
        if not m:
            return None
        name = m.group(0)
        self.i = m.end()
        self.skip_ws()
        if self.peek() != "(":
            return None
        self.i += 1
        args: list[str] = []
        self.skip_ws()
        if self.peek() == ")":
            self.i += 1
            return name, args
        while True:
            self.skip_ws()
            arg = self.read_string()
            if arg is None:
                return None
            args.append(arg)
            self.skip_ws()
            if self.peek() == ",":
                self.i += 1
                continue
            if self.peek() == ")":
                self.i += 1
                return name, args
            return None


def _find_collection(text: str, dialect: Dialect) -> tuple[int, str] | None:
    """Locate the first collection literal; return (contents offset, close)."""
    if dialect is Dialect.PY:
        pos = text.find("[")
        return (pos + 1, "]") if pos >= 0 else None
    if dialect is Dialect.CPP:
        pos = text.find("{")
        return (pos + 1, "}") if pos >= 0 else None
    m = _JAVA_OPEN.search(text)
    return (m.end(), ")") if m else None


def _term_to_annotation(
    name: str, args: list[str], schema: LabelSchema
) -> tuple[Annotation | None, str | None]:
    kind = schema.task
    expected = TERM_NAME[kind]
    if name != expected:
        return None, f"unexpected constructor {name!r} (expected {expected!r})"
    if len(args) != _ARITY[kind]:
        return None, f"{name} takes {_ARITY[kind]} arguments, got {len(args)}"
    try:
        if kind is TaskKind.NER:
            ann: Annotation = Entity(args[0], args[1])
        elif kind is TaskKind.RE:
            ann = Relation(args[0], args[1], args[2])
        elif kind is TaskKind.EE:
            ann = EventTrigger(args[0], args[1])
        else:
            ann = EventArgument(args[0], args[1], args[2])
    except ValueError as exc:
        return None, str(exc)
    label = args[1] if kind in (TaskKind.NER, TaskKind.EE) else args[0] if kind is TaskKind.EAE else args[1]
    lb = schema.find_label(label)
    if lb is None:
        return None, f"off-schema label {label!r}"
    if kind is TaskKind.EAE and args[1] not in lb.role_names():
        return None, f"off-schema role {args[1]!r} for event type {label!r}"
    return ann, None


def parse_completion(
    text: str, dialect: Dialect, schema: LabelSchema, instance_id: str = ""
) -> PredictionSet:
    """Extract every well-formed, schema-valid term from a completion.

    Never raises on garbage input; all failures surface as diagnostics.
    """
    found = _find_collection(text, dialect)
    if found is None:
        return PredictionSet(
            instance_id=instance_id,
            dialect=dialect,
            annotations=frozenset(),
            diagnostics=(Diagnostic((0, len(text)), "no collection literal found"),),
        )
    start, close = found
    sc = _Scanner(text[start:], close)
    annotations: set[Annotation] = set()
    diagnostics: list[Diagnostic] = []
    while True:
        sc.skip_ws()
        if sc.eof():
            sc.truncated = True
            break
        if sc.peek() == close:
            break
        term_start = sc.i
        term = sc.read_term()
        if term is None:
            sc.resync()
            diagnostics.append(
                Diagnostic(
                    (start + term_start, start + sc.i),
                    "malformed term" + (" (input truncated)" if sc.truncated else ""),
                )
            )
            if sc.truncated:
                break
            continue
        name, args = term
        ann, problem = _term_to_annotation(name, args, schema)
        term_end = sc.i
        sc.skip_ws()
        if sc.peek() == ",":
            sc.i += 1
        if ann is not None:
            annotations.add(ann)
        else:
            diagnostics.append(Diagnostic((start + term_start, start + term_end), problem or "bad term"))
    return PredictionSet(
        instance_id=instance_id,
        dialect=dialect,
        annotations=frozenset(annotations),
        diagnostics=tuple(diagnostics),
        truncated=sc.truncated,
    )


def roundtrip_check(inst, schema, dialect: Dialect) -> bool:
    """True iff parsing the rendered gold output recovers the gold set."""
    gold = render_gold_output(inst, schema, dialect)
    parsed = parse_completion(gold.text, dialect, schema, instance_id=inst.id)
    return parsed.annotations == frozenset(inst.gold) and not parsed.truncated


# JSONL export shapes ------------------------------------------------------

def prediction_to_json(p: PredictionSet) -> dict:
    from .model import annotation_to_json

    return {
        "id": p.instance_id,
        "dialect": p.dialect.value,
        "annotations": [annotation_to_json(a) for a in sorted(p.annotations, key=repr)],
        "diagnostics": [{"span": list(d.span), "message": d.message} for d in p.diagnostics],
        "truncated": p.truncated,
    }


def prediction_from_json(obj: dict) -> PredictionSet:
    from .model import annotation_from_json

    return PredictionSet(
        instance_id=obj["id"],
        dialect=Dialect(obj["dialect"]),
        annotations=frozenset(annotation_from_json(a) for a in obj.get("annotations", [])),
        diagnostics=tuple(
            Diagnostic(tuple(d["span"]), d["message"]) for d in obj.get("diagnostics", [])
        ),
        truncated=bool(obj.get("truncated", False)),
    )
