"""Render (instance, schema, dialect, style) into prompt text and gold output.

The templates below are the canonical grammar for this toolkit: golden tests
pin their exact bytes. Every dialect carries the same task definition, the
same ordered label-description lines and the same instance text; only the
syntax scaffolding differs.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    Annotation,
    Dialect,
    Entity,
    EventArgument,
    EventTrigger,
    LabelSchema,
    PromptStyle,
    Relation,
    TaskInstance,
    TaskKind,
    annotation_label,
    annotation_surface,
    validate_instance,
)

INPUT_VAR = "InputText"

RESULT_NAME = {
    TaskKind.NER: "EntityList",
    TaskKind.RE: "RelationList",
    TaskKind.EE: "EventList",
    TaskKind.EAE: "ArgumentList",
}

# Constructor name used in the output collection literal.
TERM_NAME = {
    TaskKind.NER: "Entity",
    TaskKind.RE: "Relation",
    TaskKind.EE: "Trigger",
    TaskKind.EAE: "Argument",
}

# Base class name for the CLASS prompt style.
BASE_CLASS = {
    TaskKind.NER: "Entity",
    TaskKind.RE: "Relation",
    TaskKind.EE: "Event",
    TaskKind.EAE: "Argument",
}

_ESCAPES = [("\\", "\\\\"), ('"', '\\"'), ("\n", "\\n"), ("\r", "\\r"), ("\t", "\\t")]


class InvalidInstanceError(ValueError):
    """Raised when an operation requires a schema-valid instance."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(v.message for v in self.violations))


def escape_string(s: str) -> str:
    for raw, esc in _ESCAPES:
        s = s.replace(raw, esc)
    return s


def unescape_string(s: str) -> str:
    out = []
    i = 0
    while i < len(s):
        c = s[i]
        if c == "\\" and i + 1 < len(s):
            nxt = s[i + 1]
            out.append({"n": "\n", "r": "\r", "t": "\t"}.get(nxt, nxt))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


@dataclass(frozen=True)
class CodePrompt:
    dialect: Dialect
    style: PromptStyle
    text: str
    boundary: int
    instance_id: str


@dataclass(frozen=True)
class GoldCompletion:
    dialect: Dialect
    text: str
    annotations: frozenset[Annotation]


def prompt_length(p: CodePrompt, unit: str = "chars") -> int:
    if unit == "chars":
        return len(p.text)
    if unit == "ws_tokens":
        return len(p.text.split())
    raise ValueError(f"unknown length unit: {unit!r}")


# ---------------------------------------------------------------------------
# Shared documentation lines
# ---------------------------------------------------------------------------

def _label_lines(schema: LabelSchema) -> list[str]:
    lines = []
    for lb in schema.labels:
        lines.append(f"- {lb.name}: {lb.description}")
        for role in lb.roles:
            lines.append(f"  * {role.name}: {role.description}")
    return lines


def _doc_lines(schema: LabelSchema) -> list[str]:
    lines = ["Task Definition:"]
    lines.extend(schema.task_definition.splitlines() or [""])
    lines.append("Label Set:")
    lines.extend(_label_lines(schema))
    return lines


def _indent(lines: list[str], pad: str = "    ") -> str:
    return "\n".join(pad + line if line else pad.rstrip() for line in lines)


def _subclass_doc(lb) -> list[str]:
    lines = [f"- {lb.name}: {lb.description}"]
    for role in lb.roles:
        lines.append(f"  * {role.name}: {role.description}")
    return lines


# ---------------------------------------------------------------------------
# Templates
# ---------------------------------------------------------------------------

def _function_prompt(inst, schema, dialect, virtual_run: bool) -> str:
    result = RESULT_NAME[schema.task]
    term = TERM_NAME[schema.task]
    doc = _indent(_doc_lines(schema))
    text = escape_string(inst.text)
    if dialect is Dialect.PY:
        body = (
            f"def {schema.task_name}({INPUT_VAR}):\n"
            f'    """\n{doc}\n    """\n'
            f"    return {result}\n"
            f"\n"
            f'{INPUT_VAR} = "{text}"\n'
        )
        if virtual_run:
            body += f"{schema.task_name}({INPUT_VAR})\n"
        return body + f"{result} = "
    if dialect is Dialect.CPP:
        body = (
            f"std::vector<{term}> {schema.task_name}(std::string {INPUT_VAR}) {{\n"
            f"    /*\n{doc}\n    */\n"
            f"    return {result};\n"
            f"}}\n"
            f"\n"
            f'std::string {INPUT_VAR} = "{text}";\n'
        )
        if virtual_run:
            body += f"{schema.task_name}({INPUT_VAR});\n"
        return body + f"std::vector<{term}> {result} = "
    body = (
        f"List<{term}> {schema.task_name}(String {INPUT_VAR}) {{\n"
        f"    /*\n{doc}\n    */\n"
        f"    return {result};\n"
        f"}}\n"
        f"\n"
        f'String {INPUT_VAR} = "{text}";\n'
    )
    if virtual_run:
        body += f"{schema.task_name}({INPUT_VAR});\n"
    return body + f"List<{term}> {result} = "


def _class_prompt(inst, schema, dialect) -> str:
    result = RESULT_NAME[schema.task]
    term = TERM_NAME[schema.task]
    base = BASE_CLASS[schema.task]
    task_doc = _indent(["Task Definition:"] + (schema.task_definition.splitlines() or [""]))
    text = escape_string(inst.text)
    parts = []
    if dialect is Dialect.PY:
        parts.append(
            f"class {base}:\n"
            f'    """\n{task_doc}\n    """\n'
            f"    def __init__(self, name):\n"
            f"        self.name = name\n"
        )
        for lb in schema.labels:
            doc = _indent(_subclass_doc(lb))
            parts.append(f"class {lb.name}({base}):\n" f'    """\n{doc}\n    """\n')
        parts.append(f'{INPUT_VAR} = "{text}"\n{result} = ')
        return "\n".join(parts)
    if dialect is Dialect.CPP:
        parts.append(
            f"class {base} {{\n"
            f"public:\n"
            f"    /*\n{task_doc}\n    */\n"
            f"    std::string name;\n"
            f"    {base}(std::string name) {{\n"
            f"        this->name = name;\n"
            f"    }}\n"
            f"}};\n"
        )
        for lb in schema.labels:
            doc = _indent(_subclass_doc(lb))
            parts.append(
                f"class {lb.name} : public {base} {{\n"
                f"public:\n"
                f"    /*\n{doc}\n    */\n"
                f"}};\n"
            )
        parts.append(f'std::string {INPUT_VAR} = "{text}";\nstd::vector<{term}> {result} = ')
        return "\n".join(parts)
    parts.append(
        f"class {base} {{\n"
        f"    /*\n{task_doc}\n    */\n"
        f"    String name;\n"
        f"    {base}(String name) {{\n"
        f"        this.name = name;\n"
        f"    }}\n"
        f"}}\n"
    )
    for lb in schema.labels:
        doc = _indent(_subclass_doc(lb))
        parts.append(f"class {lb.name} extends {base} {{\n" f"    /*\n{doc}\n    */\n" f"}}\n")
    parts.append(f'String {INPUT_VAR} = "{text}";\nList<{term}> {result} = ')
    return "\n".join(parts)


def compile_prompt(
    inst: TaskInstance,
    schema: LabelSchema,
    dialect: Dialect,
    style: PromptStyle,
) -> CodePrompt:
    """Render the full prompt text, ending at the dangling result assignment."""
    violations = validate_instance(inst, schema)
    if violations:
        raise InvalidInstanceError(violations)
    if style is PromptStyle.CLASS:
        text = _class_prompt(inst, schema, dialect)
    else:
        text = _function_prompt(
            inst, schema, dialect, virtual_run=style is PromptStyle.FUNCTION
        )
    return CodePrompt(
        dialect=dialect, style=style, text=text, boundary=len(text), instance_id=inst.id
    )


# ---------------------------------------------------------------------------
# Gold completion rendering
# ---------------------------------------------------------------------------

def _term_args(ann: Annotation) -> tuple[str, ...]:
    if isinstance(ann, Entity):
        return (ann.surface, ann.label)
    if isinstance(ann, Relation):
        return (ann.head, ann.label, ann.tail)
    if isinstance(ann, EventTrigger):
        return (ann.surface, ann.event_type)
    if isinstance(ann, EventArgument):
        return (ann.event_type, ann.role, ann.surface)
    raise TypeError(f"not an annotation: {ann!r}")


def render_term(ann: Annotation, dialect: Dialect, kind: TaskKind) -> str:
    args = ", ".join(f'"{escape_string(a)}"' for a in _term_args(ann))
    term = f"{TERM_NAME[kind]}({args})"
    if dialect is Dialect.JAVA:
        return "new " + term
    return term


def render_collection(terms: list[str], dialect: Dialect) -> str:
    inner = ", ".join(terms)
    if dialect is Dialect.PY:
        return f"[{inner}]"
    if dialect is Dialect.CPP:
        return f"{{{inner}}}"
    return f"List.of({inner})"


def order_annotations(annotations, text: str, schema: LabelSchema) -> list[Annotation]:
    """Canonical output order for a set of annotations.

    Primary key is the schema's label order, secondary key the first
    occurrence of the surface in the instance text; the full argument tuple
    breaks any remaining ties deterministically.
    """

    def key(ann: Annotation):
        offset = text.find(annotation_surface(ann))
        if offset < 0:
            offset = len(text)
        return (schema.label_index(annotation_label(ann)), offset, _term_args(ann))

    return sorted(set(annotations), key=key)


def ordered_gold(inst: TaskInstance, schema: LabelSchema) -> list[Annotation]:
    return order_annotations(inst.gold, inst.text, schema)


def render_annotation_collection(
    annotations, text: str, schema: LabelSchema, dialect: Dialect
) -> str:
    ordered = order_annotations(annotations, text, schema)
    return render_collection([render_term(a, dialect, schema.task) for a in ordered], dialect)


def render_gold_output(
    inst: TaskInstance, schema: LabelSchema, dialect: Dialect
) -> GoldCompletion:
    violations = validate_instance(inst, schema)
    if violations:
        raise InvalidInstanceError(violations)
    ordered = ordered_gold(inst, schema)
    terms = [render_term(a, dialect, schema.task) for a in ordered]
    return GoldCompletion(
        dialect=dialect,
        text=render_collection(terms, dialect),
        annotations=frozenset(ordered),
    )
