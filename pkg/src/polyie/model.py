"""Core domain types: task schemas, annotations, instances.

Everything here is immutable after construction and safe to share across
threads. Validation never raises on bad data; it returns violations so
callers can decide what to do with them.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Union

_WS_RUN = re.compile(r"\s+")
_IDENTIFIER = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class TaskKind(Enum):
    NER = "NER"
    RE = "RE"
    EAE = "EAE"
    EE = "EE"


class Dialect(Enum):
    PY = "PY"
    CPP = "CPP"
    JAVA = "JAVA"


class PromptStyle(Enum):
    FUNCTION = "FUNCTION"
    FUNCTION_NO_VIRTUAL_RUN = "FUNCTION_NO_VIRTUAL_RUN"
    CLASS = "CLASS"


def normalize_surface(s: str) -> str:
    """Collapse internal whitespace runs to single spaces and trim the ends.

    Case is preserved. Idempotent.
    """
    return _WS_RUN.sub(" ", s).strip()


@dataclass(frozen=True)
class RoleDescriptor:
    name: str
    description: str = ""


@dataclass(frozen=True)
class LabelDescriptor:
    """One label (entity type, relation type, event type) with its gloss.

    ``roles`` is only populated for event-style schemas (EE/EAE), where each
    event type carries argument roles.
    """

    name: str
    description: str = ""
    roles: tuple[RoleDescriptor, ...] = ()

    def __post_init__(self) -> None:
        if not self.name or _WS_RUN.search(self.name):
            raise ValueError(f"label name must be nonempty without whitespace: {self.name!r}")
        object.__setattr__(self, "roles", tuple(self.roles))

    def role_names(self) -> set[str]:
        return {r.name for r in self.roles}


@dataclass(frozen=True)
class LabelSchema:
    task: TaskKind
    task_name: str
    task_definition: str
    labels: tuple[LabelDescriptor, ...]

    def __post_init__(self) -> None:
        if not _IDENTIFIER.match(self.task_name):
            raise ValueError(f"task_name is not a valid identifier: {self.task_name!r}")
        labels = tuple(self.labels)
        if not labels:
            raise ValueError("schema needs at least one label")
        names = [lb.name for lb in labels]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate label names in schema: {names}")
        if self.task in (TaskKind.NER, TaskKind.RE):
            for lb in labels:
                if lb.roles:
                    raise ValueError(f"label {lb.name} has roles but task is {self.task.value}")
        object.__setattr__(self, "labels", labels)

    def label_names(self) -> list[str]:
        return [lb.name for lb in self.labels]

    def label_index(self, name: str) -> int:
        for i, lb in enumerate(self.labels):
            if lb.name == name:
                return i
        return len(self.labels)

    def find_label(self, name: str) -> LabelDescriptor | None:
        for lb in self.labels:
            if lb.name == name:
                return lb
        return None


@dataclass(frozen=True)
class Entity:
    surface: str
    label: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "surface", normalize_surface(self.surface))
        if not self.surface:
            raise ValueError("entity surface must be nonempty")


@dataclass(frozen=True)
class Relation:
    head: str
    label: str
    tail: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "head", normalize_surface(self.head))
        object.__setattr__(self, "tail", normalize_surface(self.tail))
        if not self.head or not self.tail:
            raise ValueError("relation head/tail must be nonempty")


@dataclass(frozen=True)
class EventTrigger:
    surface: str
    event_type: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "surface", normalize_surface(self.surface))
        if not self.surface:
            raise ValueError("trigger surface must be nonempty")


@dataclass(frozen=True)
class EventArgument:
    event_type: str
    role: str
    surface: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "surface", normalize_surface(self.surface))
        if not self.surface:
            raise ValueError("argument surface must be nonempty")


Annotation = Union[Entity, Relation, EventTrigger, EventArgument]

# Which annotation variant each task kind admits.
KIND_VARIANT: dict[TaskKind, type] = {
    TaskKind.NER: Entity,
    TaskKind.RE: Relation,
    TaskKind.EE: EventTrigger,
    TaskKind.EAE: EventArgument,
}


def annotation_label(ann: Annotation) -> str:
    """The schema label an annotation is filed under."""
    if isinstance(ann, (Entity, Relation)):
        return ann.label
    return ann.event_type


def annotation_surface(ann: Annotation) -> str:
    """The surface used for in-text ordering (head for relations)."""
    if isinstance(ann, Relation):
        return ann.head
    return ann.surface


@dataclass(frozen=True)
class TaskInstance:
    id: str
    text: str
    gold: frozenset[Annotation] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("instance text must be nonempty")
        object.__setattr__(self, "gold", frozenset(self.gold))


@dataclass(frozen=True)
class Violation:
    instance_id: str
    message: str


def validate_instance(inst: TaskInstance, schema: LabelSchema) -> list[Violation]:
    """Check an instance against its schema; violations are data, not errors."""
    out: list[Violation] = []
    expected = KIND_VARIANT[schema.task]
    known = set(schema.label_names())
    for ann in sorted(inst.gold, key=repr):
        if not isinstance(ann, expected):
            out.append(Violation(inst.id, f"annotation {ann!r} is not valid for task {schema.task.value}"))
            continue
        label = annotation_label(ann)
        if label not in known:
            out.append(Violation(inst.id, f"unknown label {label!r} in {ann!r}"))
        elif isinstance(ann, EventArgument):
            lb = schema.find_label(label)
            if lb is not None and ann.role not in lb.role_names():
                out.append(Violation(inst.id, f"unknown role {ann.role!r} for event type {label!r}"))
        surfaces = [ann.head, ann.tail] if isinstance(ann, Relation) else [annotation_surface(ann)]
        for surf in surfaces:
            if surf not in inst.text and surf not in normalize_surface(inst.text):
                out.append(Violation(inst.id, f"surface {surf!r} not found in instance text"))
    return out


# ---------------------------------------------------------------------------
# Canonical JSON (de)serialization
# ---------------------------------------------------------------------------

def annotation_to_json(ann: Annotation) -> dict:
    if isinstance(ann, Entity):
        return {"kind": "entity", "surface": ann.surface, "label": ann.label}
    if isinstance(ann, Relation):
        return {"kind": "relation", "head": ann.head, "label": ann.label, "tail": ann.tail}
    if isinstance(ann, EventTrigger):
        return {"kind": "trigger", "surface": ann.surface, "event_type": ann.event_type}
    if isinstance(ann, EventArgument):
        return {"kind": "argument", "event_type": ann.event_type, "role": ann.role, "surface": ann.surface}
    raise TypeError(f"not an annotation: {ann!r}")


def annotation_from_json(obj: dict) -> Annotation:
    kind = obj.get("kind")
    if kind == "entity":
        return Entity(obj["surface"], obj["label"])
    if kind == "relation":
        return Relation(obj["head"], obj["label"], obj["tail"])
    if kind == "trigger":
        return EventTrigger(obj["surface"], obj["event_type"])
    if kind == "argument":
        return EventArgument(obj["event_type"], obj["role"], obj["surface"])
    raise ValueError(f"unknown annotation kind: {kind!r}")


def schema_to_json(schema: LabelSchema) -> dict:
    return {
        "task": schema.task.value,
        "task_name": schema.task_name,
        "task_definition": schema.task_definition,
        "labels": [
            {
                "name": lb.name,
                "description": lb.description,
                "roles": [{"name": r.name, "description": r.description} for r in lb.roles],
            }
            for lb in schema.labels
        ],
    }


def schema_from_json(obj: dict) -> LabelSchema:
    labels = tuple(
        LabelDescriptor(
            name=lb["name"],
            description=lb.get("description", ""),
            roles=tuple(RoleDescriptor(r["name"], r.get("description", "")) for r in lb.get("roles", [])),
        )
        for lb in obj["labels"]
    )
    return LabelSchema(
        task=TaskKind(obj["task"]),
        task_name=obj["task_name"],
        task_definition=obj["task_definition"],
        labels=labels,
    )


def dataset_to_json(schema: LabelSchema, instances: Iterable[TaskInstance]) -> dict:
    return {
        "schema": schema_to_json(schema),
        "instances": [
            {
                "id": inst.id,
                "text": inst.text,
                "gold": [annotation_to_json(a) for a in sorted(inst.gold, key=repr)],
            }
            for inst in instances
        ],
    }


def dataset_from_json(obj: dict) -> tuple[LabelSchema, list[TaskInstance]]:
    schema = schema_from_json(obj["schema"])
    instances = [
        TaskInstance(
            id=rec["id"],
            text=rec["text"],
            gold=frozenset(annotation_from_json(a) for a in rec.get("gold", [])),
        )
        for rec in obj["instances"]
    ]
    ids = [inst.id for inst in instances]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate instance ids in dataset")
    return schema, instances


def load_dataset(path) -> tuple[LabelSchema, list[TaskInstance]]:
    with open(path, encoding="utf-8") as f:
        return dataset_from_json(json.load(f))


def save_dataset(path, schema: LabelSchema, instances: Iterable[TaskInstance]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(dataset_to_json(schema, instances), f, ensure_ascii=False, indent=2)
        f.write("\n")
