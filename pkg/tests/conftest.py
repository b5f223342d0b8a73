"""Shared synthetic corpora for the test suite.

Everything is seeded so expected values can be frozen.
"""

from __future__ import annotations

import random

import pytest

from polyie.model import (
    Entity,
    EventArgument,
    EventTrigger,
    LabelDescriptor,
    LabelSchema,
    Relation,
    RoleDescriptor,
    TaskInstance,
    TaskKind,
)

VOCAB = [
    "Obama", "Merkel", "Google", "Berlin", "Paris", "soldiers", "protesters",
    "parliament", "election", "attack", "convoy", "minister", "reporters",
    "embassy", "Tuesday", "officials", "police", "airport", "summit", "treaty",
]

_ROLES = (
    RoleDescriptor("AGENT", "The actor carrying out the event."),
    RoleDescriptor("TARGET", "The entity the event is directed at."),
    RoleDescriptor("PLACE", "Where the event takes place."),
)


def make_schema(kind: TaskKind, n_labels: int = 4) -> LabelSchema:
    if kind is TaskKind.NER:
        labels = [
            LabelDescriptor("PERSON", "People, including fictional characters."),
            LabelDescriptor("ORG", "Companies, agencies and institutions."),
            LabelDescriptor("LOC", "Geographical and political locations."),
            LabelDescriptor("MISC", "Named entities of any other type."),
            LabelDescriptor("FAC", "Buildings, airports and other facilities."),
            LabelDescriptor("EVENT", "Named hurricanes, battles, wars and sports events."),
        ]
        name = "Named_Entity_Recognition"
        definition = "Find all named entities mentioned in the input text and classify each one."
    elif kind is TaskKind.RE:
        labels = [
            LabelDescriptor("WORKS_FOR", "The head person is employed by the tail organization."),
            LabelDescriptor("LOCATED_IN", "The head entity is physically located in the tail place."),
            LabelDescriptor("FOUNDED_BY", "The head organization was founded by the tail person."),
            LabelDescriptor("PART_OF", "The head entity is a component of the tail entity."),
            LabelDescriptor("MET_WITH", "The head person met with the tail person."),
        ]
        name = "Relation_Extraction"
        definition = "Find every pair of entities in the input text that stands in one of the listed relations."
    elif kind is TaskKind.EE:
        labels = [
            LabelDescriptor("ATTACK", "A violent act causing harm or damage.", _ROLES),
            LabelDescriptor("MEETING", "Two or more parties coming together to discuss.", _ROLES),
            LabelDescriptor("TRANSPORT", "Movement of people or goods between places.", _ROLES),
            LabelDescriptor("ELECTION", "A vote to select a person for office.", _ROLES),
        ]
        name = "Event_Extraction"
        definition = "Find every word or phrase in the input text that triggers one of the listed event types."
    else:
        labels = [
            LabelDescriptor("ATTACK", "A violent act causing harm or damage.", _ROLES),
            LabelDescriptor("MEETING", "Two or more parties coming together to discuss.", _ROLES),
            LabelDescriptor("TRANSPORT", "Movement of people or goods between places.", _ROLES),
            LabelDescriptor("ELECTION", "A vote to select a person for office.", _ROLES),
        ]
        name = "Event_Argument_Extraction"
        definition = "For each event in the input text, find the arguments filling the listed roles."
    return LabelSchema(
        task=kind, task_name=name, task_definition=definition, labels=tuple(labels[:n_labels])
    )


def make_instance(kind: TaskKind, schema: LabelSchema, rng: random.Random, iid: str) -> TaskInstance:
    n_words = rng.randrange(6, 13)
    words = [rng.choice(VOCAB) for _ in range(n_words)]
    text = " ".join(words)

    def span() -> str:
        start = rng.randrange(n_words)
        length = 1 if start == n_words - 1 else rng.choice((1, 1, 2))
        return " ".join(words[start:start + length])

    gold = set()
    for _ in range(rng.randrange(0, 5)):
        label = rng.choice(schema.labels)
        if kind is TaskKind.NER:
            gold.add(Entity(span(), label.name))
        elif kind is TaskKind.RE:
            gold.add(Relation(rng.choice(words), label.name, rng.choice(words)))
        elif kind is TaskKind.EE:
            gold.add(EventTrigger(span(), label.name))
        else:
            role = rng.choice(label.roles)
            gold.add(EventArgument(label.name, role.name, span()))
    return TaskInstance(id=iid, text=text, gold=frozenset(gold))


def make_corpus(kind: TaskKind, n: int, seed: int = 0, n_labels: int = 4):
    rng = random.Random((seed, kind.value).__repr__())
    schema = make_schema(kind, n_labels)
    instances = [make_instance(kind, schema, rng, f"{kind.value.lower()}-{i:04d}") for i in range(n)]
    return schema, instances


@pytest.fixture
def ner_schema():
    return make_schema(TaskKind.NER, 2)


@pytest.fixture
def ner_instance():
    return TaskInstance(
        id="i1",
        text="Obama visited Google",
        gold=frozenset({Entity("Obama", "PERSON"), Entity("Google", "ORG")}),
    )
