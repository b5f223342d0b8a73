"""Dataset ingestion, SFT export with seeded shuffling, and length statistics."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .compiler import CodePrompt, compile_prompt, prompt_length, render_gold_output
from .model import (
    Dialect,
    Entity,
    LabelDescriptor,
    LabelSchema,
    PromptStyle,
    TaskInstance,
    TaskKind,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SftRecord:
    id: str
    dialect: Dialect
    style: PromptStyle
    input: str
    output: str
    boundary: int

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "dialect": self.dialect.value,
            "style": self.style.value,
            "input": self.input,
            "output": self.output,
            "boundary": self.boundary,
        }


@dataclass(frozen=True)
class LengthHistogram:
    bucket_width: int
    buckets: tuple[tuple[tuple[int, int], int, float], ...]  # ((lo, hi), count, proportion)
    average: float

    def to_json(self) -> dict:
        return {
            "bucket_width": self.bucket_width,
            "buckets": [
                {"range": [lo, hi], "count": n, "proportion": p}
                for (lo, hi), n, p in self.buckets
            ],
            "average": self.average,
        }


def atomic_write_text(path, data: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_jsonl(path, records: Iterable[dict]) -> None:
    atomic_write_text(path, "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records))


def read_jsonl(path) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


# ---------------------------------------------------------------------------
# CoNLL BIO ingestion
# ---------------------------------------------------------------------------

def read_conll_bio(path) -> tuple[LabelSchema, list[TaskInstance]]:
    """Read token-per-line BIO data (tag in the last column, blank-line
    sentence separation) into a NER schema skeleton plus instances.

    An I- tag without a preceding B- of the same label is repaired to B-
    with a warning. Label descriptions are left empty for the caller to fill.
    """
    sentences: list[list[tuple[str, str]]] = []
    current: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                if current:
                    sentences.append(current)
                    current = []
                continue
            if line.startswith("-DOCSTART-"):
                continue
            cols = line.split()
            if len(cols) < 2:
                raise ValueError(f"{path}:{lineno}: expected 'token ... tag', got {raw.rstrip()!r}")
            tag = cols[-1]
            if tag != "O" and not (tag.startswith(("B-", "I-")) and len(tag) > 2):
                raise ValueError(f"{path}:{lineno}: malformed BIO tag {tag!r}")
            current.append((cols[0], tag))
    if current:
        sentences.append(current)

    labels_seen: list[str] = []
    instances = []
    for idx, sent in enumerate(sentences):
        tokens = [tok for tok, _ in sent]
        text = " ".join(tokens)
        gold = set()
        run_tokens: list[str] = []
        run_label = ""

        def flush():
            nonlocal run_tokens, run_label
            if run_tokens:
                gold.add(Entity(" ".join(run_tokens), run_label))
            run_tokens, run_label = [], ""

        for tok, tag in sent:
            if tag == "O":
                flush()
                continue
            prefix, label = tag[0], tag[2:]
            if prefix == "I" and run_label != label:
                log.warning("I-%s without preceding B-%s; treating as B-", label, label)
                prefix = "B"
            if prefix == "B":
                flush()
                run_tokens, run_label = [tok], label
            else:
                run_tokens.append(tok)
        flush()
        for ann in gold:
            if ann.label not in labels_seen:
                labels_seen.append(ann.label)
        instances.append(TaskInstance(id=f"s{idx:05d}", text=text, gold=frozenset(gold)))

    schema = LabelSchema(
        task=TaskKind.NER,
        task_name="Named_Entity_Recognition",
        task_definition="",
        labels=tuple(LabelDescriptor(name) for name in sorted(labels_seen)) or (LabelDescriptor("MISC"),),
    )
    return schema, instances


# ---------------------------------------------------------------------------
# SFT export
# ---------------------------------------------------------------------------

def build_sft_records(
    instances: Sequence[TaskInstance],
    schema: LabelSchema,
    dialects: Sequence[Dialect],
    style: PromptStyle,
) -> list[SftRecord]:
    records = []
    for inst in instances:
        for dialect in dialects:
            prompt = compile_prompt(inst, schema, dialect, style)
            gold = render_gold_output(inst, schema, dialect)
            records.append(
                SftRecord(
                    id=inst.id,
                    dialect=dialect,
                    style=style,
                    input=prompt.text,
                    output=gold.text,
                    boundary=prompt.boundary,
                )
            )
    return records


def export_sft(
    instances: Sequence[TaskInstance],
    schema: LabelSchema,
    dialects: Sequence[Dialect],
    style: PromptStyle,
    seed: int,
    path,
) -> dict:
    """Write one SFT record per (instance x dialect) as JSONL, shuffled by a
    seeded Mersenne Twister, and return the manifest.

    The same inputs and seed always produce byte-identical files.
    """
    records = build_sft_records(instances, schema, dialects, style)
    rng = random.Random(seed)
    rng.shuffle(records)
    payload = "".join(json.dumps(r.to_json(), ensure_ascii=False) + "\n" for r in records)
    try:
        atomic_write_text(path, payload)
    except OSError as exc:
        raise OSError(f"failed writing SFT export to {path}: {exc}") from exc
    per_dialect = {d.value: sum(1 for r in records if r.dialect is d) for d in dialects}
    manifest = {
        "seed": seed,
        "total": len(records),
        "per_dialect": per_dialect,
        "sha256": hashlib.sha256(payload.encode("utf-8")).hexdigest(),
    }
    return manifest


# ---------------------------------------------------------------------------
# Length statistics
# ---------------------------------------------------------------------------

def read_token_counts(path) -> dict[str, int]:
    """TSV of ``id <TAB> count``."""
    out = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'id<TAB>count'")
            out[parts[0]] = int(parts[1])
    return out


def length_stats(
    prompts: Sequence[CodePrompt],
    unit: str = "chars",
    bucket_width: int = 100,
    token_counts: Mapping[str, int] | None = None,
) -> LengthHistogram:
    """Histogram of prompt lengths over contiguous half-open buckets
    ``[lo, lo + width)`` plus the average length.

    When ``token_counts`` is given (real tokenizer counts keyed by instance
    id), those override the computed unit.
    """
    if not prompts:
        return LengthHistogram(bucket_width=bucket_width, buckets=(), average=0.0)
    if bucket_width < 1:
        raise ValueError("bucket_width must be >= 1")
    lengths = []
    for p in prompts:
        if token_counts is not None:
            if p.instance_id not in token_counts:
                raise KeyError(f"no token count for instance id {p.instance_id!r}")
            lengths.append(token_counts[p.instance_id])
        else:
            lengths.append(prompt_length(p, unit))
    lo = (min(lengths) // bucket_width) * bucket_width
    hi = (max(lengths) // bucket_width) * bucket_width
    total = len(lengths)
    buckets = []
    for start in range(lo, hi + bucket_width, bucket_width):
        count = sum(1 for n in lengths if start <= n < start + bucket_width)
        buckets.append(((start, start + bucket_width), count, count / total))
    return LengthHistogram(
        bucket_width=bucket_width,
        buckets=tuple(buckets),
        average=sum(lengths) / total,
    )
