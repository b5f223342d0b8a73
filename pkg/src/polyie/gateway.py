"""Completion sources: a chat-completions HTTP client and a seeded mock model.

The mock renders the gold output and perturbs it with deterministic,
per-(instance, dialect) seeded noise, which is enough to exercise the whole
ensemble pipeline offline.
"""

from __future__ import annotations

import hashlib
import logging
import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import httpx

from .compiler import CodePrompt, ordered_gold, render_annotation_collection
from .model import (
    Dialect,
    Entity,
    EventArgument,
    EventTrigger,
    LabelSchema,
    Relation,
    TaskInstance,
    TaskKind,
)

log = logging.getLogger(__name__)

API_KEY_ENV = "MPL_API_KEY"

DEFAULT_DIALECT_OFFSETS = {Dialect.PY: 0, Dialect.CPP: 1, Dialect.JAVA: 2}


@dataclass(frozen=True)
class GatewayConfig:
    endpoint: str
    model: str
    max_tokens: int = 512
    temperature: float = 0.0
    timeout: float = 30.0
    max_concurrent: int = 4
    max_attempts: int = 3
    backoff_base: float = 0.5

    def __post_init__(self) -> None:
        if self.max_concurrent < 1:
            raise ValueError("max_concurrent must be >= 1")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


class TransportError(RuntimeError):
    """All retry attempts failed; ``attempts`` holds one message per try."""

    def __init__(self, message: str, attempts: list[str]):
        super().__init__(f"{message} (after {len(attempts)} attempt(s): {'; '.join(attempts)})")
        self.attempts = attempts


class RequestFailed(RuntimeError):
    """Non-retryable HTTP error; the response body is echoed."""

    def __init__(self, status: int, body: str):
        super().__init__(f"HTTP {status}: {body[:500]}")
        self.status = status
        self.body = body


def _headers() -> dict[str, str]:
    headers = {"Content-Type": "application/json"}
    key = os.environ.get(API_KEY_ENV)
    if key:
        headers["Authorization"] = f"Bearer {key}"
    return headers


def complete_remote(prompt: CodePrompt, cfg: GatewayConfig) -> str:
    """POST the prompt to a chat-completions endpoint; return the first
    choice's message content. 5xx/429/transport failures are retried with
    exponential backoff; other non-2xx statuses fail immediately."""
    payload = {
        "model": cfg.model,
        "messages": [{"role": "user", "content": prompt.text}],
        "max_tokens": cfg.max_tokens,
        "temperature": cfg.temperature,
    }
    url = cfg.endpoint.rstrip("/") + "/chat/completions"
    attempts: list[str] = []
    for attempt in range(1, cfg.max_attempts + 1):
        try:
            resp = httpx.post(url, json=payload, headers=_headers(), timeout=cfg.timeout)
        except httpx.TimeoutException as exc:
            attempts.append(f"attempt {attempt}: timeout ({exc})")
        except httpx.TransportError as exc:
            attempts.append(f"attempt {attempt}: connection failed ({exc})")
        else:
            if resp.status_code // 100 == 2:
                attempts.append(f"attempt {attempt}: ok")
                log.debug("completion for %s: %s", prompt.instance_id, attempts[-1])
                return resp.json()["choices"][0]["message"]["content"]
            if resp.status_code >= 500 or resp.status_code == 429:
                attempts.append(f"attempt {attempt}: HTTP {resp.status_code}")
            else:
                raise RequestFailed(resp.status_code, resp.text)
        if attempt < cfg.max_attempts:
            time.sleep(cfg.backoff_base * (2 ** (attempt - 1)))
    raise TransportError(f"request to {url} failed", attempts)


def complete_remote_batch(
    prompts: list[CodePrompt], cfg: GatewayConfig
) -> dict[tuple[str, Dialect], str]:
    """Fetch completions concurrently, at most ``max_concurrent`` in flight.

    Results are keyed by (instance id, dialect), so completion order never
    affects downstream files.
    """
    out: dict[tuple[str, Dialect], str] = {}
    with ThreadPoolExecutor(max_workers=cfg.max_concurrent) as pool:
        futures = {
            (p.instance_id, p.dialect): pool.submit(complete_remote, p, cfg)
            for p in prompts
        }
        for key, fut in futures.items():
            out[key] = fut.result()
    return out


# ---------------------------------------------------------------------------
# Deterministic mock model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MockModelConfig:
    drop_rate: float = 0.0
    spurious_rate: float = 0.0
    seed: int = 0
    dialect_seed_offsets: dict = field(default_factory=lambda: dict(DEFAULT_DIALECT_OFFSETS))

    def __post_init__(self) -> None:
        if not 0.0 <= self.drop_rate <= 1.0:
            raise ValueError("drop_rate must be in [0, 1]")
        if not 0.0 <= self.spurious_rate <= 1.0:
            raise ValueError("spurious_rate must be in [0, 1]")


def mock_rng(seed: int, instance_id: str, offset: int) -> random.Random:
    """Stable per-(instance, dialect) generator; independent replays of the
    same key see the same stream."""
    digest = hashlib.sha256(f"{seed}|{instance_id}|{offset}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def mock_predictions(
    inst: TaskInstance, schema: LabelSchema, dialect: Dialect, cfg: MockModelConfig
) -> frozenset:
    """The annotation set the mock model 'predicts' for one dialect.

    Decision order is fixed so an independent replay can reproduce it
    exactly: one uniform draw per gold annotation (in canonical output
    order) for dropping, then one draw for spurious injection, then the
    draws fabricating the spurious annotation.
    """
    offset = cfg.dialect_seed_offsets.get(dialect, 0)
    rng = mock_rng(cfg.seed, inst.id, offset)
    kept = [a for a in ordered_gold(inst, schema) if rng.random() >= cfg.drop_rate]
    predictions = set(kept)
    if rng.random() < cfg.spurious_rate:
        fabricated = _fabricate(rng, inst, schema)
        if fabricated is not None:
            predictions.add(fabricated)
    return frozenset(predictions)


def _fabricate(rng: random.Random, inst: TaskInstance, schema: LabelSchema):
    words = inst.text.split()
    if not words:
        return None
    lb = schema.labels[rng.randrange(len(schema.labels))]
    surface = words[rng.randrange(len(words))]
    if schema.task is TaskKind.NER:
        return Entity(surface, lb.name)
    if schema.task is TaskKind.RE:
        tail = words[rng.randrange(len(words))]
        return Relation(surface, lb.name, tail)
    if schema.task is TaskKind.EE:
        return EventTrigger(surface, lb.name)
    if not lb.roles:
        return None
    role = lb.roles[rng.randrange(len(lb.roles))]
    return EventArgument(lb.name, role.name, surface)


def complete_mock(
    inst: TaskInstance, schema: LabelSchema, dialect: Dialect, cfg: MockModelConfig
) -> str:
    """Render the mock prediction set in the dialect's output grammar.

    With both rates at zero this is byte-equal to the gold completion.
    """
    predictions = mock_predictions(inst, schema, dialect, cfg)
    return render_annotation_collection(predictions, inst.text, schema, dialect)
