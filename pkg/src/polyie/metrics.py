"""Voting/Union/Intersection aggregation, Jaccard similarity and Micro-F1."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .model import Annotation, Dialect

AnnSet = frozenset


@dataclass(frozen=True)
class ScoreReport:
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def to_json(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "p": self.precision,
            "r": self.recall,
            "f1": self.f1,
        }


def vote(sets: Sequence[Iterable[Annotation]], threshold: int | None = None) -> frozenset:
    """Annotations appearing in at least ``threshold`` of the input sets.

    Default threshold is a strict majority of the inputs.
    """
    k = len(sets)
    if k < 1:
        raise ValueError("vote needs at least one input set")
    if threshold is None:
        threshold = k // 2 + 1
    if not 1 <= threshold <= k:
        raise ValueError(f"threshold {threshold} out of range 1..{k}")
    counts: Counter = Counter()
    for s in sets:
        counts.update(set(s))
    return frozenset(a for a, n in counts.items() if n >= threshold)


def union_agg(sets: Sequence[Iterable[Annotation]]) -> frozenset:
    if not sets:
        raise ValueError("union_agg needs at least one input set")
    return frozenset().union(*(frozenset(s) for s in sets))


def intersect_agg(sets: Sequence[Iterable[Annotation]]) -> frozenset:
    if not sets:
        raise ValueError("intersect_agg needs at least one input set")
    out = frozenset(sets[0])
    for s in sets[1:]:
        out &= frozenset(s)
    return out


def jaccard(a: Iterable[Annotation], b: Iterable[Annotation]) -> float:
    """|a ∩ b| / |a ∪ b|, with both-empty defined as 1.0."""
    a, b = frozenset(a), frozenset(b)
    union = a | b
    if not union:
        return 1.0
    return len(a & b) / len(union)


def dataset_jaccard(
    preds: Mapping[str, Mapping[Dialect, Iterable[Annotation]]],
    mode: str = "macro",
) -> float:
    """Cross-dialect agreement over a dataset.

    ``macro`` (default): per instance, the mean of the three pairwise Jaccard
    values, then the mean over instances. ``micro``: annotations pooled over
    instances per dialect first, then pairwise Jaccard of the pooled sets.
    """
    if not preds:
        raise ValueError("no instances")
    for iid, per_dialect in preds.items():
        missing = [d.value for d in Dialect if d not in per_dialect]
        if missing:
            raise ValueError(f"instance {iid!r} missing dialect(s): {missing}")
    if mode == "macro":
        per_instance = []
        for per_dialect in preds.values():
            pair_vals = [
                jaccard(per_dialect[a], per_dialect[b])
                for a, b in combinations(list(Dialect), 2)
            ]
            per_instance.append(sum(pair_vals) / len(pair_vals))
        return sum(per_instance) / len(per_instance)
    if mode == "micro":
        pooled: dict[Dialect, set] = {d: set() for d in Dialect}
        for iid, per_dialect in preds.items():
            for d in Dialect:
                pooled[d].update((iid, a) for a in per_dialect[d])
        pair_vals = [
            jaccard(pooled[a], pooled[b]) for a, b in combinations(list(Dialect), 2)
        ]
        return sum(pair_vals) / len(pair_vals)
    raise ValueError(f"unknown mode: {mode!r}")


def pairwise_jaccard(
    preds: Mapping[str, Mapping[Dialect, Iterable[Annotation]]],
) -> dict[tuple[Dialect, Dialect], float]:
    """Per-pair macro Jaccard, one value per unordered dialect pair."""
    out = {}
    for a, b in combinations(list(Dialect), 2):
        vals = [jaccard(per[a], per[b]) for per in preds.values()]
        out[(a, b)] = sum(vals) / len(vals) if vals else 1.0
    return out


def micro_f1(
    preds: Mapping[str, Iterable[Annotation]],
    golds: Mapping[str, Iterable[Annotation]],
) -> ScoreReport:
    """Corpus-pooled Micro-F1 over per-instance annotation sets.

    A missing prediction counts as an empty set.
    """
    tp = fp = fn = 0
    ids = set(preds) | set(golds)
    for iid in ids:
        p = frozenset(preds.get(iid, ()))
        g = frozenset(golds.get(iid, ()))
        tp += len(p & g)
        fp += len(p - g)
        fn += len(g - p)
    return ScoreReport(tp=tp, fp=fp, fn=fn)


def oracle_recall_score(
    preds: Mapping[str, Mapping[Dialect, Iterable[Annotation]]],
    golds: Mapping[str, Iterable[Annotation]],
) -> ScoreReport:
    """Best-case scoring: a gold item counts as found when any dialect
    predicted it; a false positive is charged only when every dialect agrees
    on it."""
    tp = fp = fn = 0
    for iid, g in golds.items():
        g = frozenset(g)
        per_dialect = [frozenset(preds[iid][d]) for d in Dialect] if iid in preds else [frozenset()]
        u = union_agg(per_dialect)
        inter = intersect_agg(per_dialect)
        tp += len(g & u)
        fn += len(g - u)
        fp += len(inter - g)
    return ScoreReport(tp=tp, fp=fp, fn=fn)


def union_voting_gap(
    preds: Mapping[str, Mapping[Dialect, Iterable[Annotation]]],
    golds: Mapping[str, Iterable[Annotation]],
    threshold: int | None = None,
) -> float:
    """Micro-F1(union) minus Micro-F1(vote), in F1 points (x100)."""
    unioned = {iid: union_agg([per[d] for d in Dialect]) for iid, per in preds.items()}
    voted = {iid: vote([per[d] for d in Dialect], threshold) for iid, per in preds.items()}
    return (micro_f1(unioned, golds).f1 - micro_f1(voted, golds).f1) * 100.0


@dataclass(frozen=True)
class EnsembleReport:
    voted: frozenset
    unioned: frozenset
    intersected: frozenset
    pair_jaccard: dict
    mean_jaccard: float


def ensemble_instance(sets: Mapping[Dialect, Iterable[Annotation]]) -> EnsembleReport:
    """All aggregations and agreement values for one instance's triple."""
    ordered = [frozenset(sets[d]) for d in Dialect]
    pair = {
        (a, b): jaccard(sets[a], sets[b]) for a, b in combinations(list(Dialect), 2)
    }
    return EnsembleReport(
        voted=vote(ordered),
        unioned=union_agg(ordered),
        intersected=intersect_agg(ordered),
        pair_jaccard=pair,
        mean_jaccard=sum(pair.values()) / len(pair),
    )
