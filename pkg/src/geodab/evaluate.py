"""Retrieval-quality and query-latency measurement.

Curves are micro-averaged: the per-query ranked lists are pooled by score
before sweeping, and the ROC universe is the full corpus so true negatives
are well defined. The geohash-cell index is the order-insensitive
comparator: same machinery, but terms are distinct cells instead of
winnowed geodabs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Dict, Iterable, List, NamedTuple, Sequence, Set, Tuple

import numpy as np

from .fingerprint import FingerprintRecord, FingerprintSequence
from .index import FingerprintSet, GeodabIndex
from .normalize import Trajectory, normalize

__all__ = [
    "CurvePoint",
    "QueryBenchRow",
    "GeohashCellIndex",
    "geohash_baseline_fingerprints",
    "pr_curve",
    "average_precision",
    "roc_auc",
    "corpus_scores",
    "normalization_sweep",
    "query_bench",
]

Ranked = Dict[str, List[Tuple[str, float]]]
Truth = Dict[str, Set[str]]


class CurvePoint(NamedTuple):
    x: float  # recall (PR) or false-positive rate (ROC)
    y: float  # precision (PR) or true-positive rate (ROC)


def geohash_baseline_fingerprints(trajectory: Trajectory, depth: int = 36) -> FingerprintSet:
    """Distinct depth-``depth`` cells of the normalized trajectory.

    No ordering hash: a trajectory and its reverse get identical sets.
    """
    return FingerprintSet(np.unique(normalize(trajectory, depth).cell_bits))


class GeohashCellIndex(GeodabIndex):
    """Inverted index whose terms are bare cells (direction-blind)."""

    def __init__(self, depth: int = 36):
        super().__init__(depth=depth)

    def _extract(self, normalized) -> FingerprintSequence:
        _, first = np.unique(normalized.cell_bits, return_index=True)
        records = [FingerprintRecord(int(normalized.cell_bits[i]), int(i)) for i in sorted(first)]
        return FingerprintSequence(normalized.id, records)

    def save(self, path) -> None:
        raise NotImplementedError("the binary index format is defined for 32-bit geodab terms only")


def _check_truth(results: Ranked, truth: Truth) -> None:
    missing = [q for q in results if q not in truth]
    if missing:
        raise ValueError(f"queries missing from ground truth: {missing[:5]}")


def _pooled(results: Ranked, truth: Truth) -> Tuple[List[bool], int]:
    """Pool all retrievals by ascending distance; returns labels and the
    total number of relevant items across queries."""
    _check_truth(results, truth)
    items = []
    for qid, ranked in results.items():
        relevant = truth[qid]
        for tid, d in ranked:
            items.append((d, qid, tid, tid in relevant))
    items.sort(key=lambda it: (it[0], it[1], it[2]))
    total_relevant = sum(len(truth[q]) for q in results)
    return [it[3] for it in items], total_relevant


def pr_curve(results: Ranked, truth: Truth) -> List[CurvePoint]:
    """Micro-averaged precision/recall, one point per relevant retrieval."""
    labels, total_relevant = _pooled(results, truth)
    if total_relevant == 0:
        raise ValueError("ground truth has no relevant items for these queries")
    points = []
    tp = 0
    for rank, is_relevant in enumerate(labels, start=1):
        if is_relevant:
            tp += 1
            points.append(CurvePoint(tp / total_relevant, tp / rank))
    return points


def average_precision(results: Ranked, truth: Truth) -> float:
    """Area under the pooled PR curve (mean precision at relevant hits)."""
    labels, total_relevant = _pooled(results, truth)
    if total_relevant == 0:
        raise ValueError("ground truth has no relevant items for these queries")
    tp = 0
    total = 0.0
    for rank, is_relevant in enumerate(labels, start=1):
        if is_relevant:
            tp += 1
            total += tp / rank
    return total / total_relevant


def precision_at_recall(curve: Sequence[CurvePoint], recall: float) -> float:
    """Precision of the first curve point at or past the given recall."""
    for point in curve:
        if point.x >= recall:
            return point.y
    return 0.0


def roc_auc(scores: Ranked, truth: Truth) -> Tuple[List[CurvePoint], float]:
    """ROC over pooled scores (distance ascending) and trapezoid AUC.

    ``scores`` should cover the whole corpus per query (see
    :func:`corpus_scores`); tied distances advance as one group so the AUC
    is tie-correct.
    """
    _check_truth(scores, truth)
    pooled = []
    for qid, ranked in scores.items():
        relevant = truth[qid]
        for tid, d in ranked:
            pooled.append((d, tid in relevant))
    pooled.sort(key=lambda it: it[0])
    pos = sum(1 for _, rel in pooled if rel)
    neg = len(pooled) - pos
    if pos == 0 or neg == 0:
        raise ValueError(f"ROC needs both classes; got {pos} positive and {neg} negative pairs")
    points = [CurvePoint(0.0, 0.0)]
    auc = 0.0
    tp = fp = 0
    i = 0
    while i < len(pooled):
        j = i
        while j < len(pooled) and pooled[j][0] == pooled[i][0]:
            if pooled[j][1]:
                tp += 1
            else:
                fp += 1
            j += 1
        prev = points[-1]
        point = CurvePoint(fp / neg, tp / pos)
        auc += (point.x - prev.x) * (point.y + prev.y) / 2.0
        points.append(point)
        i = j
    return points, auc


def corpus_scores(index: GeodabIndex, queries: Iterable[Trajectory]) -> Ranked:
    """Distance of every query to every indexed trajectory."""
    return {q.id: index.distances_to_corpus(q) for q in queries}


def run_queries(
    index: GeodabIndex,
    queries: Iterable[Trajectory],
    max_distance: float = 1.0,
    limit=None,
) -> Ranked:
    import warnings as _warnings

    results = {}
    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore")  # below-noise queries score as empty lists
        for q in queries:
            results[q.id] = index.query(q, max_distance=max_distance, limit=limit)
    return results


def normalization_sweep(
    trajectories: Sequence[Trajectory],
    queries: Sequence[Trajectory],
    truth: Truth,
    depths: Sequence[int],
    kgram_size: int = 6,
    guarantee_threshold: int = 12,
    prefix_bits: int = 16,
) -> Dict[int, List[CurvePoint]]:
    """PR curve per normalization depth (one index built per depth)."""
    if len(depths) == 0:
        raise ValueError("normalization sweep needs at least one depth")
    curves = {}
    for depth in depths:
        index = GeodabIndex(kgram_size, guarantee_threshold, depth, prefix_bits).fit(trajectories)
        curves[depth] = pr_curve(run_queries(index, queries), truth)
    return curves


@dataclass(frozen=True)
class QueryBenchRow:
    index_label: str
    density: float
    mean_ms: float
    p95_ms: float


def query_bench(
    variants: Dict[str, GeodabIndex],
    queries: Sequence[Trajectory],
    density: float,
) -> List[QueryBenchRow]:
    """Per-variant end-to-end query latency over a fixed query set."""
    rows = []
    for label in sorted(variants):
        index = variants[label]
        times = []
        for q in queries:
            t0 = time.perf_counter()
            index.query(q, max_distance=1.0)
            times.append((time.perf_counter() - t0) * 1000.0)
        if times:
            rows.append(QueryBenchRow(label, density, float(np.mean(times)), float(np.percentile(times, 95))))
    return rows
