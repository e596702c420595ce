"""Motif discovery: fingerprint-window search and the exact brute-force oracle.

The fingerprint method converts a motif length in meters into a number of
fingerprints using the dataset's fingerprint density, then exhaustively
scans all same-length fingerprint windows for the pair with minimal
Jaccard distance. The exact oracle minimizes discrete Frechet distance
over all same-length sub-trajectory pairs (O(n^4), small inputs only).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

from . import geo
from .baseline import dfd_from_cost
from .fingerprint import FingerprintSequence
from .index import GeodabIndex
from .normalize import Trajectory

__all__ = ["FingerprintDensity", "MotifResult", "estimate_density", "motif_geodab", "motif_exact"]


@dataclass(frozen=True)
class FingerprintDensity:
    """Average fingerprints extracted per meter of normalized trajectory."""

    per_meter: float

    def fingerprint_count(self, length_m: float) -> int:
        return int(round(length_m * self.per_meter))


@dataclass(frozen=True)
class MotifResult:
    """Half-open point-index ranges into the two (normalized) trajectories."""

    range_i: Tuple[int, int]
    range_j: Tuple[int, int]
    distance: float
    method: str


def estimate_density(index: GeodabIndex) -> FingerprintDensity:
    """Dataset-level ratio of winnowed fingerprints to normalized meters."""
    total_fp = sum(m.fingerprint_count for m in index.meta_.values())
    total_m = sum(m.norm_length_m for m in index.meta_.values())
    if total_fp == 0 or total_m <= 0.0:
        raise ValueError(
            f"cannot estimate fingerprint density: {total_fp} fingerprints over {total_m:.1f} m"
        )
    return FingerprintDensity(total_fp / total_m)


def motif_geodab(
    seq_i: FingerprintSequence,
    seq_j: FingerprintSequence,
    length_m: float,
    density: FingerprintDensity,
    kgram_size: int = 6,
) -> MotifResult:
    """Best same-length fingerprint-window pair by Jaccard distance.

    The motif length in meters translates to ``f = round(length_m * a)``
    fingerprints. All ``(len_i - f + 1) * (len_j - f + 1)`` window pairs
    are scanned; ties resolve to the earliest window in ``seq_i`` then in
    ``seq_j``. Returned ranges span from each window's first k-gram start
    to its last k-gram end.
    """
    f = density.fingerprint_count(length_m)
    if f < 1:
        raise ValueError(f"motif length {length_m:.1f} m translates to zero fingerprints")
    for name, seq in (("first", seq_i), ("second", seq_j)):
        if len(seq) < f:
            raise ValueError(
                f"{name} trajectory {seq.trajectory_id!r} has {len(seq)} fingerprints, fewer than the {f} required"
            )
    windows_i = _windows(seq_i, f)
    windows_j = _windows(seq_j, f)
    best = None
    best_key = None
    for a, wi in enumerate(windows_i):
        for b, wj in enumerate(windows_j):
            inter = len(wi & wj)
            d = 1.0 - inter / (len(wi) + len(wj) - inter)
            if best_key is None or d < best_key:
                best_key = d
                best = (a, b)
    a, b = best
    return MotifResult(
        range_i=_point_range(seq_i, a, f, kgram_size),
        range_j=_point_range(seq_j, b, f, kgram_size),
        distance=best_key,
        method="geodab",
    )


def _windows(seq: FingerprintSequence, f: int) -> List[frozenset]:
    values = seq.values
    return [frozenset(values[a : a + f]) for a in range(len(values) - f + 1)]


def _point_range(seq: FingerprintSequence, start: int, f: int, kgram_size: int) -> Tuple[int, int]:
    # the last record's k-gram covers kgram_size points past its start
    first = seq.records[start].position
    last = seq.records[start + f - 1].position
    return (first, last + kgram_size)


def motif_exact(traj_i: Trajectory, traj_j: Trajectory, length_points: int) -> MotifResult:
    """Exact motif: minimal DFD over all ``length_points``-point windows.

    Quadratic in each trajectory length and in the motif length; intended
    for trajectories of at most a few dozen points.
    """
    m, n = len(traj_i.points), len(traj_j.points)
    if not 1 <= length_points <= min(m, n):
        raise ValueError(f"motif length {length_points} outside [1, {min(m, n)}]")
    cost = geo.pairwise_distances(traj_i.coords(), traj_j.coords()).tolist()
    l = length_points
    best = None
    best_key = None
    for a in range(m - l + 1):
        for b in range(n - l + 1):
            window = [row[b : b + l] for row in cost[a : a + l]]
            d = dfd_from_cost(window)
            if best_key is None or d < best_key:
                best_key = d
                best = (a, b)
    a, b = best
    return MotifResult(range_i=(a, a + l), range_j=(b, b + l), distance=best_key, method="exact")
