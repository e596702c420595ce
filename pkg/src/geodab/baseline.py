"""Exact trajectory distances: DTW and discrete Frechet, plus cost benchmarks.

Both are iterative O(m*n) tabulations over a precomputed haversine cost
matrix; the DP rows are plain float lists because Python-level indexing
into numpy scalars dominates otherwise.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import List

import numpy as np

from . import geo
from .fingerprint import FingerprintParams, winnow
from .index import FingerprintSet, jaccard_distance
from .normalize import Point, Trajectory, normalize

__all__ = ["dtw", "dfd", "dtw_from_cost", "dfd_from_cost", "BenchRecord", "bench_distance", "random_walk"]

_INF = math.inf


def _cost_matrix(p: Trajectory, q: Trajectory) -> List[List[float]]:
    if len(p.points) == 0 or len(q.points) == 0:
        raise ValueError("distance between empty trajectories is undefined")
    return geo.pairwise_distances(p.coords(), q.coords()).tolist()


def dtw_from_cost(cost: List[List[float]]) -> float:
    """Dynamic time warping over a ground-distance matrix (sum of costs)."""
    m, n = len(cost), len(cost[0])
    prev = [0.0] + [_INF] * n
    for i in range(1, m + 1):
        row = cost[i - 1]
        cur = [_INF] * (n + 1)
        for j in range(1, n + 1):
            best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            if prev[j - 1] < best:
                best = prev[j - 1]
            cur[j] = row[j - 1] + best
        prev = cur
    return prev[n]


def dfd_from_cost(cost: List[List[float]]) -> float:
    """Discrete Frechet distance over a ground-distance matrix (bottleneck)."""
    m, n = len(cost), len(cost[0])
    prev = [_INF] * (n + 1)
    for i in range(1, m + 1):
        row = cost[i - 1]
        cur = [_INF] * (n + 1)
        for j in range(1, n + 1):
            if i == 1 and j == 1:
                cur[1] = row[0]
                continue
            best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            if prev[j - 1] < best:
                best = prev[j - 1]
            d = row[j - 1]
            cur[j] = d if d > best else best
        prev = cur
    return prev[n]


def dtw(p: Trajectory, q: Trajectory) -> float:
    """DTW distance in meters; symmetric, 0 for identical trajectories."""
    return dtw_from_cost(_cost_matrix(p, q))


def dfd(p: Trajectory, q: Trajectory) -> float:
    """Discrete Frechet distance in meters."""
    return dfd_from_cost(_cost_matrix(p, q))


@dataclass(frozen=True)
class BenchRecord:
    method: str
    traj_len: int
    candidates: int
    millis: float


def random_walk(length: int, rng: np.random.Generator, start: Point = Point(51.5, -0.1), step_m: float = 15.0) -> Trajectory:
    """Synthetic benchmark trajectory: a bounded random walk."""
    deg_lat = step_m * 180.0 / (math.pi * geo.EARTH_RADIUS_M)
    deg_lon = deg_lat / math.cos(math.radians(start.lat))
    steps = rng.standard_normal((length, 2))
    coords = np.cumsum(steps * (deg_lat, deg_lon), axis=0) + (start.lat, start.lon)
    return Trajectory("walk", [Point(float(a), float(b)) for a, b in coords])


def bench_distance(
    method: str,
    traj_len: int,
    candidates: int,
    seed: int = 0,
    repeats: int = 3,
    params: FingerprintParams | None = None,
) -> BenchRecord:
    """Time scoring one query of ``traj_len`` points against ``candidates``
    same-length candidates; best of ``repeats`` wall-clock runs.

    For ``jaccard`` the candidate fingerprint sets are precomputed (as an
    index would hold them) and the timed work is query extraction plus the
    set comparisons.
    """
    if method not in ("dtw", "dfd", "jaccard"):
        raise ValueError(f"unknown method {method!r}")
    rng = np.random.default_rng(seed)
    query = random_walk(traj_len, rng)
    others = [random_walk(traj_len, rng) for _ in range(candidates)]
    best = _INF
    if method == "jaccard":
        params = params or FingerprintParams()
        cand_sets = [FingerprintSet(np.asarray(winnow(normalize(t, params.depth), params).values, dtype=np.uint64)) for t in others]
        for _ in range(repeats):
            t0 = time.perf_counter()
            qset = FingerprintSet(np.asarray(winnow(normalize(query, params.depth), params).values, dtype=np.uint64))
            for cset in cand_sets:
                jaccard_distance(qset, cset)
            best = min(best, time.perf_counter() - t0)
    else:
        score = dtw if method == "dtw" else dfd
        for _ in range(repeats):
            t0 = time.perf_counter()
            for t in others:
                score(query, t)
            best = min(best, time.perf_counter() - t0)
    return BenchRecord(method, traj_len, candidates, best * 1000.0)
