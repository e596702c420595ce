"""Trajectories and geohash-cell normalization.

Normalization maps every point to its fixed-depth geohash cell, collapses
runs of consecutive duplicates and replaces each cell with its center, so
that noisy recordings of the same path converge toward the same sequence
of points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import geo
from .geo import Geohash, Point

DEFAULT_DEPTH = 36

__all__ = ["DEFAULT_DEPTH", "Trajectory", "NormalizedTrajectory", "normalize", "TrajectoryNormalizer"]


@dataclass(eq=False)
class Trajectory:
    """An identified, ordered sequence of GPS samples (direction matters)."""

    id: str
    points: List[Point]
    label: Optional[str] = None

    def __len__(self) -> int:
        return len(self.points)

    def coords(self) -> np.ndarray:
        """(n, 2) lat/lon array view of the points."""
        return np.asarray(self.points, dtype=np.float64).reshape(len(self.points), 2)

    def metric_length(self) -> float:
        """Ground length in meters (sum of consecutive haversine hops)."""
        return geo.path_length(self.coords())

    def reversed(self) -> "Trajectory":
        return Trajectory(self.id, list(reversed(self.points)), self.label)


@dataclass(eq=False)
class NormalizedTrajectory:
    """Cell sequence at a fixed depth with centers as the point sequence.

    No two consecutive cells are equal; ``coords[i]`` is the center of
    ``cell_bits[i]``.
    """

    id: str
    depth: int
    cell_bits: np.ndarray  # uint64, shape (m,)
    coords: np.ndarray  # float64, shape (m, 2)
    label: Optional[str] = None

    def __len__(self) -> int:
        return len(self.cell_bits)

    @property
    def cells(self) -> List[Geohash]:
        return [Geohash(int(b), self.depth) for b in self.cell_bits]

    @property
    def points(self) -> List[Point]:
        return [Point(float(lat), float(lon)) for lat, lon in self.coords]

    def metric_length(self) -> float:
        return geo.path_length(self.coords)

    def as_trajectory(self) -> Trajectory:
        """View the cell centers as a plain trajectory (same id/label)."""
        return Trajectory(self.id, self.points, self.label)


def normalize(trajectory: Trajectory, depth: int = DEFAULT_DEPTH) -> NormalizedTrajectory:
    """Normalize a trajectory to depth-``depth`` cell centers.

    Consecutive duplicate cells collapse to one, so the output is never
    longer than the input. Empty trajectories are rejected.
    """
    if not 1 <= depth <= geo.MAX_DEPTH:
        raise ValueError(f"normalization depth {depth} outside [1, {geo.MAX_DEPTH}]")
    if len(trajectory.points) == 0:
        raise ValueError(f"trajectory {trajectory.id!r} is empty")
    coords = geo.check_coords(trajectory.coords())
    bits = geo.encode_coords(coords[:, 0], coords[:, 1], depth)
    keep = np.empty(len(bits), dtype=bool)
    keep[0] = True
    keep[1:] = bits[1:] != bits[:-1]
    cell_bits = bits[keep]
    return NormalizedTrajectory(
        id=trajectory.id,
        depth=depth,
        cell_bits=cell_bits,
        coords=geo.decode_centers(cell_bits, depth),
        label=trajectory.label,
    )


class TrajectoryNormalizer(BaseEstimator, TransformerMixin):
    """Stateless transformer form of :func:`normalize` for pipelines."""

    def __init__(self, depth: int = DEFAULT_DEPTH):
        self.depth = depth

    def fit(self, X: Iterable[Trajectory] = (), y=None) -> "TrajectoryNormalizer":
        if not 1 <= self.depth <= geo.MAX_DEPTH:
            raise ValueError(f"normalization depth {self.depth} outside [1, {geo.MAX_DEPTH}]")
        return self

    def transform(self, X: Iterable[Trajectory]) -> List[NormalizedTrajectory]:
        return [normalize(t, self.depth) for t in X]
