"""Trajectory text format.

One trajectory per line: ``id<TAB>lat,lon;lat,lon;...`` in decimal degrees.
Lines starting with ``#`` are comments; blank lines are skipped.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Dict, Iterable, List, Set

from .geo import Point, check_point
from .normalize import Trajectory

__all__ = ["TrajectoryFormatError", "read_trajectories", "write_trajectories", "read_truth"]


class TrajectoryFormatError(ValueError):
    """A malformed line, reported with its file and line number."""


def read_trajectories(path) -> List[Trajectory]:
    trajectories = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            try:
                trajectories.append(_parse_line(line))
            except ValueError as exc:
                raise TrajectoryFormatError(f"{path}:{lineno}: {exc}") from None
    return trajectories


def _parse_line(line: str) -> Trajectory:
    tid, sep, rest = line.partition("\t")
    if not sep or not tid:
        raise ValueError("expected 'id<TAB>lat,lon;...'")
    points = []
    for chunk in rest.split(";"):
        lat_text, sep, lon_text = chunk.partition(",")
        if not sep:
            raise ValueError(f"bad point {chunk!r}, expected 'lat,lon'")
        points.append(check_point(Point(float(lat_text), float(lon_text))))
    if not points:
        raise ValueError("trajectory has no points")
    return Trajectory(tid, points)


def write_trajectories(path, trajectories: Iterable[Trajectory]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in trajectories:
            if "\t" in t.id or "\n" in t.id:
                raise ValueError(f"trajectory id {t.id!r} contains a separator character")
            body = ";".join(f"{p.lat!r},{p.lon!r}" for p in t.points)
            fh.write(f"{t.id}\t{body}\n")


def read_truth(path) -> Dict[str, Set[str]]:
    truth: Dict[str, Set[str]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["query_id", "relevant_id"]:
            raise TrajectoryFormatError(f"{path}: expected header 'query_id,relevant_id', got {header}")
        for row in reader:
            if not row:
                continue
            if len(row) != 2:
                raise TrajectoryFormatError(f"{path}: bad truth row {row}")
            truth.setdefault(row[0], set()).add(row[1])
    return truth
