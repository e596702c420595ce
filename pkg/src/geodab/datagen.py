"""Synthetic dense-trajectory generator with queries and ground truth.

Routes are shortest paths on a jittered grid road graph. Each route yields
noisy trajectories in both directions, sampled at a uniform rate, plus one
held-out query per direction; ground truth marks the indexed trajectories
of the same route and direction as relevant.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Set, Tuple

import networkx as nx
import numpy as np

from . import geo
from .normalize import Point, Trajectory

__all__ = ["GenConfig", "RoadGraph", "GeneratedDataset", "build_graph", "generate", "write_dataset"]


@dataclass(frozen=True)
class GenConfig:
    seed: int = 7
    num_routes: int = 50
    traj_per_direction: int = 10
    sample_hz: float = 1.0
    noise_sigma_m: float = 20.0
    noise_correlation_s: float = 60.0
    speed_mps: float = 30.0
    box: Tuple[float, float, float, float] = (51.38, 51.62, -0.40, 0.10)  # lat_min, lat_max, lon_min, lon_max
    grid_size: int = 24
    min_route_m: float = 6000.0
    edge_removal: float = 0.1

    def __post_init__(self) -> None:
        lat_min, lat_max, lon_min, lon_max = self.box
        if not (lat_min < lat_max and lon_min < lon_max):
            raise ValueError(f"degenerate bounding box {self.box}")
        if self.grid_size < 2:
            raise ValueError(f"grid_size {self.grid_size} too small for a road graph")
        for name in ("num_routes", "traj_per_direction", "sample_hz", "speed_mps", "min_route_m"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.noise_sigma_m < 0:
            raise ValueError("noise_sigma_m must be >= 0")
        if self.noise_correlation_s < 0:
            raise ValueError("noise_correlation_s must be >= 0")
        if not 0.0 <= self.edge_removal < 1.0:
            raise ValueError("edge_removal must be in [0, 1)")

    @property
    def spacing_m(self) -> float:
        return self.speed_mps / self.sample_hz


@dataclass
class RoadGraph:
    graph: nx.Graph  # nodes are (row, col), attribute "coord" is (lat, lon)
    coords: Dict[Tuple[int, int], Tuple[float, float]]
    box: Tuple[float, float, float, float]


@dataclass
class GeneratedDataset:
    config: GenConfig
    trajectories: List[Trajectory]
    queries: List[Trajectory]
    truth: Dict[str, Set[str]] = field(default_factory=dict)


def build_graph(cfg: GenConfig) -> RoadGraph:
    """Jittered grid over the box with ~``edge_removal`` of edges deleted.

    Deletions that would disconnect the graph are skipped, so the result
    stays connected; everything is deterministic per seed.
    """
    rng = np.random.default_rng(cfg.seed)
    lat_min, lat_max, lon_min, lon_max = cfg.box
    n = cfg.grid_size
    lat_step = (lat_max - lat_min) / (n - 1)
    lon_step = (lon_max - lon_min) / (n - 1)
    jitter = rng.uniform(-0.25, 0.25, size=(n, n, 2))
    coords: Dict[Tuple[int, int], Tuple[float, float]] = {}
    g = nx.Graph()
    for r in range(n):
        for c in range(n):
            lat = lat_min + (r + (jitter[r, c, 0] if 0 < r < n - 1 else 0.0)) * lat_step
            lon = lon_min + (c + (jitter[r, c, 1] if 0 < c < n - 1 else 0.0)) * lon_step
            coords[(r, c)] = (lat, lon)
            g.add_node((r, c), coord=(lat, lon))
    for r in range(n):
        for c in range(n):
            for dr, dc in ((0, 1), (1, 0)):
                rr, cc = r + dr, c + dc
                if rr < n and cc < n:
                    w = geo.haversine(Point(*coords[(r, c)]), Point(*coords[(rr, cc)]))
                    g.add_edge((r, c), (rr, cc), weight=w)
    edges = list(g.edges())
    order = rng.permutation(len(edges))
    target = int(cfg.edge_removal * len(edges))
    removed = 0
    for i in order:
        if removed >= target:
            break
        u, v = edges[i]
        w = g[u][v]["weight"]
        g.remove_edge(u, v)
        if nx.is_connected(g):
            removed += 1
        else:
            g.add_edge(u, v, weight=w)
    return RoadGraph(graph=g, coords=coords, box=cfg.box)


def _sample_route(road: RoadGraph, cfg: GenConfig, rng: np.random.Generator) -> np.ndarray:
    """One shortest-path polyline of at least ``min_route_m`` meters."""
    nodes = sorted(road.graph.nodes())
    for _ in range(200):
        a, b = rng.choice(len(nodes), size=2, replace=False)
        path = nx.shortest_path(road.graph, nodes[a], nodes[b], weight="weight")
        coords = np.asarray([road.coords[p] for p in path], dtype=np.float64)
        if geo.path_length(coords) >= cfg.min_route_m:
            return coords
    raise ValueError(
        f"could not find a route of {cfg.min_route_m} m in 200 attempts; box or min_route_m unsuitable"
    )


def _noise(count: int, cfg: GenConfig, rng: np.random.Generator) -> np.ndarray:
    """Isotropic Gaussian receiver noise in meters, N(0, sigma^2) per axis.

    GPS error drifts rather than flickering, so the noise is a stationary
    first-order Gauss-Markov process with time constant
    ``noise_correlation_s``; every point's marginal stays exactly
    N(0, sigma^2). Draws happen unconditionally so the RNG stream (and
    with it the sampled geometry) is identical for sigma = 0.
    """
    white = rng.standard_normal((count, 2))
    if cfg.noise_correlation_s > 0.0 and count > 1:
        rho = math.exp(-1.0 / (cfg.sample_hz * cfg.noise_correlation_s))
        innovation = math.sqrt(1.0 - rho * rho)
        for k in range(1, count):
            white[k] = rho * white[k - 1] + innovation * white[k]
    return white * cfg.noise_sigma_m


def _sample_trajectory(polyline: np.ndarray, cfg: GenConfig, rng: np.random.Generator) -> List[Point]:
    """Uniformly spaced samples along the polyline plus receiver noise."""
    seg = geo.haversine_coords(polyline[:-1], polyline[1:])
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    count = int(total // cfg.spacing_m) + 1
    targets = np.arange(count) * cfg.spacing_m
    idx = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, len(seg) - 1)
    frac = (targets - cum[idx]) / np.where(seg[idx] > 0.0, seg[idx], 1.0)
    pts = polyline[idx] + (polyline[idx + 1] - polyline[idx]) * frac[:, None]
    noise = _noise(count, cfg, rng)
    deg_per_m = 180.0 / (math.pi * geo.EARTH_RADIUS_M)
    lat = pts[:, 0] + noise[:, 0] * deg_per_m
    lon = pts[:, 1] + noise[:, 1] * deg_per_m / np.cos(np.radians(pts[:, 0]))
    return [Point(float(a), float(b)) for a, b in zip(lat, lon)]


def generate(cfg: GenConfig) -> GeneratedDataset:
    """Build the graph, the routes, and all trajectories/queries/truth."""
    road = build_graph(cfg)
    rng = np.random.default_rng(cfg.seed + 1)
    trajectories: List[Trajectory] = []
    queries: List[Trajectory] = []
    truth: Dict[str, Set[str]] = {}
    for i in range(cfg.num_routes):
        route = _sample_route(road, cfg, rng)
        for direction, polyline in (("f", route), ("r", route[::-1])):
            label = f"r{i:04d}-{direction}"
            ids = []
            for j in range(cfg.traj_per_direction):
                tid = f"{label}-{j:02d}"
                trajectories.append(Trajectory(tid, _sample_trajectory(polyline, cfg, rng), label=label))
                ids.append(tid)
            qid = f"q-{label}"
            queries.append(Trajectory(qid, _sample_trajectory(polyline, cfg, rng), label=label))
            truth[qid] = set(ids)
    return GeneratedDataset(config=cfg, trajectories=trajectories, queries=queries, truth=truth)


def write_dataset(dataset: GeneratedDataset, out_dir) -> None:
    """Write trajectories.txt, queries.txt and truth.csv into a directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    from .io import write_trajectories  # local import to avoid a cycle

    write_trajectories(out / "trajectories.txt", dataset.trajectories)
    write_trajectories(out / "queries.txt", dataset.queries)
    with open(out / "truth.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query_id", "relevant_id"])
        for qid in sorted(dataset.truth):
            for tid in sorted(dataset.truth[qid]):
                writer.writerow([qid, tid])
