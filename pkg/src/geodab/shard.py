"""Locality-preserving shard mapping on the space-filling curve.

The geohash prefix of a geodab is a position on the z-order curve;
contiguous equal-width prefix ranges map to shards, and shards map to
nodes by modulo (which deliberately breaks locality to balance load).
Sharding here is simulated in-process: assignment, routing accounting and
distribution reporting, no network layer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Set

from .fingerprint import FingerprintSequence
from .index import GeodabIndex

__all__ = ["ShardConfig", "LoadReport", "shard_of", "node_of", "shards_for_query", "distribution_report"]


@dataclass(frozen=True)
class ShardConfig:
    num_shards: int
    num_nodes: int
    prefix_bits: int = 16

    def __post_init__(self) -> None:
        if not self.num_shards >= self.num_nodes >= 1:
            raise ValueError(f"need num_shards >= num_nodes >= 1, got {self.num_shards} and {self.num_nodes}")
        if not 1 <= self.prefix_bits < 32:
            raise ValueError(f"prefix_bits {self.prefix_bits} outside [1, 31]")
        if self.num_shards > (1 << self.prefix_bits):
            raise ValueError(f"num_shards {self.num_shards} exceeds 2^{self.prefix_bits} prefix cells")


@dataclass
class LoadReport:
    """Trajectory counts per prefix cell, shard and node.

    A trajectory counts once per distinct prefix cell its geodabs touch;
    totals are conserved across the three levels. ``imbalance`` is the
    max/mean per-node load (1.0 = perfectly balanced).
    """

    cell_counts: Dict[int, int]
    shard_counts: Dict[int, int]
    node_counts: Dict[int, int]
    imbalance: float


def shard_of(geodab_value: int, cfg: ShardConfig) -> int:
    """Shard holding a geodab: equal-width prefix ranges along the curve."""
    prefix = geodab_value >> (32 - cfg.prefix_bits)
    return (prefix * cfg.num_shards) >> cfg.prefix_bits


def node_of(shard_id: int, cfg: ShardConfig) -> int:
    return shard_id % cfg.num_nodes


def shards_for_query(fingerprints: FingerprintSequence, cfg: ShardConfig) -> Set[int]:
    """Distinct shards a query would have to contact."""
    return {shard_of(r.value, cfg) for r in fingerprints.records}


def distribution_report(index: GeodabIndex, cfg: ShardConfig) -> LoadReport:
    """Aggregate an index's load per cell, shard and node."""
    if cfg.prefix_bits > index.prefix_bits:
        raise ValueError(
            f"shard prefix_bits {cfg.prefix_bits} exceeds the index prefix of {index.prefix_bits} bits"
        )
    cell_counts: Dict[int, int] = {}
    for fset in index.sets_.values():
        prefixes = {int(v) >> (32 - cfg.prefix_bits) for v in fset.values}
        for p in prefixes:
            cell_counts[p] = cell_counts.get(p, 0) + 1
    shard_counts: Dict[int, int] = {}
    node_counts: Dict[int, int] = {}
    for p, count in cell_counts.items():
        shard = (p * cfg.num_shards) >> cfg.prefix_bits
        shard_counts[shard] = shard_counts.get(shard, 0) + count
        node = node_of(shard, cfg)
        node_counts[node] = node_counts.get(node, 0) + count
    total = sum(node_counts.values())
    imbalance = max(node_counts.values()) / (total / cfg.num_nodes) if total else 0.0
    return LoadReport(cell_counts, shard_counts, node_counts, imbalance)
