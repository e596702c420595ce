"""Geodab construction and winnowing extraction.

A geodab packs a cell sequence window into 32 bits: the top ``prefix_bits``
are the geohash of the window's first cell (locality, used for sharding),
the remaining bits are an order-sensitive FNV-1a hash of the whole window
(direction and path discrimination). Winnowing then selects a guaranteed
subset of the window hashes as the trajectory's fingerprints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, NamedTuple, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from sklearn.base import BaseEstimator, TransformerMixin

from . import geo
from .normalize import NormalizedTrajectory, Trajectory, normalize

FNV_OFFSET = 0x811C9DC5
FNV_PRIME = 0x01000193
_U32 = np.uint64(0xFFFFFFFF)

__all__ = [
    "FingerprintParams",
    "FingerprintRecord",
    "FingerprintSequence",
    "fnv1a32",
    "kgrams",
    "make_geodab",
    "candidate_geodabs",
    "winnow_candidates",
    "winnow",
    "GeodabFingerprinter",
]


@dataclass(frozen=True)
class FingerprintParams:
    """Extraction parameters.

    ``kgram_size`` is the noise threshold (shorter matches are ignored),
    ``guarantee_threshold`` the detection threshold (common runs of at
    least this many cells always share a fingerprint). The winnowing
    window spans ``guarantee_threshold - kgram_size + 1`` candidates.
    """

    kgram_size: int = 6
    guarantee_threshold: int = 12
    depth: int = 36
    prefix_bits: int = 16

    def __post_init__(self) -> None:
        if not 1 <= self.kgram_size <= self.guarantee_threshold:
            raise ValueError(
                f"need 1 <= kgram_size <= guarantee_threshold, got {self.kgram_size} and {self.guarantee_threshold}"
            )
        if not 1 <= self.depth <= geo.MAX_DEPTH:
            raise ValueError(f"depth {self.depth} outside [1, {geo.MAX_DEPTH}]")
        if not 1 <= self.prefix_bits < 32:
            raise ValueError(f"prefix_bits {self.prefix_bits} outside [1, 31]")
        if self.prefix_bits > self.depth:
            raise ValueError(f"prefix_bits {self.prefix_bits} exceeds cell depth {self.depth}")

    @property
    def window(self) -> int:
        return self.guarantee_threshold - self.kgram_size + 1


class FingerprintRecord(NamedTuple):
    """One selected fingerprint and the k-gram start index it came from."""

    value: int
    position: int


@dataclass
class FingerprintSequence:
    """Ordered winnowing output for one trajectory (positions increase)."""

    trajectory_id: str
    records: List[FingerprintRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def values(self) -> List[int]:
        return [r.value for r in self.records]

    def distinct_values(self) -> set:
        return {r.value for r in self.records}


def fnv1a32(data: bytes) -> int:
    """Reference 32-bit FNV-1a."""
    h = FNV_OFFSET
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & 0xFFFFFFFF
    return h


def kgrams(normalized: NormalizedTrajectory, k: int) -> List[np.ndarray]:
    """All contiguous k-cell windows, in order; empty when input is short."""
    if k < 1:
        raise ValueError(f"kgram size {k} must be >= 1")
    n = len(normalized.cell_bits)
    if n < k:
        return []
    return list(sliding_window_view(normalized.cell_bits, k))


def _merge(prefix_value: int, suffix_hash: int, prefix_bits: int) -> int:
    """Bitwise merge: prefix left-aligned, hash masked into the low bits."""
    return (prefix_value << (32 - prefix_bits)) | (suffix_hash & ((1 << (32 - prefix_bits)) - 1))


def make_geodab(kgram: Sequence[int] | np.ndarray, params: FingerprintParams) -> int:
    """32-bit geodab of one k-gram of depth-``params.depth`` cell patterns."""
    cells = np.asarray(kgram, dtype=np.uint64)
    prefix_value = int(cells[0]) >> (params.depth - params.prefix_bits)
    digest = fnv1a32(b"".join(int(c).to_bytes(8, "big") for c in cells))
    return _merge(prefix_value, digest, params.prefix_bits)


def candidate_geodabs(cell_bits: np.ndarray, params: FingerprintParams) -> np.ndarray:
    """Geodabs of every k-gram of a cell-bit sequence (uint64 array).

    Vectorized FNV-1a over the big-endian 8-byte form of each cell;
    agrees bit-for-bit with :func:`make_geodab`.
    """
    cells = np.asarray(cell_bits, dtype=np.uint64)
    k = params.kgram_size
    m = len(cells) - k + 1
    if m <= 0:
        return np.empty(0, dtype=np.uint64)
    h = np.full(m, FNV_OFFSET, dtype=np.uint64)
    for j in range(k):
        col = cells[j : j + m]
        for byte_pos in range(8):
            byte = (col >> np.uint64((7 - byte_pos) * 8)) & np.uint64(0xFF)
            h = ((h ^ byte) * np.uint64(FNV_PRIME)) & _U32
    prefixes = cells[:m] >> np.uint64(params.depth - params.prefix_bits)
    suffix_mask = np.uint64((1 << (32 - params.prefix_bits)) - 1)
    return (prefixes << np.uint64(32 - params.prefix_bits)) | (h & suffix_mask)


def winnow_candidates(candidates: Sequence[int] | np.ndarray, window: int) -> List[FingerprintRecord]:
    """Select the right-most minimum of each sliding candidate window.

    Consecutive windows that pick the same candidate contribute a single
    record, so positions come out strictly increasing. Fewer candidates
    than ``window`` are treated as one window.
    """
    if window < 1:
        raise ValueError(f"window {window} must be >= 1")
    cand = np.asarray(candidates, dtype=np.uint64)
    m = len(cand)
    if m == 0:
        return []
    if m <= window:
        pos = m - 1 - int(np.argmin(cand[::-1]))
        return [FingerprintRecord(int(cand[pos]), pos)]
    views = sliding_window_view(cand, window)
    # argmin returns the first minimum; scanning the reversed window makes
    # that the right-most one
    rel = window - 1 - np.argmin(views[:, ::-1], axis=1)
    sel = np.arange(m - window + 1) + rel
    keep = np.empty(len(sel), dtype=bool)
    keep[0] = True
    keep[1:] = sel[1:] != sel[:-1]
    return [FingerprintRecord(int(cand[p]), int(p)) for p in sel[keep]]


def winnow(normalized: NormalizedTrajectory, params: FingerprintParams | None = None) -> FingerprintSequence:
    """Extract the winnowed fingerprint sequence of a normalized trajectory.

    Trajectories shorter than ``kgram_size`` cells produce no fingerprints
    (they are below the noise threshold, not an error).
    """
    params = params or FingerprintParams()
    if normalized.depth != params.depth:
        raise ValueError(f"trajectory normalized at depth {normalized.depth}, params expect {params.depth}")
    cand = candidate_geodabs(normalized.cell_bits, params)
    return FingerprintSequence(normalized.id, winnow_candidates(cand, params.window))


class GeodabFingerprinter(BaseEstimator, TransformerMixin):
    """Transformer: raw trajectories in, fingerprint sequences out."""

    def __init__(
        self,
        kgram_size: int = 6,
        guarantee_threshold: int = 12,
        depth: int = 36,
        prefix_bits: int = 16,
    ):
        self.kgram_size = kgram_size
        self.guarantee_threshold = guarantee_threshold
        self.depth = depth
        self.prefix_bits = prefix_bits

    def _params(self) -> FingerprintParams:
        return FingerprintParams(self.kgram_size, self.guarantee_threshold, self.depth, self.prefix_bits)

    def fit(self, X: Iterable[Trajectory] = (), y=None) -> "GeodabFingerprinter":
        self._params()
        return self

    def transform(self, X: Iterable[Trajectory]) -> List[FingerprintSequence]:
        params = self._params()
        return [winnow(normalize(t, params.depth), params) for t in X]
