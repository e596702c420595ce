"""Inverted index over geodabs with Jaccard-ranked retrieval.

Fingerprint sets are kept as sorted deduplicated integer arrays (a
compressed-set stand-in with the same behavioral contract as a bitmap:
cheap intersection/union cardinality). The on-disk format is little-endian
binary with delta-encoded varint postings and a trailing CRC32; see
:meth:`GeodabIndex.save`.
"""

from __future__ import annotations

import struct
import warnings
import zlib
from bisect import insort
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from sklearn.base import BaseEstimator

from .fingerprint import FingerprintParams, FingerprintRecord, FingerprintSequence, winnow
from .normalize import Trajectory, normalize

MAGIC = b"GDAB"
FORMAT_VERSION = 1

__all__ = ["FingerprintSet", "jaccard_distance", "TrajectoryMeta", "IndexFormatError", "GeodabIndex"]


class IndexFormatError(ValueError):
    """Raised when an index file cannot be read back."""


class FingerprintSet:
    """Sorted, deduplicated set of fingerprint values (uint64 storage)."""

    __slots__ = ("_values",)

    def __init__(self, values: Iterable[int] | np.ndarray = ()):
        arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=np.uint64)
        self._values = np.unique(arr)

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __len__(self) -> int:
        return len(self._values)

    def __iter__(self):
        return (int(v) for v in self._values)

    def __contains__(self, value: int) -> bool:
        i = np.searchsorted(self._values, np.uint64(value))
        return i < len(self._values) and self._values[i] == np.uint64(value)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FingerprintSet):
            return NotImplemented
        return np.array_equal(self._values, other._values)

    def __repr__(self) -> str:
        return f"FingerprintSet({len(self)} values)"

    def intersection_size(self, other: "FingerprintSet") -> int:
        return int(np.intersect1d(self._values, other._values, assume_unique=True).size)

    def union_size(self, other: "FingerprintSet") -> int:
        return len(self) + len(other) - self.intersection_size(other)


def jaccard_distance(f, g) -> float:
    """1 - |F n G| / |F u G| over fingerprint sets; two empty sets are 0.

    Accepts :class:`FingerprintSet` or plain (frozen)sets.
    """
    if isinstance(f, FingerprintSet) and isinstance(g, FingerprintSet):
        if len(f) == 0 and len(g) == 0:
            return 0.0
        inter = f.intersection_size(g)
        return 1.0 - inter / (len(f) + len(g) - inter)
    fs, gs = set(f), set(g)
    if not fs and not gs:
        return 0.0
    inter = len(fs & gs)
    return 1.0 - inter / (len(fs) + len(gs) - inter)


@dataclass(frozen=True)
class TrajectoryMeta:
    """Per-trajectory bookkeeping kept alongside the fingerprint set."""

    point_count: int
    norm_length_m: float
    fingerprint_count: int
    label: Optional[str] = None


class GeodabIndex(BaseEstimator):
    """Inverted index estimator: ``fit`` a corpus, then ``query`` it.

    Build phase is single-writer; a fitted index is an immutable snapshot
    safe for concurrent readers.
    """

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
        self._reset()

    def _reset(self) -> None:
        self.postings_: Dict[int, List[str]] = {}
        self.sets_: Dict[str, FingerprintSet] = {}
        self.meta_: Dict[str, TrajectoryMeta] = {}

    def _params(self) -> FingerprintParams:
        return FingerprintParams(self.kgram_size, self.guarantee_threshold, self.depth, self.prefix_bits)

    # -- building ---------------------------------------------------------

    def fit(self, X: Iterable[Trajectory], y=None) -> "GeodabIndex":
        self._reset()
        for trajectory in X:
            self.insert(trajectory)
        return self

    def _extract(self, normalized) -> FingerprintSequence:
        """Term extraction; the single override point for index variants."""
        return winnow(normalized, self._params())

    def fingerprints(self, trajectory: Trajectory) -> FingerprintSequence:
        """Extraction used for both indexing and querying."""
        return self._extract(normalize(trajectory, self._params().depth))

    def insert(self, trajectory: Trajectory) -> None:
        """Add one trajectory; duplicate ids and empty trajectories fail."""
        if trajectory.id in self.sets_:
            raise ValueError(f"trajectory id {trajectory.id!r} already indexed")
        params = self._params()
        norm = normalize(trajectory, params.depth)
        seq = self._extract(norm)
        fset = FingerprintSet(np.asarray(seq.values, dtype=np.uint64))
        for value in fset:
            insort(self.postings_.setdefault(value, []), trajectory.id)
        self.sets_[trajectory.id] = fset
        self.meta_[trajectory.id] = TrajectoryMeta(
            point_count=len(trajectory.points),
            norm_length_m=norm.metric_length(),
            fingerprint_count=len(seq),
            label=trajectory.label,
        )

    # -- querying ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self.sets_)

    @property
    def num_terms(self) -> int:
        return len(self.postings_)

    def trajectory_ids(self) -> List[str]:
        return sorted(self.sets_)

    def fingerprint_set(self, trajectory: Trajectory) -> FingerprintSet:
        return FingerprintSet(np.asarray(self.fingerprints(trajectory).values, dtype=np.uint64))

    def query(
        self,
        trajectory: Trajectory,
        max_distance: float = 1.0,
        limit: Optional[int] = None,
    ) -> List[Tuple[str, float]]:
        """Ranked retrieval: (id, jaccard distance) ascending, ties by id.

        Candidates are the union of the posting lists of the query's
        geodabs; a query below the winnowing noise threshold yields no
        results (and a warning).
        """
        if not 0.0 <= max_distance <= 1.0:
            raise ValueError(f"max_distance {max_distance} outside [0, 1]")
        query_set = self.fingerprint_set(trajectory)
        if len(query_set) == 0:
            warnings.warn(
                f"query trajectory {trajectory.id!r} is below the winnowing noise threshold "
                f"(fewer than {self.kgram_size} normalized cells); no fingerprints extracted"
            )
            return []
        candidates = set()
        for value in query_set:
            candidates.update(self.postings_.get(value, ()))
        scored = []
        for cid in candidates:
            d = jaccard_distance(query_set, self.sets_[cid])
            if d <= max_distance:
                scored.append((cid, d))
        scored.sort(key=lambda item: (item[1], item[0]))
        return scored[:limit] if limit is not None else scored

    def distances_to_corpus(self, trajectory: Trajectory) -> List[Tuple[str, float]]:
        """Jaccard distance to every indexed trajectory (ROC universe)."""
        query_set = self.fingerprint_set(trajectory)
        return [(cid, jaccard_distance(query_set, self.sets_[cid])) for cid in self.trajectory_ids()]

    # -- persistence ------------------------------------------------------

    def save(self, path) -> None:
        """Write the little-endian binary form.

        Layout: magic ``GDAB``; format version u16; the four extraction
        parameters as u16 each; trajectory count u64; term count u64. Then
        per term (ascending geodab): value u32, postings length u32 and
        the posting ids as delta-encoded varints into the sorted id table.
        Then per trajectory (ascending id): varint-length-prefixed UTF-8
        id, set length u32, delta-encoded varint geodab values, point
        count u32, normalized length f64, fingerprint count u32 and a
        varint-length-prefixed label (empty = none). Trailing CRC32 of
        everything before it.
        """
        ids = self.trajectory_ids()
        rank = {tid: i for i, tid in enumerate(ids)}
        out = bytearray()
        out += MAGIC
        out += struct.pack(
            "<HHHHHQQ",
            FORMAT_VERSION,
            self.kgram_size,
            self.guarantee_threshold,
            self.depth,
            self.prefix_bits,
            len(ids),
            len(self.postings_),
        )
        for value in sorted(self.postings_):
            posting = self.postings_[value]
            out += struct.pack("<II", value, len(posting))
            _write_deltas(out, sorted(rank[tid] for tid in posting))
        for tid in ids:
            encoded = tid.encode("utf-8")
            _write_varint(out, len(encoded))
            out += encoded
            values = self.sets_[tid].values
            out += struct.pack("<I", len(values))
            _write_deltas(out, [int(v) for v in values])
            meta = self.meta_[tid]
            out += struct.pack("<IdI", meta.point_count, meta.norm_length_m, meta.fingerprint_count)
            label = (meta.label or "").encode("utf-8")
            _write_varint(out, len(label))
            out += label
        out += struct.pack("<I", zlib.crc32(bytes(out)))
        with open(path, "wb") as fh:
            fh.write(out)

    @classmethod
    def load(cls, path) -> "GeodabIndex":
        """Read an index back; magic, version, truncation and checksum
        problems are reported distinctly."""
        with open(path, "rb") as fh:
            data = fh.read()
        if len(data) < 4 or data[:4] != MAGIC:
            raise IndexFormatError(f"{path}: bad magic, not a geodab index file")
        reader = _Reader(data, offset=4)
        version = reader.u16()
        if version != FORMAT_VERSION:
            raise IndexFormatError(f"{path}: unsupported format version {version}")
        k, t, depth, prefix_bits = reader.u16(), reader.u16(), reader.u16(), reader.u16()
        num_trajs = reader.u64()
        num_terms = reader.u64()
        idx = cls(kgram_size=k, guarantee_threshold=t, depth=depth, prefix_bits=prefix_bits)
        idx._params()
        postings_by_rank: List[Tuple[int, List[int]]] = []
        for _ in range(num_terms):
            value = reader.u32()
            count = reader.u32()
            postings_by_rank.append((value, reader.deltas(count)))
        ids: List[str] = []
        for _ in range(num_trajs):
            tid = reader.text()
            set_len = reader.u32()
            values = reader.deltas(set_len)
            point_count = reader.u32()
            norm_length = reader.f64()
            fingerprint_count = reader.u32()
            label = reader.text()
            ids.append(tid)
            idx.sets_[tid] = FingerprintSet(np.asarray(values, dtype=np.uint64))
            idx.meta_[tid] = TrajectoryMeta(point_count, norm_length, fingerprint_count, label or None)
        if reader.offset != len(data) - 4:
            raise IndexFormatError(f"{path}: truncated or trailing bytes after index body")
        stored_crc = reader.u32()
        if stored_crc != zlib.crc32(data[:-4]):
            raise IndexFormatError(f"{path}: checksum mismatch, file is corrupted")
        for value, ranks in postings_by_rank:
            try:
                idx.postings_[value] = [ids[r] for r in ranks]
            except IndexError:
                raise IndexFormatError(f"{path}: posting references unknown trajectory") from None
        idx.verify()
        return idx

    def verify(self) -> None:
        """Cross-check postings against stored sets (load-time sanity)."""
        seen: Dict[str, int] = {tid: 0 for tid in self.sets_}
        for value, posting in self.postings_.items():
            if sorted(posting) != posting:
                raise IndexFormatError(f"posting list for 0x{value:08x} is not sorted")
            for tid in posting:
                if tid not in self.sets_ or value not in self.sets_[tid]:
                    raise IndexFormatError(f"posting 0x{value:08x} -> {tid!r} has no matching set entry")
                seen[tid] += 1
        for tid, count in seen.items():
            if count != len(self.sets_[tid]):
                raise IndexFormatError(f"trajectory {tid!r} set disagrees with postings")

    def equals(self, other: "GeodabIndex") -> bool:
        return (
            self.get_params() == other.get_params()
            and self.postings_ == other.postings_
            and self.sets_ == other.sets_
            and self.meta_ == other.meta_
        )


def _write_varint(out: bytearray, value: int) -> None:
    while value >= 0x80:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    out.append(value)


def _write_deltas(out: bytearray, sorted_values: List[int]) -> None:
    prev = 0
    for i, v in enumerate(sorted_values):
        _write_varint(out, v if i == 0 else v - prev)
        prev = v


class _Reader:
    """Bounds-checked cursor over the index bytes."""

    def __init__(self, data: bytes, offset: int = 0):
        self.data = data
        self.offset = offset

    def _take(self, n: int) -> bytes:
        if self.offset + n > len(self.data):
            raise IndexFormatError("unexpected end of file (truncated index)")
        chunk = self.data[self.offset : self.offset + n]
        self.offset += n
        return chunk

    def u16(self) -> int:
        return struct.unpack("<H", self._take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self._take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self._take(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self._take(8))[0]

    def varint(self) -> int:
        result = 0
        shift = 0
        while True:
            byte = self._take(1)[0]
            result |= (byte & 0x7F) << shift
            if not byte & 0x80:
                return result
            shift += 7
            if shift > 63:
                raise IndexFormatError("varint overflow")

    def deltas(self, count: int) -> List[int]:
        values = []
        prev = 0
        for i in range(count):
            prev = self.varint() if i == 0 else prev + self.varint()
            values.append(prev)
        return values

    def text(self) -> str:
        return self._take(self.varint()).decode("utf-8")
