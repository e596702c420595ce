"""Latitude/longitude primitives: haversine distance and binary geohash cells.

Geohashes are kept in their raw binary form (an unsigned integer plus a bit
count) rather than base32 text.  Bit ``i`` (1-based) bisects the longitude
axis when ``i`` is odd and the latitude axis when ``i`` is even; every
bisection is half-open, ``[lo, mid) -> 0`` and ``[mid, hi) -> 1``, so
encoding is total and deterministic for boundary points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

EARTH_RADIUS_M = 6_371_000.0

# 36 bits leaves a 16-bit locality prefix plus a 16-bit suffix inside a
# 32-bit fingerprint; deeper cells would be narrower than GPS noise anyway.
MAX_DEPTH = 36

__all__ = [
    "EARTH_RADIUS_M",
    "MAX_DEPTH",
    "Point",
    "Geohash",
    "Cell",
    "check_point",
    "check_coords",
    "haversine",
    "haversine_coords",
    "pairwise_distances",
    "path_length",
    "geohash_encode",
    "geohash_decode",
    "covering_geohash",
    "prefix",
    "encode_coords",
    "decode_centers",
]


class Point(NamedTuple):
    """A latitude/longitude sample in decimal degrees."""

    lat: float
    lon: float


def check_point(p: Point) -> Point:
    """Validate a point and normalize lon = +180 to -180.

    Latitude must lie in [-90, +90], longitude in [-180, +180]; both must be
    finite. Returns the (possibly wrapped) point.
    """
    lat, lon = float(p[0]), float(p[1])
    if not (math.isfinite(lat) and math.isfinite(lon)):
        raise ValueError(f"non-finite coordinates: ({lat}, {lon})")
    if not -90.0 <= lat <= 90.0:
        raise ValueError(f"latitude {lat} outside [-90, 90]")
    if not -180.0 <= lon <= 180.0:
        raise ValueError(f"longitude {lon} outside [-180, 180]")
    if lon == 180.0:
        lon = -180.0
    return Point(lat, lon)


def check_coords(coords: np.ndarray) -> np.ndarray:
    """Vectorized :func:`check_point` for an (n, 2) lat/lon array."""
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) lat/lon array, got shape {coords.shape}")
    if not np.isfinite(coords).all():
        raise ValueError("non-finite coordinates")
    lats, lons = coords[:, 0], coords[:, 1]
    if (lats < -90.0).any() or (lats > 90.0).any():
        raise ValueError("latitude outside [-90, 90]")
    if (lons < -180.0).any() or (lons > 180.0).any():
        raise ValueError("longitude outside [-180, 180]")
    if (lons == 180.0).any():
        coords = coords.copy()
        coords[coords[:, 1] == 180.0, 1] = -180.0
    return coords


def haversine(a: Point, b: Point) -> float:
    """Great-circle ground distance in meters between two points."""
    lat1, lon1 = math.radians(a[0]), math.radians(a[1])
    lat2, lon2 = math.radians(b[0]), math.radians(b[1])
    s = math.sin((lat1 - lat2) / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin((lon1 - lon2) / 2.0) ** 2
    # clamp: rounding can push the argument of sqrt/asin past 1 for
    # antipodal pairs
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(s)))


def haversine_coords(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise haversine between two broadcastable (..., 2) arrays."""
    a = np.radians(np.asarray(a, dtype=np.float64))
    b = np.radians(np.asarray(b, dtype=np.float64))
    dlat = a[..., 0] - b[..., 0]
    dlon = a[..., 1] - b[..., 1]
    s = np.sin(dlat / 2.0) ** 2 + np.cos(a[..., 0]) * np.cos(b[..., 0]) * np.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.minimum(1.0, np.sqrt(s)))


def pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(m, n) haversine matrix between an (m, 2) and an (n, 2) array."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return haversine_coords(a[:, None, :], b[None, :, :])


def path_length(coords: np.ndarray) -> float:
    """Sum of consecutive haversine distances along an (n, 2) polyline."""
    coords = np.asarray(coords, dtype=np.float64)
    if len(coords) < 2:
        return 0.0
    return float(haversine_coords(coords[:-1], coords[1:]).sum())


@dataclass(frozen=True)
class Geohash:
    """A binary geohash: ``depth`` valid bits packed most-significant-first.

    Depth 0 is the whole-earth cell. Integer order of same-depth hashes is
    position along the z-order space-filling curve.
    """

    bits: int = 0
    depth: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.depth <= MAX_DEPTH:
            raise ValueError(f"depth {self.depth} outside [0, {MAX_DEPTH}]")
        if not 0 <= self.bits < (1 << self.depth if self.depth else 1):
            raise ValueError(f"bits 0x{self.bits:x} do not fit in {self.depth} bits")

    def __str__(self) -> str:
        return format(self.bits, f"0{self.depth}b") if self.depth else ""

    @classmethod
    def from_string(cls, text: str) -> "Geohash":
        """Parse the debugging form, e.g. ``"1100"`` (depth = length)."""
        if text and set(text) - {"0", "1"}:
            raise ValueError(f"not a binary geohash string: {text!r}")
        return cls(int(text, 2) if text else 0, len(text))


@dataclass(frozen=True)
class Cell:
    """Decoded bounding box of a geohash; half-open on both axes."""

    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float

    def __post_init__(self) -> None:
        if not (self.lat_min < self.lat_max and self.lon_min < self.lon_max):
            raise ValueError("degenerate cell")

    @property
    def center(self) -> Point:
        return Point((self.lat_min + self.lat_max) / 2.0, (self.lon_min + self.lon_max) / 2.0)

    def contains(self, p: Point) -> bool:
        return self.lat_min <= p[0] < self.lat_max and self.lon_min <= p[1] < self.lon_max


def geohash_encode(p: Point, depth: int) -> Geohash:
    """Encode a point to the depth-``depth`` cell containing it."""
    if not 0 <= depth <= MAX_DEPTH:
        raise ValueError(f"depth {depth} outside [0, {MAX_DEPTH}]")
    lat, lon = check_point(p)
    lat_lo, lat_hi = -90.0, 90.0
    lon_lo, lon_hi = -180.0, 180.0
    bits = 0
    for i in range(depth):
        bits <<= 1
        if i % 2 == 0:
            mid = (lon_lo + lon_hi) / 2.0
            if lon >= mid:
                bits |= 1
                lon_lo = mid
            else:
                lon_hi = mid
        else:
            mid = (lat_lo + lat_hi) / 2.0
            if lat >= mid:
                bits |= 1
                lat_lo = mid
            else:
                lat_hi = mid
    return Geohash(bits, depth)


def geohash_decode(g: Geohash) -> Cell:
    """Exact inverse of the bisection: the cell addressed by ``g``."""
    lat_lo, lat_hi = -90.0, 90.0
    lon_lo, lon_hi = -180.0, 180.0
    for i in range(g.depth):
        bit = (g.bits >> (g.depth - 1 - i)) & 1
        if i % 2 == 0:
            mid = (lon_lo + lon_hi) / 2.0
            if bit:
                lon_lo = mid
            else:
                lon_hi = mid
        else:
            mid = (lat_lo + lat_hi) / 2.0
            if bit:
                lat_lo = mid
            else:
                lat_hi = mid
    return Cell(lat_lo, lat_hi, lon_lo, lon_hi)


def covering_geohash(points: Sequence[Point]) -> Geohash:
    """Deepest geohash whose cell contains every input point.

    Equals the longest common prefix of the points' depth-36 encodings;
    an empty sequence is rejected.
    """
    if len(points) == 0:
        raise ValueError("covering_geohash of an empty point sequence")
    coords = check_coords(np.asarray([(p[0], p[1]) for p in points], dtype=np.float64))
    codes = encode_coords(coords[:, 0], coords[:, 1], MAX_DEPTH)
    lo, hi = int(codes.min()), int(codes.max())
    depth = MAX_DEPTH - (lo ^ hi).bit_length()
    return Geohash(lo >> (MAX_DEPTH - depth), depth)


def prefix(g: Geohash, p: int) -> Geohash:
    """First ``p`` bits of ``g``; ``p`` may not exceed ``g.depth``."""
    if not 0 <= p <= g.depth:
        raise ValueError(f"prefix length {p} outside [0, {g.depth}]")
    return Geohash(g.bits >> (g.depth - p) if p else 0, p)


def encode_coords(lats: np.ndarray, lons: np.ndarray, depth: int) -> np.ndarray:
    """Vectorized encode: uint64 bit patterns for arrays of coordinates.

    Bit-for-bit identical to :func:`geohash_encode` on each element.
    """
    if not 0 <= depth <= MAX_DEPTH:
        raise ValueError(f"depth {depth} outside [0, {MAX_DEPTH}]")
    lats = np.asarray(lats, dtype=np.float64)
    lons = np.where(np.asarray(lons, dtype=np.float64) == 180.0, -180.0, lons)
    n = lats.shape[0]
    lat_lo = np.full(n, -90.0)
    lat_hi = np.full(n, 90.0)
    lon_lo = np.full(n, -180.0)
    lon_hi = np.full(n, 180.0)
    bits = np.zeros(n, dtype=np.uint64)
    for i in range(depth):
        bits <<= np.uint64(1)
        if i % 2 == 0:
            mid = (lon_lo + lon_hi) / 2.0
            hit = lons >= mid
            bits |= hit.astype(np.uint64)
            lon_lo = np.where(hit, mid, lon_lo)
            lon_hi = np.where(hit, lon_hi, mid)
        else:
            mid = (lat_lo + lat_hi) / 2.0
            hit = lats >= mid
            bits |= hit.astype(np.uint64)
            lat_lo = np.where(hit, mid, lat_lo)
            lat_hi = np.where(hit, lat_hi, mid)
    return bits


def decode_centers(bits: np.ndarray, depth: int) -> np.ndarray:
    """Vectorized cell centers: (n, 2) lat/lon array for uint64 patterns."""
    bits = np.asarray(bits, dtype=np.uint64)
    n = bits.shape[0]
    lat_lo = np.full(n, -90.0)
    lat_hi = np.full(n, 90.0)
    lon_lo = np.full(n, -180.0)
    lon_hi = np.full(n, 180.0)
    for i in range(depth):
        bit = (bits >> np.uint64(depth - 1 - i)) & np.uint64(1)
        hit = bit.astype(bool)
        if i % 2 == 0:
            mid = (lon_lo + lon_hi) / 2.0
            lon_lo = np.where(hit, mid, lon_lo)
            lon_hi = np.where(hit, lon_hi, mid)
        else:
            mid = (lat_lo + lat_hi) / 2.0
            lat_lo = np.where(hit, mid, lat_lo)
            lat_hi = np.where(hit, lat_hi, mid)
    return np.column_stack(((lat_lo + lat_hi) / 2.0, (lon_lo + lon_hi) / 2.0))
