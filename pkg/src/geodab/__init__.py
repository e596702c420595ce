"""Trajectory similarity search and motif discovery with geodab fingerprints.

A geodab is a 32-bit trajectory fingerprint: a geohash locality prefix
merged with an order-sensitive hash of a window of normalized cells.
Winnowed geodabs feed a shardable inverted index ranked by Jaccard
distance; exact DTW/DFD baselines, a synthetic dataset generator and a
PR/ROC evaluation harness round out the toolkit.
"""

from .baseline import BenchRecord, bench_distance, dfd, dtw
from .datagen import GenConfig, GeneratedDataset, RoadGraph, build_graph, generate, write_dataset
from .evaluate import (
    CurvePoint,
    GeohashCellIndex,
    average_precision,
    corpus_scores,
    geohash_baseline_fingerprints,
    normalization_sweep,
    pr_curve,
    query_bench,
    roc_auc,
)
from .fingerprint import (
    FingerprintParams,
    FingerprintRecord,
    FingerprintSequence,
    GeodabFingerprinter,
    candidate_geodabs,
    kgrams,
    make_geodab,
    winnow,
    winnow_candidates,
)
from .geo import (
    EARTH_RADIUS_M,
    MAX_DEPTH,
    Cell,
    Geohash,
    Point,
    covering_geohash,
    geohash_decode,
    geohash_encode,
    haversine,
    prefix,
)
from .index import FingerprintSet, GeodabIndex, IndexFormatError, TrajectoryMeta, jaccard_distance
from .io import TrajectoryFormatError, read_trajectories, read_truth, write_trajectories
from .motif import FingerprintDensity, MotifResult, estimate_density, motif_exact, motif_geodab
from .normalize import NormalizedTrajectory, Trajectory, TrajectoryNormalizer, normalize
from .shard import LoadReport, ShardConfig, distribution_report, node_of, shard_of, shards_for_query

__version__ = "0.1.0"
