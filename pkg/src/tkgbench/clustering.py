"""Grouping related facts into small bundles for multi-fact examples.

The pairwise fact distance blends entity proximity (shortest-path distance
between entity class sets in the inheritance graph, squashed to [0, 1])
with a logistic timestamp distance whose midpoint is half a year. Bundles
are produced by bottom-up agglomerative merging with a size cap; final
clusters below the minimum size dissolve into singletons for single-fact
use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import DataError, ValidationError
from .facts import Quadruple
from .schema import INFINITY, Schema

HALF_YEAR_DAYS = 365.0 / 2.0


@dataclass
class ClusterConfig:
    alpha: float = 0.8  # weight of entity distance vs timestamp distance
    kappa: float = 0.03  # logistic steepness, per day
    midpoint_days: float = HALF_YEAR_DAYS
    min_size: int = 2
    max_size: int = 4
    linkage: str = "average"  # or "complete"
    threshold: float = 0.5  # merging stops when no permitted pair is below
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError("alpha must lie in [0, 1]")
        if self.kappa <= 0:
            raise ValidationError("kappa must be positive")
        if not 2 <= self.min_size <= self.max_size:
            raise ValidationError("need 2 <= min_size <= max_size")
        if self.linkage not in ("average", "complete"):
            raise ValidationError("linkage must be 'average' or 'complete'")

    @property
    def linkage_code(self) -> int:
        return _kernels.COMPLETE if self.linkage == "complete" else _kernels.AVERAGE


def time_distance(delta_days: float, config: ClusterConfig) -> float:
    """Logistic distance on the absolute day gap; 0.5 at the midpoint."""
    # The clamp guards exp overflow for huge gaps (the logistic saturates
    # anyway) and matches the vectorized computation in distance_matrix.
    x = min(-config.kappa * (abs(delta_days) - config.midpoint_days), 700.0)
    return 1.0 / (1.0 + math.exp(x))


def entity_distance(a: str, b: str, schema: Schema) -> float:
    """1 - 1/(class distance + 1); exactly 1 for unreachable class sets."""
    d = schema.class_distance(a, b)
    if d == INFINITY:
        return 1.0
    return 1.0 - 1.0 / (d + 1.0)


def fact_distance(
    q: Quadruple, q2: Quadruple, schema: Schema, config: ClusterConfig
) -> float:
    """Blend of subject/object entity distances and timestamp distance."""
    d_subj = entity_distance(q.subject, q2.subject, schema)
    d_obj = entity_distance(q.object, q2.object, schema)
    d_ts = time_distance(
        (q2.timestamp - q.timestamp).days, config
    )
    return config.alpha * (d_subj + d_obj) / 2.0 + (1.0 - config.alpha) * d_ts


def distance_matrix(
    facts: Sequence[Quadruple], schema: Schema, config: ClusterConfig
) -> np.ndarray:
    """Symmetric pairwise fact-distance matrix in input order.

    Entity distances depend only on class sets, so entities are collapsed
    to class-set signatures and each signature pair is resolved once.
    """
    if not facts:
        raise DataError("distance_matrix requires at least one fact")
    n = len(facts)

    signatures: dict[frozenset, int] = {}
    ent_sig: dict[str, int] = {}

    def sig_of(entity: str) -> int:
        cached = ent_sig.get(entity)
        if cached is not None:
            return cached
        classes = schema.classes_of(entity)
        idx = signatures.setdefault(classes, len(signatures))
        ent_sig[entity] = idx
        return idx

    subj_sig = np.array([sig_of(f.subject) for f in facts], dtype=np.int64)
    obj_sig = np.array([sig_of(f.object) for f in facts], dtype=np.int64)
    days = np.array([f.timestamp.toordinal() for f in facts], dtype=np.float64)

    m = len(signatures)
    sig_classes = [None] * m
    for classes, idx in signatures.items():
        sig_classes[idx] = classes
    sig_dist = np.empty((m, m), dtype=np.float64)
    for i in range(m):
        for j in range(i, m):
            best = schema.min_class_distance(sig_classes[i], sig_classes[j])
            val = 1.0 if best == INFINITY else 1.0 - 1.0 / (best + 1.0)
            sig_dist[i, j] = val
            sig_dist[j, i] = val

    d_subj = sig_dist[np.ix_(subj_sig, subj_sig)]
    d_obj = sig_dist[np.ix_(obj_sig, obj_sig)]
    gap = np.abs(days[:, None] - days[None, :])
    x = -config.kappa * (gap - config.midpoint_days)
    d_ts = 1.0 / (1.0 + np.exp(np.minimum(x, 700.0)))
    return config.alpha * (d_subj + d_obj) / 2.0 + (1.0 - config.alpha) * d_ts


@dataclass
class ClusterResult:
    """Multi-fact clusters plus the facts left over for single-fact use."""

    clusters: list[list[Quadruple]] = field(default_factory=list)
    singletons: list[Quadruple] = field(default_factory=list)


def cluster(
    facts: Sequence[Quadruple], schema: Schema, config: ClusterConfig
) -> ClusterResult:
    """Agglomerative grouping under the size cap and distance threshold.

    Merging repeatedly combines the closest pair of clusters whose union
    respects ``max_size``, while that linkage distance stays below the
    threshold. Final groups smaller than ``min_size`` dissolve into the
    singleton output. Every input fact lands in exactly one output and
    order within a cluster follows input order.
    """
    if not facts:
        raise DataError("cluster requires at least one fact")
    matrix = distance_matrix(facts, schema, config)
    labels = _kernels.agglomerate(
        matrix.copy(),
        np.ones(len(facts), dtype=np.int64),
        config.max_size,
        config.threshold,
        config.linkage_code,
    )
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(i)

    result = ClusterResult()
    for _lab, members in sorted(groups.items(), key=lambda kv: min(kv[1])):
        if len(members) > config.max_size:
            raise AssertionError("merge loop produced an oversized cluster")
        if len(members) >= config.min_size:
            result.clusters.append([facts[i] for i in sorted(members)])
        else:
            result.singletons.extend(facts[i] for i in sorted(members))
    return result


def self_distance(config: ClusterConfig) -> float:
    """Distance of a fact to itself; nonzero because the timestamp term
    never vanishes: (1 - alpha) / (1 + e^(kappa * midpoint))."""
    return (1.0 - config.alpha) / (1.0 + math.exp(config.kappa * config.midpoint_days))
