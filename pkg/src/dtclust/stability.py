"""Cluster stability estimation by bagging.

Rerun the whole pipeline (preprocessing refit included) on N random subsets of
the rows; a cluster is stable when some cluster found on each subset covers
nearly the same rows. Agreement is the Jaccard index of the two row sets
restricted to the sample, maximized over the sample's clusters and averaged
over samples.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import Dataset
from .errors import ConfigError, DataError
from .extract import ClusterCandidate

log = logging.getLogger(__name__)


def draw_sample(ds: Dataset, fraction: float, seed: int, k: int) -> tuple[Dataset, np.ndarray]:
    """Uniform sample without replacement of ceil(fraction * rows) rows.

    Deterministic per (seed, k). Returns the row-sliced dataset and the original
    row ids, ascending.
    """
    if not 0 < fraction <= 1:
        raise ConfigError(f"sample fraction must be in (0, 1], got {fraction}")
    n = ds.row_count
    m = math.ceil(fraction * n)
    rng = np.random.default_rng([seed, k])
    ids = np.sort(rng.choice(n, size=m, replace=False))
    return ds.subset(ids), ids


def pairwise_score(c_rows: np.ndarray, c_prime_rows: np.ndarray, sample_rows: np.ndarray) -> float:
    """Jaccard agreement of an original cluster and a sample cluster on the sample rows.

    Both clusters are restricted to the sample; two empty restrictions count as
    perfect agreement.
    """
    c_prime = np.asarray(c_prime_rows)
    if np.setdiff1d(c_prime, sample_rows).size:
        raise DataError("sample cluster contains rows outside the sample")
    restricted = np.intersect1d(np.asarray(c_rows), sample_rows)
    union = np.union1d(restricted, c_prime)
    if union.size == 0:
        return 1.0
    inter = np.intersect1d(restricted, c_prime)
    return inter.size / union.size


@dataclass(frozen=True)
class ClusterStability:
    cluster_index: int
    per_sample: tuple[float, ...]

    @property
    def mean(self) -> float:
        return sum(self.per_sample) / len(self.per_sample)

    @property
    def min(self) -> float:
        return min(self.per_sample)

    @property
    def max(self) -> float:
        return max(self.per_sample)


@dataclass(frozen=True)
class StabilityReport:
    clusters: tuple[ClusterStability, ...]
    n_samples: int
    fraction: float
    seed: int

    def score(self, cluster_index: int) -> float:
        return self.clusters[cluster_index].mean

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "fraction": self.fraction,
            "seed": self.seed,
            "clusters": [
                {
                    "cluster": c.cluster_index,
                    "mean": c.mean,
                    "min": c.min,
                    "max": c.max,
                    "per_sample": list(c.per_sample),
                }
                for c in self.clusters
            ],
        }


def stability_report(
    ds: Dataset,
    clusters: Sequence[ClusterCandidate],
    config,
    n_samples: int = 20,
    fraction: float = 0.8,
    seed: int = 0,
) -> StabilityReport:
    """Bagged stability of already-extracted clusters.

    config is the PipelineConfig the clusters came from; each sample refits the
    preprocessing (bin edges, frequency orders) and extracts the same number of
    clusters. A sample yielding no clusters contributes a score of 0.
    """
    from .pipeline import run_extraction  # local import to keep module deps one-way

    if n_samples < 1:
        raise ConfigError("n_samples must be >= 1")
    if not clusters:
        raise ConfigError("stability_report needs at least one extracted cluster")

    scores = np.zeros((len(clusters), n_samples))
    for k in range(n_samples):
        view, ids = draw_sample(ds, fraction, seed, k)
        result = run_extraction(view, config, n_clusters=len(clusters))
        sample_clusters = [ids[c.row_ids] for c in result.clusters]
        if not sample_clusters:
            log.warning("sample %d produced no clusters; scores set to 0", k)
            continue
        for i, original in enumerate(clusters):
            scores[i, k] = max(
                pairwise_score(original.row_ids, rows, ids) for rows in sample_clusters
            )
    return StabilityReport(
        tuple(
            ClusterStability(i, tuple(float(s) for s in scores[i]))
            for i in range(len(clusters))
        ),
        n_samples,
        fraction,
        seed,
    )
