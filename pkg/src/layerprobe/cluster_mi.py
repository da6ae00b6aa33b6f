"""Mini-batch k-means quantization and discrete mutual information.

The clustering path quantizes pooled vectors into cluster IDs; the MI path
measures dependence between those IDs and phone/word labels with the plug-in
estimator in nats.  The estimator applies no bias correction, so values on
small samples sit above the population MI; callers compare curves, not
absolute values, which makes the shared bias mostly harmless.

With batch_size >= n the fit degenerates to Lloyd's algorithm, whose inertia
is asserted non-increasing every iteration.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, InputError, ShapeError

__all__ = [
    "KMeansConfig",
    "KMeansModel",
    "ContingencyTable",
    "MiProbeResult",
    "fit_kmeans",
    "assign",
    "contingency_table",
    "mutual_information",
    "mi_probe",
    "save_kmeans",
    "load_kmeans",
]

ASSIGN_CHUNK = 1024


@dataclass(frozen=True)
class KMeansConfig:
    """Fit parameters; iters defaults to max(100, ceil(100 * k / batch_size))."""

    batch_size: int = 1024
    iters: int | None = None
    seed: int = 0
    init: str = "kmeans++"

    def __post_init__(self):
        if self.batch_size < 1:
            raise InputError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.iters is not None and self.iters < 1:
            raise InputError(f"iters must be >= 1, got {self.iters}")
        if self.init != "kmeans++":
            raise InputError(f"unsupported init {self.init!r}")

    def resolved_iters(self, k: int) -> int:
        if self.iters is not None:
            return self.iters
        return max(100, math.ceil(100 * k / self.batch_size))


@dataclass
class KMeansModel:
    centroids: np.ndarray
    k: int
    inertia: float
    seed: int
    inertia_history: list[float] = field(default_factory=list)

    def __post_init__(self):
        self.centroids = np.asarray(self.centroids, dtype=np.float64)
        if self.k < 1:
            raise InputError(f"k must be >= 1, got {self.k}")
        if self.centroids.shape[0] != self.k:
            raise InputError(f"{self.centroids.shape[0]} centroids for k={self.k}")
        if not np.isfinite(self.centroids).all():
            raise DataError("centroids contain non-finite entries")


@dataclass
class ContingencyTable:
    """Cluster-by-label co-occurrence counts."""

    counts: np.ndarray
    label_names: list[str]

    def __post_init__(self):
        self.counts = np.asarray(self.counts)
        if self.counts.ndim != 2:
            raise ShapeError(f"counts must be 2-D, got rank {self.counts.ndim}")
        if (self.counts < 0).any():
            raise DataError("counts must be non-negative")
        if self.counts.sum() < 1:
            raise InputError("contingency table must hold at least one count")


@dataclass(frozen=True)
class MiProbeResult:
    mi_nats: float
    h_label: float
    h_cluster: float
    model: KMeansModel


def _sq_dists(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # ||x - c||^2 expanded; the x^2 term is dropped where only argmin is needed
    return (
        (x * x).sum(axis=1)[:, None]
        - 2.0 * (x @ centroids.T)
        + (centroids * centroids).sum(axis=1)[None, :]
    )


def _nearest(x: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-row nearest centroid index (ties to lowest) and squared distance."""
    labels = np.empty(x.shape[0], dtype=np.int64)
    dists = np.empty(x.shape[0])
    for lo in range(0, x.shape[0], ASSIGN_CHUNK):
        chunk = slice(lo, lo + ASSIGN_CHUNK)
        d = _sq_dists(x[chunk], centroids)
        labels[chunk] = d.argmin(axis=1)
        dists[chunk] = np.maximum(d[np.arange(d.shape[0]), labels[chunk]], 0.0)
    return labels, dists


def _kmeanspp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]))
    centroids[0] = x[rng.integers(n)]
    d2 = ((x - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centroids[j] = x[idx]
        d2 = np.minimum(d2, ((x - centroids[j]) ** 2).sum(axis=1))
    return centroids


def _reseed_dead(
    centroids: np.ndarray, dead: np.ndarray, batch: np.ndarray, batch_dists: np.ndarray
) -> None:
    # each dead cluster takes the batch point currently farthest from its own
    # centroid; distinct points for distinct dead clusters, ties to lowest index
    order = np.argsort(-batch_dists, kind="stable")
    for slot, cluster in enumerate(np.flatnonzero(dead)):
        if slot >= len(order):
            break
        centroids[cluster] = batch[order[slot]]


def fit_kmeans(X, k: int, cfg: KMeansConfig = KMeansConfig()) -> KMeansModel:
    """Cluster rows of X into k centroids, deterministically for a fixed seed.

    batch_size >= n runs plain Lloyd iterations with empty clusters reseeded
    to the point farthest from its assigned centroid; smaller batches run the
    streaming update c <- (v c + sum_batch x) / (v + m) on per-batch counts.
    """
    x = np.ascontiguousarray(X, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"X must be 2-D, got rank {x.ndim}")
    if not np.isfinite(x).all():
        raise DataError("X contains non-finite entries")
    n = x.shape[0]
    if n < k:
        raise InputError(f"need at least k={k} points, got {n}")
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")

    rng = np.random.default_rng(cfg.seed)
    centroids = _kmeanspp_init(x, k, rng)
    iters = cfg.resolved_iters(k)
    history: list[float] = []

    if cfg.batch_size >= n:
        prev = None
        for _ in range(iters):
            labels, dists = _nearest(x, centroids)
            inertia = float(dists.sum())
            if history:
                assert inertia <= history[-1] + 1e-9 * max(1.0, history[-1])
            history.append(inertia)
            counts = np.bincount(labels, minlength=k)
            sums = np.zeros_like(centroids)
            np.add.at(sums, labels, x)
            hit = counts > 0
            centroids[hit] = sums[hit] / counts[hit, None]
            if (~hit).any():
                _reseed_dead(centroids, ~hit, x, dists)
            if prev is not None and np.array_equal(labels, prev) and hit.all():
                break
            prev = labels
    else:
        counts = np.zeros(k)
        for _ in range(iters):
            batch = x[rng.integers(0, n, cfg.batch_size)]
            labels, dists = _nearest(batch, centroids)
            batch_counts = np.bincount(labels, minlength=k)
            sums = np.zeros_like(centroids)
            np.add.at(sums, labels, batch)
            hit = batch_counts > 0
            denom = counts[hit] + batch_counts[hit]
            centroids[hit] = (counts[hit, None] * centroids[hit] + sums[hit]) / denom[:, None]
            counts += batch_counts
            dead = counts == 0
            if dead.any():
                _reseed_dead(centroids, dead, batch, dists)
                counts[dead] = 1

    _, final_dists = _nearest(x, centroids)
    return KMeansModel(
        centroids=centroids,
        k=k,
        inertia=float(final_dists.sum()),
        seed=cfg.seed,
        inertia_history=history,
    )


def assign(model: KMeansModel, X) -> np.ndarray:
    """Nearest-centroid index per row, ties resolved to the lowest index."""
    x = np.ascontiguousarray(X, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.centroids.shape[1]:
        raise ShapeError(
            f"expected shape (n, {model.centroids.shape[1]}), got {x.shape}"
        )
    labels, _ = _nearest(x, model.centroids)
    return labels


def contingency_table(clusters, labels, n_clusters: int | None = None) -> ContingencyTable:
    """Tabulate (cluster, label) co-occurrences; label columns sorted by name."""
    clusters = np.asarray(clusters, dtype=np.int64)
    if clusters.shape[0] != len(labels):
        raise InputError(f"{clusters.shape[0]} cluster ids vs {len(labels)} labels")
    if clusters.shape[0] == 0:
        raise InputError("no observations to tabulate")
    names = sorted(set(labels))
    col = {name: j for j, name in enumerate(names)}
    c = n_clusters if n_clusters is not None else int(clusters.max()) + 1
    counts = np.zeros((c, len(names)), dtype=np.int64)
    np.add.at(counts, (clusters, [col[l] for l in labels]), 1)
    return ContingencyTable(counts, names)


def mutual_information(t: ContingencyTable) -> dict[str, float]:
    """Plug-in MI and marginal entropies, in nats; zero cells contribute 0."""
    total = t.counts.sum()
    if total < 1:
        raise InputError("all-zero contingency table")
    p = t.counts / total
    p_cluster = p.sum(axis=1)
    p_label = p.sum(axis=0)
    outer = p_cluster[:, None] * p_label[None, :]
    nz = p > 0
    mi = float((p[nz] * np.log(p[nz] / outer[nz])).sum())
    h_label = float(-(p_label[p_label > 0] * np.log(p_label[p_label > 0])).sum())
    h_cluster = float(-(p_cluster[p_cluster > 0] * np.log(p_cluster[p_cluster > 0])).sum())
    return {"mi_nats": mi, "h_label": h_label, "h_cluster": h_cluster}


def mi_probe(train, dev, k: int, cfg: KMeansConfig = KMeansConfig()) -> MiProbeResult:
    """Cluster train vectors, assign dev vectors, and score dev (cluster, label) MI.

    h_label is the dev label entropy, the natural ceiling for the MI curve.
    """
    if train.kind != dev.kind:
        raise InputError(f"kind mismatch: train {train.kind!r} vs dev {dev.kind!r}")
    if not set(train.labels) & set(dev.labels):
        raise InputError("train and dev label sets are disjoint")
    model = fit_kmeans(train.vectors, k, cfg)
    ids = assign(model, dev.vectors)
    stats = mutual_information(contingency_table(ids, dev.labels, n_clusters=k))
    return MiProbeResult(
        mi_nats=stats["mi_nats"],
        h_label=stats["h_label"],
        h_cluster=stats["h_cluster"],
        model=model,
    )


def save_kmeans(model: KMeansModel, prefix) -> None:
    prefix = Path(prefix)
    np.save(prefix.with_suffix(".npy"), model.centroids)
    meta = {"k": model.k, "inertia": model.inertia, "seed": model.seed}
    prefix.with_suffix(".json").write_text(json.dumps(meta, sort_keys=True) + "\n")


def load_kmeans(prefix) -> KMeansModel:
    prefix = Path(prefix)
    centroids = np.load(prefix.with_suffix(".npy"))
    meta = json.loads(prefix.with_suffix(".json").read_text())
    return KMeansModel(
        centroids=centroids, k=meta["k"], inertia=meta["inertia"], seed=meta["seed"]
    )
