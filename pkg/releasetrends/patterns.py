# -*- coding: utf-8 -*-
"""
Local release patterns: window vectors, exact t-SNE and Ward clustering.
"""
import logging
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.cluster.hierarchy import cut_tree, linkage

from releasetrends.exceptions import DomainError, EmptyInput, InfeasiblePerplexity
from releasetrends.intervals import derive_releases
from releasetrends.snapshots import AppHistory, ReleaseEvent
from releasetrends.stats import FloatArray

logger = logging.getLogger(__name__)

DEFAULT_WINDOW_DAYS = 13
DEFAULT_CLUSTERS = 4
MIN_EMBEDDING_POINTS = 5
MAX_DEFAULT_PERPLEXITY = 30.0


@dataclass(frozen=True)
class WindowVector:
    """
    Release days following a release: bit i is 1 when the app released on
    anchor_day + i + 1.
    """

    app_id: str
    anchor_day: date
    bits: Tuple[int, ...]

    def __post_init__(self) -> None:
        if any(b not in (0, 1) for b in self.bits):
            raise DomainError(f"Window bits must be 0 or 1: {self.bits}")


@dataclass(frozen=True, eq=False)
class Embedding:
    """
    2-D t-SNE map with one row per vector. The KL divergence is recorded at
    the end of the run and at the end of early exaggeration.
    """

    points: FloatArray
    final_kl: float
    seed: int
    early_kl: float
    perplexity: float


@dataclass(frozen=True)
class Clustering:
    labels: Tuple[int, ...]
    merge_heights: Tuple[float, ...]

    @property
    def n_clusters(self) -> int:
        return len(set(self.labels))


@dataclass(frozen=True)
class ClusterPattern:
    label: int
    size: int
    mean: Tuple[float, ...]


def extract_windows(
    events: Sequence[ReleaseEvent],
    window: int = DEFAULT_WINDOW_DAYS,
    last_days: Optional[Mapping[str, date]] = None,
) -> List[WindowVector]:
    """
    One vector per release whose window fits in its app's observed span.

    Spans end at last_days[app_id]. Without it a span ends on the app's
    last release, so the last release never gets a window. Pass the last
    observed day when snapshots are at hand, as history_windows() does.
    """
    if window < 1:
        raise DomainError(f"Window must be at least 1 day: {window}")
    by_app: Dict[str, List[date]] = {}
    for event in events:
        by_app.setdefault(event.app_id, []).append(event.day)

    vectors: List[WindowVector] = []
    for app_id, days in by_app.items():
        release_days = set(days)
        end = last_days[app_id] if last_days is not None else max(days)
        for anchor in days:
            if anchor + timedelta(days=window) > end:
                continue
            bits = tuple(
                int(anchor + timedelta(days=i + 1) in release_days)
                for i in range(window)
            )
            vectors.append(WindowVector(app_id=app_id, anchor_day=anchor, bits=bits))
    return vectors


def history_windows(
    history: AppHistory, window: int = DEFAULT_WINDOW_DAYS
) -> List[WindowVector]:
    events = derive_releases(history)
    if not events or history.last_day is None:
        return []
    return extract_windows(events, window, {history.app_id: history.last_day})


def window_matrix(vectors: Sequence[WindowVector]) -> FloatArray:
    if not vectors:
        raise EmptyInput("No window vectors")
    return np.array([v.bits for v in vectors], dtype=np.float64)


def default_perplexity(n_points: int) -> float:
    return min(MAX_DEFAULT_PERPLEXITY, (n_points - 1) / 3.0)


def _squared_distances(x: FloatArray) -> FloatArray:
    sum_x = np.sum(x * x, axis=1)
    d = sum_x[:, None] + sum_x[None, :] - 2.0 * x @ x.T
    np.fill_diagonal(d, 0.0)
    return np.maximum(d, 0.0)


def _conditional_affinities(
    distances: FloatArray, perplexity: float, tol: float = 1e-5, max_steps: int = 100
) -> FloatArray:
    """
    Gaussian conditional affinities p(j|i), with each row's precision found by
    bisection so that the row's entropy is ln(perplexity).
    """
    n = len(distances)
    target = np.log(perplexity)
    p = np.zeros((n, n))
    for i in range(n):
        d = np.delete(distances[i], i)
        d = d - d.min()
        beta = 1.0
        lo, hi = 0.0, np.inf
        for _ in range(max_steps):
            w = np.exp(-beta * d)
            total = w.sum()
            row = w / total
            entropy = float(np.log(total) + beta * np.dot(d, row))
            if abs(entropy - target) < tol:
                break
            if entropy > target:
                lo = beta
                beta = beta * 2.0 if hi == np.inf else (beta + hi) / 2.0
            else:
                hi = beta
                beta = (beta + lo) / 2.0
        p[i, np.arange(n) != i] = row
    return p


def _kl_divergence(p: FloatArray, q: FloatArray) -> float:
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / np.maximum(q[mask], 1e-300))))


def tsne_embed(
    vectors: Union[Sequence[WindowVector], FloatArray],
    perplexity: Optional[float] = None,
    iterations: int = 1000,
    seed: int = 0,
    init: Optional[FloatArray] = None,
    learning_rate: float = 200.0,
    exaggeration: float = 12.0,
    exaggeration_iterations: int = 250,
    initial_momentum: float = 0.5,
    final_momentum: float = 0.8,
) -> Embedding:
    """
    Embeds the vectors in two dimensions with exact t-SNE.

    Input affinities are Gaussian with per-point bandwidths matched to the
    perplexity and symmetrised. Output affinities use a Student-t kernel with
    one degree of freedom. Gradient descent uses momentum, per-coordinate
    gains and early exaggeration. The initial map is drawn from N(0, 1e-4²)
    with the given seed unless init is given.
    """
    if isinstance(vectors, np.ndarray):
        x = np.asarray(vectors, dtype=np.float64)
    else:
        x = window_matrix(vectors)
    n = len(x)
    if n < MIN_EMBEDDING_POINTS:
        raise DomainError(
            f"t-SNE needs at least {MIN_EMBEDDING_POINTS} points, got {n}"
        )
    if perplexity is None:
        perplexity = default_perplexity(n)
    if perplexity <= 1.0 or 3.0 * perplexity > n - 1:
        raise InfeasiblePerplexity(
            f"Perplexity {perplexity} not in (1, {(n - 1) / 3.0}] for {n} points"
        )
    if iterations < 1:
        raise DomainError(f"Iterations must be >= 1: {iterations}")

    conditional = _conditional_affinities(_squared_distances(x), perplexity)
    p = (conditional + conditional.T) / (2.0 * n)
    p = np.maximum(p, 1e-12)
    np.fill_diagonal(p, 0.0)

    if init is not None:
        y = np.array(init, dtype=np.float64)
        if y.shape != (n, 2):
            raise DomainError(f"Initial map must have shape ({n}, 2): {y.shape}")
    else:
        rng = np.random.default_rng(seed)
        y = rng.normal(0.0, 1e-4, size=(n, 2))
    update = np.zeros_like(y)
    gains = np.ones_like(y)

    early_kl: Optional[float] = None
    for iteration in range(iterations):
        exaggerating = iteration < exaggeration_iterations
        p_eff = p * exaggeration if exaggerating else p
        num = 1.0 / (1.0 + _squared_distances(y))
        np.fill_diagonal(num, 0.0)
        q = num / num.sum()
        pq = (p_eff - q) * num
        gradient = 4.0 * (np.diag(pq.sum(axis=1)) - pq) @ y

        momentum = initial_momentum if exaggerating else final_momentum
        same_sign = (gradient > 0) == (update > 0)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        gains = np.maximum(gains, 0.01)
        update = momentum * update - learning_rate * gains * gradient
        y = y + update
        y = y - y.mean(axis=0)

        if iteration + 1 == exaggeration_iterations:
            early_kl = _kl_divergence(p, _student_q(y))
        if (iteration + 1) % 250 == 0:
            logger.debug("t-SNE iteration %d", iteration + 1)

    final_kl = _kl_divergence(p, _student_q(y))
    if early_kl is None:
        early_kl = final_kl
    logger.info("t-SNE embedded %d points, KL %.6f", n, final_kl)
    y.setflags(write=False)
    return Embedding(
        points=y,
        final_kl=max(0.0, final_kl),
        seed=seed,
        early_kl=max(0.0, early_kl),
        perplexity=float(perplexity),
    )


def _student_q(y: FloatArray) -> FloatArray:
    num = 1.0 / (1.0 + _squared_distances(y))
    np.fill_diagonal(num, 0.0)
    return num / num.sum()


def ward_cluster(
    points: Union[FloatArray, Sequence[Sequence[float]]], k: int
) -> Clustering:
    """
    Agglomerative clustering with the Ward criterion, cut at k clusters.

    Cluster ids are numbered by first appearance in the input order.
    """
    x = np.asarray(points, dtype=np.float64)
    n = len(x)
    if not 1 <= k <= n:
        raise DomainError(f"Cluster count {k} not in [1, {n}]")
    if n == 1:
        return Clustering(labels=(0,), merge_heights=())
    tree = linkage(x, method="ward")
    raw = cut_tree(tree, n_clusters=k).ravel()
    relabel: Dict[int, int] = {}
    labels = tuple(relabel.setdefault(int(c), len(relabel)) for c in raw)
    heights = tuple(float(h) for h in tree[:, 2])
    return Clustering(labels=labels, merge_heights=heights)


def aggregate_patterns(
    vectors: Sequence[WindowVector], clustering: Clustering
) -> List[ClusterPattern]:
    """
    Element-wise mean of the vectors in each cluster, ordered by cluster id.
    """
    if len(vectors) != len(clustering.labels):
        raise DomainError(
            f"{len(vectors)} vectors but {len(clustering.labels)} cluster labels"
        )
    matrix = window_matrix(vectors)
    labels = np.asarray(clustering.labels)
    patterns: List[ClusterPattern] = []
    for label in sorted(set(clustering.labels)):
        members = matrix[labels == label]
        patterns.append(
            ClusterPattern(
                label=label,
                size=len(members),
                mean=tuple(float(v) for v in members.mean(axis=0)),
            )
        )
    return patterns


def export_embedding(
    vectors: Sequence[WindowVector], embedding: Embedding, clustering: Clustering
) -> List[Tuple[str, str, float, float, int]]:
    """
    Rows of (app_id, anchor_day, x, y, cluster) for plotting.
    """
    if not len(vectors) == len(embedding.points) == len(clustering.labels):
        raise DomainError("Vectors, embedding and clustering differ in length")
    return [
        (v.app_id, v.anchor_day.isoformat(), float(p[0]), float(p[1]), label)
        for v, p, label in zip(vectors, embedding.points, clustering.labels)
    ]
