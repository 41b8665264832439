"""PCA projection and k-means clustering baselines.

Binary rows are treated as plain real vectors. PCA is a dense
eigendecomposition of the column-centered covariance; k-means is Lloyd's
algorithm with k-means++ seeding and a fixed number of restarts.
"""

from dataclasses import dataclass

import numpy as np

from .seeding import indexed_rng


@dataclass
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (q, d), orthonormal rows
    explained_variance: np.ndarray  # (q,), non-increasing


@dataclass
class KmeansResult:
    centroids: np.ndarray
    labels: np.ndarray
    inertia: float
    iterations: int
    inertia_trace: tuple = ()  # per-iteration inertia of the winning restart


def pca_fit(x, q):
    """Top-q eigenvectors of the covariance (1/(n-1) normalization).

    Sign convention: each component's largest-magnitude entry is made
    positive (first index wins ties).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("pca_fit expects a 2-D matrix")
    n, d = x.shape
    if n < 2:
        raise ValueError("pca_fit needs at least 2 rows")
    q = int(q)
    if not 1 <= q <= min(n - 1, d):
        raise ValueError(f"q={q} out of range [1, {min(n - 1, d)}]")
    mean = x.mean(axis=0)
    xc = x - mean
    cov = (xc.T @ xc) / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    # eigh can return tiny negatives for rank-deficient covariances
    eigvals = np.maximum(eigvals, 0.0)
    if np.count_nonzero(eigvals > 1e-12 * max(eigvals[0], 1.0)) == 0:
        raise ValueError("rank deficient below q: data has zero variance")
    components = eigvecs[:, :q].T
    for i in range(q):
        j = int(np.argmax(np.abs(components[i])))
        if components[i, j] < 0:
            components[i] = -components[i]
    return PcaModel(mean, np.ascontiguousarray(components), eigvals[:q].copy())


def pca_project(model, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.mean.size:
        raise ValueError(f"projection input must have {model.mean.size} columns")
    return (x - model.mean) @ model.components.T


def _kmeans_pp_init(points, k, rng):
    """k-means++ seeding; draws are index-valued from the rng."""
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = points[first]
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))  # all points coincide with a centroid
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centroids[c] = points[idx]
        d2 = np.minimum(d2, ((points - centroids[c]) ** 2).sum(axis=1))
    return centroids


def _assign(points, centroids):
    # pairwise squared distances via the expansion trick
    d2 = (
        (points * points).sum(axis=1)[:, None]
        - 2.0 * points @ centroids.T
        + (centroids * centroids).sum(axis=1)[None, :]
    )
    labels = d2.argmin(axis=1)
    inertia = float(np.maximum(d2[np.arange(len(points)), labels], 0.0).sum())
    return labels, inertia


def _lloyd(points, k, rng, max_iters, rel_tol):
    centroids = _kmeans_pp_init(points, k, rng)
    labels, inertia = _assign(points, centroids)
    trace = [inertia]
    iterations = 0
    for _ in range(max_iters):
        for c in range(k):
            members = points[labels == c]
            if len(members):
                centroids[c] = members.mean(axis=0)
            else:
                # reseed an empty cluster to the point farthest from its
                # assigned centroid
                dist = ((points - centroids[labels]) ** 2).sum(axis=1)
                centroids[c] = points[int(dist.argmax())]
        labels, new_inertia = _assign(points, centroids)
        iterations += 1
        trace.append(new_inertia)
        if (inertia - new_inertia) / max(inertia, 1e-12) < rel_tol:
            inertia = new_inertia
            break
        inertia = new_inertia
    return KmeansResult(centroids, labels, inertia, iterations, tuple(trace))


def kmeans_cluster(points, k, seed, restarts=10, max_iters=300, rel_tol=1e-4):
    """Best of `restarts` seeded Lloyd runs (ties keep the lowest index)."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError("kmeans_cluster expects a 2-D matrix")
    k = int(k)
    if not 1 <= k <= points.shape[0]:
        raise ValueError(f"k={k} out of range [1, {points.shape[0]}]")
    best = None
    for r in range(int(restarts)):
        rng = indexed_rng(seed, "kmeans", r)
        result = _lloyd(points, k, rng, int(max_iters), float(rel_tol))
        if best is None or result.inertia < best.inertia:
            best = result
    return best
