"""Seeded, deterministic k-means over embedding vectors.

Initialization is k-means++ driven by a splitmix64 PRNG so that identical
(points, k, seed) always give an identical clustering, bit for bit. Lloyd
iterations then assign to the nearest centroid (ties to the lowest centroid
id), recompute centroids as arithmetic means, and refill any emptied cluster
with the point farthest from its own centroid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidK

MAX_ITERATIONS = 100
CONVERGENCE_EPS = 1e-9

_U64 = 0xFFFFFFFFFFFFFFFF


class SplitMix64:
    """splitmix64 PRNG (Vigna's reference constants)."""

    def __init__(self, seed: int):
        self._state = seed & _U64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _U64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _U64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _U64
        return z ^ (z >> 31)

    def next_f64(self) -> float:
        """Uniform draw in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53


@dataclass(frozen=True)
class Clustering:
    k: int
    assignment: tuple[int, ...]
    centroids: tuple[tuple[float, ...], ...]
    distances: tuple[float, ...]
    iterations: int
    sse: float
    sse_history: tuple[float, ...]


def centroid_distance(point: Sequence[float], centroid: Sequence[float]) -> float:
    """Euclidean distance between a point and a centroid."""
    if len(point) != len(centroid):
        raise DimensionMismatch(f"dimension {len(point)} vs {len(centroid)}")
    return math.sqrt(sum((p - c) * (p - c) for p, c in zip(point, centroid)))


def _init_kmeanspp(pts: np.ndarray, k: int, rng: SplitMix64) -> np.ndarray:
    """Pick k initial centroid indices with d^2-weighted sampling.

    Each draw inverts the cumulative sum of squared nearest-centroid
    distances at a uniform [0,1) target. When every remaining weight is zero
    (all points coincide with chosen centroids) the draw falls back to a
    uniform index.
    """
    n = pts.shape[0]
    chosen = [rng.next_u64() % n]
    d2 = np.sum((pts - pts[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        cum = np.cumsum(d2)
        total = float(cum[-1])
        if total <= 0.0:
            idx = rng.next_u64() % n
        else:
            target = rng.next_f64() * total
            idx = int(np.searchsorted(cum, target, side="right"))
            if idx >= n:  # target rounded onto the total
                idx = int(np.max(np.nonzero(d2 > 0.0)[0]))
        chosen.append(int(idx))
        d2 = np.minimum(d2, np.sum((pts - pts[idx]) ** 2, axis=1))
    return pts[np.asarray(chosen, dtype=np.intp)].copy()


def _repair_empty(assign: np.ndarray, dmat: np.ndarray, k: int) -> None:
    """Reassign the farthest-from-own-centroid point into each empty cluster.

    Candidates are limited to clusters that keep >= 1 member afterwards;
    distance ties resolve to the lowest point index (np.argmax on the first
    maximum). Mutates ``assign`` in place.
    """
    counts = np.bincount(assign, minlength=k)
    for j in range(k):
        if counts[j] > 0:
            continue
        own = dmat[np.arange(assign.shape[0]), assign].copy()
        own[counts[assign] <= 1] = -1.0
        mover = int(np.argmax(own))
        counts[assign[mover]] -= 1
        assign[mover] = j
        counts[j] += 1


def kmeans(points: Sequence[Sequence[float]], k: int, seed: int) -> Clustering:
    """Cluster points into k groups, reproducibly for a given seed.

    Stops when the largest centroid displacement falls below 1e-9 or after
    100 iterations. The reported sse is the sum of squared per-point
    distances to their own centroid; sse_history holds it per iteration.
    """
    n = len(points)
    if k < 1 or k > n:
        raise InvalidK(f"k must be in [1, {n}], got {k}")
    dims = {len(p) for p in points}
    if len(dims) != 1:
        raise DimensionMismatch(f"points have mixed dimensions {sorted(dims)}")

    pts = np.asarray(points, dtype=np.float64)
    rng = SplitMix64(seed)
    centroids = _init_kmeanspp(pts, k, rng)

    assign = np.zeros(n, dtype=np.intp)
    iterations = 0
    sse_history: list[float] = []
    for _ in range(MAX_ITERATIONS):
        iterations += 1
        dmat = np.sum((pts[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        assign = np.argmin(dmat, axis=1)  # first minimum: lowest centroid id
        _repair_empty(assign, dmat, k)
        new_centroids = np.empty_like(centroids)
        for j in range(k):
            new_centroids[j] = pts[assign == j].mean(axis=0)
        displacement = float(np.sqrt(np.sum((new_centroids - centroids) ** 2, axis=1)).max())
        centroids = new_centroids
        dist = np.sqrt(np.sum((pts - centroids[assign]) ** 2, axis=1))
        sse_history.append(float(np.sum(dist * dist)))
        if displacement < CONVERGENCE_EPS:
            break

    dist = np.sqrt(np.sum((pts - centroids[assign]) ** 2, axis=1))
    distances = tuple(float(d) for d in dist)
    sse = float(np.sum(dist * dist))
    return Clustering(
        k=k,
        assignment=tuple(int(a) for a in assign),
        centroids=tuple(tuple(float(x) for x in c) for c in centroids),
        distances=distances,
        iterations=iterations,
        sse=sse,
        sse_history=tuple(sse_history),
    )
