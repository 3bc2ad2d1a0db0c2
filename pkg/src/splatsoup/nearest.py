"""Nearest-face-centroid queries over a mesh.

Backed by a k-d tree, but with query semantics pinned to the brute-force
scan: the reported face minimizes the Euclidean centroid distance and ties
break to the lowest face id. A candidate re-check against the stored
centroids guarantees those semantics regardless of tree layout.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.spatial import cKDTree

from .errors import NumericError, ValidationError
from .mesh import IndexedMesh, face_centroids

THREADS_ENV = "SPLATSOUP_THREADS"


def resolve_workers(workers: int | None = None) -> int:
    """Worker count for tree queries: explicit arg, else env, else all cores."""
    if workers is not None:
        return int(workers)
    env = os.environ.get(THREADS_ENV, "").strip()
    if env:
        try:
            n = int(env)
            if n > 0:
                return n
        except ValueError:
            pass
    return -1


class CentroidIndex:
    """Immutable nearest-centroid acceleration structure over one mesh."""

    def __init__(self, centroids: np.ndarray):
        centroids = np.ascontiguousarray(centroids, dtype=np.float64)
        if centroids.ndim != 2 or centroids.shape[1] != 3 or len(centroids) == 0:
            raise ValidationError(f"centroids must be (F>=1, 3), got {centroids.shape}")
        self._centroids = centroids
        self._tree = cKDTree(centroids)

    @property
    def num_faces(self) -> int:
        return len(self._centroids)

    def query(self, point, workers: int | None = None) -> tuple[int, float]:
        """(face_id, distance) of the closest centroid; ties -> lowest id."""
        p = np.asarray(point, dtype=np.float64).reshape(1, 3)
        ids, dists = self.query_many(p, workers=workers)
        return int(ids[0]), float(dists[0])

    def query_many(self, points, workers: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Batch version of query; returns (ids (N,), distances (N,))."""
        pts = np.ascontiguousarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValidationError(f"query points must be (N, 3), got {pts.shape}")
        if not np.isfinite(pts).all():
            bad = int(np.argmax(~np.isfinite(pts).all(axis=1)))
            raise NumericError(f"non-finite query point at index {bad}")
        if len(pts) == 0:
            return np.zeros(0, dtype=np.int64), np.zeros(0)

        w = resolve_workers(workers)
        d, nearest = self._tree.query(pts, k=1, workers=w)
        # Re-check every candidate within the (slightly inflated) nearest
        # radius so the result matches a brute-force scan bit for bit,
        # including the lowest-id tie rule.
        radius = d * (1.0 + 1e-12)
        balls = self._tree.query_ball_point(pts, radius, workers=w)
        ids = np.asarray(nearest, dtype=np.int64)
        lengths = np.fromiter((len(b) for b in balls), dtype=np.int64, count=len(balls))
        best_d2 = np.einsum("ij,ij->i", self._centroids[ids] - pts, self._centroids[ids] - pts)
        for i in np.flatnonzero(lengths > 1):
            cand = np.asarray(balls[i], dtype=np.int64)
            delta = self._centroids[cand] - pts[i]
            d2 = np.einsum("ij,ij->i", delta, delta)
            m = d2.min()
            ids[i] = cand[d2 == m].min()
            best_d2[i] = m
        return ids, np.sqrt(best_d2)


def build_index(mesh: IndexedMesh) -> CentroidIndex:
    """Build the nearest-centroid index for a mesh (error on empty meshes)."""
    return CentroidIndex(face_centroids(mesh))


def nearest_face(index: CentroidIndex, point, workers: int | None = None) -> tuple[int, float]:
    """Face id whose centroid is closest to point, and the exact distance."""
    return index.query(point, workers=workers)
