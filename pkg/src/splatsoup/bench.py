"""Edit-time benchmark: propagation cost versus mesh resolution.

Generates a fixed-size synthetic soup and a family of grid meshes of
increasing face count, then times one full propagation (index build plus
association plus transform) per mesh. Output mirrors the usual
vertex-count / face-count / time table for scaling experiments.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .gaussians import GaussianCloud
from .mesh import IndexedMesh
from .nearest import build_index
from .propagate import propagate_soup
from .soup import TriangleSoup, encode_soup

DEFAULT_FACE_COUNTS = (120_000, 512_000, 1_190_000, 2_100_000, 3_330_000)
DEFAULT_SOUP_SIZE = 100_000


def grid_mesh(cells: int, extent: float = 10.0, height: float = 0.0) -> IndexedMesh:
    """A square grid in the xy-plane with 2*cells^2 faces.

    height adds a deterministic ripple so the surface is not exactly planar.
    """
    xs = np.linspace(-extent / 2.0, extent / 2.0, cells + 1)
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    gz = height * np.sin(gx) * np.cos(gy) if height else np.zeros_like(gx)
    vertices = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)

    row = np.arange(cells)
    i0 = (row[:, None] * (cells + 1) + row[None, :]).ravel()
    i1 = i0 + cells + 1
    i2 = i1 + 1
    i3 = i0 + 1
    faces = np.concatenate(
        [np.stack([i0, i1, i2], axis=1), np.stack([i0, i2, i3], axis=1)], axis=1
    ).reshape(-1, 3)
    return IndexedMesh(vertices, faces)


def cells_for_faces(target_faces: int) -> int:
    """Grid cell count whose face count (2*cells^2) is closest to the target."""
    return max(1, round(np.sqrt(target_faces / 2.0)))


def ripple_edit(mesh: IndexedMesh, amplitude: float = 0.5, frequency: float = 1.3) -> IndexedMesh:
    """Smooth vertex displacement along z; keeps the face topology intact."""
    v = mesh.vertices.copy()
    v[:, 2] += amplitude * np.sin(frequency * v[:, 0]) * np.cos(frequency * v[:, 1])
    return IndexedMesh(v, mesh.faces)


def synthetic_soup(n: int, seed: int = 0, extent: float = 10.0) -> TriangleSoup:
    """Random valid flat Gaussians over the bench grid footprint, encoded."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-extent / 2.0, extent / 2.0, size=(n, 3))
    centers[:, 2] = rng.uniform(-0.2, 0.2, size=n)
    quats = rng.normal(size=(n, 4))
    quats /= np.linalg.norm(quats, axis=1, keepdims=True)
    cloud = GaussianCloud(
        centers=centers,
        rotations=quats,
        scales=rng.uniform(0.01, 0.05, size=(n, 2)),
        opacities=rng.uniform(0.2, 1.0, size=n),
        colors_dc=rng.normal(size=(n, 3)),
    )
    return encode_soup(cloud)


@dataclass(frozen=True)
class BenchRow:
    vertices: int
    faces: int
    seconds: float


def run_benchmark(
    soup_size: int = DEFAULT_SOUP_SIZE,
    face_counts=DEFAULT_FACE_COUNTS,
    seed: int = 0,
    repeats: int = 1,
    workers: int | None = None,
    progress=None,
) -> list[BenchRow]:
    """Time one propagation per mesh size; reports the best of `repeats` runs."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    soup = synthetic_soup(soup_size, seed=seed)
    rows = []
    for target in face_counts:
        cells = cells_for_faces(int(target))
        original = grid_mesh(cells)
        edited = ripple_edit(original)
        best = np.inf
        for _ in range(repeats):
            start = time.perf_counter()
            index = build_index(original)
            propagate_soup(soup, original, edited, index, workers=workers)
            best = min(best, time.perf_counter() - start)
        rows.append(BenchRow(original.num_vertices, original.num_faces, best))
        if progress is not None:
            progress(rows[-1])
    return rows


def format_table(rows) -> str:
    """Fixed-width table: vertex count, face count, propagation time."""
    lines = [f"{'Vertices':>12} {'Faces':>12} {'Time [s]':>10}"]
    for r in rows:
        lines.append(f"{r.vertices:>12d} {r.faces:>12d} {r.seconds:>10.2f}")
    return "\n".join(lines)
