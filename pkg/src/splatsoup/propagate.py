"""Edit propagation: per-face frames, frame-to-frame transforms, batch apply.

Every mesh face carries an orthonormal frame (first edge direction, face
normal, their cross product) anchored at its first vertex. An edit moves
that frame; the rigid change of basis T = U_edited @ U_original^T, applied
about the anchor vertices, carries each associated soup triangle along.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._util import degenerate_mask, normalize_rows
from .errors import DegenerateTriangleError, ValidationError
from .mesh import IndexedMesh, MeshFace, validate_edit_pair
from .nearest import CentroidIndex, build_index
from .soup import SoupTriangle, TriangleSoup

FRAME_TOL = 1e-6


@dataclass(frozen=True)
class FaceFrame:
    """Right-handed orthonormal basis attached to a face, anchored at w0."""

    basis: np.ndarray   # (3, 3), columns u0 (edge), u1 (normal), u2 (u0 x u1)
    origin: np.ndarray  # (3,) reference vertex w0

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=np.float64)
        if b.shape != (3, 3):
            raise ValidationError(f"basis must be 3x3, got {b.shape}")
        object.__setattr__(self, "basis", b)
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=np.float64))


@dataclass(frozen=True)
class EditTransform:
    """Rigid frame change between an original face and its edited twin."""

    rotation: np.ndarray     # (3, 3) proper rotation
    from_origin: np.ndarray  # original w0
    to_origin: np.ndarray    # edited w0

    def __post_init__(self):
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=np.float64))
        object.__setattr__(self, "from_origin", np.asarray(self.from_origin, dtype=np.float64))
        object.__setattr__(self, "to_origin", np.asarray(self.to_origin, dtype=np.float64))

    @classmethod
    def identity(cls) -> "EditTransform":
        return cls(np.eye(3), np.zeros(3), np.zeros(3))


def _frames_from_corners(corners: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batch frame construction for (k, 3, 3) face corner arrays.

    Returns (bases (k, 3, 3), degenerate mask (k,)). Degenerate rows hold
    garbage and must be masked out by the caller.
    """
    e1 = corners[:, 1] - corners[:, 0]
    e2 = corners[:, 2] - corners[:, 0]
    deg = degenerate_mask(e1, e2)
    u0 = normalize_rows(e1)
    u1 = normalize_rows(np.cross(e1, e2))
    u2 = np.cross(u0, u1)
    return np.stack([u0, u1, u2], axis=2), deg


def face_frame(face: MeshFace) -> FaceFrame:
    """Orthonormal frame of one face; raises on collinear vertices."""
    corners = np.stack([face.w0, face.w1, face.w2])[None]
    basis, deg = _frames_from_corners(corners)
    if deg[0]:
        raise DegenerateTriangleError(face.face_id, f"degenerate face {face.face_id}")
    return FaceFrame(basis[0], face.w0)


def edit_transform(original: MeshFace, edited: MeshFace) -> EditTransform:
    """Rigid transform carrying the original face's frame onto the edited one.

    Both bases are orthonormal, so the change of basis is rotation
    U_edited @ U_original^T; the anchor vertices are recorded from each face.
    """
    src = face_frame(original)
    dst = face_frame(edited)
    return EditTransform(dst.basis @ src.basis.T, src.origin, dst.origin)


def apply_edit(triangle: SoupTriangle, xf: EditTransform) -> SoupTriangle:
    """Map each vertex v to rotation @ (v - from_origin) + to_origin."""
    v = (triangle.vertices - xf.from_origin) @ xf.rotation.T + xf.to_origin
    return SoupTriangle(v[0], v[1], v[2])


@dataclass(frozen=True, eq=False)
class AssociationReport:
    """Per-triangle association record produced by propagate_soup."""

    face_ids: np.ndarray    # (N,) associated mesh face per triangle
    distances: np.ndarray   # (N,) centroid-to-centroid distance
    fallback: np.ndarray    # (N,) bool: True where a degenerate face forced identity

    def __len__(self) -> int:
        return len(self.face_ids)

    @property
    def num_fallbacks(self) -> int:
        return int(self.fallback.sum())

    def summary(self) -> str:
        """Line-oriented human-readable summary."""
        lines = [f"triangles associated: {len(self)}"]
        if len(self):
            lines.append(f"distinct mesh faces used: {len(np.unique(self.face_ids))}")
            lines.append(
                "centroid distance min/mean/max: "
                f"{self.distances.min():.6g} / {self.distances.mean():.6g} / "
                f"{self.distances.max():.6g}"
            )
        lines.append(f"identity fallbacks (degenerate faces): {self.num_fallbacks}")
        return "\n".join(lines)

    def write_table(self, path) -> None:
        """Machine-readable TSV: triangle id, face id, distance, flag."""
        with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
            fh.write("triangle_id\tface_id\tdistance\tflag\n")
            for i in range(len(self)):
                flag = "fallback" if self.fallback[i] else "ok"
                fh.write(f"{i}\t{int(self.face_ids[i])}\t{self.distances[i]:.17g}\t{flag}\n")


def propagate_soup(
    soup: TriangleSoup,
    original: IndexedMesh,
    edited: IndexedMesh,
    index: CentroidIndex | None = None,
    workers: int | None = None,
) -> tuple[TriangleSoup, AssociationReport]:
    """Carry a mesh edit onto every triangle of the soup.

    Each soup triangle is associated to the original mesh face whose
    centroid is nearest its own centroid (ties to the lowest face id), and
    then moved by that face's rigid frame change. Associations where either
    the original or the edited face is degenerate fall back to the identity
    and are flagged in the report instead of aborting the batch.

    Attributes pass through untouched; output order matches input order.
    """
    validate_edit_pair(original, edited)
    if index is None:
        index = build_index(original)
    elif index.num_faces != original.num_faces:
        raise ValidationError(
            f"index holds {index.num_faces} faces but mesh has {original.num_faces}"
        )
    n = len(soup)
    if n == 0:
        report = AssociationReport(
            np.zeros(0, dtype=np.int64), np.zeros(0), np.zeros(0, dtype=bool)
        )
        return TriangleSoup(soup.vertices.copy(), soup.attributes), report

    ids, dists = index.query_many(soup.centroids(), workers=workers)
    uniq, inverse = np.unique(ids, return_inverse=True)

    w_orig = original.vertices[original.faces[uniq]]   # (k, 3, 3)
    w_edit = edited.vertices[edited.faces[uniq]]
    basis_orig, deg_o = _frames_from_corners(w_orig)
    basis_edit, deg_e = _frames_from_corners(w_edit)
    bad = deg_o | deg_e

    rot = np.einsum("kij,klj->kil", basis_edit, basis_orig)  # U' @ U^T per face
    rot[bad] = np.eye(3)
    from_origin = w_orig[:, 0].copy()
    to_origin = w_edit[:, 0].copy()
    from_origin[bad] = 0.0
    to_origin[bad] = 0.0

    t = rot[inverse]                      # (N, 3, 3)
    centered = soup.vertices - from_origin[inverse][:, None, :]
    moved = np.einsum("nij,nvj->nvi", t, centered) + to_origin[inverse][:, None, :]

    fallback = bad[inverse]
    if fallback.any():
        moved[fallback] = soup.vertices[fallback]  # bitwise identity for flagged rows

    out = TriangleSoup(moved, soup.attributes)
    report = AssociationReport(ids.astype(np.int64), dists, fallback)
    return out, report
