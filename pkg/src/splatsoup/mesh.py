"""Indexed triangle meshes: loading, saving, validation, and surface sampling.

Two on-disk formats, selected by extension:

* ``.obj`` -- Wavefront-style text: ``v x y z`` and ``f i j k ...`` statements,
  1-based indices, ``#`` comments ignored, polygons fan-triangulated on load.
* ``.ply`` -- binary little-endian PLY with float/double vertex coordinates
  and an integer-list face element; written with double precision so the
  binary round-trip is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._util import degenerate_mask, readonly
from .errors import (
    EmptyMeshError,
    FaceIndexError,
    FormatError,
    NumericError,
    ValidationError,
)
from . import _ply


@dataclass(frozen=True, eq=False)
class IndexedMesh:
    """Shared vertex list plus face index triples (counter-clockwise winding)."""

    vertices: np.ndarray   # (V, 3) float64
    faces: np.ndarray      # (F, 3) int64

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        f = np.asarray(self.faces, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValidationError(f"vertices must be (V, 3), got {v.shape}")
        if f.ndim != 2 or f.shape[1] != 3:
            raise ValidationError(f"faces must be (F, 3), got {f.shape}")
        if len(f) == 0:
            raise EmptyMeshError("mesh has no faces")
        if not np.isfinite(v).all():
            bad = int(np.argmax(~np.isfinite(v).all(axis=1)))
            raise NumericError(f"non-finite vertex at index {bad}")
        if f.size and (f.min() < 0 or f.max() >= len(v)):
            bad = int(np.argmax((f < 0).any(axis=1) | (f >= len(v)).any(axis=1)))
            raise FaceIndexError(
                f"face {bad} references vertex outside 0..{len(v) - 1}: {f[bad].tolist()}"
            )
        object.__setattr__(self, "vertices", readonly(v))
        object.__setattr__(self, "faces", readonly(f))

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    def face(self, face_id: int) -> "MeshFace":
        if not 0 <= face_id < self.num_faces:
            raise ValidationError(f"face id {face_id} out of range 0..{self.num_faces - 1}")
        w = self.vertices[self.faces[face_id]]
        return MeshFace(w[0], w[1], w[2], face_id)

    def face_corners(self) -> np.ndarray:
        """(F, 3, 3) vertex positions per face."""
        return self.vertices[self.faces]

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


@dataclass(frozen=True)
class MeshFace:
    """One face pulled out of a mesh, with its id."""

    w0: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    face_id: int = -1

    def __post_init__(self):
        for name in ("w0", "w1", "w2"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))

    def is_degenerate(self) -> bool:
        return bool(degenerate_mask(self.w1 - self.w0, self.w2 - self.w0))

    def centroid(self) -> np.ndarray:
        return (self.w0 + self.w1 + self.w2) / 3.0


def face_centroid(mesh: IndexedMesh, face_id: int) -> np.ndarray:
    """Arithmetic mean of the face's three vertices."""
    if not 0 <= face_id < mesh.num_faces:
        raise ValidationError(f"face id {face_id} out of range 0..{mesh.num_faces - 1}")
    i, j, k = mesh.faces[face_id]
    return (mesh.vertices[i] + mesh.vertices[j] + mesh.vertices[k]) / 3.0


def face_centroids(mesh: IndexedMesh) -> np.ndarray:
    """(F, 3) centroids for every face."""
    v, f = mesh.vertices, mesh.faces
    return (v[f[:, 0]] + v[f[:, 1]] + v[f[:, 2]]) / 3.0


def face_areas(mesh: IndexedMesh) -> np.ndarray:
    """(F,) triangle areas."""
    v, f = mesh.vertices, mesh.faces
    e1 = v[f[:, 1]] - v[f[:, 0]]
    e2 = v[f[:, 2]] - v[f[:, 0]]
    return 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)


def face_normals(mesh: IndexedMesh) -> np.ndarray:
    """(F, 3) unit face normals (CCW winding); zero rows for zero-area faces."""
    v, f = mesh.vertices, mesh.faces
    n = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
    lens = np.linalg.norm(n, axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(lens > 0.0, n / lens, 0.0)


@dataclass(frozen=True)
class EditPair:
    """An (original, edited) mesh pair with verified face correspondence."""

    original: IndexedMesh
    edited: IndexedMesh


def validate_edit_pair(original: IndexedMesh, edited: IndexedMesh) -> EditPair:
    """Check face-level correspondence between an original and an edited mesh.

    Succeeds iff both meshes have the same face count and identical face
    index triples position-wise; only vertex positions may differ. Edits
    that permute, add, or remove faces are rejected.
    """
    from .errors import CorrespondenceError

    if original.num_faces != edited.num_faces:
        raise CorrespondenceError(
            f"face count mismatch: original has {original.num_faces}, "
            f"edited has {edited.num_faces}"
        )
    if not np.array_equal(original.faces, edited.faces):
        diff = (original.faces != edited.faces).any(axis=1)
        first = int(np.argmax(diff))
        raise CorrespondenceError(
            f"face index topology differs at face {first}: "
            f"{original.faces[first].tolist()} vs {edited.faces[first].tolist()} "
            "(edits must keep the face index order; remeshing is unsupported)"
        )
    return EditPair(original, edited)


# ---------------------------------------------------------------------------
# surface sampling

@dataclass(frozen=True, eq=False)
class SurfaceSamples:
    """Points sampled on a mesh with their source face and face normal."""

    points: np.ndarray    # (n, 3)
    face_ids: np.ndarray  # (n,)
    normals: np.ndarray   # (n, 3)

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, i: int):
        return self.points[i], int(self.face_ids[i]), self.normals[i]


DEFAULT_SAMPLE_COUNT = 100_000


def sample_surface(mesh: IndexedMesh, n: int = DEFAULT_SAMPLE_COUNT, seed: int = 0) -> SurfaceSamples:
    """Draw n points uniformly over the mesh surface.

    Faces are chosen with probability proportional to area; the position
    inside a face uses the square-root barycentric warp (u = 1 - sqrt(a),
    v = b*sqrt(a)), which is unbiased for uniform area sampling. The draw
    is deterministic for a fixed seed. Raises on zero total area.
    """
    if n < 0:
        raise ValidationError(f"sample count must be non-negative, got {n}")
    areas = face_areas(mesh)
    total = float(areas.sum())
    if total <= 0.0:
        raise ValidationError("zero-area mesh cannot be sampled")
    if n == 0:
        return SurfaceSamples(np.zeros((0, 3)), np.zeros(0, dtype=np.int64), np.zeros((0, 3)))

    rng = np.random.default_rng(seed)
    live = np.flatnonzero(areas > 0.0)
    cum = np.cumsum(areas[live])
    u = rng.random(n) * cum[-1]
    idx = np.minimum(np.searchsorted(cum, u, side="right"), len(live) - 1)
    face_ids = live[idx]

    corners = mesh.vertices[mesh.faces[face_ids]]       # (n, 3, 3)
    a = rng.random(n)
    b = rng.random(n)
    sa = np.sqrt(a)
    w0 = 1.0 - sa
    w2 = b * sa
    w1 = 1.0 - w0 - w2
    points = (
        w0[:, None] * corners[:, 0]
        + w1[:, None] * corners[:, 1]
        + w2[:, None] * corners[:, 2]
    )
    normals = face_normals(mesh)[face_ids]
    return SurfaceSamples(points, face_ids.astype(np.int64), normals)


# ---------------------------------------------------------------------------
# file formats

def load_mesh(path) -> IndexedMesh:
    """Load a mesh, format selected by extension (.obj text, .ply binary)."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".obj":
        return _load_obj(path)
    if suffix == ".ply":
        return _load_ply_mesh(path)
    raise FormatError(f"unsupported mesh format {suffix!r} (expected .obj or .ply)", path=path)


def save_mesh(mesh: IndexedMesh, path) -> None:
    """Save a mesh, format selected by extension (.obj text, .ply binary)."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".obj":
        _save_obj(mesh, path)
    elif suffix == ".ply":
        _save_ply_mesh(mesh, path)
    else:
        raise FormatError(f"unsupported mesh format {suffix!r} (expected .obj or .ply)", path=path)


def _fan_triangulate(indices: list[int]) -> list[tuple[int, int, int]]:
    return [(indices[0], indices[i], indices[i + 1]) for i in range(1, len(indices) - 1)]


def _load_obj(path: Path) -> IndexedMesh:
    vertices: list[tuple[float, float, float]] = []
    raw_faces: list[tuple[list[int], int]] = []
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, start=1):
            tokens = line.split()
            if not tokens or tokens[0].startswith("#"):
                continue
            kind = tokens[0]
            if kind == "v":
                if len(tokens) < 4:
                    raise FormatError(f"vertex needs 3 coordinates: {line.strip()!r}",
                                      path=path, line=lineno)
                try:
                    vertices.append((float(tokens[1]), float(tokens[2]), float(tokens[3])))
                except ValueError:
                    raise FormatError(f"bad vertex coordinate in {line.strip()!r}",
                                      path=path, line=lineno)
            elif kind == "f":
                if len(tokens) < 4:
                    raise FormatError(f"face needs at least 3 indices: {line.strip()!r}",
                                      path=path, line=lineno)
                idx = []
                for tok in tokens[1:]:
                    head = tok.split("/", 1)[0]
                    try:
                        value = int(head)
                    except ValueError:
                        raise FormatError(f"bad face index {tok!r}", path=path, line=lineno)
                    if value < 1:
                        raise FormatError(
                            f"face index {value} not 1-based positive", path=path, line=lineno
                        )
                    idx.append(value - 1)
                raw_faces.append((idx, lineno))
            # all other statements (vn, vt, o, g, s, usemtl, ...) are ignored
    if not raw_faces:
        raise EmptyMeshError(f"{path}: mesh has no faces")
    faces: list[tuple[int, int, int]] = []
    nvert = len(vertices)
    for idx, lineno in raw_faces:
        for tri in _fan_triangulate(idx):
            if max(tri) >= nvert:
                raise FaceIndexError(
                    f"{path}:line {lineno}: face references vertex {max(tri) + 1} "
                    f"but only {nvert} vertices exist"
                )
            faces.append(tri)
    return IndexedMesh(np.asarray(vertices, dtype=np.float64),
                       np.asarray(faces, dtype=np.int64))


def _save_obj(mesh: IndexedMesh, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# splatsoup mesh: {mesh.num_vertices} vertices, {mesh.num_faces} faces\n")
        np.savetxt(fh, mesh.vertices, fmt="v %.17g %.17g %.17g")
        np.savetxt(fh, mesh.faces + 1, fmt="f %d %d %d")


def _load_ply_mesh(path: Path) -> IndexedMesh:
    data = path.read_bytes()
    header = _ply.read_header(data, path=path)
    vert_el = header.element("vertex")
    face_el = header.element("face")
    if vert_el is None or face_el is None:
        raise FormatError("mesh PLY needs 'vertex' and 'face' elements", path=path)
    if vert_el.has_list():
        raise FormatError("vertex element must not hold list properties", path=path)
    names = [p.name for p in vert_el.properties]
    for needed in ("x", "y", "z"):
        if needed not in names:
            raise FormatError(f"vertex element lacks property {needed!r}", path=path)

    offset = header.data_start
    vertices = None
    faces = None
    for element in header.elements:
        if element.name == "vertex":
            arr, offset = _ply.read_scalar_element(data, offset, element, path=path)
            vertices = np.stack(
                [arr["x"], arr["y"], arr["z"]], axis=1
            ).astype(np.float64)
        elif element.name == "face":
            rows, offset = _ply.read_list_element(data, offset, element, path=path)
            if isinstance(rows, np.ndarray):
                k = rows.shape[1]
                if k < 3:
                    raise FormatError("faces need at least 3 indices", path=path)
                # fan-triangulate keeping per-face order
                fans = np.stack(
                    [np.stack([rows[:, 0], rows[:, i], rows[:, i + 1]], axis=1)
                     for i in range(1, k - 1)],
                    axis=1,
                )                                  # (n, k-2, 3)
                faces = fans.reshape(-1, 3)
            else:
                tris = []
                for r in rows:
                    if len(r) < 3:
                        raise FormatError("face with fewer than 3 indices", path=path)
                    tris.extend(_fan_triangulate(list(r)))
                faces = np.asarray(tris, dtype=np.int64)
        else:
            # skip unknown scalar elements; list-bearing ones are not supported
            if element.has_list():
                raise FormatError(
                    f"unsupported extra list element {element.name!r}", path=path
                )
            _, offset = _ply.read_scalar_element(data, offset, element, path=path)
    if vertices is None or faces is None:
        raise FormatError("missing vertex or face payload", path=path)
    if len(faces) == 0:
        raise EmptyMeshError(f"{path}: mesh has no faces")
    return IndexedMesh(vertices, faces)


def _save_ply_mesh(mesh: IndexedMesh, path: Path) -> None:
    header = _ply.format_header([
        ("vertex", mesh.num_vertices, ["double x", "double y", "double z"]),
        ("face", mesh.num_faces, ["list uchar int vertex_indices"]),
    ])
    verts = np.ascontiguousarray(mesh.vertices, dtype="<f8")
    face_rec = np.empty(mesh.num_faces, dtype=[("n", "u1"), ("idx", "<i4", (3,))])
    face_rec["n"] = 3
    face_rec["idx"] = mesh.faces
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(verts.tobytes())
        fh.write(face_rec.tobytes())
