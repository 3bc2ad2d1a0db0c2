"""Bidirectional codec between flat Gaussians and a triangle-soup proxy.

Each Gaussian maps to one triangle: v0 at the center, v1 = v0 + s1*r1 and
v2 = v0 + s2*r2 along the two live axes. Decoding inverts this exactly:
the normal is the normalized edge cross product, the first live axis the
normalized first edge, the second the Gram-Schmidt residual of the second
edge, and the scales the lengths those directions carry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import as_vec3, degenerate_mask, normalize_rows
from .errors import DegenerateTriangleError, ValidationError
from .gaussians import GaussianCloud, as_cloud, matrix_to_quat


@dataclass(frozen=True)
class SoupTriangle:
    """One proxy triangle, ordered vertices (v0, v1, v2)."""

    v0: np.ndarray
    v1: np.ndarray
    v2: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v0", as_vec3(self.v0, "v0"))
        object.__setattr__(self, "v1", as_vec3(self.v1, "v1"))
        object.__setattr__(self, "v2", as_vec3(self.v2, "v2"))

    @property
    def vertices(self) -> np.ndarray:
        return np.stack([self.v0, self.v1, self.v2])

    def centroid(self) -> np.ndarray:
        return (self.v0 + self.v1 + self.v2) / 3.0


@dataclass(frozen=True, eq=False)
class SoupAttributes:
    """Non-geometric per-Gaussian payload carried through edits unchanged."""

    opacities: np.ndarray             # (N,)
    colors_dc: np.ndarray             # (N, 3)
    colors_rest: np.ndarray | None = None  # (N, K) or None

    def __post_init__(self):
        op = np.asarray(self.opacities, dtype=np.float64)
        dc = np.asarray(self.colors_dc, dtype=np.float64)
        if op.ndim != 1 or dc.shape != (op.size, 3):
            raise ValidationError(
                f"attribute shapes disagree: opacities {op.shape}, colors_dc {dc.shape}"
            )
        object.__setattr__(self, "opacities", op)
        object.__setattr__(self, "colors_dc", dc)
        if self.colors_rest is not None:
            rest = np.asarray(self.colors_rest, dtype=np.float64)
            if rest.ndim != 2 or len(rest) != op.size:
                raise ValidationError(f"colors_rest must be (N, K), got {rest.shape}")
            object.__setattr__(self, "colors_rest", rest)

    def __len__(self) -> int:
        return self.opacities.size


@dataclass(frozen=True, eq=False)
class TriangleSoup:
    """Ordered, disconnected triangles plus their attribute sidecar."""

    vertices: np.ndarray        # (N, 3, 3): triangle, vertex, xyz
    attributes: SoupAttributes  # parallel, same length

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        if v.ndim != 3 or v.shape[1:] != (3, 3):
            raise ValidationError(f"soup vertices must be (N, 3, 3), got {v.shape}")
        object.__setattr__(self, "vertices", v)
        if len(self.attributes) != len(v):
            raise ValidationError(
                f"{len(v)} triangles but {len(self.attributes)} attribute records"
            )

    def __len__(self) -> int:
        return len(self.vertices)

    def triangle(self, i: int) -> SoupTriangle:
        v = self.vertices[i]
        return SoupTriangle(v[0], v[1], v[2])

    def centroids(self) -> np.ndarray:
        """(N, 3) triangle centroids (mean of the three vertices)."""
        return self.vertices.mean(axis=1)


def encode_soup(gaussians) -> TriangleSoup:
    """Encode flat Gaussians as a triangle soup.

    Per Gaussian: v0 = center, v1 = center + s1*r1, v2 = center + s2*r2,
    where r1, r2 are rotation-matrix columns 1 and 2. Attributes are copied
    positionally; output length equals input length.
    """
    cloud = as_cloud(gaussians)
    if len(cloud) == 0:
        return TriangleSoup(
            np.zeros((0, 3, 3)),
            SoupAttributes(cloud.opacities, cloud.colors_dc, cloud.colors_rest),
        )
    _validate_for_encode(cloud)
    rot = cloud.rotation_matrices()           # (N, 3, 3)
    r1 = rot[:, :, 1]
    r2 = rot[:, :, 2]
    v0 = cloud.centers
    v1 = v0 + cloud.scales[:, 0:1] * r1
    v2 = v0 + cloud.scales[:, 1:2] * r2
    vertices = np.stack([v0, v1, v2], axis=1)
    attrs = SoupAttributes(cloud.opacities, cloud.colors_dc, cloud.colors_rest)
    return TriangleSoup(vertices, attrs)


def _validate_for_encode(cloud: GaussianCloud):
    bad = ~np.isfinite(cloud.centers).all(axis=1)
    bad |= ~np.isfinite(cloud.rotations).all(axis=1)
    if bad.any():
        raise ValidationError(f"gaussian {int(np.argmax(bad))}: non-finite center or rotation")
    bad = (~np.isfinite(cloud.scales) | (cloud.scales <= 0.0)).any(axis=1)
    if bad.any():
        i = int(np.argmax(bad))
        raise ValidationError(f"gaussian {i}: scale {cloud.scales[i]} not positive finite")
    norms = np.linalg.norm(cloud.rotations, axis=1)
    bad = np.abs(norms - 1.0) > 1e-6
    if bad.any():
        i = int(np.argmax(bad))
        raise ValidationError(f"gaussian {i}: quaternion norm {norms[i]} not unit")


def decode_soup(soup: TriangleSoup) -> GaussianCloud:
    """Recover flat Gaussians from a triangle soup.

    center = v0; normal = normalized cross of the two edges; first live axis
    = normalized first edge; second live axis = Gram-Schmidt residual of the
    second edge against the first; scales = edge length and residual length.
    The recovered matrix is forced to a proper rotation (det +1).

    Raises DegenerateTriangleError naming the first offending index.
    """
    if len(soup) == 0:
        k = 0 if soup.attributes.colors_rest is None else soup.attributes.colors_rest.shape[1]
        return GaussianCloud.empty(rest_dim=k)
    v = soup.vertices
    e1 = v[:, 1] - v[:, 0]
    e2 = v[:, 2] - v[:, 0]
    deg = degenerate_mask(e1, e2)
    if deg.any():
        raise DegenerateTriangleError(int(np.argmax(deg)))

    s1 = np.linalg.norm(e1, axis=1)
    r1 = e1 / s1[:, None]
    proj = np.einsum("ij,ij->i", e2, r1)
    resid = e2 - proj[:, None] * r1
    s2 = np.linalg.norm(resid, axis=1)
    r2 = resid / s2[:, None]
    r0 = normalize_rows(np.cross(e1, e2))

    rot = np.stack([r0, r1, r2], axis=2)      # columns r0, r1, r2
    det = np.linalg.det(rot)
    flip = det < 0.0
    if flip.any():
        # Flat Gaussians are symmetric about their plane; flip the normal so
        # downstream math always sees a proper rotation.
        rot[flip, :, 0] *= -1.0

    quats = matrix_to_quat(rot)
    return GaussianCloud(
        centers=v[:, 0].copy(),
        rotations=quats,
        scales=np.stack([s1, s2], axis=1),
        opacities=soup.attributes.opacities,
        colors_dc=soup.attributes.colors_dc,
        colors_rest=soup.attributes.colors_rest,
    )


def soup_from_triangles(triangles, attributes: SoupAttributes | None = None) -> TriangleSoup:
    """Build a TriangleSoup from SoupTriangle items (neutral attributes if omitted)."""
    tris = list(triangles)
    if tris:
        vertices = np.stack([t.vertices for t in tris])
    else:
        vertices = np.zeros((0, 3, 3))
    if attributes is None:
        n = len(tris)
        attributes = SoupAttributes(np.full(n, 1.0), np.zeros((n, 3)))
    return TriangleSoup(vertices, attributes)
