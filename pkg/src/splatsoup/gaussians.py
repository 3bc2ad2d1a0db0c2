"""Flat (2D) Gaussian appearance kernels.

A flat Gaussian keeps two live scale factors; the third axis is pinned to
the negligible constant FLAT_SCALE so the kernel's mass lies in a plane.
Column 0 of the rotation matrix is that flattened axis, i.e. the kernel's
normal. Quaternions are unit, scalar-first (w, x, y, z).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from ._util import as_vec3, require_finite
from .errors import ValidationError

# Scale pinned on the flattened axis.
FLAT_SCALE = 1e-8

# Zeroth spherical-harmonics band constant: sqrt(1 / (4*pi)). Converts the
# stored DC color coefficient to a linear color via 0.5 + SH_DC * f_dc.
SH_DC = 0.28209479177387814

QUAT_NORM_TOL = 1e-6


def quat_to_matrix(q) -> np.ndarray:
    """Rotation matrix/matrices for scalar-first unit quaternion(s).

    Accepts shape (4,) or (N, 4); returns (3, 3) or (N, 3, 3).
    """
    q = np.asarray(q, dtype=np.float64)
    return Rotation.from_quat(q[..., [1, 2, 3, 0]]).as_matrix()


def matrix_to_quat(m) -> np.ndarray:
    """Scalar-first unit quaternion(s) for proper rotation matrix/matrices.

    Canonicalized to non-negative scalar part so the output is deterministic.
    """
    m = np.asarray(m, dtype=np.float64)
    q = Rotation.from_matrix(m).as_quat(canonical=True)
    return q[..., [3, 0, 1, 2]]


@dataclass(frozen=True)
class FlatGaussian:
    """One appearance kernel: center, orientation, two live scales, opacity, color."""

    center: np.ndarray        # (3,) world units
    rotation: np.ndarray      # (4,) unit quaternion, scalar first
    scales: np.ndarray        # (2,) positive: in-plane extents along columns 1, 2
    opacity: float            # in [0, 1]
    color_dc: np.ndarray      # (3,) DC color coefficients
    color_rest: np.ndarray | None = None  # optional higher-order coefficients

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec3(self.center, "center"))
        q = np.asarray(self.rotation, dtype=np.float64)
        if q.shape != (4,):
            raise ValidationError(f"rotation must be a 4-vector quaternion, got {q.shape}")
        object.__setattr__(self, "rotation", q)
        s = np.asarray(self.scales, dtype=np.float64)
        if s.shape != (2,):
            raise ValidationError(f"scales must be a 2-vector, got {s.shape}")
        object.__setattr__(self, "scales", s)
        object.__setattr__(self, "opacity", float(self.opacity))
        object.__setattr__(self, "color_dc", as_vec3(self.color_dc, "color_dc"))
        if self.color_rest is not None:
            object.__setattr__(
                self, "color_rest", np.asarray(self.color_rest, dtype=np.float64).ravel()
            )

    def rotation_matrix(self) -> np.ndarray:
        return quat_to_matrix(self.rotation)

    def validate(self) -> "FlatGaussian":
        """Check the type invariants; returns self so calls can chain."""
        if not np.isfinite(self.center).all():
            raise ValidationError("non-finite center")
        if not np.isfinite(self.rotation).all():
            raise ValidationError("non-finite rotation quaternion")
        norm = float(np.linalg.norm(self.rotation))
        if abs(norm - 1.0) > QUAT_NORM_TOL:
            raise ValidationError(f"quaternion norm {norm} not within {QUAT_NORM_TOL} of 1")
        if not np.isfinite(self.scales).all() or (self.scales <= 0.0).any():
            raise ValidationError(f"scales must be positive and finite, got {self.scales}")
        if not np.isfinite(self.opacity) or not 0.0 <= self.opacity <= 1.0:
            raise ValidationError(f"opacity {self.opacity} outside [0, 1]")
        if not np.isfinite(self.color_dc).all():
            raise ValidationError("non-finite color coefficients")
        return self


def gaussian_normal(g: FlatGaussian) -> np.ndarray:
    """Unit normal of a flat Gaussian: column 0 of its rotation matrix."""
    return quat_to_matrix(g.rotation)[:, 0]


@dataclass(frozen=True, eq=False)
class GaussianCloud:
    """Structure-of-arrays batch of flat Gaussians.

    Behaves as an immutable sequence of FlatGaussian while keeping the
    per-field arrays contiguous for vectorized work.
    """

    centers: np.ndarray               # (N, 3)
    rotations: np.ndarray             # (N, 4) scalar-first unit quaternions
    scales: np.ndarray                # (N, 2)
    opacities: np.ndarray             # (N,)
    colors_dc: np.ndarray             # (N, 3)
    colors_rest: np.ndarray | None = field(default=None)  # (N, K) or None

    def __post_init__(self):
        n = len(self.centers)
        shapes = {
            "centers": (self.centers, (n, 3)),
            "rotations": (self.rotations, (n, 4)),
            "scales": (self.scales, (n, 2)),
            "opacities": (self.opacities, (n,)),
            "colors_dc": (self.colors_dc, (n, 3)),
        }
        for name, (arr, want) in shapes.items():
            arr = np.asarray(arr, dtype=np.float64)
            if arr.shape != want:
                raise ValidationError(f"{name} must have shape {want}, got {arr.shape}")
            object.__setattr__(self, name, arr)
        if self.colors_rest is not None:
            rest = np.asarray(self.colors_rest, dtype=np.float64)
            if rest.ndim != 2 or len(rest) != n:
                raise ValidationError(f"colors_rest must be (N, K), got {rest.shape}")
            object.__setattr__(self, "colors_rest", rest)

    def __len__(self) -> int:
        return len(self.centers)

    def __getitem__(self, i: int) -> FlatGaussian:
        if not -len(self) <= i < len(self):
            raise IndexError(i)
        return FlatGaussian(
            center=self.centers[i],
            rotation=self.rotations[i],
            scales=self.scales[i],
            opacity=float(self.opacities[i]),
            color_dc=self.colors_dc[i],
            color_rest=None if self.colors_rest is None else self.colors_rest[i],
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @classmethod
    def from_gaussians(cls, gaussians) -> "GaussianCloud":
        items = list(gaussians)
        if not items:
            return cls.empty()
        rest_dims = {0 if g.color_rest is None else g.color_rest.size for g in items}
        if len(rest_dims) > 1:
            raise ValidationError("gaussians disagree on higher-order color size")
        k = rest_dims.pop()
        return cls(
            centers=np.stack([g.center for g in items]),
            rotations=np.stack([g.rotation for g in items]),
            scales=np.stack([g.scales for g in items]),
            opacities=np.array([g.opacity for g in items]),
            colors_dc=np.stack([g.color_dc for g in items]),
            colors_rest=None if k == 0 else np.stack([g.color_rest for g in items]),
        )

    @classmethod
    def empty(cls, rest_dim: int = 0) -> "GaussianCloud":
        return cls(
            centers=np.zeros((0, 3)),
            rotations=np.zeros((0, 4)),
            scales=np.zeros((0, 2)),
            opacities=np.zeros(0),
            colors_dc=np.zeros((0, 3)),
            colors_rest=None if rest_dim == 0 else np.zeros((0, rest_dim)),
        )

    def rotation_matrices(self) -> np.ndarray:
        """(N, 3, 3) rotation matrices; columns are the kernel axes."""
        return quat_to_matrix(self.rotations)

    def normals(self) -> np.ndarray:
        """(N, 3) unit normals (column 0 of each rotation matrix)."""
        return self.rotation_matrices()[:, :, 0]

    def validate(self) -> "GaussianCloud":
        """Vectorized invariant check; errors name the first offending index."""
        require_finite(self.centers, "gaussian center", ValidationError)
        require_finite(self.rotations, "gaussian quaternion", ValidationError)
        norms = np.linalg.norm(self.rotations, axis=1)
        bad = np.abs(norms - 1.0) > QUAT_NORM_TOL
        if bad.any():
            i = int(np.argmax(bad))
            raise ValidationError(f"gaussian {i}: quaternion norm {norms[i]} not unit")
        ok = np.isfinite(self.scales) & (self.scales > 0.0)
        if not ok.all():
            i = int(np.argmax(~ok.all(axis=1)))
            raise ValidationError(f"gaussian {i}: scales {self.scales[i]} not positive finite")
        bad = ~np.isfinite(self.opacities) | (self.opacities < 0.0) | (self.opacities > 1.0)
        if bad.any():
            i = int(np.argmax(bad))
            raise ValidationError(f"gaussian {i}: opacity {self.opacities[i]} outside [0, 1]")
        require_finite(self.colors_dc, "color coefficient", ValidationError)
        return self


def as_cloud(gaussians) -> GaussianCloud:
    """View any sequence of FlatGaussian (or a cloud) as a GaussianCloud."""
    if isinstance(gaussians, GaussianCloud):
        return gaussians
    return GaussianCloud.from_gaussians(gaussians)
