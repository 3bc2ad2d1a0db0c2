"""Shared test helpers: independent oracles and random-data generators."""

import numpy as np
import pytest

from splatsoup import FlatGaussian, GaussianCloud, IndexedMesh


def quat_to_matrix_oracle(q):
    """Independent scalar-first quaternion -> rotation matrix (textbook formula)."""
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def random_unit_quats(rng, n):
    q = rng.normal(size=(n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def random_cloud(rng, n, rest_dim=0, center_range=10.0, scale_lo=1e-3, scale_hi=1e2):
    """Random valid flat Gaussians (log-uniform scales, unit quaternions)."""
    log_lo, log_hi = np.log(scale_lo), np.log(scale_hi)
    return GaussianCloud(
        centers=rng.uniform(-center_range, center_range, size=(n, 3)),
        rotations=random_unit_quats(rng, n),
        scales=np.exp(rng.uniform(log_lo, log_hi, size=(n, 2))),
        opacities=rng.uniform(0.0, 1.0, size=n),
        colors_dc=rng.normal(size=(n, 3)),
        colors_rest=None if rest_dim == 0 else rng.normal(size=(n, rest_dim)),
    )


def random_gaussian(rng, **kw):
    return random_cloud(rng, 1, **kw)[0]


def rotation_about_z(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def random_rotation(rng):
    """Uniform-ish random rotation via QR with positive diagonal, det fixed to +1."""
    a = rng.normal(size=(3, 3))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def rigid_transform_gaussian(g: FlatGaussian, rot, t):
    """Apply a rigid motion to one Gaussian (rotation composed on the left)."""
    from splatsoup import matrix_to_quat, quat_to_matrix

    new_rot = rot @ quat_to_matrix(g.rotation)
    return FlatGaussian(
        center=rot @ g.center + t,
        rotation=matrix_to_quat(new_rot),
        scales=g.scales,
        opacity=g.opacity,
        color_dc=g.color_dc,
        color_rest=g.color_rest,
    )


def jittered_grid_mesh(rng, cells=8, extent=4.0, jitter=0.15, cells_y=None):
    """Grid mesh with random vertex jitter; all faces stay non-degenerate."""
    cy = cells if cells_y is None else cells_y
    xs = np.linspace(-extent / 2, extent / 2, cells + 1)
    ys = np.linspace(-extent / 2, extent / 2, cy + 1)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    step = extent / max(cells, cy)
    v = np.stack([gx.ravel(), gy.ravel(), np.zeros(gx.size)], axis=1)
    v += rng.uniform(-jitter * step, jitter * step, size=v.shape)
    row = np.arange(cells)
    col = np.arange(cy)
    i0 = (row[:, None] * (cy + 1) + col[None, :]).ravel()
    i1 = i0 + cy + 1
    i2 = i1 + 1
    i3 = i0 + 1
    faces = np.concatenate(
        [np.stack([i0, i1, i2], axis=1), np.stack([i0, i2, i3], axis=1)], axis=1
    ).reshape(-1, 3)
    return IndexedMesh(v, faces)


def brute_force_nearest(centroids, point):
    """Reference nearest-centroid scan: squared distances, argmin, lowest id on ties."""
    delta = centroids - point
    d2 = np.einsum("ij,ij->i", delta, delta)
    best = d2.min()
    return int(np.flatnonzero(d2 == best).min()), float(np.sqrt(best))


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
