"""
Flat Gaussians <-> triangle soup
================================

A flat Gaussian keeps its mass in a plane: center m, unit quaternion q,
and two in-plane scales (s1, s2). That is exactly the information a
triangle can carry, so a whole scene becomes an editable "triangle soup":

    v0 = m,  v1 = m + s1 * r1,  v2 = m + s2 * r2

with r1, r2 the rotation-matrix columns spanning the plane. This script
encodes a few kernels, inspects the triangles, and decodes them back.
"""

import numpy as np

from splatsoup import (
    FlatGaussian,
    decode_soup,
    encode_soup,
    gaussian_normal,
    matrix_to_quat,
    quat_to_matrix,
)

# --- build three kernels by hand -------------------------------------------

# axis-aligned: rotation = identity, so r1 = +y and r2 = +z
axis_aligned = FlatGaussian(
    center=(0.0, 0.0, 0.0),
    rotation=(1.0, 0.0, 0.0, 0.0),
    scales=(2.0, 3.0),
    opacity=0.9,
    color_dc=(1.0, 0.0, 0.0),
)

# tilted: rotate 45 degrees about z
angle = np.pi / 4
rot_z = np.array([
    [np.cos(angle), -np.sin(angle), 0.0],
    [np.sin(angle), np.cos(angle), 0.0],
    [0.0, 0.0, 1.0],
])
tilted = FlatGaussian(
    center=(1.0, 1.0, 0.5),
    rotation=matrix_to_quat(rot_z),
    scales=(0.5, 1.5),
    opacity=0.6,
    color_dc=(0.0, 1.0, 0.0),
)

# random orientation
rng = np.random.default_rng(0)
q = rng.normal(size=4)
q /= np.linalg.norm(q)
random_one = FlatGaussian((0.0, -2.0, 1.0), q, (1.0, 0.25), 0.4, (0.0, 0.0, 1.0))

gaussians = [axis_aligned, tilted, random_one]

# --- encode -----------------------------------------------------------------

soup = encode_soup(gaussians)
print("soup triangles (rows are v0, v1, v2):")
for i in range(len(soup)):
    print(f"  triangle {i}:")
    print(np.array_str(soup.vertices[i], precision=4, suppress_small=True))

# the first triangle should be [(0,0,0), (0,2,0), (0,0,3)]
assert np.allclose(soup.vertices[0], [[0, 0, 0], [0, 2, 0], [0, 0, 3]])

# --- decode and compare ------------------------------------------------------

recovered = decode_soup(soup)
for i, g in enumerate(gaussians):
    back = recovered[i]
    rot_in = quat_to_matrix(g.rotation)
    rot_out = quat_to_matrix(back.rotation)
    print(f"gaussian {i}:")
    print(f"  center error   {np.abs(back.center - g.center).max():.2e}")
    print(f"  scale error    {np.abs(back.scales - g.scales).max():.2e}")
    # the normal (column 0) is recovered up to sign
    flip = np.sign(rot_in[:, 0] @ rot_out[:, 0])
    print(f"  normal error   {np.abs(flip * rot_out[:, 0] - rot_in[:, 0]).max():.2e}")
    print(f"  opacity kept   {back.opacity == g.opacity}")

# the normal of a flat Gaussian is column 0 of its rotation matrix
print("normal of the axis-aligned kernel:", gaussian_normal(axis_aligned))
