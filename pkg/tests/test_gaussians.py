import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splatsoup import (
    FLAT_SCALE,
    FlatGaussian,
    GaussianCloud,
    ValidationError,
    gaussian_normal,
    matrix_to_quat,
    quat_to_matrix,
)

from conftest import quat_to_matrix_oracle, random_unit_quats, rotation_about_z


def test_flat_scale_constant():
    assert FLAT_SCALE == 1e-8


def test_quat_to_matrix_identity():
    assert np.allclose(quat_to_matrix([1, 0, 0, 0]), np.eye(3))


def test_quat_to_matrix_matches_textbook_formula(rng):
    for q in random_unit_quats(rng, 200):
        np.testing.assert_allclose(quat_to_matrix(q), quat_to_matrix_oracle(q), atol=1e-12)


def test_matrix_to_quat_roundtrip(rng):
    quats = random_unit_quats(rng, 200)
    mats = quat_to_matrix(quats)
    back = matrix_to_quat(mats)
    # same rotation up to quaternion sign
    dots = np.abs(np.einsum("ij,ij->i", back, quats))
    np.testing.assert_allclose(dots, 1.0, atol=1e-9)
    # canonical: non-negative scalar part
    assert (back[:, 0] >= 0).all()


def test_gaussian_normal_identity():
    g = FlatGaussian((0, 0, 0), (1, 0, 0, 0), (1, 1), 1.0, (0, 0, 0))
    np.testing.assert_allclose(gaussian_normal(g), [1, 0, 0])


def test_gaussian_normal_z_rotation():
    # 90 degrees about z maps x to y
    q = matrix_to_quat(rotation_about_z(np.pi / 2))
    g = FlatGaussian((0, 0, 0), q, (1, 1), 1.0, (0, 0, 0))
    np.testing.assert_allclose(gaussian_normal(g), [0, 1, 0], atol=1e-12)


def test_gaussian_normal_matches_matrix_column(rng):
    for q in random_unit_quats(rng, 100):
        g = FlatGaussian((0, 0, 0), q, (1, 2), 0.5, (0, 0, 0))
        np.testing.assert_allclose(
            gaussian_normal(g), quat_to_matrix_oracle(q)[:, 0], atol=1e-12
        )
        assert abs(np.linalg.norm(gaussian_normal(g)) - 1.0) < 1e-6


@settings(max_examples=100, deadline=None)
@given(st.tuples(*[st.floats(-1, 1) for _ in range(4)]))
def test_quat_matrix_orthonormal(raw):
    q = np.asarray(raw)
    norm = np.linalg.norm(q)
    if norm < 1e-3:
        return
    m = quat_to_matrix(q / norm)
    np.testing.assert_allclose(m.T @ m, np.eye(3), atol=1e-9)
    assert np.linalg.det(m) == pytest.approx(1.0, abs=1e-9)


def test_validate_rejects_bad_quaternion():
    g = FlatGaussian((0, 0, 0), (2, 0, 0, 0), (1, 1), 1.0, (0, 0, 0))
    with pytest.raises(ValidationError):
        g.validate()


def test_validate_rejects_bad_scale():
    g = FlatGaussian((0, 0, 0), (1, 0, 0, 0), (0, 1), 1.0, (0, 0, 0))
    with pytest.raises(ValidationError):
        g.validate()


def test_validate_rejects_opacity_outside_range():
    g = FlatGaussian((0, 0, 0), (1, 0, 0, 0), (1, 1), 1.5, (0, 0, 0))
    with pytest.raises(ValidationError):
        g.validate()


def test_cloud_roundtrips_through_items(rng):
    from conftest import random_cloud

    cloud = random_cloud(rng, 17, rest_dim=6)
    rebuilt = GaussianCloud.from_gaussians(list(cloud))
    np.testing.assert_array_equal(rebuilt.centers, cloud.centers)
    np.testing.assert_array_equal(rebuilt.rotations, cloud.rotations)
    np.testing.assert_array_equal(rebuilt.colors_rest, cloud.colors_rest)
    assert len(rebuilt) == 17


def test_cloud_validate_names_index(rng):
    from conftest import random_cloud

    cloud = random_cloud(rng, 5)
    scales = cloud.scales.copy()
    scales[3, 1] = -1.0
    bad = GaussianCloud(cloud.centers, cloud.rotations, scales,
                        cloud.opacities, cloud.colors_dc)
    with pytest.raises(ValidationError, match="3"):
        bad.validate()
