import numpy as np
import pytest

from splatsoup import (
    IndexedMesh,
    NumericError,
    build_index,
    face_centroids,
    nearest_face,
)

from conftest import brute_force_nearest, jittered_grid_mesh


def mesh_with_centroids(points):
    """A mesh whose face centroids land exactly on the given points."""
    points = np.asarray(points, dtype=float)
    verts = []
    faces = []
    # tiny triangle around each target point; centroid = point by symmetry
    d1 = np.array([0.03, 0.0, 0.0])
    d2 = np.array([-0.015, 0.026, 0.0])
    d3 = -(d1 + d2)
    for i, p in enumerate(points):
        verts.extend([p + d1, p + d2, p + d3])
        faces.append([3 * i, 3 * i + 1, 3 * i + 2])
    return IndexedMesh(np.asarray(verts), np.asarray(faces))


def test_single_face_mesh_always_wins(rng):
    mesh = mesh_with_centroids([[0, 0, 0]])
    index = build_index(mesh)
    for p in rng.normal(size=(20, 3)) * 10:
        fid, _ = nearest_face(index, p)
        assert fid == 0


def test_distance_example():
    mesh = mesh_with_centroids([[0, 0, 0], [10, 0, 0]])
    index = build_index(mesh)
    fid, dist = nearest_face(index, [1, 0, 0])
    assert fid == 0
    assert dist == pytest.approx(1.0, abs=1e-12)


def test_tie_breaks_to_lowest_id():
    mesh = mesh_with_centroids([[-1, 0, 0], [1, 0, 0]])
    index = build_index(mesh)
    fid, dist = nearest_face(index, [0, 0, 0])
    assert fid == 0
    assert dist == pytest.approx(1.0, abs=1e-12)


def test_many_way_tie():
    # four centroids at the corners of a square, query dead center
    mesh = mesh_with_centroids([[1, 1, 0], [-1, 1, 0], [-1, -1, 0], [1, -1, 0]])
    index = build_index(mesh)
    fid, _ = nearest_face(index, [0, 0, 0])
    assert fid == 0


def test_agreement_with_brute_force(rng):
    for _ in range(50):
        n = int(rng.integers(1, 200))
        centroids_target = rng.normal(size=(n, 3)) * 5
        mesh = mesh_with_centroids(centroids_target)
        index = build_index(mesh)
        centroids = face_centroids(mesh)
        queries = rng.normal(size=(20, 3)) * 6
        ids, dists = index.query_many(queries)
        for q, got_id, got_d in zip(queries, ids, dists):
            want_id, want_d = brute_force_nearest(centroids, q)
            assert got_id == want_id
            assert got_d == pytest.approx(want_d, rel=1e-12)


def test_batch_matches_single(rng):
    mesh = jittered_grid_mesh(rng)
    index = build_index(mesh)
    queries = rng.normal(size=(32, 3)) * 3
    ids, dists = index.query_many(queries)
    for i, q in enumerate(queries):
        fid, d = index.query(q)
        assert fid == ids[i]
        assert d == dists[i]


def test_non_finite_query_rejected(rng):
    mesh = jittered_grid_mesh(rng)
    index = build_index(mesh)
    with pytest.raises(NumericError):
        nearest_face(index, [np.nan, 0, 0])


def test_results_independent_of_workers(rng):
    mesh = jittered_grid_mesh(rng, cells=12)
    index = build_index(mesh)
    queries = rng.normal(size=(500, 3)) * 4
    ids1, d1 = index.query_many(queries, workers=1)
    ids4, d4 = index.query_many(queries, workers=4)
    np.testing.assert_array_equal(ids1, ids4)
    np.testing.assert_array_equal(d1, d4)


def test_larger_query_batch_agreement(rng):
    mesh = jittered_grid_mesh(rng, cells=20, extent=8.0)
    index = build_index(mesh)
    centroids = face_centroids(mesh)
    queries = rng.uniform(-5, 5, size=(10_000, 3))
    ids, _ = index.query_many(queries)
    delta = centroids[None, :, :] - queries[:, None, :]
    d2 = np.einsum("qfj,qfj->qf", delta, delta)
    want = d2.argmin(axis=1)  # argmin returns the lowest index on ties
    np.testing.assert_array_equal(ids, want)


def test_million_face_mesh_builds():
    from splatsoup.bench import grid_mesh

    mesh = grid_mesh(708)  # 1 002 528 faces
    assert mesh.num_faces > 1_000_000
    index = build_index(mesh)
    fid, _ = index.query([0.0, 0.0, 0.0])
    assert 0 <= fid < mesh.num_faces
