import numpy as np
import pytest

from splatsoup import (
    CorrespondenceError,
    DegenerateTriangleError,
    EditTransform,
    IndexedMesh,
    MeshFace,
    SoupAttributes,
    SoupTriangle,
    TriangleSoup,
    apply_edit,
    build_index,
    decode_soup,
    edit_transform,
    encode_soup,
    face_centroids,
    face_frame,
    propagate_soup,
)

from conftest import (
    brute_force_nearest,
    jittered_grid_mesh,
    random_cloud,
    random_rotation,
    rotation_about_z,
)


def unit_right_triangle():
    return MeshFace([0, 0, 0], [1, 0, 0], [0, 1, 0], face_id=0)


# ---------------------------------------------------------------------------
# face frames

def test_face_frame_unit_right_triangle():
    frame = face_frame(unit_right_triangle())
    np.testing.assert_allclose(frame.basis[:, 0], [1, 0, 0], atol=1e-12)
    np.testing.assert_allclose(frame.basis[:, 1], [0, 0, 1], atol=1e-12)
    np.testing.assert_allclose(frame.basis[:, 2], [0, -1, 0], atol=1e-12)
    np.testing.assert_allclose(frame.origin, [0, 0, 0])


def test_face_frame_rotation_equivariant(rng):
    for _ in range(25):
        w = rng.normal(size=(3, 3)) * 2
        if MeshFace(*w, face_id=0).is_degenerate():
            continue
        rot = random_rotation(rng)
        frame = face_frame(MeshFace(w[0], w[1], w[2], face_id=0))
        frame_rot = face_frame(MeshFace(rot @ w[0], rot @ w[1], rot @ w[2], face_id=0))
        np.testing.assert_allclose(frame_rot.basis, rot @ frame.basis, atol=1e-10)
        np.testing.assert_allclose(frame_rot.origin, rot @ w[0], atol=1e-12)


def test_face_frame_orthonormal_proper(rng):
    for _ in range(100):
        w = rng.normal(size=(3, 3)) * 3
        face = MeshFace(w[0], w[1], w[2], face_id=0)
        if face.is_degenerate():
            continue
        u = face_frame(face).basis
        np.testing.assert_allclose(u.T @ u, np.eye(3), atol=1e-9)
        assert np.linalg.det(u) == pytest.approx(1.0, abs=1e-9)


def test_face_frame_rejects_degenerate():
    face = MeshFace([0, 0, 0], [1, 0, 0], [2, 0, 0], face_id=7)
    with pytest.raises(DegenerateTriangleError) as err:
        face_frame(face)
    assert err.value.index == 7


# ---------------------------------------------------------------------------
# edit transforms

def test_edit_transform_identity():
    face = unit_right_triangle()
    xf = edit_transform(face, face)
    np.testing.assert_allclose(xf.rotation, np.eye(3), atol=1e-12)
    np.testing.assert_array_equal(xf.from_origin, xf.to_origin)


def test_edit_transform_pure_rotation():
    rot = rotation_about_z(np.pi / 2)
    face = unit_right_triangle()
    edited = MeshFace(rot @ face.w0, rot @ face.w1, rot @ face.w2, face_id=0)
    xf = edit_transform(face, edited)
    np.testing.assert_allclose(xf.rotation, rot, atol=1e-9)


def test_edit_transform_pure_translation():
    t = np.array([3.0, -2.0, 1.0])
    face = unit_right_triangle()
    edited = MeshFace(face.w0 + t, face.w1 + t, face.w2 + t, face_id=0)
    xf = edit_transform(face, edited)
    np.testing.assert_allclose(xf.rotation, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(xf.to_origin - xf.from_origin, t, atol=1e-12)


def test_edit_transform_is_rotation_for_random_pairs(rng):
    for _ in range(50):
        a = rng.normal(size=(3, 3)) * 2
        b = rng.normal(size=(3, 3)) * 2
        fa = MeshFace(a[0], a[1], a[2], face_id=0)
        fb = MeshFace(b[0], b[1], b[2], face_id=0)
        if fa.is_degenerate() or fb.is_degenerate():
            continue
        t = edit_transform(fa, fb).rotation
        np.testing.assert_allclose(t.T @ t, np.eye(3), atol=1e-9)
        assert np.linalg.det(t) == pytest.approx(1.0, abs=1e-9)


# ---------------------------------------------------------------------------
# apply_edit

def test_apply_identity():
    tri = SoupTriangle([0.2, 0.3, 0.4], [1, 0, 0], [0, 1, 0])
    out = apply_edit(tri, EditTransform.identity())
    np.testing.assert_array_equal(out.vertices, tri.vertices)


def test_apply_pure_translation():
    tri = SoupTriangle([0, 0, 0], [1, 0, 0], [0, 1, 0])
    t = np.array([1.0, 2.0, 3.0])
    xf = EditTransform(np.eye(3), np.zeros(3), t)
    out = apply_edit(tri, xf)
    np.testing.assert_allclose(out.vertices, tri.vertices + t)


def test_apply_z_rotation_hand_computed():
    # 90 degrees about the origin: (x, y, z) -> (-y, x, z)
    xf = EditTransform(rotation_about_z(np.pi / 2), np.zeros(3), np.zeros(3))
    tri = SoupTriangle([1, 0, 0], [2, 0, 0], [1, 1, 0])
    out = apply_edit(tri, xf)
    np.testing.assert_allclose(out.vertices, [[0, 1, 0], [0, 2, 0], [-1, 1, 0]], atol=1e-12)


# ---------------------------------------------------------------------------
# propagate_soup

def soup_over_mesh(rng, mesh, n, spread=0.3):
    """Small random soup floating near the mesh surface."""
    lo, hi = mesh.bounding_box()
    cloud = random_cloud(rng, n, center_range=1.0, scale_lo=0.02, scale_hi=0.2)
    centers = rng.uniform(lo, hi, size=(n, 3))
    centers[:, 2] = rng.uniform(-spread, spread, size=n)
    from splatsoup import GaussianCloud

    cloud = GaussianCloud(centers, cloud.rotations, cloud.scales,
                          cloud.opacities, cloud.colors_dc)
    return encode_soup(cloud)


def test_identity_edit_is_identity(rng):
    mesh = jittered_grid_mesh(rng)
    soup = soup_over_mesh(rng, mesh, 200)
    out, report = propagate_soup(soup, mesh, mesh)
    assert np.abs(out.vertices - soup.vertices).max() <= 1e-9
    assert report.num_fallbacks == 0
    assert len(report) == 200


def test_rigid_motion_matches_direct_transform(rng):
    mesh = jittered_grid_mesh(rng)
    soup = soup_over_mesh(rng, mesh, 300)
    rot = random_rotation(rng)
    t = rng.normal(size=3) * 2
    edited = IndexedMesh(mesh.vertices @ rot.T + t, mesh.faces)
    out, _ = propagate_soup(soup, mesh, edited)
    direct = soup.vertices @ rot.T + t
    lo, hi = mesh.bounding_box()
    diag = np.linalg.norm(hi - lo)
    assert np.abs(out.vertices - direct).max() <= 1e-5 * diag


def test_locality_only_triangles_near_moved_face_move(rng):
    mesh = jittered_grid_mesh(rng, cells=6)
    soup = soup_over_mesh(rng, mesh, 100)
    centroids = face_centroids(mesh)
    assoc = np.array([brute_force_nearest(centroids, c)[0] for c in soup.centroids()])

    moved_face = int(assoc[0])
    v = mesh.vertices.copy()
    ids = mesh.faces[moved_face]
    # push the moved face straight up; faces sharing those vertices move too
    v[ids] += [0, 0, 0.5]
    edited = IndexedMesh(v, mesh.faces)
    affected_faces = np.flatnonzero(np.isin(mesh.faces, ids).any(axis=1))

    out, report = propagate_soup(soup, mesh, edited)
    np.testing.assert_array_equal(report.face_ids, assoc)  # association oracle
    moved = np.abs(out.vertices - soup.vertices).max(axis=(1, 2)) > 1e-12
    should_move = np.isin(assoc, affected_faces)
    np.testing.assert_array_equal(moved, should_move)
    assert moved[0]


def test_propagation_preserves_scales_under_rigid_edit(rng):
    mesh = jittered_grid_mesh(rng)
    soup = soup_over_mesh(rng, mesh, 150)
    rot = random_rotation(rng)
    edited = IndexedMesh(mesh.vertices @ rot.T + 1.5, mesh.faces)
    out, _ = propagate_soup(soup, mesh, edited)
    before = decode_soup(soup)
    after = decode_soup(out)
    np.testing.assert_allclose(after.scales, before.scales, rtol=1e-6, atol=1e-12)
    # attributes byte-identical
    assert out.attributes.opacities.tobytes() == soup.attributes.opacities.tobytes()
    assert out.attributes.colors_dc.tobytes() == soup.attributes.colors_dc.tobytes()


def test_degenerate_edited_face_falls_back_to_identity(rng):
    mesh = jittered_grid_mesh(rng, cells=3)
    soup = soup_over_mesh(rng, mesh, 60)
    _, report0 = propagate_soup(soup, mesh, mesh)
    victim = int(report0.face_ids[0])

    v = mesh.vertices.copy()
    ids = mesh.faces[victim]
    v[ids] = v[ids[0]]  # collapse the face to a point
    edited = IndexedMesh(v, mesh.faces)
    out, report = propagate_soup(soup, mesh, edited)

    hit = report.face_ids == victim
    assert hit.any()
    # a triangle is flagged exactly when its edited face went degenerate
    degenerate_faces = np.flatnonzero(
        [MeshFace(*edited.vertices[edited.faces[f]], face_id=f).is_degenerate()
         for f in range(edited.num_faces)]
    )
    np.testing.assert_array_equal(report.fallback, np.isin(report.face_ids, degenerate_faces))
    # flagged triangles pass through bitwise
    np.testing.assert_array_equal(out.vertices[hit], soup.vertices[hit])


def test_mismatched_pair_rejected(rng):
    mesh = jittered_grid_mesh(rng, cells=3)
    soup = soup_over_mesh(rng, mesh, 10)
    smaller = IndexedMesh(mesh.vertices, mesh.faces[:-2])
    with pytest.raises(CorrespondenceError):
        propagate_soup(soup, mesh, smaller)


def test_empty_soup_allowed(rng):
    mesh = jittered_grid_mesh(rng, cells=2)
    soup = TriangleSoup(np.zeros((0, 3, 3)), SoupAttributes(np.zeros(0), np.zeros((0, 3))))
    out, report = propagate_soup(soup, mesh, mesh)
    assert len(out) == 0 and len(report) == 0


def test_prebuilt_index_and_report_table(rng, tmp_path):
    mesh = jittered_grid_mesh(rng, cells=4)
    soup = soup_over_mesh(rng, mesh, 25)
    index = build_index(mesh)
    out, report = propagate_soup(soup, mesh, mesh, index)
    assert len(out) == 25
    table = tmp_path / "report.tsv"
    report.write_table(table)
    lines = table.read_text().splitlines()
    assert lines[0] == "triangle_id\tface_id\tdistance\tflag"
    assert len(lines) == 26
    first = lines[1].split("\t")
    assert first[0] == "0" and first[1] == str(int(report.face_ids[0]))
    assert first[3] in ("ok", "fallback")
    assert "triangles associated: 25" in report.summary()


def test_association_ids_match_brute_force(rng):
    mesh = jittered_grid_mesh(rng, cells=5)
    soup = soup_over_mesh(rng, mesh, 80)
    centroids = face_centroids(mesh)
    _, report = propagate_soup(soup, mesh, mesh)
    want = [brute_force_nearest(centroids, c)[0] for c in soup.centroids()]
    np.testing.assert_array_equal(report.face_ids, want)
