"""Scene-file codecs.

Scenes follow the common splat point-cloud convention: a binary
little-endian PLY whose vertex element carries position, a normal
placeholder, DC color coefficients, optional higher-order coefficients
(``f_rest_*``), opacity stored as a logit, three log-scales, and an
unnormalized scalar-first quaternion. Loading flattens each kernel by
dropping its smallest scale and rotating that axis into column 0.

Triangle soups persist as an ordinary mesh file with 3N disconnected
vertices plus a tab-separated attribute sidecar keyed by triangle index.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit, logit

from . import _ply
from ._util import readonly
from .errors import (
    FormatError,
    NumericError,
    SidecarMismatchError,
    SoupStructureError,
    ValidationError,
)
from .gaussians import FLAT_SCALE, GaussianCloud, as_cloud, matrix_to_quat, quat_to_matrix
from .mesh import IndexedMesh, load_mesh, save_mesh
from .soup import SoupAttributes, TriangleSoup

# Ratio of smallest to middle scale above which a loaded kernel is reported
# as poorly flat (it was trained with three live axes, not two).
POOR_FLATNESS_RATIO = 0.1

_REST_RE = re.compile(r"^f_rest_(\d+)$")

# Column-cycling permutations that move scale-axis k into column 0 while
# keeping the rotation proper (cyclic, det preserved).
_CYCLE = {0: (0, 1, 2), 1: (1, 2, 0), 2: (2, 0, 1)}


@dataclass(frozen=True, eq=False)
class FlattenReport:
    """Kernels whose smallest/middle scale ratio exceeded the flatness bound."""

    indices: np.ndarray  # (K,) point indices
    ratios: np.ndarray   # (K,) smallest/middle scale ratio

    def __len__(self) -> int:
        return len(self.indices)

    def summary(self) -> str:
        if len(self) == 0:
            return "all points flat (smallest/middle scale ratio <= 0.1)"
        worst = float(self.ratios.max())
        return (
            f"{len(self)} points poorly flat (smallest/middle scale ratio > "
            f"{POOR_FLATNESS_RATIO}, worst {worst:.3g}); their smallest axis was dropped"
        )


def load_scene(path) -> tuple[GaussianCloud, FlattenReport]:
    """Load a splat scene file into flat Gaussians plus a flatten report."""
    path = Path(path)
    data = path.read_bytes()
    header = _ply.read_header(data, path=path)
    element = header.element("vertex")
    if element is None:
        raise FormatError("scene PLY lacks a 'vertex' element", path=path)
    if element.has_list():
        raise FormatError("scene vertex element must not hold list properties", path=path)
    names = [p.name for p in element.properties]
    required = ["x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2", "opacity",
                "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"]
    for name in required:
        if name not in names:
            raise FormatError(f"scene vertex element lacks property {name!r}", path=path)
    records, _ = _ply.read_scalar_element(data, header.data_start, element, path=path)

    def cols(*fields):
        return np.stack([records[f].astype(np.float64) for f in fields], axis=1)

    centers = cols("x", "y", "z")
    colors_dc = cols("f_dc_0", "f_dc_1", "f_dc_2")
    log_scales = cols("scale_0", "scale_1", "scale_2")
    quats = cols("rot_0", "rot_1", "rot_2", "rot_3")
    logits = records["opacity"].astype(np.float64)

    rest_names = sorted(
        (n for n in names if _REST_RE.match(n)),
        key=lambda n: int(_REST_RE.match(n).group(1)),
    )
    colors_rest = cols(*rest_names) if rest_names else None

    for what, arr in (
        ("position", centers), ("color coefficient", colors_dc),
        ("log-scale", log_scales), ("quaternion", quats),
        ("opacity logit", logits.reshape(-1, 1)),
    ):
        bad = ~np.isfinite(arr).all(axis=1)
        if bad.any():
            idx = np.flatnonzero(bad)
            shown = ", ".join(map(str, idx[:10]))
            more = "" if idx.size <= 10 else f" (+{idx.size - 10} more)"
            raise NumericError(f"{path}: non-finite {what} at index {shown}{more}")
    if colors_rest is not None and not np.isfinite(colors_rest).all():
        idx = np.flatnonzero(~np.isfinite(colors_rest).all(axis=1))
        raise NumericError(f"{path}: non-finite higher-order color at index {idx[0]}")

    qnorm = np.linalg.norm(quats, axis=1)
    if (qnorm == 0.0).any():
        raise ValidationError(f"zero quaternion at index {int(np.argmax(qnorm == 0.0))}")
    quats = quats / qnorm[:, None]

    opacities = expit(logits)
    scales3 = np.exp(log_scales)

    # Flatten: drop the smallest axis, cycle it into rotation column 0.
    order = np.argsort(scales3, axis=1, kind="stable")
    smallest = order[:, 0]
    ratios = scales3[np.arange(len(scales3)), order[:, 0]] / scales3[
        np.arange(len(scales3)), order[:, 1]
    ]
    rot = quat_to_matrix(quats)
    out_rot = np.empty_like(rot)
    out_scales = np.empty((len(scales3), 2))
    for k, perm in _CYCLE.items():
        sel = smallest == k
        if not sel.any():
            continue
        out_rot[sel] = rot[sel][:, :, perm]
        out_scales[sel, 0] = scales3[sel, perm[1]]
        out_scales[sel, 1] = scales3[sel, perm[2]]

    flagged = np.flatnonzero(ratios > POOR_FLATNESS_RATIO)
    report = FlattenReport(readonly(flagged), readonly(ratios[flagged]))
    cloud = GaussianCloud(
        centers=centers,
        rotations=matrix_to_quat(out_rot),
        scales=out_scales,
        opacities=opacities,
        colors_dc=colors_dc,
        colors_rest=colors_rest,
    )
    return cloud, report


def save_scene(gaussians, path) -> None:
    """Write flat Gaussians as a splat scene file (inverse of load_scene).

    Opacity is stored as a logit (values at exactly 0 or 1 are nudged by
    1e-6 first); scales as logarithms with the flattened axis at the
    module's negligible constant; the quaternion scalar-first.
    """
    path = Path(path)
    cloud = as_cloud(gaussians).validate()
    n = len(cloud)
    k = 0 if cloud.colors_rest is None else cloud.colors_rest.shape[1]

    props = ["float x", "float y", "float z", "float nx", "float ny", "float nz",
             "float f_dc_0", "float f_dc_1", "float f_dc_2"]
    props += [f"float f_rest_{i}" for i in range(k)]
    props += ["float opacity", "float scale_0", "float scale_1", "float scale_2",
              "float rot_0", "float rot_1", "float rot_2", "float rot_3"]
    header = _ply.format_header([("vertex", n, props)])

    width = 3 + 3 + 3 + k + 1 + 3 + 4
    out = np.empty((n, width), dtype=np.float64)
    out[:, 0:3] = cloud.centers
    out[:, 3:6] = 0.0  # normal placeholder
    out[:, 6:9] = cloud.colors_dc
    col = 9
    if k:
        out[:, col:col + k] = cloud.colors_rest
        col += k
    out[:, col] = logit(np.clip(cloud.opacities, 1e-6, 1.0 - 1e-6))
    col += 1
    out[:, col] = np.log(FLAT_SCALE)
    out[:, col + 1] = np.log(cloud.scales[:, 0])
    out[:, col + 2] = np.log(cloud.scales[:, 1])
    col += 3
    out[:, col:col + 4] = cloud.rotations

    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(out, dtype="<f4").tobytes())


# ---------------------------------------------------------------------------
# triangle-soup persistence

def default_sidecar_path(path) -> Path:
    """Attribute sidecar written next to the soup mesh: <stem>.attrs.tsv."""
    path = Path(path)
    return path.with_suffix(".attrs.tsv")


def save_soup(soup: TriangleSoup, path, sidecar=None) -> None:
    """Persist a soup as a disconnected mesh plus an attribute sidecar."""
    path = Path(path)
    sidecar = Path(sidecar) if sidecar is not None else default_sidecar_path(path)
    n = len(soup)
    if n == 0:
        raise ValidationError("cannot save an empty soup as a mesh (no faces)")
    mesh = IndexedMesh(
        soup.vertices.reshape(-1, 3),
        np.arange(3 * n, dtype=np.int64).reshape(-1, 3),
    )
    save_mesh(mesh, path)
    attrs = soup.attributes
    k = 0 if attrs.colors_rest is None else attrs.colors_rest.shape[1]
    with open(sidecar, "w", encoding="utf-8", newline="\n") as fh:
        head = ["index", "opacity", "f_dc_0", "f_dc_1", "f_dc_2"]
        head += [f"f_rest_{i}" for i in range(k)]
        fh.write("\t".join(head) + "\n")
        for i in range(n):
            row = [str(i), f"{attrs.opacities[i]:.17g}"]
            row += [f"{v:.17g}" for v in attrs.colors_dc[i]]
            if k:
                row += [f"{v:.17g}" for v in attrs.colors_rest[i]]
            fh.write("\t".join(row) + "\n")


def load_soup(path, sidecar=None) -> TriangleSoup:
    """Load a soup mesh and its sidecar; validates the disconnected layout."""
    path = Path(path)
    sidecar = Path(sidecar) if sidecar is not None else default_sidecar_path(path)
    mesh = load_mesh(path)
    n = mesh.num_faces
    if mesh.num_vertices != 3 * n or not np.array_equal(
        mesh.faces, np.arange(3 * n, dtype=np.int64).reshape(-1, 3)
    ):
        raise SoupStructureError(
            f"{path}: not a triangle soup (faces must be disconnected triples "
            "0-1-2, 3-4-5, ... with exactly 3 vertices per face)"
        )
    vertices = mesh.vertices.reshape(n, 3, 3)

    rows = []
    with open(sidecar, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header:
            raise FormatError("empty sidecar", path=sidecar, line=1)
        columns = header.rstrip("\n").split("\t")
        if columns[:5] != ["index", "opacity", "f_dc_0", "f_dc_1", "f_dc_2"]:
            raise FormatError(
                "sidecar header must start with index, opacity, f_dc_0..2",
                path=sidecar, line=1,
            )
        k = len(columns) - 5
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != len(columns):
                raise FormatError(
                    f"expected {len(columns)} columns, got {len(parts)}",
                    path=sidecar, line=lineno,
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise FormatError("bad numeric field", path=sidecar, line=lineno)
    if len(rows) != n:
        raise SidecarMismatchError(
            f"{sidecar}: sidecar has {len(rows)} rows but the soup mesh has {n} triangles"
        )
    table = np.asarray(rows, dtype=np.float64)
    idx = table[:, 0].astype(np.int64)
    if not np.array_equal(np.sort(idx), np.arange(n)):
        raise SidecarMismatchError(
            f"{sidecar}: sidecar indices must cover 0..{n - 1} exactly once"
        )
    order = np.argsort(idx, kind="stable")
    table = table[order]
    attrs = SoupAttributes(
        opacities=table[:, 1],
        colors_dc=table[:, 2:5],
        colors_rest=table[:, 5:] if k else None,
    )
    return TriangleSoup(vertices, attrs)
