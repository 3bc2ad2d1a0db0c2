"""Minimal deterministic orthographic splat previewer.

Good enough to eyeball an edit: flat Gaussians are projected onto an
orthographic image plane, composited back-to-front with over-blending,
colored from their DC coefficient. Not a general rasterizer -- no
perspective, no view-dependent color.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._util import as_vec3
from .errors import FormatError, ValidationError
from .gaussians import SH_DC, as_cloud

# Splat truncation: pixels beyond this Mahalanobis distance get no weight.
CUTOFF_MAHALANOBIS = 3.0

# Footprints flatter than this (det / trace^2 of the 2x2 footprint
# covariance) are viewed edge-on and contribute nothing.
_FLATNESS_EPS = 1e-18


@dataclass(frozen=True)
class OrthoCamera:
    """Orthographic camera: position, axes, world-unit extents, pixel size."""

    position: np.ndarray      # (3,)
    orientation: np.ndarray   # (3, 3) columns: right, up, forward
    view_width: float         # world units covered horizontally
    view_height: float        # world units covered vertically
    image_width: int          # pixels
    image_height: int         # pixels

    def __post_init__(self):
        object.__setattr__(self, "position", as_vec3(self.position, "position"))
        o = np.asarray(self.orientation, dtype=np.float64)
        if o.shape != (3, 3):
            raise ValidationError(f"orientation must be 3x3, got {o.shape}")
        if not np.allclose(o.T @ o, np.eye(3), atol=1e-6):
            raise ValidationError("degenerate camera: orientation not orthonormal")
        object.__setattr__(self, "orientation", o)
        for name in ("view_width", "view_height"):
            val = float(getattr(self, name))
            if not val > 0.0 or not np.isfinite(val):
                raise ValidationError(f"degenerate camera: {name} = {val}")
            object.__setattr__(self, name, val)
        for name in ("image_width", "image_height"):
            val = int(getattr(self, name))
            if val <= 0:
                raise ValidationError(f"degenerate camera: {name} = {val}")
            object.__setattr__(self, name, val)

    @property
    def right(self) -> np.ndarray:
        return self.orientation[:, 0]

    @property
    def up(self) -> np.ndarray:
        return self.orientation[:, 1]

    @property
    def forward(self) -> np.ndarray:
        return self.orientation[:, 2]

    @classmethod
    def look_at(
        cls,
        position,
        target,
        up=(0.0, 0.0, 1.0),
        view_width: float = 2.0,
        view_height: float | None = None,
        image_width: int = 512,
        image_height: int | None = None,
    ) -> "OrthoCamera":
        """Camera at position looking toward target with the given up hint."""
        position = as_vec3(position, "position")
        target = as_vec3(target, "target")
        fwd = target - position
        norm = np.linalg.norm(fwd)
        if norm == 0.0:
            raise ValidationError("degenerate camera: position equals target")
        fwd = fwd / norm
        up_hint = as_vec3(up, "up")
        right = np.cross(fwd, up_hint)
        norm = np.linalg.norm(right)
        if norm < 1e-12:
            raise ValidationError("degenerate camera: up parallel to view direction")
        right = right / norm
        true_up = np.cross(right, fwd)
        if view_height is None:
            view_height = view_width
        if image_height is None:
            image_height = image_width
        return cls(position, np.stack([right, true_up, fwd], axis=1),
                   view_width, view_height, image_width, image_height)


@dataclass(frozen=True, eq=False)
class Image:
    """Row-major RGB image with float pixels in [0, 1]."""

    pixels: np.ndarray  # (height, width, 3)

    def __post_init__(self):
        p = np.asarray(self.pixels, dtype=np.float64)
        if p.ndim != 3 or p.shape[2] != 3:
            raise ValidationError(f"pixels must be (H, W, 3), got {p.shape}")
        object.__setattr__(self, "pixels", p)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def to_bytes(self) -> np.ndarray:
        """8-bit quantization used by write_image."""
        return np.round(np.clip(self.pixels, 0.0, 1.0) * 255.0).astype(np.uint8)


def dc_to_rgb(colors_dc: np.ndarray) -> np.ndarray:
    """DC color coefficients -> linear RGB in [0, 1]."""
    return np.clip(0.5 + SH_DC * colors_dc, 0.0, 1.0)


def render(gaussians, camera: OrthoCamera, background=(0.0, 0.0, 0.0)) -> Image:
    """Render flat Gaussians through an orthographic camera.

    Each kernel's two live axes are projected to the image plane to form a
    2x2 footprint covariance; pixel weight is opacity * exp(-d^2 / 2) with
    d the footprint Mahalanobis distance, truncated at d = 3. Kernels are
    composited back-to-front by view depth (ties keep input order) with
    over-blending onto the background. Deterministic for fixed inputs.
    """
    bg = np.clip(as_vec3(background, "background"), 0.0, 1.0)
    img = np.tile(bg, (camera.image_height, camera.image_width, 1))
    cloud = as_cloud(gaussians)
    if len(cloud) == 0:
        return Image(img)

    right, up, fwd = camera.right, camera.up, camera.forward
    rel = cloud.centers - camera.position
    cx = rel @ right                  # camera-space x of each center
    cy = rel @ up
    depth = rel @ fwd

    rot = cloud.rotation_matrices()
    r1 = rot[:, :, 1]
    r2 = rot[:, :, 2]
    # projected live axes: columns of the 2x2 footprint matrix A
    a00 = r1 @ right
    a10 = r1 @ up
    a01 = r2 @ right
    a11 = r2 @ up
    s2 = cloud.scales**2
    c00 = a00 * a00 * s2[:, 0] + a01 * a01 * s2[:, 1]
    c01 = a00 * a10 * s2[:, 0] + a01 * a11 * s2[:, 1]
    c11 = a10 * a10 * s2[:, 0] + a11 * a11 * s2[:, 1]

    colors = dc_to_rgb(cloud.colors_dc)
    opac = np.clip(cloud.opacities, 0.0, 1.0)

    px_w = camera.view_width / camera.image_width
    px_h = camera.view_height / camera.image_height
    half_w = 0.5 * camera.view_width
    half_h = 0.5 * camera.view_height
    cols_x = -half_w + (np.arange(camera.image_width) + 0.5) * px_w
    rows_y = half_h - (np.arange(camera.image_height) + 0.5) * px_h

    # back to front: farthest first; stable so depth ties keep input order
    order = np.argsort(-depth, kind="stable")
    cutoff2 = CUTOFF_MAHALANOBIS**2
    for i in order:
        det = c00[i] * c11[i] - c01[i] * c01[i]
        trace = c00[i] + c11[i]
        if trace <= 0.0 or det <= _FLATNESS_EPS * trace * trace:
            continue  # edge-on or fully degenerate footprint
        ext_x = CUTOFF_MAHALANOBIS * np.sqrt(c00[i])
        ext_y = CUTOFF_MAHALANOBIS * np.sqrt(c11[i])
        lo_c = int(np.floor((cx[i] - ext_x + half_w) / px_w)) - 1
        hi_c = int(np.ceil((cx[i] + ext_x + half_w) / px_w)) + 1
        lo_r = int(np.floor((half_h - (cy[i] + ext_y)) / px_h)) - 1
        hi_r = int(np.ceil((half_h - (cy[i] - ext_y)) / px_h)) + 1
        lo_c = max(lo_c, 0)
        hi_c = min(hi_c, camera.image_width)
        lo_r = max(lo_r, 0)
        hi_r = min(hi_r, camera.image_height)
        if lo_c >= hi_c or lo_r >= hi_r:
            continue
        dx = cols_x[lo_c:hi_c] - cx[i]          # (w,)
        dy = rows_y[lo_r:hi_r] - cy[i]          # (h,)
        inv00 = c11[i] / det
        inv01 = -c01[i] / det
        inv11 = c00[i] / det
        d2 = (
            inv00 * dx[None, :] ** 2
            + 2.0 * inv01 * dy[:, None] * dx[None, :]
            + inv11 * dy[:, None] ** 2
        )
        mask = d2 <= cutoff2
        if not mask.any():
            continue
        w = np.where(mask, opac[i] * np.exp(-0.5 * d2), 0.0)[:, :, None]
        tile = img[lo_r:hi_r, lo_c:hi_c]
        img[lo_r:hi_r, lo_c:hi_c] = w * colors[i] + (1.0 - w) * tile
    return Image(img)


def write_image(image: Image, path) -> None:
    """Write a binary portable pixmap (P6, 8-bit); byte-stable for equal images."""
    data = image.to_bytes()
    header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
    with open(Path(path), "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())


def read_image(path) -> Image:
    """Read a binary portable pixmap written by write_image."""
    data = Path(path).read_bytes()
    if not data.startswith(b"P6"):
        raise FormatError("not a binary portable pixmap (P6)", path=path)
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated pixmap header", path=path)
        fields.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    try:
        width, height, maxval = (int(f) for f in fields)
    except ValueError:
        raise FormatError("bad pixmap header fields", path=path)
    if maxval != 255:
        raise FormatError(f"unsupported maxval {maxval}", path=path)
    need = width * height * 3
    payload = data[pos : pos + need]
    if len(payload) != need:
        raise FormatError("truncated pixmap payload", path=path)
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3)
    return Image(pixels.astype(np.float64) / 255.0)
