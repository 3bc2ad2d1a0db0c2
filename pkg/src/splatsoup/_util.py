"""Small shared array helpers (private)."""

from __future__ import annotations

import numpy as np

# Scale-invariant degeneracy test: a triangle counts as degenerate when its
# squared area falls below this fraction of the squared maximum edge length,
# squared again so the comparison is invariant under uniform scaling.
DEGENERACY_RATIO = 1e-12


def as_vec3(x, name: str = "vector") -> np.ndarray:
    """Coerce to a float64 (3,) array; raises ValueError on wrong shape."""
    v = np.asarray(x, dtype=np.float64)
    if v.shape != (3,):
        raise ValueError(f"{name} must have shape (3,), got {v.shape}")
    return v


def normalize_rows(v: np.ndarray) -> np.ndarray:
    """Normalize along the last axis. Rows with zero norm become zero."""
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(n > 0.0, v / n, 0.0)
    return out


def degenerate_mask(e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    """True where the triangle spanned by edge vectors e1, e2 is degenerate.

    Test: squared area < DEGENERACY_RATIO * (max squared edge)**2, which is
    dimensionless and therefore invariant under uniform scaling.
    """
    cross = np.cross(e1, e2)
    area2 = 0.25 * np.einsum("...i,...i->...", cross, cross)
    m2 = np.maximum(
        np.einsum("...i,...i->...", e1, e1),
        np.maximum(
            np.einsum("...i,...i->...", e2, e2),
            np.einsum("...i,...i->...", e2 - e1, e2 - e1),
        ),
    )
    # m2 == 0 is a point triangle; the ratio test alone would let it through
    return (m2 <= 0.0) | (area2 < DEGENERACY_RATIO * m2 * m2)


def triangle_degenerate(v0, v1, v2) -> bool:
    """Scalar convenience wrapper over degenerate_mask for one triangle."""
    return bool(degenerate_mask(np.asarray(v1) - v0, np.asarray(v2) - v0))


def require_finite(arr: np.ndarray, what: str, exc=None):
    """Raise (NumericError by default) naming offending indices if non-finite."""
    from .errors import NumericError

    bad = ~np.isfinite(arr)
    if bad.any():
        idx = np.unique(np.nonzero(bad)[0])
        shown = ", ".join(str(i) for i in idx[:10])
        more = "" if idx.size <= 10 else f" (+{idx.size - 10} more)"
        raise (exc or NumericError)(f"non-finite {what} at index {shown}{more}")


def readonly(arr: np.ndarray) -> np.ndarray:
    """Return a locked copy so shared containers stay immutable."""
    out = np.array(arr, copy=True)
    out.flags.writeable = False
    return out
