"""Exception hierarchy shared by all splatsoup modules.

The three direct subclasses of :class:`SplatSoupError` partition failures
into the classes the CLI maps to exit codes: file-format problems,
semantic validation problems, and non-finite numeric data.
"""


class SplatSoupError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(SplatSoupError):
    """A file could not be parsed: bad header, bad token, truncated payload."""

    def __init__(self, message, path=None, line=None):
        ctx = []
        if path is not None:
            ctx.append(str(path))
        if line is not None:
            ctx.append(f"line {line}")
        if ctx:
            message = f"{':'.join(ctx)}: {message}"
        super().__init__(message)
        self.path = path
        self.line = line


class ValidationError(SplatSoupError):
    """Input data violates a documented contract (invariants, correspondence)."""


class NumericError(SplatSoupError):
    """Non-finite values where finite data is required."""


class FaceIndexError(ValidationError):
    """A face references a vertex index outside the vertex list."""


class EmptyMeshError(ValidationError):
    """A mesh with zero faces where at least one is required."""


class DegenerateTriangleError(ValidationError):
    """A triangle with (near-)collinear vertices, named by its index."""

    def __init__(self, index, message=None):
        super().__init__(message or f"degenerate triangle at index {index}")
        self.index = index


class CorrespondenceError(ValidationError):
    """Original/edited meshes do not share face count or face topology."""


class SidecarMismatchError(ValidationError):
    """Triangle-soup geometry and its attribute sidecar disagree."""


class SoupStructureError(ValidationError):
    """A mesh claimed to be a triangle soup shares or reorders vertices."""
