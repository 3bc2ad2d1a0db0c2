"""Minimal binary little-endian PLY reader/writer (private).

Handles exactly what the package's file formats need: scalar properties,
one list property per element, binary_little_endian 1.0. The parser keeps
byte offsets so format errors can point at the failing header line.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError

_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}


@dataclass
class PlyProperty:
    name: str
    dtype: str                      # numpy dtype code, little-endian implied
    list_count_dtype: str | None = None  # set for list properties


@dataclass
class PlyElement:
    name: str
    count: int
    properties: list[PlyProperty] = field(default_factory=list)

    def has_list(self) -> bool:
        return any(p.list_count_dtype for p in self.properties)

    def scalar_dtype(self) -> np.dtype:
        if self.has_list():
            raise ValueError("element has list properties")
        return np.dtype([(p.name, "<" + p.dtype) for p in self.properties])


@dataclass
class PlyHeader:
    elements: list[PlyElement]
    data_start: int                 # byte offset of the payload

    def element(self, name: str) -> PlyElement | None:
        for e in self.elements:
            if e.name == name:
                return e
        return None


def read_header(data: bytes, path=None) -> PlyHeader:
    end = data.find(b"end_header\n")
    if not data.startswith(b"ply") or end < 0:
        raise FormatError("not a PLY file (missing ply/end_header)", path=path)
    data_start = end + len(b"end_header\n")
    lines = data[:end].decode("ascii", errors="replace").splitlines()

    fmt_seen = False
    elements: list[PlyElement] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        tokens = raw.split()
        if not tokens or tokens[0] == "comment":
            continue
        kind = tokens[0]
        if kind == "format":
            if tokens[1:] != ["binary_little_endian", "1.0"]:
                raise FormatError(
                    f"unsupported format {' '.join(tokens[1:])!r} "
                    "(binary_little_endian 1.0 required)",
                    path=path, line=lineno,
                )
            fmt_seen = True
        elif kind == "element":
            if len(tokens) != 3:
                raise FormatError(f"bad element line {raw!r}", path=path, line=lineno)
            try:
                count = int(tokens[2])
            except ValueError:
                raise FormatError(f"bad element count {tokens[2]!r}", path=path, line=lineno)
            if count < 0:
                raise FormatError(f"negative element count {count}", path=path, line=lineno)
            elements.append(PlyElement(tokens[1], count))
        elif kind == "property":
            if not elements:
                raise FormatError("property before any element", path=path, line=lineno)
            if len(tokens) == 3:
                dtype = _TYPES.get(tokens[1])
                if dtype is None:
                    raise FormatError(f"unknown property type {tokens[1]!r}", path=path, line=lineno)
                elements[-1].properties.append(PlyProperty(tokens[2], dtype))
            elif len(tokens) == 5 and tokens[1] == "list":
                cnt = _TYPES.get(tokens[2])
                val = _TYPES.get(tokens[3])
                if cnt is None or val is None:
                    raise FormatError(f"unknown list types in {raw!r}", path=path, line=lineno)
                elements[-1].properties.append(PlyProperty(tokens[4], val, list_count_dtype=cnt))
            else:
                raise FormatError(f"bad property line {raw!r}", path=path, line=lineno)
        else:
            raise FormatError(f"unknown header statement {kind!r}", path=path, line=lineno)
    if not fmt_seen:
        raise FormatError("missing format statement", path=path)
    return PlyHeader(elements, data_start)


def read_scalar_element(data: bytes, offset: int, element: PlyElement, path=None):
    """Read a scalar-only element; returns (structured array, next offset)."""
    dtype = element.scalar_dtype()
    nbytes = dtype.itemsize * element.count
    if offset + nbytes > len(data):
        raise FormatError(
            f"truncated payload: element {element.name!r} needs {nbytes} bytes, "
            f"{len(data) - offset} available",
            path=path,
        )
    arr = np.frombuffer(data, dtype=dtype, count=element.count, offset=offset)
    return arr, offset + nbytes


def read_list_element(data: bytes, offset: int, element: PlyElement, path=None):
    """Read an element made of a single list property.

    Returns (list of int arrays or fixed (count, k) array, next offset).
    Uses a fixed-stride fast path when every list has the same length.
    """
    if len(element.properties) != 1 or not element.properties[0].list_count_dtype:
        raise FormatError(
            f"element {element.name!r} must hold exactly one list property",
            path=path,
        )
    prop = element.properties[0]
    cnt_dt = np.dtype("<" + prop.list_count_dtype)
    val_dt = np.dtype("<" + prop.dtype)
    n = element.count
    if n == 0:
        return np.zeros((0, 3), dtype=np.int64), offset

    first = _peek_count(data, offset, cnt_dt, element, path)
    stride = cnt_dt.itemsize + first * val_dt.itemsize
    end = offset + stride * n
    if end <= len(data):
        block = np.frombuffer(data, dtype=np.uint8, count=stride * n, offset=offset)
        counts = block.reshape(n, stride)[:, : cnt_dt.itemsize].copy().view(cnt_dt).ravel()
        if (counts == first).all():
            vals = (
                block.reshape(n, stride)[:, cnt_dt.itemsize:]
                .copy()
                .view(val_dt)
                .reshape(n, first)
            )
            return vals.astype(np.int64), end

    # Mixed list lengths: walk the payload.
    rows = []
    pos = offset
    for i in range(n):
        c = int(_peek_count(data, pos, cnt_dt, element, path))
        pos += cnt_dt.itemsize
        nbytes = c * val_dt.itemsize
        if pos + nbytes > len(data):
            raise FormatError(
                f"truncated payload in element {element.name!r} at record {i}", path=path
            )
        rows.append(np.frombuffer(data, dtype=val_dt, count=c, offset=pos).astype(np.int64))
        pos += nbytes
    return rows, pos


def _peek_count(data: bytes, offset: int, cnt_dt: np.dtype, element: PlyElement, path):
    if offset + cnt_dt.itemsize > len(data):
        raise FormatError(f"truncated payload in element {element.name!r}", path=path)
    return int(np.frombuffer(data, dtype=cnt_dt, count=1, offset=offset)[0])


def format_header(elements: list[tuple[str, int, list[str]]]) -> bytes:
    """Build a header; each property string is e.g. 'float x' or 'list uchar int idx'."""
    lines = ["ply", "format binary_little_endian 1.0"]
    for name, count, props in elements:
        lines.append(f"element {name} {count}")
        lines.extend(f"property {p}" for p in props)
    lines.append("end_header")
    return ("\n".join(lines) + "\n").encode("ascii")
