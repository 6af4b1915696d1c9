"""Flat binary field dumps with a fixed 64-byte descriptive header.

Layout (little-endian):

    bytes  0..7    magic  b"FUJFLD01"
    bytes  8..15   dim    int64
    bytes 16..23   n      int64   (points per axis)
    bytes 24..31   L      float64 (half box length)
    bytes 32..39   time   float64
    bytes 40..47   d      float64
    bytes 48..55   p      float64
    bytes 56..63   alpha  float64

followed by n^dim float64 values in C order.  A trajectory file is just a
sequence of frames concatenated; every frame carries the full header so the
reader needs no external index.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .grid import Field, GridSpec, make_grid

MAGIC = b"FUJFLD01"
_HEADER = struct.Struct("<8sqqddddd")
HEADER_SIZE = _HEADER.size

assert HEADER_SIZE == 64


class FormatError(ValueError):
    """Raised when a field dump fails header or size validation."""


@dataclass(frozen=True)
class FrameMeta:
    """Model parameters stamped on a frame header."""

    time: float
    d: float
    p: float
    alpha: float


def write_frame(fh, field: Field, meta: FrameMeta) -> None:
    g = field.grid
    fh.write(
        _HEADER.pack(
            MAGIC, g.dim, g.points_per_axis, g.half_width,
            meta.time, meta.d, meta.p, meta.alpha,
        )
    )
    fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_frame(fh) -> tuple[Field, FrameMeta] | None:
    """Read one frame; returns None at a clean end of file."""
    raw = fh.read(HEADER_SIZE)
    if not raw:
        return None
    if len(raw) != HEADER_SIZE:
        raise FormatError("truncated header")
    magic, dim, n, L, t, d, p, alpha = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    grid = make_grid(int(dim), float(L), int(n))
    count = grid.total_points
    data = np.frombuffer(fh.read(count * 8), dtype="<f8")
    if data.size != count:
        raise FormatError("truncated frame payload")
    values = data.astype(np.float64).reshape(grid.shape)
    return Field(grid, values), FrameMeta(float(t), float(d), float(p), float(alpha))


def write_trajectory(path, times, fields, d: float, p: float, alpha: float) -> None:
    times = list(times)
    fields = list(fields)
    if len(times) != len(fields):
        raise ValueError("times and fields must have equal length")
    with open(path, "wb") as fh:
        for t, field in zip(times, fields):
            write_frame(fh, field, FrameMeta(float(t), d, p, alpha))


def read_trajectory(path) -> tuple[np.ndarray, list[Field], FrameMeta]:
    """Read all frames; every frame must share grid and model parameters.

    Returns (times, fields, meta) where meta carries the (d, p, alpha) of the
    file and meta.time is the first frame time.
    """
    times: list[float] = []
    fields: list[Field] = []
    meta0: FrameMeta | None = None
    grid0: GridSpec | None = None
    with open(path, "rb") as fh:
        while True:
            item = read_frame(fh)
            if item is None:
                break
            field, meta = item
            if meta0 is None:
                meta0, grid0 = meta, field.grid
            else:
                if field.grid != grid0:
                    raise FormatError("grid changes between frames")
                if (meta.d, meta.p, meta.alpha) != (meta0.d, meta0.p, meta0.alpha):
                    raise FormatError("model parameters change between frames")
            times.append(meta.time)
            fields.append(field)
    if meta0 is None:
        raise FormatError("empty trajectory file")
    return np.asarray(times), fields, meta0
