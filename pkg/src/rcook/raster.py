"""On-disk formats: pixel matrices (CCMX), binary masks and heatmaps (PGM P5).

Matrix layout::

    b"CCMX1\\0"            6-byte magic; the ``1`` is the format version
    rows, cols, bands       3 x little-endian uint32
    payload                 rows*cols*bands little-endian float64, row-major,
                            band-interleaved-by-pixel

A matrix file may also be written as ``(n, 1, d)`` with a JSON sidecar
``<path>.shape.json`` holding ``{"rows": ..., "cols": ...}``; ``load_matrix``
then restores the raster shape from the sidecar.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"CCMX1\x00"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<6s3I")
_PAYLOAD_DTYPE = np.dtype("<f8")


class FormatError(ValueError):
    """A file on disk does not match the format it claims to be."""


def _check_shape(n: int, rows: int, cols: int) -> None:
    if rows < 1 or cols < 1:
        raise ValueError(f"rows and cols must be >= 1, got rows={rows}, cols={cols}")
    if n != rows * cols:
        raise ValueError(f"n={n} does not equal rows*cols={rows}*{cols}")


@dataclass(frozen=True, eq=False)
class PixelMatrix:
    """An image flattened to an ``n x d`` matrix of pixel spectra."""

    data: np.ndarray
    rows: int
    cols: int

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2:
            raise ValueError(f"data must be 2-D (n, d), got shape {data.shape}")
        if data.shape[1] < 1:
            raise ValueError("bands must be >= 1")
        _check_shape(data.shape[0], self.rows, self.cols)
        if not np.all(np.isfinite(data)):
            bad = int(np.flatnonzero(~np.isfinite(data).all(axis=1))[0])
            raise ValueError(f"data contains non-finite values (first at pixel {bad})")
        object.__setattr__(self, "data", data)

    @classmethod
    def from_raster(cls, raster) -> "PixelMatrix":
        raster = np.asarray(raster, dtype=np.float64)
        if raster.ndim == 2:
            raster = raster[:, :, None]
        rows, cols, bands = raster.shape
        return cls(raster.reshape(rows * cols, bands), rows, cols)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def bands(self) -> int:
        return self.data.shape[1]

    def raster(self) -> np.ndarray:
        return self.data.reshape(self.rows, self.cols, self.bands)

    def take(self, idx) -> np.ndarray:
        return self.data[np.asarray(idx)]


@dataclass(frozen=True, eq=False)
class Mask:
    data: np.ndarray
    rows: int
    cols: int

    def __post_init__(self):
        data = np.asarray(self.data).astype(bool).ravel()
        _check_shape(data.size, self.rows, self.cols)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.size

    def raster(self) -> np.ndarray:
        return self.data.reshape(self.rows, self.cols)


@dataclass(frozen=True, eq=False)
class ScoreMap:
    """Per-pixel anomaly scores aligned to a raster."""

    scores: np.ndarray
    rows: int
    cols: int

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64).ravel()
        _check_shape(scores.size, self.rows, self.cols)
        if not np.all(np.isfinite(scores)):
            raise ValueError("scores must be finite")
        if np.any(scores < 0):
            raise ValueError("scores must be non-negative")
        object.__setattr__(self, "scores", scores)

    @property
    def n(self) -> int:
        return self.scores.size

    def raster(self) -> np.ndarray:
        return self.scores.reshape(self.rows, self.cols)

    def as_matrix(self) -> PixelMatrix:
        return PixelMatrix(self.scores[:, None], self.rows, self.cols)


def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".shape.json")


def save_matrix(m: PixelMatrix, path, *, flat: bool = False) -> None:
    """Write ``m`` in CCMX format.

    With ``flat=True`` the header holds ``(n, 1, d)`` and the raster shape
    goes to a JSON sidecar next to the file.
    """
    path = Path(path)
    if flat:
        header = _HEADER.pack(MAGIC, m.n, 1, m.bands)
        _sidecar(path).write_text(json.dumps({"rows": m.rows, "cols": m.cols}) + "\n")
    else:
        header = _HEADER.pack(MAGIC, m.rows, m.cols, m.bands)
    payload = np.ascontiguousarray(m.data, dtype=_PAYLOAD_DTYPE).tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def load_matrix(path) -> PixelMatrix:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: header: file is {len(raw)} bytes, need {_HEADER.size}")
    magic, rows, cols, bands = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: magic: expected {MAGIC!r}, found {magic!r}")
    if rows == 0 or cols == 0 or bands == 0:
        raise FormatError(f"{path}: shape: zero dimension in ({rows}, {cols}, {bands})")
    expected = rows * cols * bands * _PAYLOAD_DTYPE.itemsize
    body = raw[_HEADER.size:]
    if len(body) != expected:
        raise FormatError(
            f"{path}: payload: shape ({rows}, {cols}, {bands}) needs {expected} bytes, found {len(body)}"
        )
    data = np.frombuffer(body, dtype=_PAYLOAD_DTYPE).astype(np.float64).reshape(rows * cols, bands)
    if not np.all(np.isfinite(data)):
        bad = int(np.flatnonzero(~np.isfinite(data).all(axis=1))[0])
        raise FormatError(f"{path}: payload: non-finite value at pixel {bad}")

    sidecar = _sidecar(path)
    if cols == 1 and sidecar.exists():
        try:
            shape = json.loads(sidecar.read_text())
            rows, cols = int(shape["rows"]), int(shape["cols"])
        except (ValueError, KeyError, TypeError) as exc:
            raise FormatError(f"{sidecar}: sidecar shape: {exc}") from exc
        if rows * cols != data.shape[0]:
            raise FormatError(
                f"{sidecar}: sidecar shape: rows*cols={rows * cols} but file holds {data.shape[0]} pixels"
            )
    return PixelMatrix(data, rows, cols)


def _write_pgm(path, pixels: np.ndarray) -> None:
    pixels = np.asarray(pixels, dtype=np.uint8)
    rows, cols = pixels.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (cols, rows))
        fh.write(pixels.tobytes())


def _next_token(raw: bytes, pos: int) -> tuple[bytes, int]:
    n = len(raw)
    while pos < n:
        c = raw[pos:pos + 1]
        if c == b"#":
            while pos < n and raw[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not raw[pos:pos + 1].isspace() and raw[pos:pos + 1] != b"#":
        pos += 1
    return raw[start:pos], pos


def read_pgm(path) -> np.ndarray:
    """Read an 8-bit binary PGM (P5) into a ``(rows, cols)`` uint8 array."""
    path = Path(path)
    raw = path.read_bytes()
    pos = 0
    fields = []
    for name in ("magic", "width", "height", "maxval"):
        tok, pos = _next_token(raw, pos)
        if not tok:
            raise FormatError(f"{path}: {name}: missing")
        fields.append(tok)
    if fields[0] != b"P5":
        raise FormatError(f"{path}: magic: expected b'P5', found {fields[0]!r}")
    try:
        width, height, maxval = (int(t) for t in fields[1:])
    except ValueError as exc:
        raise FormatError(f"{path}: header: {exc}") from exc
    if width < 1 or height < 1:
        raise FormatError(f"{path}: size: {width}x{height}")
    if not 0 < maxval < 256:
        raise FormatError(f"{path}: maxval: only 8-bit PGM is supported, found {maxval}")
    # exactly one whitespace byte separates maxval from the raster
    pos += 1
    body = raw[pos:]
    if len(body) != width * height:
        raise FormatError(f"{path}: raster: expected {width * height} bytes, found {len(body)}")
    return np.frombuffer(body, dtype=np.uint8).reshape(height, width).copy()


def load_mask(path) -> Mask:
    pixels = read_pgm(path)
    rows, cols = pixels.shape
    return Mask(pixels.ravel() != 0, rows, cols)


def save_mask(m: Mask, path) -> None:
    _write_pgm(path, np.where(m.raster(), 255, 0))


def heatmap_pixels(scores) -> np.ndarray:
    """Map scores affinely onto 0..255 (min -> 0, max -> 255, round half up).

    A constant score vector maps to all zeros.
    """
    s = np.asarray(scores, dtype=np.float64)
    lo, hi = s.min(), s.max()
    if hi == lo:
        return np.zeros(s.shape, dtype=np.uint8)
    scaled = (s - lo) / (hi - lo) * 255.0
    return np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)


def save_heatmap(s: ScoreMap, path) -> None:
    _write_pgm(path, heatmap_pixels(s.raster()))
