"""Portable graymap (P2/P5) reading and writing, plus P6 contour overlays.

Samples are kept as unsigned integers so a read/write round trip is
bit-exact. Sixteen-bit binary samples are big-endian, as the format requires.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np


class PGMError(ValueError):
    """Malformed or unsupported portable anymap data."""


@dataclass(frozen=True)
class GrayImage:
    pixels: np.ndarray  # (height, width) uint8 or uint16
    maxval: int = 255

    def __post_init__(self):
        px = self.pixels
        if px.ndim != 2 or px.size == 0:
            raise PGMError(f"image must be non-empty 2-D, got shape {px.shape}")
        if not 0 < self.maxval <= 65535:
            raise PGMError(f"maxval must be in 1..65535, got {self.maxval}")
        if px.dtype.kind not in "ui":
            raise PGMError(f"pixels must be integers, got {px.dtype}")
        if px.min() < 0 or px.max() > self.maxval:
            raise PGMError(f"sample values must lie in 0..{self.maxval}")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def depth(self) -> int:
        return 8 if self.maxval < 256 else 16

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.maxval == other.maxval and np.array_equal(self.pixels, other.pixels)


def _tokens(data: bytes, count: int, pos: int):
    """Read *count* whitespace-separated header tokens, skipping ``#`` comments."""
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= n:
            raise PGMError(f"header truncated at byte {pos}")
        if data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        tok = data[start:pos]
        if not tok.isdigit():
            raise PGMError(f"expected an unsigned integer at byte {start}, got {tok[:16]!r}")
        out.append(int(tok))
    return out, pos


def parse_pgm(data: bytes) -> GrayImage:
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise PGMError(f"not a PGM file (magic {magic!r})")
    (width, height, maxval), pos = _tokens(data, 3, 2)
    if width == 0 or height == 0:
        raise PGMError(f"zero-size image {width}x{height}")
    if maxval == 0 or maxval > 65535:
        raise PGMError(f"maxval {maxval} outside 1..65535")
    dtype = np.uint8 if maxval < 256 else np.uint16
    n = width * height

    if magic == b"P5":
        if pos >= len(data) or not data[pos:pos + 1].isspace():
            raise PGMError(f"missing whitespace after header at byte {pos}")
        pos += 1
        bps = 1 if maxval < 256 else 2
        need = n * bps
        if len(data) - pos < need:
            raise PGMError(
                f"pixel data truncated: expected {need} bytes from offset {pos}, "
                f"file ends at byte {len(data)}"
            )
        raw = np.frombuffer(data, dtype=">u2" if bps == 2 else np.uint8, count=n, offset=pos)
        pixels = raw.astype(dtype)
    else:
        body = data[pos:].split()
        if len(body) < n:
            raise PGMError(f"pixel data truncated: expected {n} samples, found {len(body)}")
        try:
            values = np.array([int(t) for t in body[:n]], dtype=np.int64)
        except ValueError:
            raise PGMError("non-integer sample in ASCII pixel data") from None
        if values.min() < 0 or values.max() > maxval:
            raise PGMError(f"sample outside 0..{maxval}")
        pixels = values.astype(dtype)

    if pixels.max() > maxval:
        raise PGMError(f"sample exceeds maxval {maxval}")
    return GrayImage(pixels.reshape(height, width), maxval)


def read_pgm(path) -> GrayImage:
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        return parse_pgm(data)
    except PGMError as exc:
        raise PGMError(f"{os.fspath(path)}: {exc}") from None


def encode_pgm(img: GrayImage, binary: bool = True) -> bytes:
    header = f"{'P5' if binary else 'P2'}\n{img.width} {img.height}\n{img.maxval}\n".encode()
    if binary:
        dtype = ">u2" if img.depth == 16 else np.uint8
        return header + img.pixels.astype(dtype).tobytes()
    rows = (" ".join(str(int(v)) for v in row) for row in img.pixels)
    return header + ("\n".join(rows) + "\n").encode()


def write_pgm(img: GrayImage, path, binary: bool = True) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_pgm(img, binary))


def write_mask(mask, path) -> None:
    """Write a {0, 1} mask as a P5 graymap with values {0, 255}."""
    mask = np.asarray(mask)
    if mask.size and not np.isin(mask, (0, 1)).all():
        raise ValueError("mask must contain only 0 and 1")
    write_pgm(GrayImage((mask.astype(np.uint8) * 255), 255), path)


def read_mask(path) -> np.ndarray:
    """Read a mask graymap; any nonzero sample counts as 1."""
    return (read_pgm(path).pixels > 0).astype(np.uint8)


def to_field(img: GrayImage) -> np.ndarray:
    return img.pixels.astype(np.float64)


def from_field(field, maxval: int | None = None) -> GrayImage:
    """Quantize a non-negative field to integers.

    With ``maxval=None`` values are rounded as-is and the smallest fitting
    depth is chosen; otherwise the field is scaled so its maximum maps to
    *maxval*.
    """
    f = np.asarray(field, dtype=np.float64)
    if f.size == 0:
        raise PGMError("cannot encode an empty field")
    if np.any(f < 0) or not np.all(np.isfinite(f)):
        raise PGMError("field must be finite and non-negative")
    if maxval is None:
        q = np.rint(f)
        top = int(q.max())
        if top > 65535:
            raise PGMError("field exceeds 16-bit range; pass maxval to rescale")
        maxval = 255 if top < 256 else 65535
    else:
        peak = f.max()
        q = np.rint(f * (maxval / peak)) if peak > 0 else np.zeros_like(f)
    dtype = np.uint8 if maxval < 256 else np.uint16
    return GrayImage(q.astype(dtype), int(maxval))


def write_overlay(image, contour, path) -> None:
    """Write a P6 pixmap of *image* (scaled to 8 bits) with contour pixels in red.

    *contour* is a sequence of ``(x, y)`` pixel coordinates.
    """
    f = np.asarray(image, dtype=np.float64)
    if f.ndim != 2 or f.size == 0:
        raise ValueError("overlay needs a non-empty 2-D image")
    h, w = f.shape
    lo, hi = float(f.min()), float(f.max())
    gray = np.zeros((h, w), np.uint8) if hi == lo else np.rint((f - lo) * (255.0 / (hi - lo))).astype(np.uint8)
    rgb = np.repeat(gray[:, :, None], 3, axis=2)
    for x, y in contour:
        if not (0 <= x < w and 0 <= y < h):
            raise ValueError(f"contour pixel ({x}, {y}) outside {w}x{h} image")
        rgb[y, x] = (255, 0, 0)
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode() + rgb.tobytes())


def read_ppm(path) -> np.ndarray:
    """Read a binary P6 pixmap with maxval 255 into an ``(h, w, 3)`` array."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] != b"P6":
        raise PGMError(f"{os.fspath(path)}: not a P6 file")
    (w, h, maxval), pos = _tokens(data, 3, 2)
    if maxval != 255:
        raise PGMError(f"{os.fspath(path)}: only maxval 255 is supported")
    pos += 1
    need = w * h * 3
    if len(data) - pos < need:
        raise PGMError(f"{os.fspath(path)}: pixel data truncated at byte {len(data)}")
    return np.frombuffer(data, np.uint8, count=need, offset=pos).reshape(h, w, 3)
