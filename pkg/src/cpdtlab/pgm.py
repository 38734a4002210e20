"""Binary PGM (P5, maxval 255) reading and writing, bit-exact round trip."""

from __future__ import annotations

import numpy as np

__all__ = ["read_pgm", "write_pgm", "encode_pgm"]


def _read_header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """First `count` whitespace-separated header tokens, skipping # comments.

    Returns the tokens and the offset of the raster (one whitespace byte
    after the last token, per the format).
    """
    tokens: list[bytes] = []
    i = 0
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i] == ord("#"):
            while i < n and data[i] not in (10, 13):
                i += 1
            continue
        start = i
        while i < n and not data[i : i + 1].isspace() and data[i] != ord("#"):
            i += 1
        if i == start:
            raise ValueError("truncated PGM header")
        tokens.append(data[start:i])
    if i >= n or not data[i : i + 1].isspace():
        raise ValueError("malformed PGM header: missing raster separator")
    return tokens, i + 1


def read_pgm(path: str) -> np.ndarray:
    """Read a binary 8-bit PGM file into a (height, width) uint8 array."""
    with open(path, "rb") as f:
        data = f.read()
    tokens, offset = _read_header_tokens(data, 4)
    if tokens[0] != b"P5":
        raise ValueError(f"not a binary PGM (P5) file: magic {tokens[0]!r}")
    width, height, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise ValueError(f"unsupported maxval {maxval}; only 8-bit (255) PGM is handled")
    if width <= 0 or height <= 0:
        raise ValueError(f"bad dimensions {width}x{height}")
    raster = data[offset : offset + width * height]
    if len(raster) != width * height:
        raise ValueError("truncated PGM raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()


def encode_pgm(plane: np.ndarray) -> bytes:
    """Serialize a (height, width) uint8 array as binary PGM with maxval 255."""
    plane = np.asarray(plane)
    if plane.ndim != 2:
        raise ValueError(f"plane must be 2-D, got shape {plane.shape}")
    if plane.dtype != np.uint8:
        raise TypeError(f"plane must be uint8, got {plane.dtype}")
    height, width = plane.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(plane).tobytes()


def write_pgm(path: str, plane: np.ndarray) -> None:
    """Write a (height, width) uint8 array as binary PGM with maxval 255."""
    with open(path, "wb") as f:
        f.write(encode_pgm(plane))
