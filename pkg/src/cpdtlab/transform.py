"""Integer core transform (4x4 and 8x8) with 16-bit staged clipping.

The matrices and shift schedule follow the H.265/HEVC core transform
(ISO/IEC 23008-2 section 8.6; transformation process for scaled transform
coefficients): two separable one-dimensional passes, a rounded right-shift
after each pass, and every intermediate clipped to signed 16 bits, sign bit
included.  For residual bit depth B:

    forward shifts:  log2(N) - 1 + (B - 8), then log2(N) + 6
    inverse shifts:  7, then 20 - B

The integer chain carries a fixed gain over the orthonormal DCT-II:
``orthonormal_gain(N) = 128 / N`` (16 for 8x8, 32 for 4x4), so a constant
block of value v transforms to a DC coefficient of 128 * v at either size.
Because of the staged shifts the chain is deliberately not lossless: a
forward/inverse round trip may move a sample by one or two codes.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "COEFF_MIN",
    "COEFF_MAX",
    "TRANSFORM_SIZES",
    "transform_matrix",
    "orthonormal_gain",
    "forward_transform",
    "inverse_transform",
    "residual_range",
    "roundtrip_error_stats",
]

COEFF_MIN = -32768
COEFF_MAX = 32767

TRANSFORM_SIZES = (4, 8)

_T4 = np.array(
    [
        [64, 64, 64, 64],
        [83, 36, -36, -83],
        [64, -64, -64, 64],
        [36, -83, 83, -36],
    ],
    dtype=np.int64,
)

# Rows follow the even/odd butterfly structure of the 8-point core transform,
# generated from the constants {64, 83, 36, 89, 75, 50, 18}.
_A, _B, _C = 64, 83, 36
_D, _E, _F, _G = 89, 75, 50, 18
_T8 = np.array(
    [
        [_A, _A, _A, _A, _A, _A, _A, _A],
        [_D, _E, _F, _G, -_G, -_F, -_E, -_D],
        [_B, _C, -_C, -_B, -_B, -_C, _C, _B],
        [_E, -_G, -_D, -_F, _F, _D, _G, -_E],
        [_A, -_A, -_A, _A, _A, -_A, -_A, _A],
        [_F, -_D, _G, _E, -_E, -_G, _D, -_F],
        [_C, -_B, _B, -_C, -_C, _B, -_B, _C],
        [_G, -_F, _E, -_D, _D, -_E, _F, -_G],
    ],
    dtype=np.int64,
)

_MATRICES = {4: _T4, 8: _T8}


def transform_matrix(size: int) -> np.ndarray:
    """The N-point integer transform matrix (rows are basis vectors)."""
    if size not in _MATRICES:
        raise ValueError(f"unsupported transform size {size}; choose from {TRANSFORM_SIZES}")
    return _MATRICES[size].copy()


def orthonormal_gain(size: int) -> float:
    """Gain of the forward integer chain relative to the orthonormal DCT-II."""
    if size not in _MATRICES:
        raise ValueError(f"unsupported transform size {size}; choose from {TRANSFORM_SIZES}")
    return 128.0 / size


def residual_range(bit_depth: int = 8) -> tuple[int, int]:
    """Signed residual range for a given video bit depth (9 bits for 8-bit video)."""
    return -(1 << bit_depth), (1 << bit_depth) - 1


def _shifted(x: np.ndarray, shift: int) -> np.ndarray:
    return (x + (1 << (shift - 1))) >> shift


def _clip16(x: np.ndarray) -> np.ndarray:
    return np.clip(x, COEFF_MIN, COEFF_MAX)


def _check_block(block: np.ndarray, name: str) -> tuple[np.ndarray, int]:
    block = np.asarray(block)
    if block.ndim < 2 or block.shape[-1] != block.shape[-2]:
        raise ValueError(f"{name} must be (..., N, N), got shape {block.shape}")
    size = block.shape[-1]
    if size not in _MATRICES:
        raise ValueError(f"unsupported transform size {size}; choose from {TRANSFORM_SIZES}")
    if not np.issubdtype(block.dtype, np.integer):
        raise TypeError(f"{name} must be an integer array, got dtype {block.dtype}")
    return block.astype(np.int64), size


def forward_transform(block: np.ndarray, bit_depth: int = 8) -> np.ndarray:
    """Forward 2-D integer transform of residual block(s).

    Args:
        block: integer array of shape (..., N, N), N in TRANSFORM_SIZES.
        bit_depth: residual bit depth B; shifts assume 8 by default.

    Returns:
        int64 coefficient array of the same shape, every stage clipped to
        [-32768, 32767].
    """
    x, size = _check_block(block, "block")
    t = _MATRICES[size]
    log2n = size.bit_length() - 1
    shift1 = log2n - 1 + (bit_depth - 8)
    shift2 = log2n + 6
    stage1 = _clip16(_shifted(np.matmul(t, x), shift1))
    stage2 = _clip16(_shifted(np.matmul(stage1, t.T), shift2))
    return stage2


def inverse_transform(coeff: np.ndarray, bit_depth: int = 8) -> np.ndarray:
    """Inverse 2-D integer transform of coefficient block(s).

    Output is clipped to the residual range for the bit depth
    ([-256, 255] for 8-bit video).
    """
    c, size = _check_block(coeff, "coeff")
    t = _MATRICES[size]
    shift1 = 7
    shift2 = 20 - bit_depth
    stage1 = _clip16(_shifted(np.matmul(t.T, c), shift1))
    stage2 = _shifted(np.matmul(stage1, t), shift2)
    lo, hi = residual_range(bit_depth)
    return np.clip(stage2, lo, hi)


def roundtrip_error_stats(blocks: np.ndarray, bit_depth: int = 8) -> dict[str, float]:
    """Reconstruction error statistics of inverse(forward(b)) over blocks.

    Args:
        blocks: integer array of shape (..., N, N), at least one block.

    Returns:
        {"max_abs": ..., "mean_abs": ...} over every sample of every block.
    """
    blocks = np.asarray(blocks)
    if blocks.size == 0:
        raise ValueError("need at least one block")
    recon = inverse_transform(forward_transform(blocks, bit_depth), bit_depth)
    err = np.abs(recon - blocks.astype(np.int64))
    return {"max_abs": float(err.max()), "mean_abs": float(err.mean())}
