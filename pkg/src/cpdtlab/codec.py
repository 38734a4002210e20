"""A deliberately small intra-only block codec for transcoding experiments.

The pipeline is the minimum that still exhibits real rate-distortion
behavior: tile the plane into NxN blocks (edge replication padding), center
samples by 128, integer-transform each block, dead-zone quantize every
coefficient with step qp_to_qstep(qp) * orthonormal_gain(N) and a 1/3 intra
dead-zone offset, and count the cost of the level symbols with a zeroth-order
entropy model.  No prediction, no in-loop filters, no signal-dependent
adaptation, so that cascaded re-encoding isolates exactly the requantization
and clipping effects under study.

Rate is an estimate (Shannon entropy of the level histogram, bits/sample),
not a real bitstream; it is deterministic and monotone enough in qp to build
rate-distortion curves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quantizer import qp_to_qstep
from .transform import (
    COEFF_MAX,
    COEFF_MIN,
    TRANSFORM_SIZES,
    forward_transform,
    inverse_transform,
    orthonormal_gain,
)

__all__ = [
    "PIXEL_MAX",
    "PSNR_CAP",
    "CODEC_DEADZONE_OFFSET",
    "DEFAULT_BLOCK_SIZE",
    "QP_RANGE",
    "EncodedPlane",
    "ContentSpec",
    "coeff_qstep",
    "encode_plane",
    "decode_plane",
    "estimate_rate",
    "psnr",
    "synth_content",
]

PIXEL_MAX = 255

# PSNR sentinel for identical (or indistinguishably close) planes.
PSNR_CAP = 99.99

# Intra-style dead-zone rounding offset used by the codec path.
CODEC_DEADZONE_OFFSET = 1.0 / 3.0

DEFAULT_BLOCK_SIZE = 8

QP_RANGE = range(0, 52)


@dataclass(frozen=True)
class EncodedPlane:
    """Quantized transform levels for one plane.

    levels has shape (blocks_y, blocks_x, N, N); together with qp and the
    block size it fully determines the decoded plane.
    """

    qp: int
    block_size: int
    width: int
    height: int
    levels: np.ndarray


@dataclass(frozen=True)
class ContentSpec:
    """Parameters of the synthetic test content generator."""

    seed: int
    complexity: float
    width: int = 256
    height: int = 256

    def __post_init__(self):
        if not 0.0 <= self.complexity <= 1.0:
            raise ValueError(f"complexity must be in [0, 1], got {self.complexity}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"bad dimensions {self.width}x{self.height}")


def _check_plane(plane: np.ndarray, name: str = "plane") -> np.ndarray:
    plane = np.asarray(plane)
    if plane.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {plane.shape}")
    if plane.dtype != np.uint8:
        raise TypeError(f"{name} must be uint8, got {plane.dtype}")
    return plane


def coeff_qstep(qp: int, block_size: int = DEFAULT_BLOCK_SIZE) -> float:
    """Quantization step in integer-coefficient units.

    qp_to_qstep(qp) is defined on the orthonormal-coefficient scale; the
    integer transform carries a gain of orthonormal_gain(N) over that scale,
    so the coefficient-domain step is the product of the two.
    """
    return qp_to_qstep(qp) * orthonormal_gain(block_size)


def _tile(plane: np.ndarray, n: int) -> np.ndarray:
    """Pad to multiples of n with edge replication and split into blocks."""
    h, w = plane.shape
    ph = (-h) % n
    pw = (-w) % n
    padded = np.pad(plane, ((0, ph), (0, pw)), mode="edge")
    by, bx = padded.shape[0] // n, padded.shape[1] // n
    return padded.reshape(by, n, bx, n).swapaxes(1, 2)


def _untile(blocks: np.ndarray, height: int, width: int) -> np.ndarray:
    by, bx, n, _ = blocks.shape
    full = blocks.swapaxes(1, 2).reshape(by * n, bx * n)
    return full[:height, :width]


def encode_plane(
    plane: np.ndarray, qp: int, block_size: int = DEFAULT_BLOCK_SIZE
) -> EncodedPlane:
    """Transform and quantize a uint8 plane.

    Quantization is the dead-zone law level = sign(c) * floor(|c|/step + 1/3)
    on the integer transform coefficients; the step follows coeff_qstep(qp).
    """
    plane = _check_plane(plane)
    if block_size not in TRANSFORM_SIZES:
        raise ValueError(f"block_size must be one of {TRANSFORM_SIZES}, got {block_size}")
    if qp not in QP_RANGE:
        raise ValueError(f"qp out of range 0..51: {qp}")
    h, w = plane.shape
    residual = _tile(plane, block_size).astype(np.int64) - 128
    coeff = forward_transform(residual)
    step = coeff_qstep(qp, block_size)
    levels = (np.sign(coeff) * np.floor(np.abs(coeff) / step + CODEC_DEADZONE_OFFSET)).astype(
        np.int32
    )
    return EncodedPlane(qp=qp, block_size=block_size, width=w, height=h, levels=levels)


def decode_plane(enc: EncodedPlane) -> np.ndarray:
    """Reconstruct a uint8 plane from quantized levels."""
    step = coeff_qstep(enc.qp, enc.block_size)
    coeff = np.clip(np.rint(enc.levels.astype(np.float64) * step), COEFF_MIN, COEFF_MAX)
    residual = inverse_transform(coeff.astype(np.int64))
    pixels = np.clip(residual + 128, 0, PIXEL_MAX).astype(np.uint8)
    return _untile(pixels, enc.height, enc.width)


def estimate_rate(enc: EncodedPlane) -> float:
    """Zeroth-order entropy of the level symbols, in bits per source sample.

    An all-zero level field costs exactly 0 by this model.  Padding blocks
    are included in the histogram, so the symbol count is normalized by the
    true sample count of the plane.
    """
    levels = enc.levels.ravel()
    _, counts = np.unique(levels, return_counts=True)
    probs = counts / levels.size
    entropy = float(-(probs * np.log2(probs)).sum()) + 0.0  # -0.0 -> 0.0
    return entropy * levels.size / (enc.width * enc.height)


def psnr(reference: np.ndarray, test: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB between two uint8 planes.

    Identical planes return the 99.99 dB sentinel; any computed value is
    capped there so the sentinel is the scale's top.
    """
    a = _check_plane(reference, "reference")
    b = _check_plane(test, "test")
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = a.astype(np.float64) - b.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PSNR_CAP
    return min(10.0 * np.log10(PIXEL_MAX * PIXEL_MAX / mse), PSNR_CAP)


def synth_content(spec: ContentSpec) -> np.ndarray:
    """Deterministic synthetic plane: shaped noise over a diagonal gradient.

    White noise is low-pass filtered with a cutoff that rises with the
    complexity knob (0 = smooth blobs, 1 = full-band texture), scaled to a
    fixed variance, and added to a gradient that overdrives the 8-bit range,
    so every plane carries saturated plateaus at 0 and 255.  Those plateaus
    matter: coherent clipping at their borders is what keeps re-encoding a
    decoded plane honestly lossy.  Same spec, same platform -> identical
    planes.
    """
    h, w = spec.height, spec.width
    rng = np.random.default_rng(spec.seed)
    noise = rng.standard_normal((h, w))

    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.rfftfreq(w)[None, :]
    radius = np.hypot(fy, fx) / 0.5  # 1.0 at the Nyquist corner
    cutoff = 0.03 + 0.97 * spec.complexity
    response = 1.0 / (1.0 + (radius / cutoff) ** 8)
    shaped = np.fft.irfft2(np.fft.rfft2(noise) * response, s=(h, w))
    shaped /= max(float(shaped.std()), 1e-12)

    yy = np.linspace(0.0, 1.0, h)[:, None]
    xx = np.linspace(0.0, 1.0, w)[None, :]
    gradient = -24.0 + 304.0 * (0.62 * xx + 0.38 * yy)

    img = gradient + 44.0 * shaped
    return np.clip(np.rint(img), 0, PIXEL_MAX).astype(np.uint8)
