"""Dead-zone uniform scalar quantization with exact rational arithmetic.

The quantizer law is

    level = sign(x) * floor(|x| / step + offset)
    recon = level * step

with ``offset`` in [0, 1).  offset=0 is magnitude truncation (the widest dead
zone), offset=1/2 is round-to-nearest, and 1/3 / 1/6 are the HEVC-style intra /
inter dead zones.  ``step`` and ``offset`` are kept as exact rationals so that
decision boundaries, pointwise errors, and two-stage requantization chains can
be compared with zero floating-point slack.

Tie handling: when |x|/step + offset lands exactly on an integer k, the input
sits on a decision boundary.  With offset=0 that boundary is itself a
reconstruction point (|x| = k*step), so both tie-break modes return k and exact
multiples of step reconstruct losslessly.  With offset>0 the boundary lies
strictly between the reconstructions (k-1)*step and k*step and the tie_break
mode decides: "toward-zero" picks k-1, "away-from-zero" picks k (plain floor).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

__all__ = [
    "TOWARD_ZERO",
    "AWAY_FROM_ZERO",
    "Quantizer",
    "qp_to_qstep",
    "as_fraction",
]

TOWARD_ZERO = "toward-zero"
AWAY_FROM_ZERO = "away-from-zero"

_TIE_BREAKS = (TOWARD_ZERO, AWAY_FROM_ZERO)

RationalLike = Union[int, float, str, Fraction]

# int64 products in the vectorized path must stay below this; larger setups
# fall back to exact Python-int (object dtype) arithmetic.
_INT64_SAFE = 1 << 62


def as_fraction(value: RationalLike) -> Fraction:
    """Convert a step/offset argument to an exact Fraction.

    Floats are interpreted by their shortest decimal representation, so 2.5
    means exactly 5/2 and 0.1 means exactly 1/10 (what the caller typed, not
    the binary expansion).
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as a rational number")


@dataclass(frozen=True)
class Quantizer:
    """A dead-zone uniform scalar quantizer.

    Attributes:
        step: quantization step size, a positive rational.
        offset: dead-zone rounding offset in [0, 1). 0 = truncation,
            1/2 = round-to-nearest, 1/3 and 1/6 = HEVC-style intra/inter.
        tie_break: how to resolve inputs exactly on a decision boundary
            (only observable for offset > 0; see module docstring).
    """

    step: Fraction
    offset: Fraction = Fraction(0)
    tie_break: str = TOWARD_ZERO

    def __init__(
        self,
        step: RationalLike,
        offset: RationalLike = 0,
        tie_break: str = TOWARD_ZERO,
    ):
        object.__setattr__(self, "step", as_fraction(step))
        object.__setattr__(self, "offset", as_fraction(offset))
        object.__setattr__(self, "tie_break", tie_break)
        if self.step <= 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if not (0 <= self.offset < 1):
            raise ValueError(f"offset must be in [0, 1), got {self.offset}")
        if tie_break not in _TIE_BREAKS:
            raise ValueError(f"tie_break must be one of {_TIE_BREAKS}, got {tie_break!r}")

    # -- scalar reference implementation (exact) ----------------------------

    def quantize(self, x: RationalLike) -> int:
        """Map a value to its signed quantization level."""
        xf = as_fraction(x)
        mag = self._level_magnitude(abs(xf))
        return -mag if xf < 0 else mag

    def _level_magnitude(self, absx: Fraction) -> int:
        t = absx / self.step + self.offset
        level = math.floor(t)
        if t == level and self.offset > 0 and self.tie_break == TOWARD_ZERO:
            level -= 1
        return level

    def dequantize(self, level: int) -> Fraction:
        """Reconstruction for a level: level * step."""
        return level * self.step

    def pointwise_error(self, x: RationalLike) -> Fraction:
        """|x - dequantize(quantize(x))| for a single value."""
        xf = as_fraction(x)
        return abs(xf - self.dequantize(self.quantize(xf)))

    def decision_boundaries(self, lo: RationalLike, hi: RationalLike) -> list[Fraction]:
        """All thresholds b in [lo, hi] where the level changes, ascending.

        Boundaries sit at +-(k - offset) * step for k >= 1; for offset=0 and
        x >= 0 these are the positive multiples of step.  Zero is never a
        boundary (the dead zone surrounds it).
        """
        lof, hif = as_fraction(lo), as_fraction(hi)
        if lof > hif:
            raise ValueError(f"empty range: [{lof}, {hif}]")
        out: list[Fraction] = []
        # positive side: (k - offset) * step <= hi
        if hif > 0:
            k = max(1, math.ceil(lof / self.step + self.offset))
            while True:
                b = (k - self.offset) * self.step
                if b > hif:
                    break
                if b >= lof and b > 0:
                    out.append(b)
                k += 1
        # negative side, mirrored
        if lof < 0:
            k = max(1, math.ceil(-hif / self.step + self.offset))
            while True:
                b = -(k - self.offset) * self.step
                if b < lof:
                    break
                if b <= hif and b < 0:
                    out.append(b)
                k += 1
        return sorted(out)

    def max_error(self, lo: int, hi: int) -> Fraction:
        """Worst-case |x - recon(x)| over the integers lo..hi inclusive."""
        if lo > hi:
            raise ValueError(f"empty domain: [{lo}, {hi}]")
        err_num, den = self.error_numerators(np.arange(lo, hi + 1, dtype=np.int64))
        return Fraction(int(err_num.max()), den)

    # -- vectorized exact path ----------------------------------------------

    def quantize_array(self, x: np.ndarray) -> np.ndarray:
        """Exact vectorized quantize for integer-valued arrays."""
        return self.quantize_scaled(np.asarray(x), 1)

    def quantize_scaled(self, num: np.ndarray, den: int) -> np.ndarray:
        """Exact vectorized quantize for the rational values num/den.

        ``num`` is an integer array, ``den`` a positive integer shared
        denominator.  This is what lets a second quantization stage consume the
        exact rational reconstructions of a first stage.

        t = (|num|/den) / (sp/sq) + op/oq
          = (|num|*sq*oq + op*sp*den) / (sp*oq*den)
        """
        sp, sq = self.step.numerator, self.step.denominator
        op, oq = self.offset.numerator, self.offset.denominator
        absn = np.abs(num)
        num_mul = sq * oq
        num_add = op * sp * den
        full_den = sp * oq * den
        hi = int(absn.max(initial=0)) if absn.size else 0
        if hi * num_mul + num_add >= _INT64_SAFE or full_den >= _INT64_SAFE:
            absn = absn.astype(object)
        else:
            absn = absn.astype(np.int64)
        t_num = absn * num_mul + num_add
        levels = t_num // full_den
        if self.offset > 0 and self.tie_break == TOWARD_ZERO:
            levels = levels - (t_num % full_den == 0)
        return np.where(num < 0, -levels, levels)

    def error_numerators(self, x: np.ndarray) -> tuple[np.ndarray, int]:
        """Exact |x - recon(x)| for an integer array, as (numerators, shared_den).

        The error of integer x is |x*sq - level*sp| / sq with step = sp/sq;
        returning integer numerators keeps downstream sums exact.
        """
        x = np.asarray(x)
        sp, sq = self.step.numerator, self.step.denominator
        levels = self.quantize_array(x)
        if levels.dtype == object:
            err = np.abs(x.astype(object) * sq - levels * sp)
        else:
            err = np.abs(x.astype(np.int64) * sq - levels * sp)
        return err, sq


def qp_to_qstep(qp: int) -> float:
    """HEVC-style step size for a quantization parameter: 2**((qp-4)/6).

    Built from an exact power of two times 2**(r/6) for the residue r, so a
    +6 increment doubles the step bit-exactly.

    Args:
        qp: integer quantization parameter in 0..51.

    Returns:
        The positive step size as a float; qp=4 -> 1.0.
    """
    if not isinstance(qp, (int, np.integer)):
        raise TypeError(f"qp must be an integer, got {type(qp).__name__}")
    if not 0 <= qp <= 51:
        raise ValueError(f"qp out of range 0..51: {qp}")
    quot, rem = divmod(qp - 4, 6)
    return math.ldexp(2.0 ** (rem / 6.0), quot)
