"""Cascaded pixel-domain transcoding harness.

A transcode re-encodes an already decoded plane:

    R = decode(encode(plane, qp_s))      the source encode
    T = decode(encode(R, qp_t))          the transcode

and compares the transcode against the direct encode of the original plane
that spends the same rate: delta_psnr = psnr(T) - psnr_direct_at(target_rate),
where the direct reference is read off the plane's rate-distortion curve by
piecewise-linear interpolation of PSNR against log2(rate).  The transcoding
ratio target_rate / source_rate is the independent variable of the study.

Records whose target rate falls outside the direct curve's rate span (or
whose source rate is zero) are flagged and excluded from aggregation rather
than extrapolated.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .codec import DEFAULT_BLOCK_SIZE, QP_RANGE, decode_plane, encode_plane, estimate_rate, psnr

__all__ = [
    "RATE_OUT_OF_SPAN",
    "UNDEFINED_RATIO",
    "RDPoint",
    "RDCurve",
    "TranscodeRecord",
    "RatioBin",
    "RatioProfile",
    "LocalMinimumRow",
    "RateOutOfSpanError",
    "build_rd_curve",
    "interp_psnr_at_rate",
    "transcode",
    "full_sweep",
    "aggregate_by_ratio",
    "local_minimum_report",
]

RATE_OUT_OF_SPAN = "rate_out_of_span"
UNDEFINED_RATIO = "undefined_ratio"


class RateOutOfSpanError(ValueError):
    """Requested rate lies outside the interpolable span of an RD curve."""


@dataclass(frozen=True)
class RDPoint:
    qp: int
    rate: float
    psnr: float


@dataclass(frozen=True)
class RDCurve:
    """Rate-distortion samples of one plane.

    samples: one point per requested qp, ordered by qp.
    points: the interpolation set - sorted by rate, duplicate rates merged
        keeping the best PSNR, Pareto-dominated points dropped, so rate is
        strictly increasing and PSNR strictly increasing.
    """

    samples: tuple[RDPoint, ...]
    points: tuple[RDPoint, ...]

    @property
    def rate_span(self) -> tuple[float, float]:
        return (self.points[0].rate, self.points[-1].rate)


@dataclass(frozen=True)
class TranscodeRecord:
    """One (qp_s, qp_t) cascaded transcode of a plane.

    delta_psnr is None iff flag is set (no honest direct reference exists at
    the target rate).
    """

    qp_s: int
    qp_t: int
    source_rate: float
    target_rate: float
    ratio: Optional[float]
    psnr_r: float
    psnr_t: float
    psnr_c: Optional[float]
    delta_psnr: Optional[float]
    flag: Optional[str] = None


@dataclass(frozen=True)
class RatioBin:
    lo: float
    hi: float
    mean_delta_psnr: Optional[float]
    count: int


@dataclass(frozen=True)
class RatioProfile:
    """Mean delta-PSNR pooled per transcoding-ratio bin.

    Bins are contiguous half-open intervals [lo, hi) of width bin_width
    starting at 0 and extending far enough that every non-flagged record
    lands in exactly one bin.
    """

    bin_width: float
    bins: tuple[RatioBin, ...]


@dataclass(frozen=True)
class LocalMinimumRow:
    """Where |delta_psnr| bottoms out in a qp_t neighborhood of qp_s."""

    qp_s: int
    best_qp_t: int
    matches: bool
    delta_at_qp_s: float


def build_rd_curve(
    plane: np.ndarray,
    qps: Sequence[int] = QP_RANGE,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> RDCurve:
    """Encode/decode the plane at each qp and assemble its RD curve."""
    qps = sorted(set(int(q) for q in qps))
    if not qps:
        raise ValueError("need at least one qp")
    samples = []
    for qp in qps:
        enc = encode_plane(plane, qp, block_size)
        samples.append(RDPoint(qp=qp, rate=estimate_rate(enc), psnr=psnr(plane, decode_plane(enc))))
    by_rate: dict[float, RDPoint] = {}
    for pt in samples:
        cur = by_rate.get(pt.rate)
        if cur is None or pt.psnr > cur.psnr:
            by_rate[pt.rate] = pt
    cleaned = []
    best = -math.inf
    for rate in sorted(by_rate):
        pt = by_rate[rate]
        if pt.psnr > best:
            cleaned.append(pt)
            best = pt.psnr
    return RDCurve(samples=tuple(samples), points=tuple(cleaned))


def interp_psnr_at_rate(curve: RDCurve, rate: float) -> float:
    """PSNR of the curve at a rate, linear in log2(rate) between points.

    Exact point rates short-circuit to that point's PSNR.  Rates outside the
    curve's span raise RateOutOfSpanError; no extrapolation.  At the log2
    midpoint of two rates this returns the arithmetic mean of their PSNRs.
    """
    rates = [p.rate for p in curve.points]
    i = bisect_left(rates, rate)
    if i < len(rates) and rates[i] == rate:
        return curve.points[i].psnr
    if i == 0 or i == len(rates):
        lo, hi = curve.rate_span
        raise RateOutOfSpanError(f"rate {rate} outside curve span [{lo}, {hi}]")
    r0, p0 = rates[i - 1], curve.points[i - 1].psnr
    r1, p1 = rates[i], curve.points[i].psnr
    if r0 <= 0.0:
        raise RateOutOfSpanError(f"rate {rate} below the smallest positive curve rate {r1}")
    t = (math.log2(rate) - math.log2(r0)) / (math.log2(r1) - math.log2(r0))
    return p0 + t * (p1 - p0)


def _transcode_from_recon(
    plane: np.ndarray,
    recon: np.ndarray,
    qp_s: int,
    qp_t: int,
    source_rate: float,
    psnr_r: float,
    direct_curve: RDCurve,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> TranscodeRecord:
    enc_t = encode_plane(recon, qp_t, block_size)
    target_rate = estimate_rate(enc_t)
    psnr_t = psnr(plane, decode_plane(enc_t))
    if source_rate == 0.0:
        return TranscodeRecord(
            qp_s=qp_s, qp_t=qp_t, source_rate=source_rate, target_rate=target_rate,
            ratio=None, psnr_r=psnr_r, psnr_t=psnr_t, psnr_c=None, delta_psnr=None,
            flag=UNDEFINED_RATIO,
        )
    ratio = target_rate / source_rate
    try:
        psnr_c = interp_psnr_at_rate(direct_curve, target_rate)
    except RateOutOfSpanError:
        return TranscodeRecord(
            qp_s=qp_s, qp_t=qp_t, source_rate=source_rate, target_rate=target_rate,
            ratio=ratio, psnr_r=psnr_r, psnr_t=psnr_t, psnr_c=None, delta_psnr=None,
            flag=RATE_OUT_OF_SPAN,
        )
    return TranscodeRecord(
        qp_s=qp_s, qp_t=qp_t, source_rate=source_rate, target_rate=target_rate,
        ratio=ratio, psnr_r=psnr_r, psnr_t=psnr_t, psnr_c=psnr_c,
        delta_psnr=psnr_t - psnr_c, flag=None,
    )


def transcode(
    plane: np.ndarray,
    qp_s: int,
    qp_t: int,
    direct_curve: Optional[RDCurve] = None,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> TranscodeRecord:
    """Cascade one plane through qp_s then qp_t and score it.

    The direct curve defaults to the plane's full 0..51 curve; pass one in
    when scoring many pairs of the same plane to avoid rebuilding it.
    """
    if direct_curve is None:
        direct_curve = build_rd_curve(plane, block_size=block_size)
    enc_s = encode_plane(plane, qp_s, block_size)
    recon = decode_plane(enc_s)
    return _transcode_from_recon(
        plane, recon, qp_s, qp_t,
        source_rate=estimate_rate(enc_s),
        psnr_r=psnr(plane, recon),
        direct_curve=direct_curve,
        block_size=block_size,
    )


def full_sweep(
    plane: np.ndarray,
    qp_s_values: Sequence[int] = QP_RANGE,
    qp_t_values: Sequence[int] = QP_RANGE,
    direct_curve: Optional[RDCurve] = None,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> list[TranscodeRecord]:
    """Every (qp_s, qp_t) pair; 52x52 by default, 2704 records."""
    if direct_curve is None:
        direct_curve = build_rd_curve(plane, block_size=block_size)
    records = []
    for qp_s in qp_s_values:
        enc_s = encode_plane(plane, qp_s, block_size)
        recon = decode_plane(enc_s)
        source_rate = estimate_rate(enc_s)
        psnr_r = psnr(plane, recon)
        for qp_t in qp_t_values:
            records.append(
                _transcode_from_recon(
                    plane, recon, qp_s, qp_t, source_rate, psnr_r, direct_curve, block_size
                )
            )
    return records


def aggregate_by_ratio(
    records: Sequence[TranscodeRecord], bin_width: float = 0.05
) -> RatioProfile:
    """Pool non-flagged records into contiguous ratio bins of equal width."""
    if bin_width <= 0:
        raise ValueError(f"bin_width must be positive, got {bin_width}")
    kept = [r for r in records if r.flag is None]
    sums: dict[int, float] = {}
    counts: dict[int, int] = {}
    for rec in kept:
        idx = int(rec.ratio // bin_width)
        sums[idx] = sums.get(idx, 0.0) + rec.delta_psnr
        counts[idx] = counts.get(idx, 0) + 1
    top = max(counts) + 1 if counts else 0
    bins = []
    for i in range(top):
        n = counts.get(i, 0)
        mean = sums[i] / n if n else None
        bins.append(RatioBin(lo=i * bin_width, hi=(i + 1) * bin_width, mean_delta_psnr=mean, count=n))
    return RatioProfile(bin_width=bin_width, bins=tuple(bins))


def local_minimum_report(
    records: Sequence[TranscodeRecord],
    qp_s_values: Optional[Sequence[int]] = None,
    radius: int = 2,
) -> list[LocalMinimumRow]:
    """Argmin of |delta_psnr| over qp_t in [qp_s - radius, qp_s + radius].

    With qp_s_values omitted, reports every qp_s in the records whose full
    qp_t neighborhood is present; naming a qp_s whose neighborhood is
    incomplete (or whose center record is flagged) raises ValueError.
    """
    by_pair = {(r.qp_s, r.qp_t): r for r in records}
    if qp_s_values is None:
        qp_s_values = sorted(
            qp_s
            for qp_s in {r.qp_s for r in records}
            if all((qp_s, qp_s + d) in by_pair for d in range(-radius, radius + 1))
        )
    rows = []
    for qp_s in qp_s_values:
        neighborhood = []
        for d in range(-radius, radius + 1):
            rec = by_pair.get((qp_s, qp_s + d))
            if rec is None:
                raise ValueError(f"missing record for qp_s={qp_s}, qp_t={qp_s + d}")
            neighborhood.append(rec)
        center = by_pair[(qp_s, qp_s)]
        if center.flag is not None:
            raise ValueError(f"center record (qp_s=qp_t={qp_s}) is flagged: {center.flag}")
        scored = [r for r in neighborhood if r.flag is None]
        best = min(scored, key=lambda r: abs(r.delta_psnr))
        rows.append(
            LocalMinimumRow(
                qp_s=qp_s,
                best_qp_t=best.qp_t,
                matches=best.qp_t == qp_s,
                delta_at_qp_s=center.delta_psnr,
            )
        )
    return rows
