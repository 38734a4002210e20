"""Published full-scale reference points for cascaded transcoding loss.

These numbers come from cascaded pixel-domain transcoding measurements made
with a full HEVC encoder (HM 15.0 reference software) on full-HD test
sequences.  They give the expected order of magnitude of delta-PSNR effects
at that scale and are surfaced in reports for side-by-side comparison with
the toy codec in this package.  They are context only, never acceptance
thresholds: a prediction-free toy codec reproduces the structure of the
effects, not their absolute scale.
"""

from __future__ import annotations

__all__ = ["FULL_CODEC_REFERENCE"]

FULL_CODEC_REFERENCE = {
    # Average (over sequences) of the maximal quality loss observed across
    # transcoding ratios.
    "avg_max_loss_db": 1.4,
    # Losses stay below this bound while the transcoding ratio is < 100%.
    "below_100pct_bound_db": 0.7,
    # Typical loss at a 95% transcoding ratio.
    "loss_at_95pct_db": 0.35,
    # Typical loss near a 75% transcoding ratio.
    "loss_at_75pct_db": 0.63,
    # Loss near 100% when the transcoder picks a QP one smaller than the
    # source QP instead of reusing it.
    "qp_minus_one_loss_db": 0.5,
}
