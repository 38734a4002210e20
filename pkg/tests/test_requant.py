"""Requantization analysis: frozen values, independent oracle, properties."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpdtlab.quantizer import Quantizer
from cpdtlab.requant import (
    AUDIT_OFFSETS,
    DEFAULT_DOMAIN,
    MEAN_ABS,
    METRICS,
    MSE,
    REPORTED_REFERENCE,
    RMS,
    UNDEFINED_RATIO,
    CoefficientDomain,
    boundary_overlap,
    convention_audit,
    direct_error,
    error_ratio,
    error_surface,
    pointwise_errors,
    requant_error,
    sweep_qstep_t,
)


def _oracle_chain_error(q_s: Quantizer, q_t: Quantizer, lo: int, hi: int) -> Fraction:
    """Mean-abs two-stage error via the scalar Fraction path, one x at a time."""
    total = Fraction(0)
    for x in range(lo, hi + 1):
        recon_s = q_s.dequantize(q_s.quantize(x))
        recon_t = q_t.dequantize(q_t.quantize(recon_s))
        total += abs(Fraction(x) - recon_t)
    return total / (hi - lo + 1)


def _oracle_direct_error(q_t: Quantizer, lo: int, hi: int) -> Fraction:
    total = Fraction(0)
    for x in range(lo, hi + 1):
        total += q_t.pointwise_error(x)
    return total / (hi - lo + 1)


class TestFrozenValues:
    def test_direct_error_period_mean(self):
        # Each length-20 period contributes errors 0..19, mean 9.5.
        domain = CoefficientDomain(0, 19999)
        assert direct_error(Quantizer(20), domain) == 9.5

    def test_chain_equals_direct_for_nested_steps(self):
        # floor(floor(x/10)*10 / 20)*20 == floor(x/20)*20 on integers.
        domain = CoefficientDomain(0, 19999)
        assert requant_error(Quantizer(10), Quantizer(20), domain) == 9.5

    def test_unit_target_step_is_lossless_on_integers(self):
        assert direct_error(Quantizer(1), CoefficientDomain(-500, 499)) == 0.0

    def test_exact_multiple_ratio_is_exactly_one(self):
        q_s = Quantizer(12)
        for k in (1, 2, 3):
            pt = error_ratio(q_s, Quantizer(12 * k))
            assert pt.ratio == 1.0
            assert pt.flag is None

    def test_same_step_chain_equals_direct(self):
        domain = CoefficientDomain(-2048, 2047)
        q = Quantizer(17, Fraction(1, 3))
        assert requant_error(q, q, domain) == direct_error(q, domain)


class TestAgainstScalarOracle:
    @pytest.mark.parametrize(
        "qstep_s,qstep_t,offset",
        [
            (10, 25, Fraction(0)),
            (12, 13, Fraction(0)),
            (7, 18, Fraction(1, 3)),
            (Fraction(5, 2), 9, Fraction(1, 6)),
        ],
    )
    def test_vectorized_matches_scalar_fractions(self, qstep_s, qstep_t, offset):
        domain = CoefficientDomain(-300, 299)
        q_s = Quantizer(qstep_s, offset)
        q_t = Quantizer(qstep_t, offset)
        impl_a = direct_error(q_t, domain)
        impl_b = requant_error(q_s, q_t, domain)
        oracle_a = _oracle_direct_error(q_t, domain.lo, domain.hi)
        oracle_b = _oracle_chain_error(q_s, q_t, domain.lo, domain.hi)
        assert impl_a == pytest.approx(float(oracle_a), abs=1e-12)
        assert impl_b == pytest.approx(float(oracle_b), abs=1e-12)

    def test_pointwise_errors_are_exact_numerators(self):
        domain = CoefficientDomain(-60, 59)
        q_s = Quantizer(Fraction(7, 2), Fraction(1, 6))
        q_t = Quantizer(9, Fraction(1, 6))
        e_a, e_b, den = pointwise_errors(q_s, q_t, domain)
        for x, a, b in zip(range(-60, 60), e_a.tolist(), e_b.tolist()):
            assert Fraction(int(a), den) == q_t.pointwise_error(x)
            recon_s = q_s.dequantize(q_s.quantize(x))
            recon_t = q_t.dequantize(q_t.quantize(recon_s))
            assert Fraction(int(b), den) == abs(Fraction(x) - recon_t)


class TestDominanceAndTrend:
    @given(
        qstep_s=st.integers(min_value=1, max_value=40),
        qstep_t=st.integers(min_value=1, max_value=40),
    )
    @settings(max_examples=60, deadline=None)
    def test_offset_zero_pointwise_dominance(self, qstep_s, qstep_t):
        domain = CoefficientDomain(-400, 399)
        e_a, e_b, _ = pointwise_errors(Quantizer(qstep_s), Quantizer(qstep_t), domain)
        assert np.all(e_b >= e_a)

    def test_ratio_at_least_one_on_sweep(self):
        points = sweep_qstep_t(12, range(2, 41), CoefficientDomain(-4096, 4095))
        assert all(pt.ratio >= 1.0 for pt in points)

    def test_off_multiple_trend(self):
        q_s = Quantizer(12)
        r = {qt: error_ratio(q_s, Quantizer(qt)).ratio for qt in (13, 25, 37)}
        assert r[37] < r[25] < r[13]

    def test_scale_invariance(self):
        r1 = error_ratio(Quantizer(10), Quantizer(25)).ratio
        r2 = error_ratio(Quantizer(20), Quantizer(50)).ratio
        assert r1 == pytest.approx(r2, abs=0.02)


class TestMetrics:
    def test_metric_relationships(self):
        domain = CoefficientDomain(-999, 999)
        q_s, q_t = Quantizer(10), Quantizer(25)
        rms = requant_error(q_s, q_t, domain, RMS)
        mse = requant_error(q_s, q_t, domain, MSE)
        mean_abs = requant_error(q_s, q_t, domain, MEAN_ABS)
        assert rms == pytest.approx(math.sqrt(mse), abs=1e-12)
        assert mean_abs <= rms  # Jensen
        assert rms > 0

    def test_unknown_metric_rejected(self):
        with pytest.raises(ValueError):
            direct_error(Quantizer(10), DEFAULT_DOMAIN, "median")


class TestUndefinedRatio:
    def test_zero_direct_error_flags(self):
        pt = error_ratio(Quantizer(3), Quantizer(1), CoefficientDomain(-100, 100))
        assert pt.e_a == 0.0
        assert pt.ratio is None
        assert pt.flag == UNDEFINED_RATIO


class TestSweepAndSurface:
    def test_sweep_row_count_and_order(self):
        points = sweep_qstep_t(12, range(2, 41), CoefficientDomain(-1024, 1023))
        assert len(points) == 39
        assert [pt.qstep_t for pt in points] == [float(v) for v in range(2, 41)]

    def test_surface_diagonal_is_one(self):
        axes = [8, 10, 12]
        surf = error_surface(axes, axes, CoefficientDomain(-2048, 2047))
        assert surf.shape == (3, 3)
        for i in range(3):
            assert surf.cells[i][i].ratio == 1.0

    def test_single_cell_surface_reduces_to_error_ratio(self):
        domain = CoefficientDomain(-512, 511)
        surf = error_surface([10], [25], domain)
        pt = error_ratio(Quantizer(10), Quantizer(25), domain)
        assert surf.cells[0][0] == pt


class TestBoundaryOverlap:
    def test_equal_steps(self):
        report = boundary_overlap(Quantizer(10), Quantizer(10))
        assert report.aligned_fraction == 1.0
        assert report.max_extra_error == 0.0

    def test_double_step_fully_aligned(self):
        report = boundary_overlap(Quantizer(10), Quantizer(20))
        assert report.aligned_fraction == 1.0
        assert report.max_extra_error == 0.0
        assert report.split_bin_period.startswith("none")

    def test_half_integer_ratio(self):
        report = boundary_overlap(Quantizer(10), Quantizer(25))
        assert report.aligned_fraction == 0.5
        assert report.max_extra_error == 5.0
        assert "1 of every 5" in report.split_bin_period

    def test_acceptance_pair(self):
        report = boundary_overlap(Quantizer(12), Quantizer(30))
        assert report.aligned_fraction == 0.5
        assert report.max_extra_error == 6.0

    def test_offset_mismatch_rejected(self):
        with pytest.raises(ValueError):
            boundary_overlap(Quantizer(10, Fraction(1, 3)), Quantizer(25))


class TestConventionAudit:
    def test_full_table(self):
        rows = convention_audit()
        assert len(rows) == len(AUDIT_OFFSETS) * len(METRICS) == 12
        seen = {(row.offset, row.metric) for row in rows}
        assert len(seen) == 12

    def test_offset_zero_mean_abs_row(self):
        rows = convention_audit()
        row = next(r for r in rows if r.offset == 0.0 and r.metric == MEAN_ABS)
        # The 10 -> 20 chain at offset 0 collapses to direct quantization.
        assert row.ratio == 1.0
        assert row.e_a == pytest.approx(9.4987, abs=1e-3)
        assert row.e_b == row.e_a

    def test_reference_is_documented_not_forced(self):
        # No supported convention reproduces the reported triple; the table
        # must say so honestly rather than match by construction.
        rows = convention_audit()
        assert REPORTED_REFERENCE == {"e_a": 12.0, "e_b": 14.5, "ratio": 1.2}
        assert not any(r.matches_reference for r in rows)


class TestCoefficientDomain:
    def test_validation(self):
        with pytest.raises(ValueError):
            CoefficientDomain(10, 9)

    def test_size_and_values(self):
        d = CoefficientDomain(-3, 3)
        assert d.size == 7
        assert d.values().tolist() == [-3, -2, -1, 0, 1, 2, 3]
