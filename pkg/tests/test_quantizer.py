"""Dead-zone quantizer: frozen contract values, exactness, and properties."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpdtlab.quantizer import (
    AWAY_FROM_ZERO,
    TOWARD_ZERO,
    Quantizer,
    as_fraction,
    qp_to_qstep,
)

# Hypothesis strategies kept small so the exact (Fraction) reference path
# stays fast.
_steps = st.one_of(
    st.integers(min_value=1, max_value=60),
    st.fractions(min_value=Fraction(1, 4), max_value=60, max_denominator=8),
)
_offsets = st.one_of(
    st.just(Fraction(0)),
    st.fractions(min_value=0, max_value=Fraction(5, 6), max_denominator=6),
)
_values = st.integers(min_value=-5000, max_value=5000)


class TestQuantizeContract:
    def test_basic_levels(self):
        assert Quantizer(20).quantize(37) == 1
        assert Quantizer(20, Fraction(1, 2)).quantize(37) == 2
        assert Quantizer(10).quantize(-25) == -2

    def test_dequantize(self):
        assert Quantizer(20).dequantize(1) == 20
        assert Quantizer(10).dequantize(-2) == -20
        assert Quantizer(12).dequantize(0) == 0

    def test_pointwise_error(self):
        assert Quantizer(20).pointwise_error(37) == 17
        assert Quantizer(20).pointwise_error(40) == 0
        assert Quantizer(10, Fraction(1, 2)).pointwise_error(14) == 4

    def test_exact_multiples_are_lossless_at_offset_zero(self):
        q = Quantizer(20)
        for k in range(-5, 6):
            assert q.pointwise_error(20 * k) == 0

    def test_tie_break_modes(self):
        # |x|/step + offset = 45/10 + 1/2 = 5 exactly: the two modes differ.
        toward = Quantizer(10, Fraction(1, 2), TOWARD_ZERO)
        away = Quantizer(10, Fraction(1, 2), AWAY_FROM_ZERO)
        assert toward.quantize(45) == 4
        assert away.quantize(45) == 5
        assert toward.quantize(-45) == -4
        assert away.quantize(-45) == -5

    def test_offset_zero_tie_is_the_exact_multiple(self):
        # At offset 0 an exact multiple must quantize to itself under both
        # modes; the dead zone may not swallow it.
        for mode in (TOWARD_ZERO, AWAY_FROM_ZERO):
            assert Quantizer(20, 0, mode).quantize(40) == 2

    def test_validation(self):
        with pytest.raises(ValueError):
            Quantizer(0)
        with pytest.raises(ValueError):
            Quantizer(-3)
        with pytest.raises(ValueError):
            Quantizer(10, 1)  # offset must stay below 1
        with pytest.raises(ValueError):
            Quantizer(10, Fraction(-1, 4))
        with pytest.raises(ValueError):
            Quantizer(10, 0, "round-to-even")


class TestDecisionBoundaries:
    def test_offset_zero_multiples(self):
        assert Quantizer(2).decision_boundaries(0, 10) == [2, 4, 6, 8, 10]
        assert Quantizer(5).decision_boundaries(0, 10) == [5, 10]

    def test_offset_shifts_boundaries(self):
        assert Quantizer(20, Fraction(1, 2)).decision_boundaries(0, 19) == [10]

    def test_symmetric_range(self):
        bounds = Quantizer(10).decision_boundaries(-25, 25)
        assert bounds == [-20, -10, 10, 20]
        assert 0 not in bounds  # zero is never a boundary

    def test_boundaries_flip_the_level(self):
        q = Quantizer(12, Fraction(1, 3))
        eps = Fraction(1, 1000)
        for b in q.decision_boundaries(1, 100):
            assert q.quantize(b + eps) != q.quantize(b - eps)


class TestMaxError:
    def test_frozen_examples(self):
        assert Quantizer(20).max_error(0, 99) == 19
        assert Quantizer(1).max_error(-500, 500) == 0
        assert Quantizer(12, Fraction(1, 2)).max_error(0, 99) == 6

    def test_matches_brute_force(self):
        q = Quantizer(7, Fraction(1, 3))
        brute = max(q.pointwise_error(x) for x in range(-40, 41))
        assert q.max_error(-40, 40) == brute


class TestVectorizedAgainstScalar:
    @given(step=_steps, offset=_offsets, values=st.lists(_values, min_size=1, max_size=40))
    @settings(max_examples=150, deadline=None)
    def test_quantize_array_matches_scalar(self, step, offset, values):
        q = Quantizer(step, offset)
        arr = np.array(values, dtype=np.int64)
        expected = [q.quantize(v) for v in values]
        assert q.quantize_array(arr).tolist() == expected

    @given(step=_steps, offset=_offsets, values=st.lists(_values, min_size=1, max_size=40))
    @settings(max_examples=100, deadline=None)
    def test_away_mode_matches_scalar(self, step, offset, values):
        q = Quantizer(step, offset, AWAY_FROM_ZERO)
        arr = np.array(values, dtype=np.int64)
        assert q.quantize_array(arr).tolist() == [q.quantize(v) for v in values]

    def test_error_numerators_are_exact(self):
        q = Quantizer(Fraction(5, 2), Fraction(1, 3))
        x = np.arange(-50, 51, dtype=np.int64)
        nums, den = q.error_numerators(x)
        for xi, n in zip(x.tolist(), nums.tolist()):
            assert Fraction(int(n), den) == q.pointwise_error(xi)


class TestProperties:
    @given(step=_steps, offset=_offsets, x=_values)
    @settings(max_examples=200, deadline=None)
    def test_odd_symmetry(self, step, offset, x):
        q = Quantizer(step, offset)
        assert q.quantize(-x) == -q.quantize(x)
        assert q.pointwise_error(-x) == q.pointwise_error(x)

    @given(step=_steps, offset=_offsets, x=_values)
    @settings(max_examples=200, deadline=None)
    def test_reconstruction_is_a_fixed_point(self, step, offset, x):
        q = Quantizer(step, offset)
        level = q.quantize(x)
        recon = q.dequantize(level)
        assert q.quantize(recon) == level

    @given(step=_steps, x=st.integers(min_value=0, max_value=5000))
    @settings(max_examples=200, deadline=None)
    def test_offset_zero_truncates_toward_zero(self, step, x):
        q = Quantizer(step)
        assert q.dequantize(q.quantize(x)) <= x

    @given(step=_steps, offset=_offsets, x=_values)
    @settings(max_examples=200, deadline=None)
    def test_error_bound(self, step, offset, x):
        q = Quantizer(step, offset)
        step_f, offset_f = as_fraction(step), as_fraction(offset)
        bound = step_f * max(offset_f, 1 - offset_f)
        assert q.pointwise_error(x) <= bound


class TestQpToQstep:
    def test_anchor_values(self):
        assert qp_to_qstep(4) == 1.0
        assert qp_to_qstep(10) == 2.0
        assert qp_to_qstep(16) == 4.0

    def test_plus_six_doubles_exactly(self):
        for qp in range(0, 46):
            assert qp_to_qstep(qp + 6) == 2.0 * qp_to_qstep(qp)

    def test_strictly_increasing(self):
        steps = [qp_to_qstep(qp) for qp in range(52)]
        assert all(a < b for a, b in zip(steps, steps[1:]))

    def test_domain(self):
        with pytest.raises(ValueError):
            qp_to_qstep(-1)
        with pytest.raises(ValueError):
            qp_to_qstep(52)


class TestAsFraction:
    def test_floats_use_shortest_decimal(self):
        assert as_fraction(2.5) == Fraction(5, 2)
        assert as_fraction(0.1) == Fraction(1, 10)
        assert as_fraction(27.6) == Fraction(138, 5)

    def test_strings_and_ints(self):
        assert as_fraction("138/5") == Fraction(138, 5)
        assert as_fraction("27.6") == Fraction(138, 5)
        assert as_fraction(12) == Fraction(12)

    def test_rejects_junk(self):
        with pytest.raises(TypeError):
            as_fraction(None)
        with pytest.raises(ValueError):
            as_fraction("not-a-number")
