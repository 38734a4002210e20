"""Integer block transforms: matrix structure, clipping, roundtrip accuracy."""

import numpy as np
import pytest

from cpdtlab.transform import (
    TRANSFORM_SIZES,
    forward_transform,
    inverse_transform,
    orthonormal_gain,
    residual_range,
    roundtrip_error_stats,
    transform_matrix,
)


class TestMatrices:
    def test_t4_rows(self):
        t4 = transform_matrix(4)
        expected = np.array(
            [
                [64, 64, 64, 64],
                [83, 36, -36, -83],
                [64, -64, -64, 64],
                [36, -83, 83, -36],
            ]
        )
        assert np.array_equal(t4, expected)

    def test_t4_near_orthogonality(self):
        t4 = transform_matrix(4).astype(np.int64)
        gram = t4 @ t4.T
        off = gram - np.diag(np.diag(gram))
        assert np.all(off == 0)
        assert np.diag(gram).tolist() == [16384, 16370, 16384, 16370]

    def test_t8_near_orthogonality(self):
        t8 = transform_matrix(8).astype(np.int64)
        gram = t8 @ t8.T
        off = gram - np.diag(np.diag(gram))
        assert np.abs(off).max() <= 50
        diag = np.diag(gram)
        assert diag.max() == 32768
        assert diag.min() == 32740

    def test_matrix_is_a_copy(self):
        t4 = transform_matrix(4)
        t4[0, 0] = 0
        assert transform_matrix(4)[0, 0] == 64

    def test_gain(self):
        assert orthonormal_gain(4) == 32.0
        assert orthonormal_gain(8) == 16.0

    def test_unsupported_size(self):
        for fn in (transform_matrix, orthonormal_gain):
            with pytest.raises(ValueError):
                fn(16)


class TestForward:
    @pytest.mark.parametrize("size", TRANSFORM_SIZES)
    @pytest.mark.parametrize("value", [-128, 1, 100, 127])
    def test_constant_block_concentrates_in_dc(self, size, value):
        block = np.full((size, size), value, dtype=np.int64)
        coeff = forward_transform(block)
        assert coeff[0, 0] == 128 * value
        ac = coeff.copy()
        ac[0, 0] = 0
        assert np.all(ac == 0)

    @pytest.mark.parametrize("size", TRANSFORM_SIZES)
    def test_zero_block(self, size):
        block = np.zeros((size, size), dtype=np.int64)
        assert np.all(forward_transform(block) == 0)
        assert np.all(inverse_transform(block) == 0)

    def test_clipping_engages_at_extreme_input(self):
        # A constant block at the int16 ceiling would map its DC to
        # 128 * 32767 without clipping; each stage saturates at 32767.
        block = np.full((4, 4), 32767, dtype=np.int64)
        coeff = forward_transform(block)
        assert coeff[0, 0] == 32767
        assert coeff.max() <= 32767 and coeff.min() >= -32768

    def test_rejects_bad_blocks(self):
        with pytest.raises(ValueError):
            forward_transform(np.zeros((4, 8), dtype=np.int64))
        with pytest.raises(ValueError):
            forward_transform(np.zeros((5, 5), dtype=np.int64))
        with pytest.raises(TypeError):
            forward_transform(np.zeros((4, 4), dtype=np.float64))


class TestInverse:
    @pytest.mark.parametrize("size", TRANSFORM_SIZES)
    def test_output_stays_in_residual_range(self, size):
        lo, hi = residual_range(8)
        rng = np.random.default_rng(7)
        coeff = rng.integers(-32768, 32768, size=(200, size, size), dtype=np.int64)
        recon = inverse_transform(coeff)
        assert recon.min() >= lo
        assert recon.max() <= hi

    def test_residual_range_values(self):
        assert residual_range(8) == (-256, 255)
        assert residual_range(10) == (-1024, 1023)


class TestRoundtrip:
    def test_4x4_is_exact_on_residual_inputs(self):
        rng = np.random.default_rng(99)
        blocks = rng.integers(-255, 256, size=(20000, 4, 4), dtype=np.int64)
        recon = inverse_transform(forward_transform(blocks))
        assert np.array_equal(recon, blocks)

    def test_8x8_is_near_lossless(self):
        rng = np.random.default_rng(99)
        blocks = rng.integers(-255, 256, size=(5000, 8, 8), dtype=np.int64)
        recon = inverse_transform(forward_transform(blocks))
        err = np.abs(recon - blocks)
        assert err.max() <= 2
        assert err.max() >= 1  # the chain is not exact at this size

    @pytest.mark.parametrize("size", TRANSFORM_SIZES)
    def test_batched_matches_per_block(self, size):
        rng = np.random.default_rng(11)
        blocks = rng.integers(-255, 256, size=(32, size, size), dtype=np.int64)
        batched = inverse_transform(forward_transform(blocks))
        for i in range(32):
            single = inverse_transform(forward_transform(blocks[i]))
            assert np.array_equal(batched[i], single)

    @pytest.mark.parametrize("size", TRANSFORM_SIZES)
    def test_approximate_linearity(self, size):
        # T(a) + T(b) vs T(a + b) after the full chain: rounding in each
        # stage breaks exact additivity by at most a couple of counts.
        rng = np.random.default_rng(42)
        a = rng.integers(-127, 128, size=(2500, size, size), dtype=np.int64)
        b = rng.integers(-127, 128, size=(2500, size, size), dtype=np.int64)
        f = lambda x: inverse_transform(forward_transform(x))
        discrepancy = np.abs(f(a + b) - (f(a) + f(b)))
        assert discrepancy.max() <= 2

    def test_double_roundtrip_error_bound(self):
        rng = np.random.default_rng(3)
        blocks = rng.integers(-255, 256, size=(3000, 8, 8), dtype=np.int64)
        f = lambda x: inverse_transform(forward_transform(x))
        once = np.abs(f(blocks) - blocks).max()
        twice = np.abs(f(f(blocks)) - blocks).max()
        assert twice <= 2 * once


class TestRoundtripErrorStats:
    def test_constant_blocks_are_exact(self):
        for size in TRANSFORM_SIZES:
            blocks = np.full((10, size, size), 100, dtype=np.int64)
            stats = roundtrip_error_stats(blocks)
            assert stats == {"max_abs": 0.0, "mean_abs": 0.0}

    def test_random_blocks_small_mean_error(self):
        rng = np.random.default_rng(21)
        blocks = rng.integers(-255, 256, size=(2000, 8, 8), dtype=np.int64)
        stats = roundtrip_error_stats(blocks)
        assert stats["max_abs"] <= 2.0
        assert stats["mean_abs"] < 0.5

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            roundtrip_error_stats(np.zeros((0, 4, 4), dtype=np.int64))
