"""Numeric primitives: sigmoid, seeded RNG, Bernoulli sampling, array ops."""

import numpy as np
import pytest

from mndbn.core import (
    Rng,
    add,
    matmul,
    require_finite,
    rowsum,
    sample_bernoulli,
    scale,
    sigmoid,
    transpose,
)
from mndbn.errors import NumericError


class TestSigmoid:
    def test_zero_maps_to_half(self):
        assert sigmoid(0.0) == 0.5

    def test_large_positive_saturates(self):
        assert sigmoid(40.0) > 1.0 - 1e-15

    def test_symmetry(self):
        assert sigmoid(1.7) + sigmoid(-1.7) == 1.0

    def test_extreme_inputs_stay_finite_and_inside_unit_interval(self):
        z = np.array([-1e10, -710.0, 0.0, 710.0, 1e10])
        out = sigmoid(z)
        assert np.isfinite(out).all()
        assert (out > 0.0).all() and (out < 1.0).all()

    def test_elementwise_matches_scalar(self):
        z = Rng(0).normal((7,), std=3.0)
        out = sigmoid(z)
        for i in range(7):
            assert out[i] == sigmoid(z[i])


class TestRng:
    def test_same_seed_same_stream(self):
        a = Rng(123).uniform((100,))
        b = Rng(123).uniform((100,))
        assert (a == b).all()

    def test_different_seeds_differ(self):
        a = Rng(1).uniform((100,))
        b = Rng(2).uniform((100,))
        assert not (a == b).all()

    def test_spawn_streams_are_distinct_and_reproducible(self):
        root = Rng(9)
        s0 = root.spawn(0).uniform((50,))
        s1 = root.spawn(1).uniform((50,))
        again = Rng(9).spawn(0).uniform((50,))
        assert (s0 == again).all()
        assert not (s0 == s1).all()

    def test_block_draw_prefix_property(self):
        # One C-order block draw: the single-row block is a prefix of the
        # two-row block from the same seed.
        one = Rng(5).uniform((1, 3))
        two = Rng(5).uniform((2, 3))
        assert (one[0] == two[0]).all()

    def test_permutation_is_bijection(self):
        p = Rng(4).permutation(257)
        assert sorted(p.tolist()) == list(range(257))

    def test_integers_range(self):
        v = Rng(3).integers(2, 7, (1000,))
        assert v.min() >= 2 and v.max() <= 6


class TestSampleBernoulli:
    def test_p_zero_always_zero(self):
        assert (sample_bernoulli(np.zeros(100), Rng(0)) == 0.0).all()

    def test_p_one_always_one(self):
        assert (sample_bernoulli(np.ones(100), Rng(0)) == 1.0).all()

    def test_fair_coin_mean(self):
        draws = sample_bernoulli(np.full(10**6, 0.5), Rng(11))
        assert 0.497 <= draws.mean() <= 0.503

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            sample_bernoulli(np.array([0.5, 1.2]), Rng(0))
        with pytest.raises(ValueError):
            sample_bernoulli(-0.1, Rng(0))

    def test_matches_threshold_replay(self):
        p = Rng(6).uniform((4, 5))
        drawn = sample_bernoulli(p, Rng(7))
        u = Rng(7).uniform((4, 5))
        assert (drawn == (u < p).astype(float)).all()


class TestArrayOps:
    def test_matmul_example(self):
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        b = np.array([[5.0, 6.0], [7.0, 8.0]])
        assert (matmul(a, b) == np.array([[19.0, 22.0], [43.0, 50.0]])).all()

    def test_matmul_transpose_identity(self):
        a = Rng(0).normal((3, 4))
        b = Rng(1).normal((4, 2))
        lhs = transpose(matmul(a, b))
        rhs = matmul(transpose(b), transpose(a))
        assert np.allclose(lhs, rhs, rtol=0, atol=1e-12)

    def test_matmul_shape_mismatch(self):
        with pytest.raises(ValueError):
            matmul(np.ones((2, 3)), np.ones((2, 3)))

    def test_add_requires_equal_shapes(self):
        with pytest.raises(ValueError):
            add(np.ones((2, 3)), np.ones((3, 2)))
        assert (add(np.ones((2, 2)), np.ones((2, 2))) == 2.0).all()

    def test_scale_and_rowsum(self):
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert (scale(a, 2.0) == 2.0 * a).all()
        assert (rowsum(a) == np.array([3.0, 7.0])).all()

    def test_require_finite_raises_on_nan_and_inf(self):
        require_finite("ok", np.ones(3))
        with pytest.raises(NumericError):
            require_finite("bad", np.array([1.0, np.nan]))
        with pytest.raises(NumericError):
            require_finite("bad", np.array([np.inf]))
