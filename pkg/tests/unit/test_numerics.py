import math

import numpy as np
import pytest

from src.utils.numerics import central_difference, richardson_extrapolate, taylor_derivatives
from src.utils.seeding import substream


class TestCentralDifference:

    @pytest.mark.parametrize("order", [1, 2, 3, 4])
    def test_exponential(self, order):
        assert central_difference(math.exp, 0.0, order, 1e-2) == pytest.approx(1.0, rel=1e-3)

    def test_cubic_third_derivative_is_exact(self):
        value = central_difference(lambda x: x ** 3, 0.7, 3, 0.1)
        assert value == pytest.approx(6.0, rel=1e-10)

    def test_invalid_order(self):
        with pytest.raises(ValueError):
            central_difference(math.exp, 0.0, 5, 1e-2)

    def test_invalid_step(self):
        with pytest.raises(ValueError):
            central_difference(math.exp, 0.0, 1, 0.0)


class TestRichardson:

    def test_improves_second_derivative(self):
        steps = (0.1, 0.05, 0.025)
        estimates = [central_difference(math.exp, 0.0, 2, h) for h in steps]
        best = richardson_extrapolate(estimates, p=2)
        assert abs(best - 1.0) < abs(estimates[-1] - 1.0) / 100

    def test_removes_quadratic_error(self):
        # f(h) = 1 + h^2: dois niveis bastam
        assert richardson_extrapolate([1.0 + 0.04, 1.0 + 0.01], p=2) == pytest.approx(1.0)

    def test_needs_two_values(self):
        with pytest.raises(ValueError):
            richardson_extrapolate([1.0], p=2)


class TestTaylorDerivatives:

    def test_exponential(self):
        derivs = taylor_derivatives(np.exp, max_order=4, radius=0.5, n_points=32)
        np.testing.assert_allclose(derivs, np.ones(4), rtol=1e-12)

    def test_polynomial(self):
        derivs = taylor_derivatives(lambda z: 2 * z + 3 * z ** 2 - z ** 4, 4, 1.0, 16)
        np.testing.assert_allclose(derivs, [2.0, 6.0, 0.0, -24.0], atol=1e-12)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            taylor_derivatives(np.exp, max_order=4, radius=0.1, n_points=8)


class TestSubstream:

    def test_deterministic(self):
        assert substream(3, 1, 2).random() == substream(3, 1, 2).random()

    def test_keys_separate_streams(self):
        assert substream(3, 1).random() != substream(3, 2).random()

    def test_negative_key_rejected(self):
        with pytest.raises(ValueError):
            substream(3, -1)
