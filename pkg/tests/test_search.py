import math

import pytest

from hidden_action.search import golden_max, grid_golden_max


def test_golden_quadratic():
    assert golden_max(lambda x: -(x - 0.3) ** 2, 0, 1) == pytest.approx(0.3, abs=1e-7)


@pytest.mark.parametrize("peak", [0.0, 1.0])
def test_boundary_optimum(peak):
    x = grid_golden_max(lambda x: -abs(x - peak), 0.0, 1.0)
    assert x == pytest.approx(peak, abs=1e-9)


def test_ties_prefer_smaller_argument():
    assert grid_golden_max(lambda x: 0.0, 0.0, 1.0) == 0.0


def test_non_unimodal_falls_back_to_fine_grid():
    f = lambda x: math.cos(12 * x) + 0.2 * x  # several local maxima
    x = grid_golden_max(f, 0.0, 2.0)
    xs = [i * 2.0 / 200_000 for i in range(200_001)]
    best = max(xs, key=f)
    assert f(x) == pytest.approx(f(best), abs=1e-6)


def test_degenerate_interval():
    assert grid_golden_max(lambda x: x, 0.4, 0.4) == 0.4
