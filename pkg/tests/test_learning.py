import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hidden_action.learning import BoundedMemory, infer_theta_agent, infer_theta_principal, parse_capacity
from hidden_action.model import outcome

finite = st.floats(-10, 10, allow_nan=False)


def test_inference_examples():
    assert infer_theta_principal(0.6, 0.5) == pytest.approx(0.1, abs=1e-15)
    assert infer_theta_principal(0.42, 0.42) == 0.0
    assert infer_theta_agent(0.6, 0.5) == pytest.approx(0.1, abs=1e-15)
    assert infer_theta_agent(-0.2, 0.3) == -0.5


@given(st.floats(0, 2), finite, st.floats(0, 2))
def test_principal_bias_is_effort_gap(a, theta, a_incited):
    x = outcome(a, theta)
    gap = infer_theta_principal(x, a_incited) - infer_theta_agent(x, a)
    assert gap == pytest.approx(a - a_incited, abs=1e-12)


@given(st.floats(0, 2), st.floats(-1, 1))
def test_agent_inference_inverts_outcome(a, theta):
    # exact whenever the float sum is exact; otherwise within one rounding
    assert infer_theta_agent(outcome(a, theta), a) == pytest.approx(theta, abs=4e-16)


def test_push_fifo_examples():
    m = BoundedMemory(1)
    m.push(0.2).push(0.5)
    assert m.buffer == [0.5]

    m = BoundedMemory(5).extend([1, 2, 3, 4, 5, 6])
    assert m.buffer == [2, 3, 4, 5, 6]
    assert m.count_seen == 6

    m = BoundedMemory(None).extend(range(100))
    assert m.buffer == list(range(100))


def test_belief_examples():
    assert BoundedMemory(None).extend([0.1, 0.3]).belief() == pytest.approx(0.2, abs=1e-16)
    assert BoundedMemory(3).belief() == 0.0
    assert BoundedMemory(3, prior=0.7).belief() == 0.7
    v = [0.3, -1.2, 0.8, 2.0, 0.1, -0.4, 0.9, 1.5]
    assert BoundedMemory(5).extend(v).belief() == pytest.approx(np.mean(v[3:]), abs=1e-15)


@pytest.mark.parametrize("raw,expected", [("inf", None), (None, None), (math.inf, None), (5, 5), ("1", 1), (5.0, 5)])
def test_parse_capacity(raw, expected):
    assert parse_capacity(raw) == expected


@pytest.mark.parametrize("raw", [0, -1, 2.5])
def test_parse_capacity_rejects(raw):
    with pytest.raises(ValueError):
        parse_capacity(raw)


@given(st.one_of(st.none(), st.integers(1, 8)), st.lists(finite, max_size=40))
def test_window_law(capacity, values):
    m = BoundedMemory(capacity)
    for k, v in enumerate(values, start=1):
        m.push(v)
        window = values[k - min(k, capacity or k) : k]
        assert len(m) <= (capacity or k)
        assert m.buffer == window
        assert m.belief() == math.fsum(window) / len(window)


@given(st.integers(1, 6), finite)
def test_constant_stream(capacity, c):
    m = BoundedMemory(capacity)
    for _ in range(10):
        m.push(c)
        assert m.belief() == pytest.approx(c, rel=1e-15, abs=1e-300)


def test_unbounded_mean_is_correctly_rounded():
    # catastrophic cancellation defeats a naive running sum
    vals = [1e16, 1.0, -1e16, 1.0, 3.0]
    m = BoundedMemory(None).extend(vals)
    exact = Fraction(sum(Fraction(v) for v in vals)) / len(vals)
    assert m.belief() == float(exact)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_law_of_large_numbers(seed):
    sigma = 0.3
    rng = np.random.default_rng(seed)
    m = BoundedMemory(None).extend(rng.normal(0.0, sigma, 100_000).tolist())
    assert abs(m.belief()) < 5 * sigma / math.sqrt(100_000)
