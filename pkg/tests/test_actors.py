import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hidden_action.actors import (
    ContractOffer,
    agent_choose_effort,
    certainty_equivalent_utility,
    premium_grid,
    principal_premium_for,
    principal_search_step,
)
from hidden_action.benchmark import solve_second_best
from hidden_action.model import ModelParams
from oracles import foc_best_response

PARAMS = ModelParams(eta=0.5)
BENCH = solve_second_best(PARAMS, 0.0)
A_STAR = BENCH.a_star
COARSE = replace(PARAMS, premium_grid_n=201)


class ScriptedRng:
    """Stands in for a numpy Generator; returns preset uniforms in order."""

    def __init__(self, uniforms):
        self._u = list(uniforms)

    def uniform(self, lo=0.0, hi=1.0):
        return lo + (hi - lo) * self._u.pop(0)


def scan_premium(effort, belief, params, effort_hi):
    """Literal definition: first grid premium meeting IC and participation."""
    tol = effort_hi / params.effort_grid_n
    for p in premium_grid(params.premium_lo, params.premium_hi, params.premium_grid_n):
        a = agent_choose_effort(p, belief, params.eta, effort_hi)
        if a >= effort - tol and certainty_equivalent_utility(a, p, belief, params.eta) >= params.reservation_utility:
            return p
    return None


def test_no_pay_no_effort():
    for belief in (-0.3, 0.0, 0.4):
        assert agent_choose_effort(0.0, belief, 0.5, 1.0) == 0.0


@pytest.mark.parametrize("p", [0.05, 0.2, 0.45, 0.7, 1.0])
def test_effort_matches_foc(p):
    assert agent_choose_effort(p, 0.0, 0.5, 2.0) == pytest.approx(foc_best_response(p, 0.0, 0.5, hi=2.0), abs=1e-6)


@pytest.mark.parametrize("belief", [-0.2, 0.1, 0.3])
def test_effort_matches_foc_with_belief(belief):
    assert agent_choose_effort(0.6, belief, 0.5, 2.0) == pytest.approx(
        foc_best_response(0.6, belief, 0.5, hi=2.0), abs=1e-6
    )


def test_effort_capped():
    assert agent_choose_effort(1.0, 0.0, 0.5, 0.1) == pytest.approx(0.1, abs=1e-9)


def test_higher_belief_lowers_effort():
    for p in np.linspace(0.05, 1.0, 20):
        for b in np.linspace(-0.5, 0.5, 11):
            assert agent_choose_effort(p, b + 0.5, 0.5, 2.0) <= agent_choose_effort(p, b, 0.5, 2.0) + 1e-9


def test_zero_effort_costs_nothing():
    assert principal_premium_for(0.0, 0.0, PARAMS, A_STAR) == PARAMS.premium_lo
    assert principal_premium_for(0.0, 0.2, PARAMS, A_STAR) == PARAMS.premium_lo


def test_premium_nondecreasing_in_effort():
    prev = -1.0
    for a in np.linspace(0.0, A_STAR, 60):
        p = principal_premium_for(float(a), 0.0, PARAMS, A_STAR)
        assert p is not None and p >= prev
        prev = p


def test_round_trip():
    tol = A_STAR / PARAMS.effort_grid_n
    for a in np.linspace(0.0, A_STAR, 25):
        p = principal_premium_for(float(a), 0.0, PARAMS, A_STAR)
        assert agent_choose_effort(p, 0.0, PARAMS.eta, A_STAR) >= a - tol


def test_premium_is_on_grid_and_minimal():
    grid = premium_grid(0.0, 1.0, PARAMS.premium_grid_n)
    tol = A_STAR / PARAMS.effort_grid_n
    a = 0.3
    p = principal_premium_for(a, 0.05, PARAMS, A_STAR)
    k = grid.index(p)
    assert agent_choose_effort(grid[k - 1], 0.05, 0.5, A_STAR) < a - tol


@settings(max_examples=60, deadline=None)
@given(
    st.floats(0.0, 1.0),
    st.floats(-0.6, 0.6),
    st.floats(0.1, 2.0),
    st.sampled_from([0.0, 0.02, 0.08, 0.2]),
)
def test_premium_matches_linear_scan(frac, belief, eta, u_bar):
    params = replace(COARSE, eta=eta, reservation_utility=u_bar)
    effort = frac * A_STAR
    assert principal_premium_for(effort, belief, params, A_STAR) == scan_premium(effort, belief, params, A_STAR)


def test_infeasible_effort():
    # a high positive belief makes expected pay large and kills the incentive
    assert principal_premium_for(A_STAR, 50.0, PARAMS, A_STAR) is None


def test_search_keeps_incumbent_on_tie():
    p = principal_premium_for(0.3, 0.0, PARAMS, A_STAR)
    offer = principal_search_step(0.3, p, 0.0, PARAMS, A_STAR, ScriptedRng([0.3 / A_STAR, 0.3 / A_STAR]))
    assert offer == ContractOffer(0.3, p)


def test_search_picks_dominant_candidate():
    p0 = principal_premium_for(0.1, 0.0, PARAMS, A_STAR)
    offer = principal_search_step(0.1, p0, 0.0, PARAMS, A_STAR, ScriptedRng([0.2, 0.999]))
    best = 0.999 * A_STAR
    assert offer.incited_effort == best
    assert offer.premium == principal_premium_for(best, 0.0, PARAMS, A_STAR)
    assert not offer.stalled


def test_search_rejects_worse_candidates():
    p0 = principal_premium_for(A_STAR, 0.0, PARAMS, A_STAR)
    offer = principal_search_step(A_STAR, p0, 0.0, PARAMS, A_STAR, ScriptedRng([0.1, 0.3]))
    assert offer == ContractOffer(A_STAR, p0)


def test_search_invariant_to_candidate_order():
    p0 = principal_premium_for(0.2, 0.0, PARAMS, A_STAR)
    a = principal_search_step(0.2, p0, 0.0, PARAMS, A_STAR, ScriptedRng([0.5, 0.9]))
    b = principal_search_step(0.2, p0, 0.0, PARAMS, A_STAR, ScriptedRng([0.9, 0.5]))
    assert a == b


def test_search_stalls_when_nothing_is_priceable():
    offer = principal_search_step(0.3, 0.42, 50.0, PARAMS, A_STAR, ScriptedRng([0.5, 0.9]))
    assert offer == ContractOffer(0.3, 0.42, stalled=True)


def test_degenerate_action_space():
    rng = np.random.default_rng(3)
    for _ in range(20):
        offer = principal_search_step(0.0, 0.0, 0.0, PARAMS, 0.0, rng)
        assert offer.incited_effort == 0.0 and offer.premium == PARAMS.premium_lo


def test_offer_bounds():
    rng = np.random.default_rng(11)
    incited, premium = 0.1, principal_premium_for(0.1, 0.0, PARAMS, A_STAR)
    for belief in rng.normal(0.0, 0.2, 200):
        offer = principal_search_step(incited, premium, float(belief), PARAMS, A_STAR, rng)
        assert 0.0 <= offer.incited_effort <= A_STAR
        assert PARAMS.premium_lo <= offer.premium <= PARAMS.premium_hi
        incited, premium = offer.incited_effort, offer.premium


def test_local_candidate_law_stays_near_incumbent():
    params = replace(PARAMS, candidate_law="local")
    p0 = principal_premium_for(0.2, 0.0, params, A_STAR)
    rng = np.random.default_rng(5)
    for _ in range(50):
        offer = principal_search_step(0.2, p0, 0.0, params, A_STAR, rng)
        assert abs(offer.incited_effort - 0.2) <= params.local_width * A_STAR + 1e-12


def test_zero_noise_hill_climb_reaches_benchmark():
    hits = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        incited = rng.uniform() * A_STAR
        premium = principal_premium_for(incited, 0.0, PARAMS, A_STAR)
        for _ in range(500):
            offer = principal_search_step(incited, premium, 0.0, PARAMS, A_STAR, rng)
            incited, premium = offer.incited_effort, offer.premium
        hits += abs(incited - A_STAR) < 0.02
    assert hits >= 95


def test_shared_knowledge_consistency():
    tol = A_STAR / PARAMS.effort_grid_n
    for a in np.linspace(0.0, A_STAR, 30):
        p = principal_premium_for(float(a), 0.0, PARAMS, A_STAR)
        assert abs(agent_choose_effort(p, 0.0, 0.5, A_STAR) - a) <= 2 * tol + 1e-4
