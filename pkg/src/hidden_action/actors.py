"""Decision rules of the agent and the principal.

The agent maximizes his certainty-equivalent utility, with the environment
replaced by his belief. The principal, who cannot see the agent's belief,
prices each candidate effort with the cheapest premium on the grid that
induces it under her own belief and leaves the agent at least his
reservation utility, then keeps the candidate she expects to profit most
from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from hidden_action.model import ModelParams
from hidden_action.search import grid_golden_max


@dataclass(frozen=True)
class ContractOffer:
    incited_effort: float
    premium: float
    stalled: bool = False


def agent_choose_effort(premium: float, agent_belief: float, eta: float, effort_hi: float) -> float:
    if premium == 0.0 or effort_hi <= 0.0:
        return 0.0
    exp = math.exp
    k = eta * premium
    half_eta = 0.5 * eta

    # (1 - exp(-eta*p*(a + belief))) / eta - a^2/2, rescaled by eta (argmax unchanged)
    def u(a):
        return -exp(-k * (a + agent_belief)) - half_eta * a * a

    return grid_golden_max(u, 0.0, effort_hi)


def certainty_equivalent_utility(effort: float, premium: float, belief: float, eta: float) -> float:
    return -math.expm1(-eta * premium * (effort + belief)) / eta - effort * effort / 2.0


@lru_cache(maxsize=32)
def premium_grid(lo: float, hi: float, n: int) -> tuple[float, ...]:
    return tuple(np.linspace(lo, hi, n).tolist())


def _first_true(pred, lo: int, hi: int) -> int:
    """Smallest index in [lo, hi] where a monotone (False..True) predicate holds.

    Caller guarantees pred(hi) is True.
    """
    while lo < hi:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def _last_true(pred, lo: int, hi: int) -> int:
    """Largest index in [lo, hi] where a monotone (True..False) predicate holds.

    Caller guarantees pred(lo) is True.
    """
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if pred(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def _ic_index_range(target: float, belief: float, eta: float, grid: tuple[float, ...]) -> tuple[int, int] | None:
    """Index interval of grid premiums whose best response reaches ``target``.

    The agent's objective is strictly concave in effort, so his best response
    is at least ``target`` exactly when the marginal utility at ``target`` is
    non-negative: p * exp(-eta * p * (target + belief)) >= target.
    As a function of p that margin is increasing when target + belief <= 0
    and single-peaked at p = 1 / (eta * (target + belief)) otherwise, so the
    feasible premiums form one interval.
    """
    n = len(grid)
    if target <= 0.0:
        return 0, n - 1
    c = target + belief
    exp = math.exp

    def ok(i):
        p = grid[i]
        return p * exp(-eta * p * c) >= target

    if c <= 0.0:
        if not ok(n - 1):
            return None
        return _first_true(ok, 0, n - 1), n - 1

    p_peak = 1.0 / (eta * c)
    # last index on the rising side of the margin
    j = _last_true(lambda i: grid[i] <= p_peak, 0, n - 1) if grid[0] <= p_peak else -1
    rising_ok = j >= 0 and ok(j)
    falling_ok = j + 1 < n and ok(j + 1)
    if not (rising_ok or falling_ok):
        return None
    first = _first_true(ok, 0, j) if rising_ok else j + 1
    last = _last_true(ok, j + 1, n - 1) if falling_ok else j
    return first, last


def principal_premium_for(
    candidate_effort: float,
    principal_belief: float,
    params: ModelParams,
    effort_hi: float,
) -> float | None:
    """Cheapest grid premium inducing ``candidate_effort``; None if infeasible.

    Incentive compatibility is judged with the principal's own belief standing
    in for the agent's, up to one effort-grid cell of tolerance.
    """
    eta = params.eta
    u_bar = params.reservation_utility
    grid = premium_grid(params.premium_lo, params.premium_hi, params.premium_grid_n)
    tol = effort_hi / params.effort_grid_n
    target = candidate_effort - tol
    span = _ic_index_range(target, principal_belief, eta, grid)
    if span is None:
        return None
    first, last = span
    theta = principal_belief

    def participates(i: int) -> bool:
        p = grid[i]
        # the agent's optimum is worth at least any fixed effort, which often settles it cheaply
        if certainty_equivalent_utility(0.0, p, theta, eta) >= u_bar:
            return True
        if target > 0.0 and certainty_equivalent_utility(target, p, theta, eta) >= u_bar:
            return True
        a = agent_choose_effort(p, theta, eta, effort_hi)
        return certainty_equivalent_utility(a, p, theta, eta) >= u_bar

    if participates(first):
        return grid[first]

    # By the envelope theorem the agent's optimal utility moves with p like
    # (a(p) + belief); a(p) is nondecreasing while eta * p * (a + belief) < 1,
    # so the utility is U-shaped in p and its crossings can be bisected.
    if eta * grid[last] * (effort_hi + abs(theta)) >= 1.0:
        for i in range(first + 1, last + 1):
            if participates(i):
                return grid[i]
        return None

    # U-shape: failing at both ends means failing everywhere in between
    if not participates(last):
        return None

    def pay_rising(i: int) -> bool:
        return agent_choose_effort(grid[i], theta, eta, effort_hi) + theta >= 0.0

    start = first if pay_rising(first) else _first_true(pay_rising, first, last)
    return grid[_first_true(participates, start, last)]


def _draw_candidates(current: float, params: ModelParams, effort_hi: float, rng) -> list[float]:
    draws = [rng.uniform(0.0, 1.0) for _ in range(params.candidate_count)]
    if params.candidate_law == "uniform":
        return [min(u * effort_hi, effort_hi) for u in draws]
    width = params.local_width * effort_hi
    lo = max(0.0, current - width)
    hi = min(effort_hi, current + width)
    return [lo + u * (hi - lo) for u in draws]


def principal_search_step(
    current_incited: float,
    current_premium: float,
    principal_belief: float,
    params: ModelParams,
    effort_hi: float,
    rng,
) -> ContractOffer:
    """One hill-climbing step over the incumbent and freshly drawn efforts.

    Expected profit of a candidate is (1 - p) * (effort + belief). Ties go to
    the incumbent, then to the lower effort. When no candidate can be priced
    the incumbent contract is kept unchanged and the offer is flagged stalled.
    """
    candidates = [current_incited] + _draw_candidates(current_incited, params, effort_hi, rng)
    best = None
    best_key = None
    for i, effort in enumerate(candidates):
        p = principal_premium_for(effort, principal_belief, params, effort_hi)
        if p is None:
            continue
        key = ((1.0 - p) * (effort + principal_belief), i == 0, -effort)
        if best_key is None or key > best_key:
            best, best_key = (effort, p), key
    if best is None:
        return ContractOffer(current_incited, current_premium, stalled=True)
    return ContractOffer(best[0], best[1])
