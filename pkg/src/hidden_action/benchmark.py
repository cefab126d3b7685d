"""Numerical second-best solution of the standard (one-shot) hidden-action model.

The agent best-responds to the expected CARA utility under Normal noise,
which has the closed form

    E[U_A] = (1 - exp(-eta*p*(a + mu) + eta**2 * p**2 * sigma**2 / 2)) / eta - a**2 / 2

and the principal picks the premium maximizing (1 - p) * E[x] subject to the
agent's participation. Incentive compatibility is enforced by solving the
agent's problem exactly rather than through its first-order condition.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from hidden_action.model import ModelParams
from hidden_action.search import INV_PHI, golden_max, grid_golden_max

SIGMA_TOL = 1e-6
MAX_CALIBRATION_ITER = 100


class InfeasibleProblem(RuntimeError):
    """No premium on the grid satisfies the participation constraint."""


class CalibrationError(RuntimeError):
    def __init__(self, message: str, iterates: list[float]):
        super().__init__(message)
        self.iterates = iterates


@dataclass(frozen=True)
class SecondBestSolution:
    a_star: float
    p_star: float
    x_star: float
    sigma_used: float
    principal_eu: float
    agent_eu: float

    def to_dict(self) -> dict:
        return asdict(self)


def expected_agent_utility(effort: float, premium: float, sigma: float, eta: float, theta_mean: float = 0.0) -> float:
    exponent = -eta * premium * (effort + theta_mean) + 0.5 * (eta * premium * sigma) ** 2
    return -math.expm1(exponent) / eta - effort * effort / 2.0


def _effort_ceiling(sigma: float, eta: float, theta_mean: float = 0.0) -> float:
    # the first-order condition a = p*exp(-eta*p*(a+mu) + (eta*p*sigma)^2/2) bounds a for p <= 1
    return max(1.0, math.exp(0.5 * (eta * sigma) ** 2 - eta * min(theta_mean, 0.0)))


def agent_best_response_expected(
    premium: float, sigma: float, eta: float, effort_hi: float, theta_mean: float = 0.0
) -> float:
    if premium == 0.0 or effort_hi <= 0.0:
        return 0.0
    return grid_golden_max(
        lambda a: expected_agent_utility(a, premium, sigma, eta, theta_mean), 0.0, effort_hi
    )


def _best_response_grid(premiums: np.ndarray, sigma: float, eta: float, effort_hi: float, theta_mean: float) -> np.ndarray:
    """Golden section run in lockstep over an array of premiums.

    The expected utility is strictly concave in effort, so no bracketing is
    needed. Iterates until the interval is below 1e-13.
    """
    shift = 0.5 * (eta * premiums * sigma) ** 2

    def f(a):
        return -np.expm1(-eta * premiums * (a + theta_mean) + shift) / eta - a * a / 2.0

    lo = np.zeros_like(premiums)
    hi = np.full_like(premiums, effort_hi)
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    n_iter = int(math.ceil(math.log(1e-13 / effort_hi) / math.log(INV_PHI))) if effort_hi > 0 else 0
    for _ in range(n_iter):
        left = f1 >= f2
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        x2_new = np.where(left, x1, lo + INV_PHI * (hi - lo))
        x1_new = np.where(left, hi - INV_PHI * (hi - lo), x2)
        f1_new = np.where(left, f(x1_new), f2)
        f2 = np.where(left, f1, f(x2_new))
        x1, x2, f1 = x1_new, x2_new, f1_new
    a = np.where(f1 >= f2, x1, x2)
    a = np.where(premiums == 0.0, 0.0, a)
    return a


def _solution(p: float, a: float, sigma: float, params: ModelParams) -> SecondBestSolution:
    x = a + params.theta_mean
    return SecondBestSolution(
        a_star=a,
        p_star=p,
        x_star=x,
        sigma_used=sigma,
        principal_eu=(1.0 - p) * x,
        agent_eu=expected_agent_utility(a, p, sigma, params.eta, params.theta_mean),
    )


@lru_cache(maxsize=256)
def solve_second_best(params: ModelParams, sigma: float, effort_hi: float | None = None) -> SecondBestSolution:
    """Grid search over the premium with a golden-section polish.

    Ties on the grid go to the lowest premium.
    """
    eta, mu, u_bar = params.eta, params.theta_mean, params.reservation_utility
    if effort_hi is None:
        effort_hi = _effort_ceiling(sigma, eta, mu)
    premiums = np.linspace(params.premium_lo, params.premium_hi, params.premium_grid_n)
    efforts = _best_response_grid(premiums, sigma, eta, effort_hi, mu)
    eu_agent = -np.expm1(-eta * premiums * (efforts + mu) + 0.5 * (eta * premiums * sigma) ** 2) / eta - efforts**2 / 2.0
    feasible = eu_agent >= u_bar
    if not feasible.any():
        raise InfeasibleProblem(
            f"no premium in [{params.premium_lo}, {params.premium_hi}] meets reservation utility {u_bar}"
        )
    objective = np.where(feasible, (1.0 - premiums) * (efforts + mu), -np.inf)
    k = int(np.argmax(objective))

    def value(p: float) -> float:
        a = agent_best_response_expected(p, sigma, eta, effort_hi, mu)
        if expected_agent_utility(a, p, sigma, eta, mu) < u_bar:
            return -math.inf
        return (1.0 - p) * (a + mu)

    best_p = float(premiums[k])
    best_a = agent_best_response_expected(best_p, sigma, eta, effort_hi, mu)
    best_v = value(best_p)
    lo = float(premiums[max(k - 1, 0)])
    hi = float(premiums[min(k + 1, len(premiums) - 1)])
    if hi > lo:
        p = golden_max(value, lo, hi, tol=1e-12)
        v = value(p)
        if v > best_v:
            best_p, best_v = p, v
            best_a = agent_best_response_expected(p, sigma, eta, effort_hi, mu)
    if best_v == -math.inf:
        raise InfeasibleProblem("participation fails at every candidate premium")
    return _solution(best_p, best_a, sigma, params)


@lru_cache(maxsize=64)
def calibrate_sigma(params: ModelParams) -> tuple[float, SecondBestSolution]:
    """Resolve sigma = sigma_factor * x*(sigma).

    In ``fixed-point`` mode the map is iterated from sigma = 0 until two
    iterates agree to 1e-6. In ``one-shot`` mode sigma is scaled from the
    noiseless benchmark and the benchmark is then re-solved under it.
    """
    factor = params.sigma_factor
    if params.sigma_mode == "one-shot":
        sigma = factor * solve_second_best(params, 0.0).x_star
        return sigma, solve_second_best(params, sigma)

    sigma = 0.0
    iterates = [sigma]
    for _ in range(MAX_CALIBRATION_ITER):
        sol = solve_second_best(params, sigma)
        nxt = factor * sol.x_star
        iterates.append(nxt)
        if abs(nxt - sigma) < SIGMA_TOL:
            return sigma, sol
        sigma = nxt
    raise CalibrationError(
        f"sigma iteration did not converge in {MAX_CALIBRATION_ITER} steps; last iterates {iterates[-2]}, {iterates[-1]}",
        iterates,
    )
