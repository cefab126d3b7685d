"""Domain types and the pure per-period functions of the agentized model.

Outcome is additive in effort and environment, the agent receives a linear
share of outcome, the principal is risk neutral and the agent has
exponential (CARA) utility of pay with quadratic effort cost.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass


class ContractViolation(ValueError):
    """An argument lies outside the domain of a model function."""


SIGMA_MODES = ("fixed-point", "one-shot")
CANDIDATE_LAWS = ("uniform", "local")


@dataclass(frozen=True)
class ModelParams:
    """Exogenous constants of one problem instance."""

    eta: float = 0.5
    sigma_factor: float = 0.05
    theta_mean: float = 0.0
    premium_lo: float = 0.0
    premium_hi: float = 1.0
    reservation_utility: float = 0.0
    premium_grid_n: int = 10_001
    candidate_count: int = 2
    # IC tolerance is effort_hi / effort_grid_n, i.e. one effort-grid cell
    effort_grid_n: int = 10_000
    sigma_mode: str = "fixed-point"
    candidate_law: str = "uniform"
    local_width: float = 0.1
    initial_belief: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.premium_lo < self.premium_hi <= 1.0:
            raise ContractViolation(
                f"premium bounds must satisfy 0 <= lo < hi <= 1, got [{self.premium_lo}, {self.premium_hi}]"
            )
        if not self.eta > 0:
            raise ContractViolation(f"eta must be positive, got {self.eta}")
        if not self.sigma_factor >= 0:
            raise ContractViolation(f"sigma_factor must be >= 0, got {self.sigma_factor}")
        if self.candidate_count < 1:
            raise ContractViolation("candidate_count must be >= 1")
        if self.premium_grid_n < 2 or self.effort_grid_n < 1:
            raise ContractViolation("grid sizes too small")
        if self.sigma_mode not in SIGMA_MODES:
            raise ContractViolation(f"sigma_mode must be one of {SIGMA_MODES}")
        if self.candidate_law not in CANDIDATE_LAWS:
            raise ContractViolation(f"candidate_law must be one of {CANDIDATE_LAWS}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PeriodRecord:
    t: int
    incited_effort: float
    premium: float
    exerted_effort: float
    theta_realized: float
    outcome: float
    compensation: float
    principal_utility: float
    agent_utility: float
    principal_belief: float
    agent_belief: float


def _check_premium(premium: float) -> None:
    if not 0.0 <= premium <= 1.0:
        raise ContractViolation(f"premium must lie in [0, 1], got {premium}")


def outcome(effort: float, theta: float) -> float:
    return effort + theta


def compensation(outcome: float, premium: float) -> float:
    _check_premium(premium)
    return outcome * premium


def principal_utility(outcome: float, premium: float) -> float:
    """Outcome left to the principal after paying the agent's share."""
    return outcome - compensation(outcome, premium)


def agent_utility(compensation: float, effort: float, eta: float) -> float:
    """CARA utility of pay minus quadratic disutility of effort.

    Negative pay is allowed and evaluated by the same formula.
    """
    return -math.expm1(-eta * compensation) / eta - effort * effort / 2.0
