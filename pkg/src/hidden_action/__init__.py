"""Agent-based hidden-action model with bounded, heterogeneous memory."""

from hidden_action.model import (
    ContractViolation,
    ModelParams,
    PeriodRecord,
    agent_utility,
    compensation,
    outcome,
    principal_utility,
)
from hidden_action.benchmark import (
    CalibrationError,
    InfeasibleProblem,
    SecondBestSolution,
    calibrate_sigma,
    solve_second_best,
)
from hidden_action.learning import BoundedMemory
from hidden_action.stats import ScenarioResult
from hidden_action.engine import RunTrace, SimulationConfig, run_batch, run_episode

__version__ = "0.1.0"

__all__ = [
    "BoundedMemory",
    "CalibrationError",
    "ContractViolation",
    "InfeasibleProblem",
    "ModelParams",
    "PeriodRecord",
    "RunTrace",
    "ScenarioResult",
    "SecondBestSolution",
    "SimulationConfig",
    "agent_utility",
    "calibrate_sigma",
    "compensation",
    "outcome",
    "principal_utility",
    "run_batch",
    "run_episode",
    "solve_second_best",
]
