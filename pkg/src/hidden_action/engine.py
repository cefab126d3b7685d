"""Episode loop and seeded batches of independent replications."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from hidden_action.actors import agent_choose_effort, principal_premium_for, principal_search_step
from hidden_action.benchmark import InfeasibleProblem, SecondBestSolution, calibrate_sigma
from hidden_action.learning import BoundedMemory, format_capacity, infer_theta_agent, infer_theta_principal, parse_capacity
from hidden_action.model import ModelParams, PeriodRecord, agent_utility, compensation, outcome, principal_utility
from hidden_action.stats import ScenarioResult

log = logging.getLogger(__name__)

INITIAL_RULES = ("uniform", "zero", "midpoint")
CHUNK_SIZE = 50


@dataclass(frozen=True)
class SimulationConfig:
    params: ModelParams = field(default_factory=ModelParams)
    periods: int = 20
    replications: int = 700
    memory_principal: int | None = None
    memory_agent: int | None = None
    master_seed: int = 0
    initial_rule: str = "uniform"
    label: str = ""

    def __post_init__(self):
        if self.periods < 1 or self.replications < 1:
            raise ValueError("periods and replications must be >= 1")
        if self.initial_rule not in INITIAL_RULES:
            raise ValueError(f"initial_rule must be one of {INITIAL_RULES}, got {self.initial_rule!r}")
        object.__setattr__(self, "memory_principal", parse_capacity(self.memory_principal))
        object.__setattr__(self, "memory_agent", parse_capacity(self.memory_agent))
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 unsigned bits")

    def to_dict(self) -> dict:
        """Flat key-value form, the same shape the config loader reads."""
        d = self.params.to_dict()
        d.update(
            periods=self.periods,
            replications=self.replications,
            memory_principal=format_capacity(self.memory_principal),
            memory_agent=format_capacity(self.memory_agent),
            seed=self.master_seed,
            initial_rule=self.initial_rule,
            label=self.label,
        )
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationConfig":
        param_keys = set(ModelParams.__dataclass_fields__)
        known = param_keys | {"periods", "replications", "memory_principal", "memory_agent", "seed", "initial_rule", "label"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        params = ModelParams(**{k: v for k, v in d.items() if k in param_keys})
        return cls(
            params=params,
            periods=int(d.get("periods", 20)),
            replications=int(d.get("replications", 700)),
            memory_principal=d.get("memory_principal"),
            memory_agent=d.get("memory_agent"),
            master_seed=int(d.get("seed", 0)),
            initial_rule=d.get("initial_rule", "uniform"),
            label=d.get("label", ""),
        )


@dataclass
class RunTrace:
    seed: int
    benchmark: SecondBestSolution
    periods: list[PeriodRecord]
    stalls: int = 0


def replication_seed(master_seed: int, rep: int) -> int:
    """64-bit seed for replication ``rep``; depends on (master_seed, rep) only."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(rep,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _initial_effort(rule: str, effort_hi: float, rng) -> float:
    if rule == "zero":
        return 0.0
    if rule == "midpoint":
        return 0.5 * effort_hi
    return min(rng.uniform(0.0, 1.0) * effort_hi, effort_hi)


def run_episode(config: SimulationConfig, benchmark: SecondBestSolution, seed: int) -> RunTrace:
    """Simulate one principal-agent relationship for ``config.periods`` periods.

    Random draws per replication stream, in order: the initial incited effort
    (uniform rule only), then per period one standard normal for the
    environment followed by ``candidate_count`` uniforms for the search.
    The search after the last period is skipped.
    """
    params = config.params
    eta = params.eta
    sigma = benchmark.sigma_used
    a_hi = benchmark.a_star
    rng = np.random.Generator(np.random.PCG64(seed))

    mem_p = BoundedMemory(config.memory_principal, prior=params.initial_belief)
    mem_a = BoundedMemory(config.memory_agent, prior=params.initial_belief)

    belief_p = mem_p.belief()
    incited = _initial_effort(config.initial_rule, a_hi, rng)
    premium = principal_premium_for(incited, belief_p, params, a_hi)
    if premium is None:
        raise InfeasibleProblem(f"no premium induces the initial effort {incited!r}")

    records = []
    stalls = 0
    for t in range(1, config.periods + 1):
        belief_a = mem_a.belief()
        effort = agent_choose_effort(premium, belief_a, eta, a_hi)
        theta = params.theta_mean + sigma * rng.standard_normal()
        x = outcome(effort, theta)
        s = compensation(x, premium)
        records.append(
            PeriodRecord(
                t=t,
                incited_effort=incited,
                premium=premium,
                exerted_effort=effort,
                theta_realized=theta,
                outcome=x,
                compensation=s,
                principal_utility=principal_utility(x, premium),
                agent_utility=agent_utility(s, effort, eta),
                principal_belief=belief_p,
                agent_belief=belief_a,
            )
        )
        mem_p.push(infer_theta_principal(x, incited))
        mem_a.push(infer_theta_agent(x, effort))
        if t == config.periods:
            break
        belief_p = mem_p.belief()
        offer = principal_search_step(incited, premium, belief_p, params, a_hi, rng)
        stalls += offer.stalled
        incited, premium = offer.incited_effort, offer.premium
    return RunTrace(seed=seed, benchmark=benchmark, periods=records, stalls=stalls)


def _run_chunk(args):
    config, benchmark, reps, keep_traces = args
    out = []
    for r in reps:
        trace = run_episode(config, benchmark, replication_seed(config.master_seed, r))
        out.append(trace if keep_traces else ([p.exerted_effort for p in trace.periods], trace.stalls))
    return out


def worker_count() -> int:
    raw = os.environ.get("SIM_THREADS", "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError("SIM_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def run_batch(
    config: SimulationConfig,
    keep_traces: bool = False,
    reps: list[int] | None = None,
    alpha: float = 0.01,
) -> ScenarioResult:
    """Run every replication of a scenario and reduce to a ScenarioResult.

    Replications are cut into fixed chunks that may run in worker processes
    (``SIM_THREADS``); each lands in its own row slot, so the result does not
    depend on the worker count or on execution order. ``reps`` overrides the
    order in which replication indices are executed.
    """
    sigma, benchmark = calibrate_sigma(config.params)
    order = list(range(config.replications)) if reps is None else list(reps)
    if sorted(order) != list(range(config.replications)):
        raise ValueError("reps must be a permutation of range(replications)")
    chunks = [order[i : i + CHUNK_SIZE] for i in range(0, len(order), CHUNK_SIZE)]
    jobs = [(config, benchmark, chunk, keep_traces) for chunk in chunks]

    workers = min(worker_count(), len(chunks))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, jobs))
    else:
        results = [_run_chunk(job) for job in jobs]

    efforts = np.empty((config.replications, config.periods))
    stalls = np.zeros(config.replications, dtype=int)
    traces: list[RunTrace | None] = [None] * config.replications if keep_traces else None
    for chunk, chunk_out in zip(chunks, results):
        for r, item in zip(chunk, chunk_out):
            if keep_traces:
                traces[r] = item
                efforts[r] = [p.exerted_effort for p in item.periods]
                stalls[r] = item.stalls
            else:
                efforts[r], stalls[r] = item
    log.debug("batch %s: sigma=%.6g a*=%.6g stalls=%d", config.label, sigma, benchmark.a_star, stalls.sum())
    return ScenarioResult.from_efforts(
        label=config.label,
        efforts=efforts,
        benchmark=benchmark,
        alpha=alpha,
        stalls=stalls,
        traces=traces,
    )


def with_overrides(config: SimulationConfig, **kw) -> SimulationConfig:
    """Copy of ``config`` with top-level or ModelParams fields replaced."""
    param_keys = set(ModelParams.__dataclass_fields__)
    pkw = {k: v for k, v in kw.items() if k in param_keys}
    ckw = {k: v for k, v in kw.items() if k not in param_keys}
    if pkw:
        ckw["params"] = replace(config.params, **pkw)
    return replace(config, **ckw)
