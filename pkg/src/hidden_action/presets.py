"""The eight compiled-in experiment scenarios."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hidden_action.engine import SimulationConfig
from hidden_action.model import ModelParams

ENVIRONMENTS = {"stable": 0.05, "unstable": 0.45}
PRESET_ETA = 0.5
PRESET_PERIODS = 20
PRESET_REPLICATIONS = 700


@dataclass(frozen=True)
class ScenarioPreset:
    name: str
    regime: str  # which party has unbounded memory
    limited_memory: int
    environment: str

    @property
    def memory_principal(self) -> int | None:
        return None if self.regime == "principal-adv" else self.limited_memory

    @property
    def memory_agent(self) -> int | None:
        return None if self.regime == "agent-adv" else self.limited_memory

    @property
    def sigma_factor(self) -> float:
        return ENVIRONMENTS[self.environment]

    @property
    def file_stem(self) -> str:
        return self.name.replace("/", "_")

    def config(self, master_seed: int = 0, **overrides) -> SimulationConfig:
        params = ModelParams(eta=PRESET_ETA, sigma_factor=self.sigma_factor)
        cfg = dict(
            params=params,
            periods=PRESET_PERIODS,
            replications=PRESET_REPLICATIONS,
            memory_principal=self.memory_principal,
            memory_agent=self.memory_agent,
            master_seed=master_seed,
            label=self.name,
        )
        cfg.update({k: v for k, v in overrides.items() if v is not None})
        return SimulationConfig(**cfg)


def _build() -> dict[str, ScenarioPreset]:
    out = {}
    for regime, tag in (("agent-adv", "mP"), ("principal-adv", "mA")):
        for m in (1, 5):
            for env in ENVIRONMENTS:
                name = f"{regime}/{tag}{m}/{env}"
                out[name] = ScenarioPreset(name, regime, m, env)
    return out


PRESETS: dict[str, ScenarioPreset] = _build()

# The memory-1 vs memory-5 pairs compared within each regime and environment.
MEMORY_PAIRS = [
    (f"{regime}/{tag}1/{env}", f"{regime}/{tag}5/{env}")
    for regime, tag in (("agent-adv", "mP"), ("principal-adv", "mA"))
    for env in ENVIRONMENTS
]

# The same memory configuration in the stable vs the unstable environment.
TURBULENCE_PAIRS = [
    (f"{regime}/{tag}{m}/stable", f"{regime}/{tag}{m}/unstable")
    for regime, tag in (("agent-adv", "mP"), ("principal-adv", "mA"))
    for m in (1, 5)
]


def scenario_seed(master_seed: int, name: str) -> int:
    """Independent 64-bit master seed for one preset inside a run-all sweep."""
    index = list(PRESETS).index(name)
    ss = np.random.SeedSequence([master_seed, 0x5EED, index])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
