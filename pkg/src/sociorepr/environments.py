"""Travel-cost contextual bandit and the one-dimensional two-goal track."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .mathcore import GridSpec, RngStream, as_generator, sample_categorical, softmax


@dataclass(frozen=True)
class BanditConfig:
    """Grid plus per-step travel cost.

    ``ego_travel_cost=False`` makes the imitating learner score only the
    destination utility and skip the travel term.
    """

    grid: GridSpec
    step_cost: float = 0.02
    ego_travel_cost: bool = True

    def __post_init__(self):
        if not self.step_cost >= 0:
            raise ValueError(f"step_cost must be >= 0, got {self.step_cost}")

    @cached_property
    def travel(self) -> np.ndarray:
        """(n, n) matrix of L1 step counts scaled by the step cost."""
        return self.step_cost * self.grid.l1_distances()


@dataclass(frozen=True, slots=True)
class ChoiceRecord:
    agent_id: int
    start_tile: int
    dest_tile: int
    reward: float


def dest_reward(u, start: int, dest: int, cfg: BanditConfig) -> float:
    cfg.grid.check_tile(start)
    cfg.grid.check_tile(dest)
    sx, sy = cfg.grid.coords(start)
    dx, dy = cfg.grid.coords(dest)
    return float(u[dest] - cfg.step_cost * (abs(dx - sx) + abs(dy - sy)))


def destination_probabilities(u, start: int, cfg: BanditConfig, beta: float) -> np.ndarray:
    """Boltzmann distribution over every destination tile from ``start``."""
    cfg.grid.check_tile(start)
    return softmax(np.asarray(u, dtype=float) - cfg.travel[start], beta)


def boltzmann_choice(
    u, start: int, cfg: BanditConfig, beta: float, rng: RngStream | np.random.Generator, agent_id: int = 0
) -> ChoiceRecord:
    probs = destination_probabilities(u, start, cfg, beta)
    dest = sample_categorical(probs, as_generator(rng).random())
    return ChoiceRecord(agent_id, start, dest, dest_reward(u, start, dest, cfg))


def imitate_choice(u_ego, observed: ChoiceRecord, cfg: BanditConfig) -> float:
    """The learner replays the observed (start, dest) move under its own utility."""
    if cfg.ego_travel_cost:
        return dest_reward(u_ego, observed.start_tile, observed.dest_tile, cfg)
    cfg.grid.check_tile(observed.start_tile)
    cfg.grid.check_tile(observed.dest_tile)
    return float(u_ego[observed.dest_tile])


@dataclass(frozen=True)
class TwoGoalConfig:
    """Track of ``length`` tiles; goal A at the left end, B at the right, start in the middle."""

    length: int = 11
    goal_a: int = field(init=False)
    goal_b: int = field(init=False)
    start: int = field(init=False)

    def __post_init__(self):
        if self.length < 3:
            raise ValueError(f"two-goal track needs length >= 3, got {self.length}")
        object.__setattr__(self, "goal_a", 0)
        object.__setattr__(self, "goal_b", self.length - 1)
        object.__setattr__(self, "start", self.length // 2)


def two_goal_prob_a(u, beta: float) -> np.ndarray | float:
    """Pr(goal A) for preference(s) ``u`` with goal values (u, 1 - u)."""
    u = np.asarray(u, dtype=float)
    p = softmax(np.stack([u, 1.0 - u], axis=-1), beta)[..., 0]
    return float(p) if p.ndim == 0 else p


def two_goal_episode(
    u: float, cfg: TwoGoalConfig, beta: float, rng: RngStream | np.random.Generator
) -> tuple[str, list[int]]:
    goal = "A" if as_generator(rng).random() < two_goal_prob_a(u, beta) else "B"
    end = cfg.goal_a if goal == "A" else cfg.goal_b
    step = 1 if end > cfg.start else -1
    return goal, list(range(cfg.start, end + step, step))


def two_goal_imitation_reward(u_ego: float, goal: str) -> float:
    if goal == "A":
        return u_ego
    if goal == "B":
        return 1.0 - u_ego
    raise ValueError(f"goal must be 'A' or 'B', got {goal!r}")
