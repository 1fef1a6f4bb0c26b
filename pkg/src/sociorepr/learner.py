"""The selective social learner: target selection, trials, returns and cost-adjusted utility."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .environments import BanditConfig, ChoiceRecord, imitate_choice
from .mathcore import RngStream, sample_categorical, softmax
from .population import Population
from .representation import Representation, cosine_similarity

SIMILARITY = "similarity"
INDISCRIMINATE = "indiscriminate"
STRATEGIES = (SIMILARITY, INDISCRIMINATE)


@dataclass(frozen=True, eq=False)
class LearnerConfig:
    u_ego: np.ndarray
    beta_ego: float = 0.05
    strategy: str = SIMILARITY

    def __post_init__(self):
        if not self.beta_ego > 0:
            raise ValueError(f"beta_ego must be > 0, got {self.beta_ego}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        object.__setattr__(self, "u_ego", np.asarray(self.u_ego, dtype=float))


@dataclass(frozen=True)
class TrialResult:
    trial_id: int
    target_id: int
    ego_reward: float
    choices: tuple[ChoiceRecord, ...]


def selection_weights(rep: Representation, cfg: LearnerConfig) -> np.ndarray:
    if cfg.strategy == INDISCRIMINATE:
        return np.zeros(rep.m)
    if rep.estimates.shape[1] != cfg.u_ego.shape[0]:
        raise ValueError("representation and ego utility differ in length")
    return np.atleast_1d(cosine_similarity(cfg.u_ego, rep.estimates))


def selection_probabilities(weights, beta_ego: float) -> np.ndarray:
    return softmax(weights, beta_ego)


def run_trial(
    pop: Population,
    rep: Representation,
    cfg: LearnerConfig,
    bandit: BanditConfig,
    rng: RngStream | np.random.Generator,
    trial_id: int = 0,
    target_probs: np.ndarray | None = None,
) -> TrialResult:
    """One trial: every agent moves, the learner picks a target and copies it.

    Draw order from the stream is fixed (start tiles, destination uniforms,
    target uniform), so two conditions sharing a trial stream see the same
    agent behaviour and differ only in the target choice. ``target_probs``
    may carry a precomputed ``selection_probabilities`` vector.
    """
    if rep.m != pop.m:
        raise ValueError(f"representation covers {rep.m} agents, population has {pop.m}")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    n = pop.grid.n
    starts = gen.integers(n, size=pop.m)
    rewards = pop.fields - bandit.travel[starts]
    dests = sample_categorical(softmax(rewards, pop.decision_noise), gen.random(pop.m))
    agents = np.arange(pop.m)
    got = rewards[agents, dests]
    choices = tuple(
        ChoiceRecord(int(i), int(s), int(d), float(r)) for i, s, d, r in zip(agents, starts, dests, got)
    )
    if target_probs is None:
        target_probs = selection_probabilities(selection_weights(rep, cfg), cfg.beta_ego)
    target = sample_categorical(target_probs, gen.random())
    return TrialResult(trial_id, target, imitate_choice(cfg.u_ego, choices[target], bandit), choices)


def trial_rewards(pop, rep, cfg, bandit, trials: int, rng: RngStream) -> np.ndarray:
    """Ego reward for each of ``trials`` trials; trial ``t`` uses ``rng.child(t)``."""
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    probs = selection_probabilities(selection_weights(rep, cfg), cfg.beta_ego)
    return np.array([
        run_trial(pop, rep, cfg, bandit, rng.child(t), t, probs).ego_reward for t in range(trials)
    ])


def estimate_return(pop, rep, cfg, bandit, trials: int, rng: RngStream) -> float:
    return float(trial_rewards(pop, rep, cfg, bandit, trials, rng).mean())


def cost_adjusted_utility(u_norm, c_norm, lam: float):
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    return (1.0 - lam) * u_norm - lam * c_norm


def minmax_normalize(values) -> np.ndarray:
    """Rescale to [0, 1]; a constant (or singleton) vector maps to zeros."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("cannot normalise an empty vector")
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)
