"""Deterministic sweep runners for the two-goal surface, aggregation and group experiments.

Every repetition draws its own population, ego and trial streams from the
master seed, so repetitions can run in worker processes and are merged in
index order. Within a repetition all conditions share the same population
and trial streams (paired comparisons).
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from functools import partial

import numpy as np

from .environments import BanditConfig, two_goal_prob_a
from .learner import (
    INDISCRIMINATE,
    SIMILARITY,
    LearnerConfig,
    cost_adjusted_utility,
    minmax_normalize,
    trial_rewards,
)
from .mathcore import CovMatrix, GridSpec, KernelConfig, RngStream, rbf_covariance, sample_mvn
from .population import Population, sample_groups, sample_individuals, sample_scalar_agents
from .representation import AggregationOperator, build_aggregated, build_exact, build_group, group_cost_bits

FIG1, EXP1, EXP2 = 1, 2, 3
POPULATION, EGO, TRIALS = 0, 1, 2

GROUP = "group"
INDIVIDUAL = "individual"


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _default_lambdas():
    return tuple(round(i / 10, 10) for i in range(11))


@dataclass(frozen=True)
class ExperimentConfig:
    master_seed: int = 0
    grid_width: int = 8
    grid_height: int = 8
    length_scale: float = 1.0
    signal_variance: float = 1.0
    jitter: float = 1e-6
    n_agents: int = 20
    step_cost: float = 0.02
    beta_pop: float = 0.05
    beta_ego: float = 0.05
    trials: int = 200
    repetitions: int = 20
    lambda_grid: tuple = field(default_factory=_default_lambdas)
    patch_sizes: tuple = (1, 2, 4, 8)
    n_groups: int = 4
    m_per_group: int = 5
    rho_grid: tuple = (0.1, 0.5, 1.0, 2.0, 5.0)
    individual_cost_cov: str = "marginal"
    ego_travel_cost: bool = True
    fig1_agents: int = 100
    fig1_betas: tuple = (0.05, 0.1, 0.25, 0.5, 1.0, 2.0)
    fig1_track_length: int = 11
    fig1_bins: int = 10

    def __post_init__(self):
        for name in ("lambda_grid", "patch_sizes", "rho_grid", "fig1_betas"):
            value = getattr(self, name)
            if isinstance(value, (list, tuple)):
                object.__setattr__(self, name, tuple(
                    tuple(v) if isinstance(v, list) else v for v in value
                ))
        self.validate()

    def validate(self) -> None:
        def need(ok, name, msg):
            if not ok:
                raise ConfigError(name, msg)

        def is_int(v):
            return isinstance(v, int) and not isinstance(v, bool)

        def is_num(v):
            return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)

        need(is_int(self.master_seed) and 0 <= self.master_seed < 2**64, "master_seed",
             "must be an integer in [0, 2^64)")
        for name in ("grid_width", "grid_height", "n_agents", "trials", "repetitions", "n_groups",
                     "m_per_group", "fig1_agents", "fig1_bins"):
            need(is_int(getattr(self, name)) and getattr(self, name) >= 1, name, "must be an integer >= 1")
        for name in ("length_scale", "signal_variance", "beta_pop", "beta_ego"):
            need(is_num(getattr(self, name)) and getattr(self, name) > 0, name, "must be a number > 0")
        for name in ("jitter", "step_cost"):
            need(is_num(getattr(self, name)) and getattr(self, name) >= 0, name, "must be a number >= 0")
        need(isinstance(self.ego_travel_cost, bool), "ego_travel_cost", "must be true or false")
        need(self.individual_cost_cov in ("gp", "marginal"), "individual_cost_cov",
             "must be 'gp' or 'marginal'")
        need(is_int(self.fig1_track_length) and self.fig1_track_length >= 3, "fig1_track_length",
             "must be an integer >= 3")
        need(isinstance(self.lambda_grid, tuple) and len(self.lambda_grid) > 0, "lambda_grid",
             "must be a non-empty list")
        need(all(is_num(v) and 0 <= v <= 1 for v in self.lambda_grid), "lambda_grid",
             "values must lie in [0, 1]")
        need(isinstance(self.rho_grid, tuple) and len(self.rho_grid) > 0, "rho_grid", "must be a non-empty list")
        need(all(is_num(v) and v > 0 for v in self.rho_grid), "rho_grid", "values must be > 0")
        need(isinstance(self.fig1_betas, tuple) and len(self.fig1_betas) > 0, "fig1_betas",
             "must be a non-empty list")
        need(all(is_num(v) and v > 0 for v in self.fig1_betas), "fig1_betas", "values must be > 0")
        need(isinstance(self.patch_sizes, tuple) and len(self.patch_sizes) > 0, "patch_sizes",
             "must be a non-empty list")
        for p in self.patch_sizes:
            shape = (p, p) if is_int(p) else p
            need(isinstance(shape, tuple) and len(shape) == 2 and all(is_int(s) for s in shape),
                 "patch_sizes", f"entry {p!r} must be an integer or a [width, height] pair")
            need(1 <= shape[0] <= self.grid_width and 1 <= shape[1] <= self.grid_height, "patch_sizes",
                 f"patch {shape[0]}x{shape[1]} does not fit the {self.grid_width}x{self.grid_height} grid")

    def to_dict(self) -> dict:
        out = asdict(self)
        for name, value in out.items():
            if isinstance(value, tuple):
                out[name] = [list(v) if isinstance(v, tuple) else v for v in value]
        return out

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.grid_width, self.grid_height)

    @property
    def kernel(self) -> KernelConfig:
        return KernelConfig(self.length_scale, self.signal_variance, self.jitter)

    @property
    def bandit(self) -> BanditConfig:
        return BanditConfig(self.grid, self.step_cost, self.ego_travel_cost)

    def patch_shapes(self) -> list[tuple[int, int]]:
        return [(p, p) if isinstance(p, int) else tuple(p) for p in self.patch_sizes]

    @property
    def root(self) -> RngStream:
        return RngStream(self.master_seed)


@dataclass(frozen=True)
class SweepRow:
    experiment: str
    mean_return: float
    stderr: float
    strategy: str | None = None
    patch_w: int | None = None
    patch_h: int | None = None
    rho: float | None = None
    beta: float | None = None
    sim_bin_lo: float | None = None
    sim_bin_hi: float | None = None
    lam: float | None = None
    cost_bits: float | None = None
    return_norm: float | None = None
    cost_norm: float | None = None
    u_prime: float | None = None
    repetitions: int | None = None
    n_episodes: int | None = None


def _map(fn, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _stderr(values) -> float:
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return 0.0
    return float(v.std(ddof=1) / math.sqrt(v.size))


# ---------------------------------------------------------------------------
# Two-goal surface

def _fig1_repetition(cfg: ExperimentConfig, rep: int):
    base = cfg.root.child(FIG1, rep)
    agents = sample_scalar_agents(cfg.fig1_agents, base.child(POPULATION))
    u_ego = float(base.child(EGO).generator().random())
    draws = base.child(TRIALS).generator().random((cfg.fig1_agents, cfg.trials))
    sim = 1.0 - np.abs(agents - u_ego)
    bins = np.minimum((sim * cfg.fig1_bins).astype(int), cfg.fig1_bins - 1)
    stats = np.zeros((len(cfg.fig1_betas), cfg.fig1_bins, 3))
    for b, beta in enumerate(cfg.fig1_betas):
        chose_a = draws < two_goal_prob_a(agents, beta)[:, None]
        reward = np.where(chose_a, u_ego, 1.0 - u_ego)
        stats[b, :, 0] = np.bincount(bins, reward.sum(axis=1), cfg.fig1_bins)
        stats[b, :, 1] = np.bincount(bins, (reward**2).sum(axis=1), cfg.fig1_bins)
        stats[b, :, 2] = np.bincount(bins, np.full(cfg.fig1_agents, cfg.trials), cfg.fig1_bins)
    return stats


def run_fig1(cfg: ExperimentConfig, workers: int = 1) -> list[SweepRow]:
    """Mean imitation reward on the two-goal track by (target noise, similarity bin)."""
    per_rep = _map(partial(_fig1_repetition, cfg), range(cfg.repetitions), workers)
    total = np.zeros_like(per_rep[0])
    for s in per_rep:
        total += s
    rows = []
    for b, beta in enumerate(cfg.fig1_betas):
        for k in range(cfg.fig1_bins):
            s, ss, n = total[b, k]
            if n > 0:
                mean = s / n
                var = max(ss / n - mean**2, 0.0)
                se = math.sqrt(var * n / (n - 1) / n) if n > 1 else 0.0
            else:
                mean, se = float("nan"), float("nan")
            rows.append(SweepRow("fig1", float(mean), float(se), beta=float(beta),
                                 sim_bin_lo=k / cfg.fig1_bins, sim_bin_hi=(k + 1) / cfg.fig1_bins,
                                 repetitions=cfg.repetitions, n_episodes=int(n)))
    return rows


# ---------------------------------------------------------------------------
# Aggregation sweep

def _ego_field(prior: CovMatrix, stream: RngStream) -> np.ndarray:
    return sample_mvn(np.zeros(prior.n), prior, stream)


def _exp1_repetition(cfg: ExperimentConfig, rep: int) -> np.ndarray:
    prior = rbf_covariance(cfg.grid, cfg.kernel)
    base = cfg.root.child(EXP1, rep)
    pop = sample_individuals(cfg.n_agents, cfg.grid, cfg.kernel, cfg.beta_pop, base.child(POPULATION), prior=prior)
    u_ego = _ego_field(prior, base.child(EGO))
    trials = base.child(TRIALS)
    bandit = cfg.bandit
    learner = LearnerConfig(u_ego, cfg.beta_ego, SIMILARITY)
    means = []
    for pw, ph in cfg.patch_shapes():
        rep_ = build_aggregated(pop, prior, AggregationOperator.build(cfg.grid, pw, ph))
        means.append(trial_rewards(pop, rep_, learner, bandit, cfg.trials, trials).mean())
    baseline = LearnerConfig(u_ego, cfg.beta_ego, INDISCRIMINATE)
    means.append(trial_rewards(pop, build_exact(pop, prior), baseline, bandit, cfg.trials, trials).mean())
    return np.array(means)


def exp1_repetition_means(cfg: ExperimentConfig, workers: int = 1) -> np.ndarray:
    """(repetitions, len(patch_sizes) + 1) mean returns; the last column is the baseline."""
    return np.array(_map(partial(_exp1_repetition, cfg), range(cfg.repetitions), workers))


def exp1_costs(cfg: ExperimentConfig) -> list[float]:
    prior = rbf_covariance(cfg.grid, cfg.kernel)
    pop = Population(np.ones((cfg.n_agents, cfg.grid.n)), cfg.beta_pop, cfg.grid)
    return [build_aggregated(pop, prior, AggregationOperator.build(cfg.grid, pw, ph)).cost_bits
            for pw, ph in cfg.patch_shapes()]


def _tradeoff_rows(experiment, conditions, lambdas):
    """Normalise returns over every condition and costs over the representation conditions."""
    returns = minmax_normalize([c["mean_return"] for c in conditions])
    priced = [i for i, c in enumerate(conditions) if c["cost_bits"] is not None]
    costs = np.zeros(len(conditions))
    if priced:
        costs[priced] = minmax_normalize([conditions[i]["cost_bits"] for i in priced])
    rows = []
    for c, un, cn in zip(conditions, returns, costs):
        for lam in lambdas:
            rows.append(SweepRow(
                experiment, lam=float(lam), return_norm=float(un), cost_norm=float(cn),
                u_prime=float(cost_adjusted_utility(un, cn, lam)),
                **{**c, "cost_bits": 0.0 if c["cost_bits"] is None else c["cost_bits"]},
            ))
    return rows


def run_exp1(cfg: ExperimentConfig, workers: int = 1) -> list[SweepRow]:
    means = exp1_repetition_means(cfg, workers)
    costs = exp1_costs(cfg)
    conditions = []
    for j, ((pw, ph), cost) in enumerate(zip(cfg.patch_shapes(), costs)):
        conditions.append(dict(strategy=SIMILARITY, patch_w=pw, patch_h=ph, cost_bits=cost,
                               mean_return=float(means[:, j].mean()), stderr=_stderr(means[:, j]),
                               repetitions=cfg.repetitions))
    conditions.append(dict(strategy=INDISCRIMINATE, cost_bits=None, mean_return=float(means[:, -1].mean()),
                           stderr=_stderr(means[:, -1]), repetitions=cfg.repetitions))
    return _tradeoff_rows("exp1", conditions, cfg.lambda_grid)


# ---------------------------------------------------------------------------
# Group sweep

EXP2_STRATEGIES = (GROUP, INDIVIDUAL, INDISCRIMINATE)


def _exp2_repetition(cfg: ExperimentConfig, rep: int) -> np.ndarray:
    prior = rbf_covariance(cfg.grid, cfg.kernel)
    base = cfg.root.child(EXP2, rep)
    u_ego = _ego_field(prior, base.child(EGO))
    trials = base.child(TRIALS)
    bandit = cfg.bandit
    similar = LearnerConfig(u_ego, cfg.beta_ego, SIMILARITY)
    uniform = LearnerConfig(u_ego, cfg.beta_ego, INDISCRIMINATE)
    out = np.zeros((len(cfg.rho_grid), len(EXP2_STRATEGIES)))
    for i, rho in enumerate(cfg.rho_grid):
        pop = sample_groups(cfg.m_per_group, cfg.n_groups, rho, cfg.grid, cfg.kernel, cfg.beta_pop,
                            base.child(POPULATION), prior=prior)
        exact = build_exact(pop, prior)
        out[i, 0] = trial_rewards(pop, build_group(pop, prior), similar, bandit, cfg.trials, trials).mean()
        out[i, 1] = trial_rewards(pop, exact, similar, bandit, cfg.trials, trials).mean()
        out[i, 2] = trial_rewards(pop, exact, uniform, bandit, cfg.trials, trials).mean()
    return out


def exp2_repetition_means(cfg: ExperimentConfig, workers: int = 1) -> np.ndarray:
    """(repetitions, len(rho_grid), 3) mean returns for group / individual / baseline."""
    return np.array(_map(partial(_exp2_repetition, cfg), range(cfg.repetitions), workers))


def exp2_costs(cfg: ExperimentConfig) -> dict[tuple[float, str], float]:
    prior = rbf_covariance(cfg.grid, cfg.kernel)
    m = cfg.n_groups * cfg.m_per_group
    pop = Population(np.ones((m, cfg.grid.n)), cfg.beta_pop, cfg.grid)
    out = {}
    for rho in cfg.rho_grid:
        cov = prior.scaled(1.0 + rho) if cfg.individual_cost_cov == "marginal" else prior
        out[(rho, INDIVIDUAL)] = build_exact(pop, cov).cost_bits
        out[(rho, GROUP)] = group_cost_bits(cfg.n_groups, m, prior)
    return out


def run_exp2(cfg: ExperimentConfig, workers: int = 1) -> list[SweepRow]:
    means = exp2_repetition_means(cfg, workers)
    costs = exp2_costs(cfg)
    conditions = []
    for i, rho in enumerate(cfg.rho_grid):
        for j, strategy in enumerate(EXP2_STRATEGIES):
            col = means[:, i, j]
            conditions.append(dict(strategy=strategy, rho=float(rho), cost_bits=costs.get((rho, strategy)),
                                   mean_return=float(col.mean()), stderr=_stderr(col),
                                   repetitions=cfg.repetitions))
    return _tradeoff_rows("exp2", conditions, cfg.lambda_grid)


def normalization_constants(rows: list[SweepRow]) -> dict:
    """Min/max of the raw quantities that the normalised columns were scaled by."""
    if not rows or rows[0].lam is None:
        return {}
    returns = [r.mean_return for r in rows]
    priced = [r.cost_bits for r in rows if r.strategy != INDISCRIMINATE]
    out = {"return_min": min(returns), "return_max": max(returns)}
    if priced:
        out.update(cost_min=min(priced), cost_max=max(priced))
    return out
