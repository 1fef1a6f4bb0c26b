"""Observed-agent populations with GP-sampled utility fields."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mathcore import CovMatrix, GridSpec, KernelConfig, RngStream, as_generator, rbf_covariance

# A utility field is a length-n float vector, one value per tile.
UtilityField = np.ndarray


@dataclass(frozen=True, eq=False)
class GroupStructure:
    k: int
    assignments: np.ndarray
    group_means: np.ndarray
    variance_ratio: float

    def __post_init__(self):
        z = np.asarray(self.assignments, dtype=int)
        mu = np.asarray(self.group_means, dtype=float)
        if self.k < 1:
            raise ValueError("need at least one group")
        if z.size and (z.min() < 0 or z.max() >= self.k):
            raise ValueError(f"group assignments must lie in [0, {self.k})")
        if mu.ndim != 2 or mu.shape[0] != self.k:
            raise ValueError(f"expected {self.k} group means, got array of shape {mu.shape}")
        if not self.variance_ratio > 0:
            raise ValueError(f"variance ratio must be > 0, got {self.variance_ratio}")
        object.__setattr__(self, "assignments", z)
        object.__setattr__(self, "group_means", mu)

    def members(self, group: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == group)


@dataclass(frozen=True, eq=False)
class Population:
    """M observed agents sharing one decision noise; ``fields`` is (M, n)."""

    fields: np.ndarray
    decision_noise: float
    grid: GridSpec
    groups: GroupStructure | None = None

    def __post_init__(self):
        f = np.asarray(self.fields, dtype=float)
        if f.ndim != 2 or f.shape[0] < 1:
            raise ValueError("population needs a (M, n) field array with M >= 1")
        if f.shape[1] != self.grid.n:
            raise ValueError(f"fields have {f.shape[1]} tiles, grid has {self.grid.n}")
        if not np.all(np.isfinite(f)):
            raise ValueError("utility fields must be finite")
        if not self.decision_noise > 0:
            raise ValueError(f"decision noise must be > 0, got {self.decision_noise}")
        if self.groups is not None:
            if self.groups.assignments.shape != (f.shape[0],):
                raise ValueError("every agent needs exactly one group assignment")
            if self.groups.group_means.shape[1] != f.shape[1]:
                raise ValueError("group means and agent fields differ in length")
        object.__setattr__(self, "fields", f)

    @property
    def m(self) -> int:
        return self.fields.shape[0]

    def to_rows(self) -> list[tuple[int, int | None, int, float]]:
        """Flatten to (agent_id, group_id, tile_index, utility) records."""
        rows = []
        for agent, field in enumerate(self.fields):
            group = None if self.groups is None else int(self.groups.assignments[agent])
            rows.extend((agent, group, tile, float(u)) for tile, u in enumerate(field))
        return rows


def sample_individuals(
    m: int,
    grid: GridSpec,
    cfg: KernelConfig,
    beta: float,
    rng: RngStream | np.random.Generator,
    *,
    prior: CovMatrix | None = None,
) -> Population:
    """M independent draws from the zero-mean GP prior."""
    if m < 1:
        raise ValueError(f"need at least one agent, got m={m}")
    prior = rbf_covariance(grid, cfg) if prior is None else prior
    gen = as_generator(rng)
    fields = gen.standard_normal((m, grid.n)) @ prior.chol.T
    return Population(fields, beta, grid)


def sample_groups(
    m_per_group: int,
    k: int,
    rho: float,
    grid: GridSpec,
    cfg: KernelConfig,
    beta: float,
    rng: RngStream | np.random.Generator,
    *,
    prior: CovMatrix | None = None,
) -> Population:
    """Balanced groups: means from the GP prior, members from N(mean, rho * prior).

    The group means are drawn before the member offsets and the offsets are
    scaled by ``sqrt(rho)``, so one stream gives common random numbers across
    different values of ``rho``.
    """
    if k < 1 or m_per_group < 1:
        raise ValueError(f"need k >= 1 and m_per_group >= 1, got k={k}, m_per_group={m_per_group}")
    if not rho > 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    prior = rbf_covariance(grid, cfg) if prior is None else prior
    gen = as_generator(rng)
    means = gen.standard_normal((k, grid.n)) @ prior.chol.T
    assignments = np.repeat(np.arange(k), m_per_group)
    offsets = gen.standard_normal((k * m_per_group, grid.n)) @ prior.chol.T
    fields = means[assignments] + np.sqrt(rho) * offsets
    groups = GroupStructure(k, assignments, means, float(rho))
    return Population(fields, beta, grid, groups)


def sample_scalar_agents(m: int, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Scalar preferences u ~ Uniform[0, 1] for the two-goal task."""
    if m < 1:
        raise ValueError(f"need at least one agent, got m={m}")
    return as_generator(rng).random(m)
