"""Agent representations (exact, patch-aggregated, group-only) and their cost in bits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mathcore import (
    CovMatrix,
    FactorizationError,
    GridSpec,
    discrete_uniform_entropy_bits,
    gaussian_entropy_bits,
)
from .population import Population

EXACT = "exact"
AGGREGATED = "aggregated"
GROUP = "group"


class ZeroNormError(ValueError):
    """Cosine similarity is undefined for a zero vector."""


@dataclass(frozen=True, eq=False)
class AggregationOperator:
    """Row-stochastic patch-averaging map ``A`` of shape (P, n).

    Patches tile the grid left-to-right, top-to-bottom; edge patches are
    truncated when the grid is not a multiple of the patch size.
    """

    grid: GridSpec
    patch_w: int
    patch_h: int
    matrix: np.ndarray
    labels: np.ndarray

    @classmethod
    def build(cls, grid: GridSpec, patch_w: int, patch_h: int | None = None) -> AggregationOperator:
        patch_h = patch_w if patch_h is None else patch_h
        if patch_w < 1 or patch_h < 1:
            raise ValueError(f"patch size must be >= 1, got {patch_w}x{patch_h}")
        xy = grid.tile_coords().astype(int)
        cols = -(-grid.width // patch_w)
        labels = (xy[:, 1] // patch_h) * cols + xy[:, 0] // patch_w
        p = int(labels.max()) + 1
        a = np.zeros((p, grid.n))
        a[labels, np.arange(grid.n)] = 1.0
        a /= a.sum(axis=1, keepdims=True)
        return cls(grid, patch_w, patch_h, a, labels)

    @property
    def n_patches(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class Representation:
    kind: str
    estimates: np.ndarray
    cost_bits: float
    operator: AggregationOperator | None = None

    @property
    def m(self) -> int:
        return self.estimates.shape[0]

    def summary(self) -> dict:
        out = {"kind": self.kind, "cost_bits": self.cost_bits}
        if self.operator is not None:
            out.update(patch_w=self.operator.patch_w, patch_h=self.operator.patch_h,
                       n_patches=self.operator.n_patches)
        return out


def _check_prior(pop: Population, prior: CovMatrix) -> None:
    if prior.n != pop.grid.n:
        raise ValueError(f"prior is {prior.n}-dimensional but fields have {pop.grid.n} tiles")


def build_exact(pop: Population, prior: CovMatrix) -> Representation:
    _check_prior(pop, prior)
    return Representation(EXACT, pop.fields.copy(), pop.m * gaussian_entropy_bits(prior))


def aggregate_field(u, op: AggregationOperator) -> np.ndarray:
    """Replace each tile by its patch mean (full-resolution output).

    Also accepts a (M, n) stack of fields.
    """
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != op.grid.n:
        raise ValueError(f"field has {u.shape[-1]} tiles, operator expects {op.grid.n}")
    return (u @ op.matrix.T)[..., op.labels]


def aggregated_covariance(prior: CovMatrix, op: AggregationOperator, max_jitter: float = 1e-3) -> CovMatrix:
    if prior.n != op.grid.n:
        raise ValueError(f"prior is {prior.n}-dimensional but operator expects {op.grid.n}")
    a = op.matrix
    s = a @ prior.entries @ a.T
    s = 0.5 * (s + s.T)
    jitter = 0.0
    while True:
        cov = CovMatrix(s + jitter * np.eye(len(s)))
        try:
            cov.chol
            return cov
        except FactorizationError:
            jitter = 1e-12 if jitter == 0.0 else jitter * 10
            if jitter > max_jitter:
                raise


def build_aggregated(pop: Population, prior: CovMatrix, op: AggregationOperator) -> Representation:
    _check_prior(pop, prior)
    cost = pop.m * gaussian_entropy_bits(aggregated_covariance(prior, op))
    return Representation(AGGREGATED, aggregate_field(pop.fields, op), cost, op)


def group_cost_bits(k: int, m: int, prior: CovMatrix) -> float:
    """K Gaussian group means plus M uniform assignments over K groups."""
    return k * gaussian_entropy_bits(prior) + m * discrete_uniform_entropy_bits(k)


def build_group(pop: Population, prior: CovMatrix) -> Representation:
    _check_prior(pop, prior)
    if pop.groups is None:
        raise ValueError("population has no group structure")
    g = pop.groups
    return Representation(GROUP, g.group_means[g.assignments], group_cost_bits(g.k, pop.m, prior))


def cosine_similarity(a, b) -> np.ndarray | float:
    """Cosine of ``a`` against ``b``; ``b`` may be a (M, n) stack."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-1] != b.shape[-1]:
        raise ValueError(f"length mismatch: {a.shape[-1]} vs {b.shape[-1]}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b, axis=-1)
    if na == 0 or np.any(nb == 0):
        raise ZeroNormError("cosine similarity undefined for zero-norm field")
    sim = np.clip((b @ a) / (na * nb), -1.0, 1.0)
    return float(sim) if sim.ndim == 0 else sim
