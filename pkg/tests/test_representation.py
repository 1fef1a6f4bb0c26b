import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sociorepr.mathcore import CovMatrix, GridSpec, KernelConfig, RngStream, gaussian_entropy_bits, rbf_covariance
from sociorepr.population import Population, sample_groups, sample_individuals
from sociorepr.representation import (
    AggregationOperator,
    ZeroNormError,
    aggregate_field,
    aggregated_covariance,
    build_aggregated,
    build_exact,
    build_group,
    cosine_similarity,
)

HALF_LOG2_2PIE = 2.04709558518064110
KERNEL = KernelConfig(1.0, 1.0, 1e-6)


def identity_pop(m, grid=GridSpec(2, 2)):
    fields_ = RngStream(0).generator().normal(size=(m, grid.n))
    return Population(fields_, 0.05, grid), CovMatrix(np.eye(grid.n))


def test_operator_structure_with_ragged_edges():
    op = AggregationOperator.build(GridSpec(5, 3), 2, 2)
    assert op.n_patches == 6
    assert np.all((op.matrix > 0).sum(axis=0) == 1)
    np.testing.assert_allclose(op.matrix.sum(axis=1), 1.0)
    assert op.matrix[op.labels[4], 4] == pytest.approx(0.5)  # right edge patch holds 2 tiles


def test_exact_costs():
    pop, prior = identity_pop(1)
    assert build_exact(pop, prior).cost_bits == pytest.approx(gaussian_entropy_bits(prior))
    pop, prior = identity_pop(3)
    rep = build_exact(pop, prior)
    assert rep.cost_bits == pytest.approx(3 * 4 * HALF_LOG2_2PIE, abs=1e-9)
    assert rep.cost_bits == pytest.approx(24.5651, abs=1e-4)
    assert np.array_equal(rep.estimates, pop.fields)
    pop6, _ = identity_pop(6)
    assert build_exact(pop6, prior).cost_bits == 2 * rep.cost_bits
    with pytest.raises(ValueError):
        build_exact(pop, CovMatrix(np.eye(3)))


def test_aggregate_field_cases():
    grid = GridSpec(2, 2)
    u = np.array([0.0, 1.0, 2.0, 3.0])
    assert np.array_equal(aggregate_field(u, AggregationOperator.build(grid, 1)), u)
    np.testing.assert_allclose(aggregate_field(u, AggregationOperator.build(grid, 2)), 1.5)
    op = AggregationOperator.build(GridSpec(7, 5), 3, 2)
    np.testing.assert_allclose(aggregate_field(np.full(35, 0.4), op), 0.4)
    with pytest.raises(ValueError):
        aggregate_field(u, op)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_aggregation_idempotent(w, h, pw, ph, seed):
    grid = GridSpec(w, h)
    op = AggregationOperator.build(grid, pw, ph)
    u = np.random.default_rng(seed).normal(size=grid.n)
    once = aggregate_field(u, op)
    np.testing.assert_allclose(aggregate_field(once, op), once, atol=1e-12)


def test_aggregated_covariance_by_hand():
    grid = GridSpec(2, 1)
    op = AggregationOperator.build(grid, 2, 1)
    assert aggregated_covariance(CovMatrix(np.eye(2)), op).entries.tolist() == [[0.5]]
    # all-ones covariance is singular; check the raw product before any jitter
    assert (op.matrix @ np.ones((2, 2)) @ op.matrix.T).tolist() == [[1.0]]
    agg = aggregated_covariance(CovMatrix(np.ones((2, 2)) + 1e-9 * np.eye(2)), op)
    assert agg.entries[0, 0] == pytest.approx(1.0, abs=1e-8)
    prior = rbf_covariance(GridSpec(3, 3), KERNEL)
    same = aggregated_covariance(prior, AggregationOperator.build(GridSpec(3, 3), 1))
    np.testing.assert_allclose(same.entries, prior.entries)


def test_aggregated_covariance_matches_empirical():
    grid = GridSpec(4, 4)
    prior = rbf_covariance(grid, KernelConfig(1.5, 1.0, 1e-6))
    op = AggregationOperator.build(grid, 2)
    samples = sample_individuals(10_000, grid, KERNEL, 0.05, RngStream(8), prior=prior).fields
    patch_means = samples @ op.matrix.T
    np.testing.assert_allclose(np.cov(patch_means.T), aggregated_covariance(prior, op).entries, atol=0.05)


def test_build_aggregated():
    grid = GridSpec(8, 8)
    prior = rbf_covariance(grid, KERNEL)
    pop = sample_individuals(3, grid, KERNEL, 0.05, RngStream(1), prior=prior)
    exact = build_exact(pop, prior)
    ident = build_aggregated(pop, prior, AggregationOperator.build(grid, 1))
    assert ident.cost_bits == pytest.approx(exact.cost_bits, abs=1e-9)
    np.testing.assert_allclose(ident.estimates, exact.estimates)
    costs = [build_aggregated(pop, prior, AggregationOperator.build(grid, p)).cost_bits for p in (1, 2, 4, 8)]
    assert all(a > b for a, b in zip(costs, costs[1:]))
    for p in (3, 5):
        assert build_aggregated(pop, prior, AggregationOperator.build(grid, p)).cost_bits < exact.cost_bits


def test_whole_grid_patch_cost():
    grid = GridSpec(2, 2)
    pop, prior = identity_pop(2)
    rep = build_aggregated(pop, prior, AggregationOperator.build(grid, 2))
    # Sigma_agg = [[1/4]] -> 2 * (2.04709... - 1)
    assert rep.cost_bits == pytest.approx(2.09419117036128221, abs=1e-9)


def test_nested_cost_ordering_closed_form():
    grid = GridSpec(8, 8)
    prior = rbf_covariance(grid, KERNEL)
    pop = Population(np.ones((4, grid.n)), 0.05, grid)
    costs = []
    for p in (1, 2, 4, 8):
        op = AggregationOperator.build(grid, p)
        rep = build_aggregated(pop, prior, op)
        s = op.matrix @ prior.entries @ op.matrix.T
        closed = 4 * (0.5 * np.linalg.slogdet(s)[1] / np.log(2) + 0.5 * op.n_patches * np.log2(2 * np.pi * np.e))
        assert rep.cost_bits == pytest.approx(closed, abs=1e-9)
        costs.append(rep.cost_bits)
    assert costs == sorted(costs, reverse=True)


def test_group_representation():
    grid = GridSpec(2, 2)
    prior = CovMatrix(np.eye(4))
    pop = sample_groups(5, 4, 1.0, grid, KERNEL, 0.05, RngStream(0))
    rep = build_group(pop, prior)
    assert rep.cost_bits == pytest.approx(4 * 4 * HALF_LOG2_2PIE + 20 * 2, abs=1e-9)
    assert rep.cost_bits == pytest.approx(72.7535, abs=1e-4)
    np.testing.assert_array_equal(rep.estimates, pop.groups.group_means[pop.groups.assignments])
    one = sample_groups(5, 1, 1.0, grid, KERNEL, 0.05, RngStream(0))
    rep1 = build_group(one, prior)
    assert rep1.cost_bits == pytest.approx(gaussian_entropy_bits(prior))
    assert np.all(rep1.estimates == rep1.estimates[0])
    tight = sample_groups(5, 3, 1e-8, GridSpec(4, 4), KERNEL, 0.05, RngStream(2))
    np.testing.assert_allclose(build_group(tight, rbf_covariance(GridSpec(4, 4), KERNEL)).estimates,
                               tight.fields, atol=1e-3)
    with pytest.raises(ValueError):
        build_group(identity_pop(2)[0], prior)


def test_cosine_similarity():
    assert cosine_similarity([2.0, 3.0], [2.0, 3.0]) == pytest.approx(1.0)
    assert cosine_similarity([1.0, 0.0], [0.0, 1.0]) == 0.0
    assert cosine_similarity([1.0, 0.0], [1.0, 1.0]) == pytest.approx(0.70710678118654752, abs=1e-15)
    with pytest.raises(ZeroNormError):
        cosine_similarity([1.0, 0.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        cosine_similarity([1.0], [1.0, 2.0])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3), st.lists(st.floats(-10, 10), min_size=3, max_size=3),
       st.floats(1e-3, 1e3))
def test_cosine_scale_invariance(a, b, s):
    if np.linalg.norm(a) < 1e-3 or np.linalg.norm(b) < 1e-3:
        return
    assert cosine_similarity(a, np.multiply(b, s)) == pytest.approx(cosine_similarity(a, b), abs=1e-12)
