"""Percolation sampler tests: exact edge cases, oracle agreement, random-graph laws."""

import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from conftest import chisq_two_sample
from swlab.percolation import (
    sample_components,
    sample_components_bruteforce,
    split_component_over_cells,
    susceptibility_experiment,
)

THETA_15 = 0.582811643865811


class TestSampleComponents:
    def test_single_vertex(self):
        s = sample_components(1, 0.3, np.random.default_rng(0))
        assert s.sizes.tolist() == [1]

    def test_no_edges(self):
        s = sample_components(5, 0.0, np.random.default_rng(0))
        assert s.sizes.tolist() == [1, 1, 1, 1, 1]

    def test_full_edges(self):
        s = sample_components(7, 1.0, np.random.default_rng(0))
        assert s.sizes.tolist() == [7]

    def test_empty(self):
        s = sample_components(0, 0.5, np.random.default_rng(0))
        assert s.sizes.size == 0

    def test_negative_k(self):
        with pytest.raises(ValueError):
            sample_components(-1, 0.5, np.random.default_rng(0))

    @given(st.integers(min_value=0, max_value=200), st.floats(min_value=0, max_value=1))
    @settings(max_examples=100, deadline=None)
    def test_conservation_and_order(self, k, p):
        s = sample_components(k, p, np.random.default_rng(k))
        assert int(s.sizes.sum()) == k
        assert (np.diff(s.sizes) <= 0).all()

    def test_joint_law_matches_bruteforce(self):
        # joint (L1, #components) at k=10, p=0.15 against the union-find oracle
        rng_a = np.random.default_rng(11)
        rng_b = np.random.default_rng(12)
        draws = 30_000
        fast, brute = Counter(), Counter()
        for _ in range(draws):
            sa = sample_components(10, 0.15, rng_a)
            fast[(int(sa.sizes[0]), sa.sizes.size)] += 1
            sb = sample_components_bruteforce(10, 0.15, rng_b)
            brute[(int(sb.sizes[0]), sb.sizes.size)] += 1
        assert chisq_two_sample(fast, brute) > 0.01


class TestBruteforce:
    def test_forced_edge(self):
        s = sample_components_bruteforce(2, 1.0, np.random.default_rng(0))
        assert s.sizes.tolist() == [2]

    def test_k0(self):
        s = sample_components_bruteforce(0, 0.7, np.random.default_rng(0))
        assert s.sizes.size == 0

    def test_connected_probability_k3(self):
        # P(L1 = 3) = p^3 + 3 p^2 (1-p) = 0.5 at p = 0.5 (enumerate 8 edge subsets)
        rng = np.random.default_rng(34)
        draws = 40_000
        hits = sum(
            sample_components_bruteforce(3, 0.5, rng).sizes[0] == 3 for _ in range(draws)
        )
        phat = hits / draws
        assert abs(phat - 0.5) < 4 * math.sqrt(0.25 / draws)

    def test_guard(self):
        with pytest.raises(ValueError):
            sample_components_bruteforce(2001, 0.5, np.random.default_rng(0))


class TestSplitOverCells:
    def test_exhaustive_draw(self):
        cells = np.array([3, 5, 2])
        out = split_component_over_cells(10, cells, np.random.default_rng(0))
        assert out.tolist() == [3, 5, 2]

    def test_zero_draw(self):
        out = split_component_over_cells(0, np.array([4, 4]), np.random.default_rng(0))
        assert out.tolist() == [0, 0]

    def test_hypergeometric_point_probability(self):
        # P(split = (2,0)) = C(2,2)C(2,0)/C(4,2) = 1/6
        rng = np.random.default_rng(77)
        draws = 60_000
        hits = sum(
            split_component_over_cells(2, np.array([2, 2]), rng)[0] == 2
            for _ in range(draws)
        )
        phat = hits / draws
        p0 = 1.0 / 6.0
        assert abs(phat - p0) < 4 * math.sqrt(p0 * (1 - p0) / draws)

    def test_marginal_matches_scipy_hypergeom(self):
        rng = np.random.default_rng(5)
        draws = 30_000
        cells = np.array([7, 13])
        counts = Counter(
            int(split_component_over_cells(6, cells, rng)[0]) for _ in range(draws)
        )
        law = {k: stats.hypergeom.pmf(k, 20, 7, 6) for k in range(7)}
        obs = np.array([counts.get(k, 0) for k in range(7)], dtype=float)
        exp = np.array([law[k] * draws for k in range(7)])
        keep = exp > 5
        chi2, pval = stats.chisquare(obs[keep], exp[keep] * obs[keep].sum() / exp[keep].sum())
        assert pval > 0.01

    def test_preconditions(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            split_component_over_cells(5, np.array([1, 2]), rng)
        with pytest.raises(ValueError):
            split_component_over_cells(1, np.array([-1, 3]), rng)


class TestSusceptibility:
    def test_critical_rejected(self):
        with pytest.raises(ValueError):
            susceptibility_experiment(1.0, [100], 10, np.random.default_rng(0))

    def test_subcritical_mean_linear(self):
        stats_ = susceptibility_experiment(
            0.5, [10_000, 20_000], 200, np.random.default_rng(21)
        )
        per_n = [m / n for m, n in zip(stats_.mean_R, stats_.n_values)]
        assert abs(per_n[0] - per_n[1]) / per_n[0] < 0.05

    def test_supercritical_giant_tracks_theta(self):
        stats_ = susceptibility_experiment(
            1.5, [50_000], 300, np.random.default_rng(22)
        )
        n = stats_.n_values[0]
        # CLT sd of L1 at lambda=1.5 is ~1.32 sqrt(n); 3 standard errors of the mean
        se = 1.4 * math.sqrt(n) / math.sqrt(300)
        assert abs(stats_.l1_mean[0] - THETA_15 * n) < 3 * se

    def test_isolated_fraction_positive(self):
        stats_ = susceptibility_experiment(
            3.0, [20_000], 50, np.random.default_rng(23)
        )
        assert stats_.isolated_mean[0] / 20_000 > 0.02
