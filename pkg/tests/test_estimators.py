import itertools
import math

import numpy as np
import pytest

from gnpest.estimators import (
    ALPHA1_MAX,
    EXHAUSTIVE_MAX_N,
    ESTIMATOR_NAMES,
    SpectralConfig,
    exhaustive_estimate,
    mean_estimator,
    median_estimator,
    prune_then,
    robust_estimate,
    robust_estimate_symmetric,
    run_named_estimator,
    spectral_candidates,
    trim,
)
from gnpest.adversaries import fill_or_empty_adversary
from gnpest.graphs import AdjacencyMatrix, GraphParams, NodeSet, sample_er
from gnpest.rng import stream


class TestBaselines:
    def test_mean_extremes(self):
        assert mean_estimator(AdjacencyMatrix.complete(7)).estimate == 1.0
        assert mean_estimator(AdjacencyMatrix.empty(7)).estimate == 0.0

    def test_mean_single_edge(self):
        g = AdjacencyMatrix.from_edges(5, [(0, 1)])
        assert mean_estimator(g).estimate == pytest.approx(1 / 10)

    def test_mean_too_small(self):
        with pytest.raises(ValueError):
            mean_estimator(AdjacencyMatrix.empty(1))

    def test_median_star(self):
        # degrees 9, 1 x 9; lower median is 1, so the estimate is 1/9
        g = AdjacencyMatrix.from_edges(10, [(0, j) for j in range(1, 10)])
        assert median_estimator(g).estimate == pytest.approx(1 / 9)

    def test_median_even_length_takes_lower(self):
        # degrees 0, 1, 1, 2: middle pair (1, 1); append an isolated pair
        g = AdjacencyMatrix.from_edges(4, [(0, 1), (1, 2)])
        assert median_estimator(g).estimate == pytest.approx(1 / 3)
        # degrees 1, 1, 2, 2 -> lower middle is 1
        h = AdjacencyMatrix.from_edges(4, [(0, 1), (1, 2), (2, 3)])
        assert median_estimator(h).estimate == pytest.approx(1 / 3)


class TestPrune:
    def test_removes_planted_extremes(self):
        # plant one full node and one isolated node in G(n, 1/2)
        g = sample_er(GraphParams(n=40, p=0.5, gamma=0.0), stream(60))
        mat = g.mat.copy()
        mat[0, :] = 1
        mat[:, 0] = 1
        mat[1, :] = 0
        mat[:, 1] = 0
        mat[0, 1] = mat[1, 0] = 1
        np.fill_diagonal(mat, 0)
        planted = AdjacencyMatrix(mat, validate=False)
        rep = prune_then(planted, gamma=0.05, c=0.5, inner="mean")
        assert rep.trace["pruned_per_side"] == 1
        assert 0 not in rep.trace["survivors"]
        assert 1 not in rep.trace["survivors"]

    def test_tie_break_by_index(self):
        # all degrees equal: prune removes the lowest indices on both sides
        g = AdjacencyMatrix.complete(10)
        rep = prune_then(g, gamma=0.1, c=2.0, inner="mean")
        np.testing.assert_array_equal(rep.trace["survivors"], np.arange(4, 10))

    def test_zero_budget_is_inner(self):
        g = sample_er(GraphParams(n=30, p=0.4, gamma=0.0), stream(61))
        assert prune_then(g, 0.0, 1.0, "mean").estimate == mean_estimator(g).estimate
        assert prune_then(g, 0.0, 1.0, "median").estimate == median_estimator(g).estimate

    def test_rejects_overpruning(self):
        with pytest.raises(ValueError, match="fewer than 2"):
            prune_then(AdjacencyMatrix.empty(5), 0.4, 1.0, "mean")

    def test_rejects_bad_inner(self):
        with pytest.raises(ValueError, match="inner"):
            prune_then(AdjacencyMatrix.empty(10), 0.1, 1.0, "max")


class TestTrim:
    def test_star_worked_example(self):
        # n=10 star, trim budget floor(3 * n / 30) = 1. Within S* = [n]:
        # p* = 18/100, center score |0.18 - 0.9| = 0.72, leaves 0.08, so
        # the center is trimmed and the remaining density is 0.
        g = AdjacencyMatrix.from_edges(10, [(0, j) for j in range(1, 10)])
        rep = trim(g, alpha1=1 / 30, s_star=NodeSet.full(10))
        assert rep.trace["p_s_star"] == pytest.approx(0.18)
        assert rep.trace["scores"][0] == pytest.approx(0.72)
        assert rep.trace["scores"][1] == pytest.approx(0.08)
        np.testing.assert_array_equal(rep.trace["trimmed"], [0])
        assert rep.estimate == 0.0

    def test_zero_budget_reports_subset_density(self):
        g = sample_er(GraphParams(n=20, p=0.5, gamma=0.0), stream(62))
        s = NodeSet.from_indices(20, list(range(15)))
        rep = trim(g, alpha1=0.01, s_star=s)
        idx = s.indices
        expect = g.mat[np.ix_(idx, idx)].sum() / 15**2
        assert rep.raw_estimate == pytest.approx(expect)

    def test_tie_break_by_index(self):
        # complete graph: all scores equal, lowest indices trimmed first
        g = AdjacencyMatrix.complete(12)
        rep = trim(g, alpha1=1 / 12, s_star=NodeSet.full(12))
        np.testing.assert_array_equal(rep.trace["trimmed"], [0, 1, 2])

    def test_rejects_empty_remainder(self):
        with pytest.raises(ValueError, match="trim count"):
            trim(AdjacencyMatrix.empty(10), alpha1=0.1, s_star=NodeSet.from_indices(10, [0]))


class TestSpectralConfig:
    def test_alpha1_range(self):
        with pytest.raises(ValueError, match="alpha1"):
            SpectralConfig(alpha1=0.5).validate(100)
        with pytest.raises(ValueError, match="alpha1"):
            SpectralConfig(alpha1=1 / 200).validate(100)
        SpectralConfig(alpha1=1 / 60).validate(100)

    def test_adaptive_repeats(self):
        cfg = SpectralConfig(alpha1=1 / 60)
        # floor(9n/60) vs 2 log2 n: at n = 120 the budget 18 beats 13.8
        assert cfg.effective_repeats(120) == 1
        # at n = 64 the budget 9 loses to 12 -> ceil(2 log2 64) = 12 runs
        assert cfg.effective_repeats(64) == 12

    def test_explicit_repeats_win(self):
        assert SpectralConfig(alpha1=1 / 60, repeats=3).effective_repeats(64) == 3


class TestSpectralPipeline:
    def test_refuses_small_n(self):
        # below n = 60 the admissible alpha1 interval [1/n, 1/60] is empty
        g = AdjacencyMatrix.empty(59)
        with pytest.raises(ValueError):
            spectral_candidates(g, SpectralConfig(alpha1=1 / 59), stream(63))
        with pytest.raises(ValueError):
            spectral_candidates(g, SpectralConfig(alpha1=1 / 60), stream(63))

    def test_structural_invariants(self):
        n, alpha1 = 90, 1 / 60
        g = sample_er(GraphParams(n=n, p=0.5, gamma=0.0), stream(64))
        cfg = SpectralConfig(alpha1=alpha1, repeats=2)
        s_star, trace = spectral_candidates(g, cfg, stream(64, "e"))
        rounds = int(math.floor(9 * alpha1 * n))
        assert n - rounds <= s_star.size <= n
        assert trace["chosen_step"] == n - s_star.size
        assert len(trace["paths"]) == 2
        # chosen candidate attains the minimum recorded norm
        all_norms = [v for path in trace["paths"] for v in path["norms"]]
        assert trace["s_star_norm"] == pytest.approx(min(all_norms))

    def test_full_estimate_trims_budget(self):
        n, alpha1 = 80, 1 / 60
        g = sample_er(GraphParams(n=n, p=0.3, gamma=0.0), stream(65))
        rep = robust_estimate(g, alpha1, stream(65, "e"), repeats=1)
        s_star = rep.trace["s_star"]
        s_f = rep.trace["trim"]["s_f"]
        assert s_f.size == s_star.size - int(math.floor(3 * alpha1 * n))
        assert s_f.issubset(s_star)
        assert 0.0 <= rep.estimate <= 1.0

    def test_determinism(self):
        g = sample_er(GraphParams(n=70, p=0.5, gamma=0.0), stream(66))
        a = robust_estimate(g, 1 / 60, stream(66, "e"), repeats=2)
        b = robust_estimate(g, 1 / 60, stream(66, "e"), repeats=2)
        assert a.estimate == b.estimate
        assert a.trace["s_star"] == b.trace["s_star"]

    def test_recovers_sparse_density_under_fill(self):
        # empty graph with one filled node: filtering + trimming must push
        # the estimate to (near) zero even though the mean is ~2/n
        n = 120
        g = AdjacencyMatrix.empty(n)
        out = fill_or_empty_adversary(g, 1.0 / n, "fill", stream(67, "adv"))
        rep = robust_estimate(out.graph, 1.0 / n, stream(67, "e"))
        assert rep.estimate <= 1e-3
        assert mean_estimator(out.graph).estimate == pytest.approx((n - 1) / math.comb(n, 2))

    def test_symmetric_branches(self):
        n = 80
        dense = sample_er(GraphParams(n=n, p=0.9, gamma=0.0), stream(68))
        rep = robust_estimate_symmetric(dense, 1 / 60, stream(68, "e"), repeats=1)
        assert rep.trace["branch"] == "complement"
        assert rep.estimate == pytest.approx(0.9, abs=0.05)
        sparse = sample_er(GraphParams(n=n, p=0.1, gamma=0.0), stream(69))
        rep2 = robust_estimate_symmetric(sparse, 1 / 60, stream(69, "e"), repeats=1)
        assert rep2.trace["branch"] == "direct"
        assert rep2.estimate == pytest.approx(0.1, abs=0.05)

    def test_symmetric_rejects_bad_gamma(self):
        g = AdjacencyMatrix.empty(80)
        with pytest.raises(ValueError, match="gamma"):
            robust_estimate_symmetric(g, 1e-9, stream(70))


def brute_force_reference(a):
    """Independent re-enumeration: minimum exact centered norm over all
    subsets of size >= ceil(n/2); ties by larger size then smaller
    bitmask. Written without reusing the library's enumeration code."""
    n = a.n
    best_key, best_ps = None, None
    for size in range(-(-n // 2), n + 1):
        for sub in itertools.combinations(range(n), size):
            block = a.mat[np.ix_(sub, sub)].astype(float)
            p_s = block.sum() / size**2
            norm = float(np.abs(np.linalg.eigvalsh(block - p_s)).max())
            key = (norm, -size, sum(1 << i for i in sub))
            if best_key is None or key < best_key:
                best_key, best_ps = key, p_s
    return best_ps, best_key


class TestExhaustive:
    def test_against_independent_enumeration(self):
        for t in range(25):
            n = 6 + t % 4
            p = [0.2, 0.5, 0.8][t % 3]
            g = sample_er(GraphParams(n=n, p=p, gamma=0.0), stream(71, t))
            rep = exhaustive_estimate(g)
            ref_ps, ref_key = brute_force_reference(g)
            assert rep.raw_estimate == ref_ps
            assert rep.trace["norm"] == pytest.approx(ref_key[0], abs=1e-12)
            assert rep.trace["bitmask"] == ref_key[2]

    def test_empty_and_complete(self):
        assert exhaustive_estimate(AdjacencyMatrix.empty(6)).estimate == 0.0
        rep = exhaustive_estimate(AdjacencyMatrix.complete(6))
        ref_ps, _ = brute_force_reference(AdjacencyMatrix.complete(6))
        assert rep.raw_estimate == ref_ps

    def test_refuses_large_n(self):
        with pytest.raises(ValueError, match=str(EXHAUSTIVE_MAX_N)):
            exhaustive_estimate(AdjacencyMatrix.empty(EXHAUSTIVE_MAX_N + 1))


class TestRegistry:
    def test_all_names_dispatch(self):
        g = sample_er(GraphParams(n=64, p=0.5, gamma=0.0), stream(72))
        small = sample_er(GraphParams(n=10, p=0.5, gamma=0.0), stream(72, "s"))
        for name in ESTIMATOR_NAMES:
            target = small if name == "exhaustive" else g
            rep = run_named_estimator(
                name, target, stream(72, name), gamma=0.05, repeats=1
            )
            assert 0.0 <= rep.estimate <= 1.0

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown estimator"):
            run_named_estimator("mode", AdjacencyMatrix.empty(5), stream(73))

    def test_gamma_above_cap_clamps(self):
        g = sample_er(GraphParams(n=64, p=0.5, gamma=0.2), stream(74))
        rep = run_named_estimator("spectral", g, stream(74, "e"), gamma=0.2, repeats=1)
        assert rep.trace["alpha1"] == pytest.approx(ALPHA1_MAX)
