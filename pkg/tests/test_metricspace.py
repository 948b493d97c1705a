import numpy as np
import pytest

from conftest import brute_force_lap
from filteropt.errors import ExplorationFailureError
from filteropt.metricspace import (
    FilterMetric,
    build_stepsize_distribution,
    dd_mutation,
    distance_to_step,
    estimate_delta_min,
    explore,
    hamming,
    harmonic_sample,
    lap_metric,
    lap_solve,
    lap_star,
    precision_experiment,
    step_to_distance,
)


def test_hamming_examples():
    assert hamming(np.array([1, 2, 3]), np.array([1, 2, 3])) == 0
    assert hamming(np.array([1, 2, 3]), np.array([1, 2, 4])) == 1
    assert hamming(np.array([1, 2]), np.array([2, 1])) == 2
    with pytest.raises(ValueError):
        hamming(np.array([1]), np.array([1, 2]))


def test_lap_solve_identity_and_ties():
    cost = np.ones((4, 4)) - np.eye(4)
    res = lap_solve(cost)
    assert res.value == 0.0
    assert np.array_equal(res.permutation, np.arange(4))
    flat = lap_solve(np.full((5, 5), 0.7))
    assert flat.value == pytest.approx(5 * 0.7)


def test_lap_solve_matches_brute_force():
    import itertools
    import math

    rng = np.random.default_rng(0)
    for _ in range(50):
        cost = rng.random((5, 5))
        res = lap_solve(cost)
        best = min(
            math.fsum(cost[i, p[i]] for i in range(5))
            for p in itertools.permutations(range(5))
        )
        assert res.value == pytest.approx(best, abs=1e-12)


def test_lap_solve_rejects_non_finite():
    with pytest.raises(ValueError):
        lap_solve(np.array([[1.0, np.nan], [0.0, 1.0]]))


def test_lap_metric_vs_brute_force(metric_d1, metric_d2):
    rng = np.random.default_rng(1)
    for metric in (metric_d1, metric_d2):
        for _ in range(100):
            x = rng.integers(0, metric.size, 5)
            y = rng.integers(0, metric.size, 5)
            assert lap_metric(metric, x, y) == pytest.approx(
                brute_force_lap(metric, x, y), abs=1e-9)


def test_lap_metric_permutation_invariance(metric_d1):
    rng = np.random.default_rng(2)
    for _ in range(50):
        x = rng.integers(0, metric_d1.size, 8)
        shuffled = rng.permutation(x)
        assert lap_metric(metric_d1, x, shuffled) == 0.0
        assert lap_metric(metric_d1, x, x) == 0.0


def test_lap_metric_axioms_on_triples(metric_d1, metric_d2):
    rng = np.random.default_rng(3)
    for metric in (metric_d1, metric_d2):
        for _ in range(300):
            x = rng.integers(0, metric.size, 8)
            y = rng.integers(0, metric.size, 8)
            z = rng.integers(0, metric.size, 8)
            dxy = lap_metric(metric, x, y)
            assert dxy >= 0.0
            assert dxy == pytest.approx(lap_metric(metric, y, x), abs=1e-9)
            assert lap_metric(metric, x, z) <= dxy + lap_metric(metric, y, z) + 1e-9


def test_lap_star_consistency(metric_d1):
    rng = np.random.default_rng(4)
    for _ in range(50):
        x = rng.integers(0, metric_d1.size, 8)
        y = rng.integers(0, metric_d1.size, 8)
        res = lap_star(metric_d1, x, y)
        assert res.value == pytest.approx(lap_metric(metric_d1, x, y), abs=1e-12)
        direct = sum(metric_d1.dist(x[i], y[res.permutation[i]]) for i in range(8))
        assert direct == pytest.approx(res.value, abs=1e-12)
        assert sorted(res.permutation) == list(range(8))
    same = lap_star(metric_d1, x, x)
    assert same.value == 0.0


def test_two_filter_delta_min():
    metric = FilterMetric("d1", np.array([0.0, 0.25]))
    points = np.array([[0, 0, 1], [1, 1, 1]])
    assert estimate_delta_min(metric, points) == pytest.approx(0.25)


def test_explore_desk_scales(library, ctx_d1, ctx_d2):
    from filteropt.metricspace import REACH_SAFETY, greedy_reach, metric_for
    from filteropt.seeding import rng_from

    for ctx in (ctx_d1, ctx_d2):
        assert ctx.delta_min_hat < ctx.delta_max_hat
        assert ctx.gamma > 0
        # gamma saturates the step map at the damped smallest greedy reach
        metric = metric_for(library, ctx.metric_id)
        points = rng_from(ctx.seed, 31).integers(0, metric.size, size=(ctx.R, 8))
        reaches = [greedy_reach(metric, p) for p in points]
        assert ctx.delta_max_hat == pytest.approx(max(reaches), rel=1e-12)
        cal = REACH_SAFETY * min(reaches)
        assert distance_to_step(cal, ctx.gamma) == pytest.approx(1 - 1e-5, abs=1e-12)


def test_explore_deterministic(library):
    a = explore(library, "d1", R=5, m=8, seed=13)
    b = explore(library, "d1", R=5, m=8, seed=13)
    assert a.delta_min_hat == b.delta_min_hat
    assert a.delta_max_hat == b.delta_max_hat
    assert a.gamma == b.gamma


def test_explore_degenerate_library_fails():
    metric_zero = FilterMetric("d1", np.zeros(4))
    with pytest.raises(ExplorationFailureError):
        # duplicate features make every nearest distance zero
        from filteropt.metricspace import MetricContext

        MetricContext("d1", 0.0, 0.0, 1.0, 1, 0, metric_zero)


def test_stepsize_uniform_case():
    dist = build_stepsize_distribution(0.5)
    assert dist.rate == 0.0
    samples = dist.sample(np.random.default_rng(0), 100_000)
    # KS distance against the uniform CDF
    xs = np.sort(samples)
    ks = np.max(np.abs(xs - (np.arange(1, len(xs) + 1) - 0.5) / len(xs)))
    assert ks < 0.01


def test_stepsize_rate_matches_bisection_oracle():
    def mean_of(rate):
        return 1.0 / rate - 1.0 / np.expm1(rate)

    lo, hi = 1e-6, 200.0
    for _ in range(200):  # independent bisection on the mean equation
        mid = 0.5 * (lo + hi)
        if mean_of(mid) > 0.1:
            lo = mid
        else:
            hi = mid
    oracle = 0.5 * (lo + hi)
    dist = build_stepsize_distribution(0.1)
    assert dist.rate == pytest.approx(oracle, abs=1e-6)
    assert abs(mean_of(dist.rate) - 0.1) < 1e-10


def test_stepsize_empirical_mean():
    for m in (0.1, 0.3, 0.7):
        dist = build_stepsize_distribution(m)
        samples = dist.sample(np.random.default_rng(1), 100_000)
        se = samples.std() / np.sqrt(len(samples))
        assert abs(samples.mean() - m) < 3 * se
        assert samples.min() > 0.0 and samples.max() < 1.0


def test_stepsize_rejects_bad_mean():
    for m in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(ValueError):
            build_stepsize_distribution(m)


def test_step_distance_round_trip():
    rng = np.random.default_rng(5)
    gamma = 9.66
    for _ in range(100):
        d0 = rng.uniform(1e-4, 0.3)
        s = distance_to_step(d0, gamma)
        assert step_to_distance(s, gamma) == pytest.approx(d0, rel=1e-12)
    assert step_to_distance(1 - np.exp(-1.0), gamma) == pytest.approx(1 / gamma, rel=1e-12)
    assert step_to_distance(1e-12, gamma) < 1e-5


def test_step_to_distance_domain():
    for s in (0.0, 1.0, -0.1, 2.0):
        with pytest.raises(ValueError):
            step_to_distance(s, 1.0)


def test_harmonic_sample_distribution():
    rng = np.random.default_rng(6)
    assert all(harmonic_sample(1, rng) == 1 for _ in range(10))
    n = 3
    expected = np.array([1.0, 1 / 2, 1 / 3])
    expected /= expected.sum()
    assert expected == pytest.approx(np.array([6, 3, 2]) / 11)
    draws = np.array([harmonic_sample(n, rng) for _ in range(100_000)])
    freq = np.bincount(draws, minlength=n + 1)[1:] / len(draws)
    se = np.sqrt(expected * (1 - expected) / len(draws))
    assert np.all(np.abs(freq - expected) < 3 * se + 1e-12)


def test_dd_mutation_zero_budget_returns_parent(metric_d1, ctx_d1):
    rng = np.random.default_rng(7)
    parent = rng.integers(0, metric_d1.size, 8)
    child = dd_mutation(parent, metric_d1, ctx_d1.delta_min_hat / 100.0, rng, budget=0)
    assert np.array_equal(child, parent)


def test_dd_mutation_deterministic(metric_d1, ctx_d1):
    parent = np.arange(8)
    target = ctx_d1.delta_max_hat / 10
    a = dd_mutation(parent, metric_d1, target, np.random.default_rng(8))
    b = dd_mutation(parent, metric_d1, target, np.random.default_rng(8))
    assert np.array_equal(a, b)


def test_dd_mutation_budget_audit(metric_d1, ctx_d1):
    parent = np.arange(8)
    target = ctx_d1.delta_max_hat / 5
    child, stats = dd_mutation(parent, metric_d1, target, np.random.default_rng(9),
                               budget=200, offspring=5, return_stats=True)
    assert stats.lap_evals <= 200
    if not stats.exact_hit:
        assert stats.lap_evals >= (200 // 5) * 5 - 5
    assert stats.achieved == pytest.approx(lap_metric(metric_d1, parent, child), abs=1e-12)


def test_dd_mutation_rejects_nonpositive_target(metric_d1):
    with pytest.raises(ValueError):
        dd_mutation(np.arange(8), metric_d1, 0.0, np.random.default_rng(0))


def test_precision_experiment_quick(ctx_d1):
    summary = precision_experiment(ctx_d1, m=8, grid_points=10, repeats=3, seed=5)
    assert len(summary.mean_deviation) == 10
    assert np.all(summary.mean_deviation < 0.05)
    assert summary.median_of_means <= 1e-2
