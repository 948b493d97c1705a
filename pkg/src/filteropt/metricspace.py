"""Metrics on candidate selections and the distance-driven mutation.

A candidate is a length-M integer vector of library indices. Because the
simulator ignores component order, candidates are compared through the
assignment metric: the minimum, over all component permutations, of summed
filter distances. Both filter metrics are absolute differences of scalar
per-filter features, so the assignment optimum reduces to matching the two
sorted feature lists; ``lap_solve`` keeps the general exact solver for
arbitrary cost matrices and for verification.

The mutation operator walks the library's distance-ordered filter lists to
place a child at a prescribed assignment distance from its parent, spending
a fixed budget of assignment evaluations and nothing else.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment

from .errors import ExplorationFailureError
from .seeding import rng_from
from .spectra import FilterLibrary

__all__ = [
    "FilterMetric",
    "MetricContext",
    "AssignmentResult",
    "StepSizeDistribution",
    "DDMutationStats",
    "metric_for",
    "hamming",
    "lap_solve",
    "lap_metric",
    "lap_star",
    "explore",
    "build_stepsize_distribution",
    "step_to_distance",
    "distance_to_step",
    "harmonic_sample",
    "dd_mutation",
    "precision_experiment",
    "PrecisionSummary",
]

_SALT_EXPLORE = 31
_SALT_PRECISION = 37

# gamma pins tau to 1 - TAU_TAIL at the calibration distance, so the top of
# the unit interval maps onto the largest distances the mutation operator is
# asked to realize.
TAU_TAIL = 1e-5

# The calibration distance is the smallest per-point greedy reach among the
# explored points, damped by this factor. Calibrating against delta_max_hat
# (the maximum over points) would map step sizes near 1 to distances that
# many parents cannot reach at all, since per-parent maxima vary widely;
# even the damped minimum leaves near-corner targets for unlucky parents,
# so the damping is generous.
REACH_SAFETY = 0.5

# Uniform single-component kicks applied to a stalled incumbent before
# falling back to a full restart from the parent.
_STALL_KICKS = 3


@dataclass(eq=False)
class FilterMetric:
    """Filter-level metric d(i, j) = |feature_i - feature_j|."""

    metric_id: str
    features: np.ndarray

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.size = len(self.features)
        self._order_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def dist(self, i: int, j: int) -> float:
        return abs(float(self.features[i] - self.features[j]))

    def distances_from(self, anchor: int) -> np.ndarray:
        return np.abs(self.features - self.features[anchor])

    def cost_matrix(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        fx = self.features[np.asarray(x)]
        fy = self.features[np.asarray(y)]
        return np.abs(fx[:, None] - fy[None, :])

    def ordered_by_distance(self, anchor: int) -> tuple[np.ndarray, np.ndarray]:
        """All filter ids sorted by distance to `anchor` (ties by id).

        Returns (ids, ranks): ids[r] is the filter at rank r, ranks[j] the
        rank of filter j. Cached per anchor; the arrays are read-only.
        """
        anchor = int(anchor)
        cached = self._order_cache.get(anchor)
        if cached is None:
            dists = self.distances_from(anchor)
            ids = np.lexsort((np.arange(self.size), dists))
            ranks = np.empty(self.size, dtype=np.int64)
            ranks[ids] = np.arange(self.size)
            cached = (ids, ranks)
            self._order_cache[anchor] = cached
        return cached

    def nearest_other_distances(self) -> np.ndarray:
        """Distance from each filter to its nearest distinct filter."""
        order = np.argsort(self.features, kind="stable")
        sorted_f = self.features[order]
        gaps = np.diff(sorted_f)
        nn_sorted = np.empty(self.size)
        nn_sorted[0] = gaps[0]
        nn_sorted[-1] = gaps[-1]
        if self.size > 2:
            nn_sorted[1:-1] = np.minimum(gaps[:-1], gaps[1:])
        nn = np.empty(self.size)
        nn[order] = nn_sorted
        return nn


def metric_for(lib: FilterLibrary, metric_id: str) -> FilterMetric:
    if metric_id == "d1":
        return FilterMetric("d1", lib.d1_features())
    if metric_id == "d2":
        return FilterMetric("d2", lib.d2_features())
    raise ValueError(f"unknown metric_id {metric_id!r}, expected 'd1' or 'd2'")


@dataclass(eq=False)
class MetricContext:
    """Explored scale of a candidate space under one filter metric."""

    metric_id: str
    delta_min_hat: float
    delta_max_hat: float
    gamma: float
    R: int
    seed: int
    metric: FilterMetric = field(repr=False)

    def __post_init__(self):
        if not self.delta_min_hat < self.delta_max_hat:
            raise ExplorationFailureError(
                f"scale estimates collapsed: delta_min_hat={self.delta_min_hat} "
                f">= delta_max_hat={self.delta_max_hat}"
            )
        if not self.gamma > 0:
            raise ExplorationFailureError(f"gamma must be positive, got {self.gamma}")

    def to_json_dict(self) -> dict:
        return {
            "metric_id": self.metric_id,
            "delta_min_hat": self.delta_min_hat,
            "delta_max_hat": self.delta_max_hat,
            "gamma": self.gamma,
            "R": self.R,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class AssignmentResult:
    """Optimal assignment between two candidates: x_i is matched to y_perm[i]."""

    permutation: np.ndarray
    value: float


def hamming(x: np.ndarray, y: np.ndarray) -> int:
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    return int(np.count_nonzero(x != y))


def lap_solve(cost: np.ndarray) -> AssignmentResult:
    """Exact minimum-cost assignment for an arbitrary square cost matrix."""
    cost = np.asarray(cost, dtype=float)
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix must contain only finite entries")
    rows, cols = linear_sum_assignment(cost)
    return AssignmentResult(permutation=cols, value=float(cost[rows, cols].sum()))


def lap_metric(metric: FilterMetric, x: np.ndarray, y: np.ndarray) -> float:
    """Minimum over permutations of summed filter distances.

    For absolute-difference costs the optimum matches the two sorted
    feature lists, so no assignment search is needed.
    """
    fx = np.sort(metric.features[np.asarray(x)])
    fy = np.sort(metric.features[np.asarray(y)])
    return float(np.abs(fx - fy).sum())


def lap_star(metric: FilterMetric, x: np.ndarray, y: np.ndarray) -> AssignmentResult:
    """As `lap_metric` but also returns one minimizing permutation."""
    fx = metric.features[np.asarray(x)]
    fy = metric.features[np.asarray(y)]
    ix = np.argsort(fx, kind="stable")
    iy = np.argsort(fy, kind="stable")
    perm = np.empty(len(ix), dtype=np.int64)
    perm[ix] = iy
    value = float(np.abs(fx[ix] - fy[iy]).sum())
    return AssignmentResult(permutation=perm, value=value)


def estimate_delta_min(metric: FilterMetric, points: np.ndarray) -> float:
    """Mean over points of the smallest single-component move distance."""
    nn = metric.nearest_other_distances()
    return float(np.mean([nn[p].min() for p in points]))


def greedy_reach(metric: FilterMetric, point: np.ndarray) -> float:
    """Assignment distance from `point` to its component-wise
    farthest-filter candidate (a lower bound on the point's max reach)."""
    f = metric.features
    lo_id = int(np.argmin(f))
    hi_id = int(np.argmax(f))
    far = np.where(f[hi_id] - f[point] >= f[point] - f[lo_id], hi_id, lo_id)
    return lap_metric(metric, point, far)


def estimate_delta_max(metric: FilterMetric, points: np.ndarray) -> float:
    """Max over points of the greedy reach (a space-diameter lower bound)."""
    return max(greedy_reach(metric, p) for p in points)


def explore(lib: FilterLibrary, metric_id: str, R: int, m: int, seed: int) -> MetricContext:
    """Estimate the candidate-space distance scale from R random points.

    delta_min_hat carries a 100x safety factor over the mean smallest
    move; delta_max_hat is the largest greedy reach among the points.
    gamma saturates the unit-interval map at the damped smallest greedy
    reach, so every step size maps to a typically realizable distance.
    """
    if R < 1:
        raise ValueError("R must be >= 1")
    metric = metric_for(lib, metric_id)
    rng = rng_from(seed, _SALT_EXPLORE)
    points = rng.integers(0, metric.size, size=(R, m))

    delta_min_tilde = estimate_delta_min(metric, points)
    if delta_min_tilde <= 0.0:
        raise ExplorationFailureError("all sampled component distances are zero")
    delta_min_hat = 100.0 * delta_min_tilde
    reaches = [greedy_reach(metric, p) for p in points]
    delta_max_hat = max(reaches)
    gamma = float(np.sqrt(-np.log(TAU_TAIL)) / (REACH_SAFETY * min(reaches)))
    return MetricContext(
        metric_id=metric_id,
        delta_min_hat=delta_min_hat,
        delta_max_hat=delta_max_hat,
        gamma=gamma,
        R=R,
        seed=seed,
        metric=metric,
    )


def _truncated_exp_mean(rate: float) -> float:
    # mean of p(s) = rate * exp(-rate*s) / (1 - exp(-rate)) on (0, 1)
    if abs(rate) < 1e-12:
        return 0.5
    if rate > 700.0:
        return 1.0 / rate
    return 1.0 / rate - 1.0 / np.expm1(rate)


@dataclass(frozen=True)
class StepSizeDistribution:
    """Maximum-entropy distribution on (0, 1) with a fixed mean.

    Realized as a truncated exponential; rate 0 is the uniform case.
    """

    mean: float
    rate: float

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray | float:
        u = rng.random(size)
        if self.rate == 0.0:
            return u
        return -np.log1p(u * np.expm1(-self.rate)) / self.rate

    def pdf(self, s) -> np.ndarray | float:
        s = np.asarray(s, dtype=float)
        if self.rate == 0.0:
            return np.ones_like(s)
        return self.rate * np.exp(-self.rate * s) / -np.expm1(-self.rate)


def build_stepsize_distribution(m: float) -> StepSizeDistribution:
    """Solve the rate so the truncated exponential on (0,1) has mean m."""
    if not 0.0 < m < 1.0:
        raise ValueError(f"mean must lie in (0, 1), got {m}")
    if abs(m - 0.5) < 1e-13:
        return StepSizeDistribution(mean=m, rate=0.0)
    # mean < 0.5 needs a positive rate; the m > 0.5 case mirrors to 1 - m.
    target = min(m, 1.0 - m)
    rate = brentq(lambda lam: _truncated_exp_mean(lam) - target, 1e-9, 20.0 / target, xtol=1e-14)
    if m > 0.5:
        rate = -rate
    dist = StepSizeDistribution(mean=m, rate=float(rate))
    assert abs(_truncated_exp_mean(dist.rate) - m) < 1e-10
    return dist


def step_to_distance(s: float, gamma: float) -> float:
    """Inverse of tau(d) = 1 - exp(-(gamma*d)^2): unit step size to distance."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"step size must lie in (0, 1), got {s}")
    return float(np.sqrt(-np.log1p(-s)) / gamma)


def distance_to_step(d: float, gamma: float) -> float:
    """tau(d): distance to unit-interval step size."""
    return float(-np.expm1(-((gamma * d) ** 2)))


@lru_cache(maxsize=None)
def _harmonic_cumsum(n: int) -> np.ndarray:
    return np.cumsum(1.0 / np.arange(1, n + 1))


def harmonic_sample(list_length: int, rng: np.random.Generator) -> int:
    """Rank in 1..n drawn with probability proportional to 1/rank."""
    if list_length < 1:
        raise ValueError("list_length must be >= 1")
    if list_length == 1:
        return 1
    cum = _harmonic_cumsum(list_length)
    return int(np.searchsorted(cum, rng.random() * cum[-1], side="right")) + 1


@dataclass(frozen=True)
class DDMutationStats:
    """Audit record of one distance-driven mutation."""

    lap_evals: int
    rounds: int
    exact_hit: bool
    achieved: float
    restarts: int = 0


# A round with no accepted child while the incumbent is still this far
# (relatively) from the target marks a stalled walk. Collapsed states --
# all components on one filter near the parent's feature median -- admit
# no single-component move that shrinks |v - target|, so the walk restarts
# from the parent instead of burning the remaining budget in place.
_STALL_RELATIVE_GAP = 0.02


def dd_mutation(
    x0: np.ndarray,
    metric: FilterMetric,
    target: float,
    rng: np.random.Generator,
    budget: int = 1000,
    offspring: int = 5,
    retries: int = 10,
    return_stats: bool = False,
):
    """Locate a candidate at assignment distance ~target from x0.

    A (1+lambda)-style search over children built by replacing one
    component at a time: filters are ranked by distance to the parent's
    component, and a harmonic draw moves the current filter toward lower
    ranks when the incumbent overshoots the target or higher ranks when it
    undershoots. Each child costs one assignment evaluation; the budget
    caps those evaluations, and only assignment evaluations are spent
    here. The best state across stall restarts is returned.
    """
    if target <= 0.0:
        raise ValueError(f"target distance must be positive, got {target}")
    x0 = np.asarray(x0, dtype=np.int64)
    m = len(x0)
    size = metric.size
    feats = metric.features
    fx0 = feats[x0]
    ix0 = np.argsort(fx0, kind="stable")
    fx0_sorted = fx0[ix0]

    x_cur = x0.copy()
    pi_cur = np.arange(m)
    v_cur = 0.0
    x_best, v_best = x_cur, v_cur
    lap_evals = 0
    restarts = 0
    stalls = 0
    rounds = 0

    while lap_evals + offspring <= budget:
        rounds += 1
        x_next, pi_next, v_next = x_cur, pi_cur, v_cur
        improved = False
        for _ in range(offspring):
            y = x_cur.copy()
            for _ in range(retries):
                k = int(rng.integers(m))
                ids, ranks = metric.ordered_by_distance(x0[k])
                slot = pi_cur[k]
                pos = int(ranks[x_cur[slot]])
                if pos != 0 and v_cur > target:
                    y[slot] = ids[pos - harmonic_sample(pos, rng)]
                if pos != size - 1 and v_cur < target:
                    y[slot] = ids[pos + harmonic_sample(size - 1 - pos, rng)]
                if y[slot] != x_cur[slot]:
                    break
            fy = feats[y]
            iy = np.argsort(fy, kind="stable")
            v_y = float(np.abs(fx0_sorted - fy[iy]).sum())
            lap_evals += 1
            if v_y == target:
                if return_stats:
                    return y, DDMutationStats(lap_evals, rounds, True, v_y, restarts)
                return y
            if abs(v_y - target) < abs(v_cur - target):
                pi_y = np.empty(m, dtype=np.int64)
                pi_y[ix0] = iy
                x_next, pi_next, v_next = y, pi_y, v_y
                improved = True
        x_cur, pi_cur, v_cur = x_next, pi_next, v_next
        if abs(v_cur - target) < abs(v_best - target):
            x_best, v_best = x_cur, v_cur
        if improved:
            stalls = 0
        elif abs(v_cur - target) > _STALL_RELATIVE_GAP * target:
            stalls += 1
            if stalls <= _STALL_KICKS and lap_evals < budget:
                # kick one component off the stalled configuration
                kicked = x_cur.copy()
                kicked[int(rng.integers(m))] = int(rng.integers(size))
                fy = feats[kicked]
                iy = np.argsort(fy, kind="stable")
                pi_kick = np.empty(m, dtype=np.int64)
                pi_kick[ix0] = iy
                x_cur, pi_cur = kicked, pi_kick
                v_cur = float(np.abs(fx0_sorted - fy[iy]).sum())
                lap_evals += 1
            else:
                x_cur, pi_cur, v_cur = x0.copy(), np.arange(m), 0.0
                stalls = 0
                restarts += 1

    if return_stats:
        return x_best, DDMutationStats(lap_evals, rounds, False, v_best, restarts)
    return x_best


@dataclass(frozen=True)
class PrecisionSummary:
    """Per-target mean relative deviations of the mutation operator."""

    step_sizes: np.ndarray
    distances: np.ndarray
    mean_deviation: np.ndarray
    median_of_means: float


def precision_experiment(
    ctx: MetricContext,
    m: int,
    grid_points: int = 100,
    repeats: int = 10,
    seed: int = 0,
    budget: int = 1000,
    offspring: int = 5,
    retries: int = 10,
) -> PrecisionSummary:
    """Mutation-precision sweep over a grid of unit-interval step sizes.

    Each step size maps to a target distance; `repeats` random parents are
    mutated toward it and the relative deviation |achieved - target|/target
    is averaged per target.
    """
    metric = ctx.metric
    steps = np.linspace(1e-4, 1.0 - 1e-5, grid_points)
    distances = np.array([step_to_distance(s, ctx.gamma) for s in steps])
    means = np.empty(grid_points)
    for i, target in enumerate(distances):
        devs = np.empty(repeats)
        for j in range(repeats):
            rng = rng_from(seed, _SALT_PRECISION, i, j)
            parent = rng.integers(0, metric.size, size=m)
            child = dd_mutation(parent, metric, target, rng, budget, offspring, retries)
            devs[j] = abs(lap_metric(metric, parent, child) - target) / target
        means[i] = devs.mean()
    return PrecisionSummary(
        step_sizes=steps,
        distances=distances,
        mean_deviation=means,
        median_of_means=float(np.median(means)),
    )
