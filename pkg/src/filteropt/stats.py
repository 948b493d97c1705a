"""Statistical tests and the neighborhood-flatness experiment.

Welch's unequal-variance t-test and the Mann-Whitney U rank test are
implemented from scratch (normal CDF through erfc, t CDF through a
continued-fraction incomplete beta) so the package carries no runtime
dependency on a stats library; the test suite validates them against
independent oracles.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .instrument import SimulatorConfig, evaluate
from .metricspace import MetricContext, dd_mutation
from .seeding import derive_seed, rng_from
from .spectra import FilterLibrary

__all__ = [
    "TestResult",
    "NeighborhoodReport",
    "welch_test",
    "mwu_test",
    "neighborhood_experiment",
    "save_neighborhood_report",
    "normal_cdf",
    "student_t_two_sided_p",
]

_SALT_PARENT = 41
_SALT_PARENT_EVAL = 43
_SALT_MUTANT = 47
_SALT_MUTANT_EVAL = 53


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    degrees_of_freedom: float = math.nan


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def _betacf(a: float, b: float, x: float) -> float:
    # Lentz continued fraction for the incomplete beta function.
    fpmin = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 3e-16:
            break
    return h


def _betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_bt = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    bt = math.exp(ln_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: float) -> float:
    """P(|T_df| >= |t|) for the Student t distribution."""
    if df <= 0.0 or math.isnan(t):
        return math.nan
    if math.isinf(t):
        return 0.0
    return _betainc(df / 2.0, 0.5, df / (df + t * t))


def welch_test(a, b) -> TestResult:
    """Two-sided Welch unequal-variances t-test.

    Degenerate variances use the documented conventions: identical constant
    samples give p = 1, constant-but-different samples give p = 0.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise ValueError("both samples need at least 2 observations")
    mean_a, mean_b = a.mean(), b.mean()
    se_a = a.var(ddof=1) / len(a)
    se_b = b.var(ddof=1) / len(b)
    pooled = se_a + se_b
    if pooled == 0.0:
        if mean_a == mean_b:
            return TestResult(statistic=0.0, p_value=1.0)
        return TestResult(statistic=math.copysign(math.inf, mean_a - mean_b), p_value=0.0)
    t = (mean_a - mean_b) / math.sqrt(pooled)
    df = pooled**2 / (se_a**2 / (len(a) - 1) + se_b**2 / (len(b) - 1))
    return TestResult(statistic=t, p_value=student_t_two_sided_p(t, df), degrees_of_freedom=df)


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


@lru_cache(maxsize=64)
def _exact_u_cdf(n1: int, n2: int) -> np.ndarray:
    """cdf[u] = P(U <= u) for the tie-free null distribution of U.

    Classic counting recurrence f(n1, n2, u) = f(n1-1, n2, u-n2) +
    f(n1, n2-1, u) over arrangements of the pooled sample.
    """

    @lru_cache(maxsize=None)
    def f(m: int, n: int, u: int) -> float:
        if u < 0:
            return 0.0
        if m == 0 or n == 0:
            return 1.0 if u == 0 else 0.0
        return f(m - 1, n, u - n) + f(m, n - 1, u)

    pmf = np.array([f(n1, n2, u) for u in range(n1 * n2 + 1)])
    f.cache_clear()
    pmf /= math.comb(n1 + n2, n1)
    return np.cumsum(pmf)


def mwu_test(a, b, alternative: str = "two_sided") -> TestResult:
    """Mann-Whitney U rank test with midrank tie handling.

    Exact enumeration when both samples are small and tie-free, otherwise
    the tie-corrected normal approximation with continuity correction.
    `alternative='less'` asks whether `a` is stochastically less than `b`.
    """
    if alternative not in ("two_sided", "less"):
        raise ValueError(f"unsupported alternative {alternative!r}")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n1, n2 = len(a), len(b)
    if n1 < 1 or n2 < 1:
        raise ValueError("both samples must be nonempty")
    combined = np.concatenate([a, b])
    ranks = _midranks(combined)
    r1 = ranks[:n1].sum()
    u1 = r1 - n1 * (n1 + 1) / 2.0

    _, tie_counts = np.unique(combined, return_counts=True)
    has_ties = np.any(tie_counts > 1)

    if not has_ties and max(n1, n2) <= 20:
        cdf = _exact_u_cdf(n1, n2)
        u_int = int(round(u1))
        p_less = cdf[u_int]
        p_greater = 1.0 - (cdf[u_int - 1] if u_int > 0 else 0.0)
        if alternative == "less":
            p = p_less
        else:
            p = min(1.0, 2.0 * min(p_less, p_greater))
        return TestResult(statistic=u1, p_value=float(p))

    n = n1 + n2
    tie_term = float(((tie_counts**3 - tie_counts).sum()) / (n * (n - 1))) if n > 1 else 0.0
    sd = math.sqrt(n1 * n2 / 12.0 * ((n + 1.0) - tie_term))
    if sd == 0.0:
        return TestResult(statistic=u1, p_value=1.0)
    mu = n1 * n2 / 2.0
    p_less = normal_cdf((u1 - mu + 0.5) / sd)
    p_greater = 1.0 - normal_cdf((u1 - mu - 0.5) / sd)
    if alternative == "less":
        p = p_less
    else:
        p = min(1.0, 2.0 * min(p_less, p_greater))
    return TestResult(statistic=u1, p_value=float(p))


@dataclass(frozen=True)
class NeighborhoodReport:
    """Pairwise Welch p-values between parents and their near mutants."""

    metric_choice: str
    p_matrix: np.ndarray
    threshold: float
    rejection_fraction: float
    parents: np.ndarray
    mutants: np.ndarray

    def summary_dict(self) -> dict:
        return {
            "metric_choice": self.metric_choice,
            "n": int(self.p_matrix.shape[0]),
            "threshold": self.threshold,
            "rejection_fraction": self.rejection_fraction,
        }


def neighborhood_experiment(
    lib: FilterLibrary,
    cfg: SimulatorConfig,
    K: int,
    metric_choice: str,
    n: int,
    seed: int,
    ctx: MetricContext | None = None,
    mutation_budget: int = 1000,
    mutation_offspring: int = 5,
    mutation_retries: int = 10,
) -> NeighborhoodReport:
    """How many statistically distinct candidates sit in tiny neighborhoods.

    For each of n uniform parents, n mutants are built: either single-
    component replacements (`metric_choice='hamming'`) or distance-driven
    mutants at an assignment distance drawn uniformly from 10..15 times the
    explored minimum scale. Each (parent, mutant) pair is compared through
    Welch's test on K squared-deviation draws, with the Bonferroni
    threshold 0.05/n^2 deciding rejections.
    """
    if metric_choice not in ("hamming", "d1", "d2"):
        raise ValueError(f"metric_choice must be 'hamming', 'd1' or 'd2', got {metric_choice!r}")
    if metric_choice != "hamming" and ctx is None:
        raise ValueError("distance-driven arms need an explored MetricContext")

    m = cfg.M
    size = lib.size
    parents = np.empty((n, m), dtype=np.int64)
    mutants = np.empty((n, n, m), dtype=np.int64)
    p_matrix = np.empty((n, n))

    for i in range(n):
        rng_i = rng_from(seed, _SALT_PARENT, i)
        parent = rng_i.integers(0, size, size=m)
        parents[i] = parent
        parent_samples = evaluate(parent, K, cfg, lib, derive_seed(seed, _SALT_PARENT_EVAL, i)).samples
        for j in range(n):
            rng_ij = rng_from(seed, _SALT_MUTANT, i, j)
            if metric_choice == "hamming":
                mutant = parent.copy()
                k = j % m
                shift = int(rng_ij.integers(1, size))
                mutant[k] = (parent[k] + shift) % size
            else:
                target = float(rng_ij.uniform(10.0 * ctx.delta_min_hat, 15.0 * ctx.delta_min_hat))
                mutant = dd_mutation(
                    parent, ctx.metric, target, rng_ij,
                    mutation_budget, mutation_offspring, mutation_retries,
                )
            mutants[i, j] = mutant
            mutant_samples = evaluate(mutant, K, cfg, lib, derive_seed(seed, _SALT_MUTANT_EVAL, i, j)).samples
            p_matrix[i, j] = welch_test(parent_samples, mutant_samples).p_value

    threshold = 0.05 / (n * n)
    rejection_fraction = float(np.mean(p_matrix < threshold))
    return NeighborhoodReport(
        metric_choice=metric_choice,
        p_matrix=p_matrix,
        threshold=threshold,
        rejection_fraction=rejection_fraction,
        parents=parents,
        mutants=mutants,
    )


def save_neighborhood_report(report: NeighborhoodReport, csv_path) -> None:
    """CSV of (i, j, p) cells plus a JSON summary sharing the stem."""
    csv_path = Path(csv_path)
    n = report.p_matrix.shape[0]
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "p"])
        for i in range(n):
            for j in range(n):
                writer.writerow([i, j, repr(float(report.p_matrix[i, j]))])
    csv_path.with_suffix(".json").write_text(
        json.dumps(report.summary_dict(), indent=2, sort_keys=True))
