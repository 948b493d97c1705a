import numpy as np
import pytest

from filteropt.errors import InvalidConfigurationError, NotRepresentableError
from filteropt.instrument import (
    SimulatorConfig,
    distinct_count,
    draw_d_samples,
    evaluate,
    phi1_inverse_check,
    phi2,
    sample_D,
    tradeoff_bound,
)
from filteropt.seeding import derive_seed

# measured on the desk library: genes of A have both squared mean and
# variance of the deviation strictly below those of B
DOMINATING = np.array([159, 58, 189, 176, 113, 130, 112, 199])
DOMINATED = np.array([4, 84, 44, 40, 96, 95, 4, 192])


def zero_noise_config():
    return SimulatorConfig(c_star=1.0, photon_noise_alpha=0.0, read_noise_sigma=0.0,
                           gain=30000.0, N=64, M=8)


def test_phi2_even_split_paper_constants():
    genes = np.arange(16)
    w = phi2(genes, 640)
    assert w.sum() == 640
    assert np.all(w[w > 0] == 40)


def test_phi2_remainder():
    w = phi2(np.array([5, 9, 2]), 7)
    assert w[5] == 3 and w[9] == 2 and w[2] == 2
    assert w.sum() == 7


def test_phi2_duplicate_accumulation():
    w = phi2(np.array([4, 4]), 4)
    assert w[4] == 4
    assert w.sum() == 4


def test_phi2_pattern_random():
    rng = np.random.default_rng(1)
    for _ in range(50):
        m = int(rng.integers(1, 12))
        n = int(rng.integers(m, 5 * m))
        genes = rng.integers(0, 50, size=m)
        w = phi2(genes, n)
        assert w.sum() == n
        assert np.count_nonzero(w) <= m


def test_phi1_inverse_round_trip():
    rng = np.random.default_rng(2)
    for _ in range(100):
        m = int(rng.integers(2, 10))
        n = int(rng.integers(m, 6 * m))
        genes = rng.integers(0, 40, size=m)
        w = phi2(genes, n)
        recovered = phi1_inverse_check(w, m, n)
        assert len(recovered) == m
        assert set(recovered.tolist()) == set(genes.tolist())
        assert np.array_equal(phi2(recovered, n), w)


def test_phi1_inverse_single_filter():
    w = np.zeros(30, dtype=int)
    w[17] = 64
    recovered = phi1_inverse_check(w, 8, 64)
    assert np.all(recovered == 17)
    assert len(recovered) == 8


def test_phi1_inverse_too_many_filters():
    w = np.ones(9, dtype=int)
    with pytest.raises(NotRepresentableError):
        phi1_inverse_check(w, 8, 9)


def test_distinct_count():
    assert distinct_count(np.array([3, 3, 3])) == 1
    assert distinct_count(np.array([1, 2, 3, 4])) == 4
    assert distinct_count(np.array([1, 1, 2, 3])) == 3


def test_sample_D_zero_noise_exact(library):
    cfg = zero_noise_config()
    rng = np.random.default_rng(3)
    for _ in range(10):
        genes = rng.integers(0, library.size, 8)
        d, failed = sample_D(genes, cfg, library, 123)
        assert d == 0.0
        assert not failed


def test_sample_D_deterministic(library, sim_config):
    genes = np.arange(8)
    a = sample_D(genes, sim_config, library, 999)
    b = sample_D(genes, sim_config, library, 999)
    assert a == b


def test_sample_D_flags_singular_fit(library, sim_config):
    d, failed = sample_D(np.full(8, 3), sim_config, library, 1)
    assert failed
    assert d == 1.0


def test_sample_D_gaussian_at_desk_noise(library, sim_config):
    from scipy import stats as sps

    base = DOMINATING
    draws = draw_d_samples(base, 10_000, sim_config, library, 101)
    _, p = sps.normaltest(draws)
    assert p > 0.01


def test_evaluate_zero_noise(library):
    cfg = zero_noise_config()
    rng = np.random.default_rng(4)
    for _ in range(5):
        genes = rng.integers(0, library.size, 8)
        assert evaluate(genes, 3, cfg, library, 5).estimate == 0.0


def test_evaluate_k1_and_mean_consistency(library, sim_config):
    genes = np.arange(8)
    single = evaluate(genes, 1, sim_config, library, 42)
    assert single.estimate == single.samples[0]
    d, _ = sample_D(genes, sim_config, library, derive_seed(42, 1))
    assert single.samples[0] == d * d


def test_evaluate_samples_order_independent(library, sim_config):
    genes = np.arange(8)
    r5 = evaluate(genes, 5, sim_config, library, 42)
    r10 = evaluate(genes, 10, sim_config, library, 42)
    assert np.array_equal(r5.samples, r10.samples[:5])
    assert r10.estimate == r10.samples.mean()


def test_evaluate_records_failures(library, sim_config):
    r = evaluate(np.full(8, 3), 4, sim_config, library, 9)
    assert r.failures == 4
    assert np.all(r.samples == 1.0)


def test_dominance_orders_objective(library, sim_config):
    # both moments of A sit strictly below B's, so the expected squared
    # deviation must order the two the same way
    da = draw_d_samples(DOMINATING, 4000, sim_config, library, 1003 + 3)
    db = draw_d_samples(DOMINATED, 4000, sim_config, library, 1002 + 1)
    assert da.mean() ** 2 < db.mean() ** 2
    assert da.var() < db.var()
    fa = evaluate(DOMINATING, 10_000, sim_config, library, 71).estimate
    fb = evaluate(DOMINATED, 10_000, sim_config, library, 72).estimate
    assert fa < fb


def test_tradeoff_bound_values():
    assert tradeoff_bound(1.5, 0.5) == pytest.approx(1.0)
    assert tradeoff_bound(2.0, 0.0) == pytest.approx(1.0)
    eps = 1e-9
    assert tradeoff_bound(1.0 + eps, 0.5) == pytest.approx(2 * eps, rel=1e-6)


def test_tradeoff_bound_domain():
    with pytest.raises(ValueError):
        tradeoff_bound(0.9, 0.5)
    with pytest.raises(ValueError):
        tradeoff_bound(1.5, 1.0)


def test_simulator_config_validation():
    with pytest.raises(InvalidConfigurationError):
        SimulatorConfig(c_star=1.0, photon_noise_alpha=1.0, read_noise_sigma=1.0,
                        gain=1.0, N=4, M=8)
    with pytest.raises(InvalidConfigurationError):
        SimulatorConfig(c_star=-1.0, photon_noise_alpha=1.0, read_noise_sigma=1.0,
                        gain=1.0, N=8, M=8)
