import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from mofs import genotype


def test_derive_rng_reproducible():
    a = genotype.derive_rng(3, 1, 4).random(8)
    b = genotype.derive_rng(3, 1, 4).random(8)
    assert np.array_equal(a, b)


def test_derive_rng_distinct_streams():
    a = genotype.derive_rng(3, 1, 4).random(8)
    b = genotype.derive_rng(3, 1, 5).random(8)
    c = genotype.derive_rng(3, 2, 4).random(8)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_derive_rng_rejects_bad_keys():
    with pytest.raises(ValueError):
        genotype.derive_rng()
    with pytest.raises(ValueError):
        genotype.derive_rng(1, -2)


def test_derive_seed_stable():
    assert genotype.derive_seed(9, 0) == genotype.derive_seed(9, 0)
    assert genotype.derive_seed(9, 0) != genotype.derive_seed(9, 1)


def test_random_init_shape_and_values():
    g = genotype.random_init(41, genotype.derive_rng(0))
    assert g.shape == (41,)
    assert g.dtype == np.uint8
    assert set(np.unique(g)) <= {0, 1}
    with pytest.raises(ValueError):
        genotype.random_init(0, genotype.derive_rng(0))


def test_random_init_mean_ones():
    rng = genotype.derive_rng(123)
    ones = sum(int(genotype.random_init(41, rng).sum()) for _ in range(10_000))
    assert 19.5 <= ones / 10_000 <= 21.5


def test_crossover_complementary():
    rng = genotype.derive_rng(1)
    p1 = np.zeros(16, dtype=np.uint8)
    p2 = np.ones(16, dtype=np.uint8)
    for _ in range(50):
        c1, c2 = genotype.uniform_crossover(p1, p2, rng)
        assert np.array_equal(c1 ^ c2, np.ones(16, dtype=np.uint8))


def test_crossover_identical_parents():
    rng = genotype.derive_rng(2)
    p = genotype.random_init(10, rng)
    c1, c2 = genotype.uniform_crossover(p, p, rng)
    assert np.array_equal(c1, p) and np.array_equal(c2, p)


def test_crossover_length_mismatch():
    with pytest.raises(ValueError):
        genotype.uniform_crossover(np.zeros(3, dtype=np.uint8),
                                   np.zeros(4, dtype=np.uint8),
                                   genotype.derive_rng(0))


@settings(max_examples=200, deadline=None)
@given(bits_a=st.lists(st.integers(0, 1), min_size=1, max_size=32),
       seed=st.integers(0, 2 ** 31))
def test_crossover_conserves_positions(bits_a, seed):
    rng = genotype.derive_rng(seed)
    p1 = np.array(bits_a, dtype=np.uint8)
    p2 = genotype.random_init(len(bits_a), rng)
    c1, c2 = genotype.uniform_crossover(p1, p2, rng)
    assert np.array_equal(np.sort(np.stack([c1, c2]), axis=0),
                          np.sort(np.stack([p1, p2]), axis=0))


def test_mutation_always_flips_single_bit_genome():
    rng = genotype.derive_rng(5)
    g = np.array([1], dtype=np.uint8)
    for _ in range(100):
        g = genotype.bitflip_mutation(g, rng)
    # probability 1/n = 1: every call flips, so parity alternates exactly
    assert g[0] == 1


def test_mutation_mean_flip_count():
    rng = genotype.derive_rng(7)
    base = np.zeros(41, dtype=np.uint8)
    flips = sum(int(genotype.bitflip_mutation(base, rng).sum())
                for _ in range(10_000))
    assert 0.9 <= flips / 10_000 <= 1.1


def test_mutation_flip_counts_match_binomial():
    # chi-square goodness of fit against Binomial(n, 1/n), alpha 0.01
    n, trials = 41, 10_000
    rng = genotype.derive_rng(99)
    base = np.zeros(n, dtype=np.uint8)
    observed = np.zeros(4)
    for _ in range(trials):
        k = int(genotype.bitflip_mutation(base, rng).sum())
        observed[min(k, 3)] += 1
    pmf = stats.binom.pmf(np.arange(3), n, 1.0 / n)
    expected = np.append(pmf, 1.0 - pmf.sum()) * trials
    statistic = float(((observed - expected) ** 2 / expected).sum())
    p = float(stats.chi2.sf(statistic, df=len(observed) - 1))
    assert p > 0.01


def test_repair_empty_sets_one_bit():
    rng = genotype.derive_rng(3)
    repaired = genotype.repair_empty(np.zeros(9, dtype=np.uint8), rng)
    assert int(repaired.sum()) == 1


def test_repair_leaves_nonempty_untouched():
    rng = genotype.derive_rng(3)
    g = np.array([0, 1, 0, 1], dtype=np.uint8)
    assert genotype.repair_empty(g, rng) is g


def test_repair_bit_uniform():
    n, trials = 8, 10_000
    rng = genotype.derive_rng(17)
    hits = np.zeros(n)
    for _ in range(trials):
        hits[int(np.flatnonzero(
            genotype.repair_empty(np.zeros(n, dtype=np.uint8), rng))[0])] += 1
    expected = np.full(n, trials / n)
    statistic = float(((hits - expected) ** 2 / expected).sum())
    assert float(stats.chi2.sf(statistic, df=n - 1)) > 0.01


def test_bitstring_round_trip():
    g = np.array([1, 0, 1, 1, 0], dtype=np.uint8)
    text = genotype.to_bitstring(g)
    assert text == "10110"
    assert np.array_equal(genotype.from_bitstring(text), g)
    with pytest.raises(ValueError):
        genotype.from_bitstring("10x1")
    with pytest.raises(ValueError):
        genotype.from_bitstring("")
