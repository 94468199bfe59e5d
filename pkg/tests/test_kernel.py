import math

import numpy as np
import pytest

from qkga.encoding import Chromosome, decode_chromosome
from qkga.kernel import KernelCounter, cross_kernel, gram_matrix, kernel, pair_count
from qkga.simulator import DimensionError

RY = decode_chromosome(Chromosome("11100", 1, 1))  # RY(pi * x0)


def random_fm(rng, M=3, N=3):
    return decode_chromosome(Chromosome("".join(rng.choice(["0", "1"], 5 * M * N)), M, N))


def test_kernel_examples():
    assert kernel(RY, [0.3], [0.3]) == pytest.approx(1.0, abs=1e-15)
    assert kernel(RY, [0.0], [1.0]) == pytest.approx(0.0, abs=1e-15)
    assert kernel(RY, [0.0], [0.5]) == pytest.approx(0.5, abs=1e-15)


def test_kernel_dimension_mismatch():
    with pytest.raises(DimensionError):
        kernel(RY, [0.0], [0.0, 1.0])


def test_gram_counts():
    rng = np.random.default_rng(0)
    assert gram_matrix(RY, rng.uniform(size=(210, 1))).evaluation_count == 21945
    g1 = gram_matrix(RY, [[0.2]])
    assert g1.entries.tolist() == [[1.0]] and g1.evaluation_count == 0


def test_gram_matches_brute_force():
    rng = np.random.default_rng(1)
    fm = random_fm(rng)
    X = rng.uniform(-1, 1, (12, 3))
    brute = np.array([[kernel(fm, a, b) for b in X] for a in X])
    np.testing.assert_allclose(gram_matrix(fm, X).entries, brute, atol=1e-12)


def test_gram_permutation_covariance():
    rng = np.random.default_rng(2)
    fm = random_fm(rng)
    X = rng.uniform(-1, 1, (15, 3))
    p = rng.permutation(15)
    G = gram_matrix(fm, X).entries
    np.testing.assert_allclose(gram_matrix(fm, X[p]).entries, G[np.ix_(p, p)], atol=1e-14)


def test_cross_kernel():
    rng = np.random.default_rng(3)
    fm = random_fm(rng)
    X = rng.uniform(-1, 1, (8, 3))
    np.testing.assert_allclose(cross_kernel(fm, X, X), gram_matrix(fm, X).entries, atol=1e-12)
    assert cross_kernel(fm, np.zeros((0, 3)), X).shape == (0, 8)
    A = rng.uniform(-1, 1, (4, 3))
    assert cross_kernel(fm, A, X)[2, 5] == pytest.approx(kernel(fm, A[2], X[5]), abs=1e-12)
    with pytest.raises(DimensionError):
        cross_kernel(fm, A, X[:, :2])


def test_counter_tags():
    c = KernelCounter()
    X = np.zeros((5, 1))
    gram_matrix(RY, X, c, "train")
    cross_kernel(RY, np.zeros((3, 1)), X, c, "testxtrain")
    assert c.counts == {"train": pair_count(5), "testxtrain": 15}
    assert c.touching("test") == 15 and c.touching("validation") == 0
    assert c.total == 25


def test_gram_csv():
    text = gram_matrix(RY, [[0.0], [0.5]]).to_csv().splitlines()
    assert len(text) == 2
    assert [float(v) for v in text[0].split(",")] == pytest.approx([1.0, 0.5])
