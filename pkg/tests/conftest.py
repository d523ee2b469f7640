from fractions import Fraction

import numpy as np
import pytest

from ssact.action import act, restrict
from ssact.graph import adjacency_matrix, enumerate_paths
from ssact.instance import corpus_names, load_corpus
from ssact.spectral import perron_frobenius

CORPUS = corpus_names()


class Setup:
    """A corpus instance with its closure, exact spectral data and default discount."""

    def __init__(self, name):
        self.name = name
        self.inst = load_corpus(name)
        self.graph = self.inst.graph
        self.table = self.inst.table
        self.cl = self.inst.closure()
        self.A = adjacency_matrix(self.graph)
        self.sp = perron_frobenius(self.A, exact=True)
        self.spf = perron_frobenius(self.A)
        # half of the critical discount: d * rho = 1/2
        self.d = Fraction(1, 2) / self.sp.rho


_cache = {}


def setup_for(name) -> Setup:
    if name not in _cache:
        _cache[name] = Setup(name)
    return _cache[name]


@pytest.fixture(params=CORPUS)
def corpus(request) -> Setup:
    return setup_for(request.param)


@pytest.fixture
def partial() -> Setup:
    return setup_for("partial")


@pytest.fixture
def odometer() -> Setup:
    return setup_for("odometer")


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def word_census(cl, g, k):
    """Fixed-path counts by acting with words on every enumerated path.

    Independent of the closure's transition tables: restriction classes are
    identified by coinductive matching of the restricted words.
    """
    table = cl.table
    w = cl.reps[g]
    counts = np.zeros(len(cl), dtype=np.int64)
    for mu in enumerate_paths(cl.graph, w.domain, k):
        if act(table, w, mu) == mu:
            counts[cl.find(restrict(table, w, mu))] += 1
    return counts


def random_irreducible(rng, max_n=5, max_entry=3):
    """Random irreducible nonnegative integer matrix, by rejection."""
    from ssact.graph import is_irreducible

    while True:
        n = int(rng.integers(1, max_n + 1))
        A = rng.integers(0, max_entry + 1, size=(n, n)) * (rng.random((n, n)) < 0.6)
        if is_irreducible(A):
            return A


def random_discount(rng, rho):
    """A float discount with ``d * rho`` uniform in (0.05, 0.95)."""
    return float(rng.uniform(0.05, 0.95)) / float(rho)
