import itertools

import pytest

from corrpois import random_prob_vectors

# Single shared corpus for the randomized verification suites: sizes up to
# 30, entries up to 0.5, fixed seed so failures are reproducible verbatim.
CORPUS_SEED = 0


@pytest.fixture(scope="session")
def corpus():
    return random_prob_vectors(1000, nmax=30, pmax=0.5, seed=CORPUS_SEED)


@pytest.fixture(scope="session")
def corpus_wide():
    """Smaller corpus with entries up to 0.9 for the Hellinger checks."""
    return random_prob_vectors(300, nmax=30, pmax=0.9, seed=2)


def enumerate_outcomes(probs):
    """Brute-force oracle: iterate all 2^n indicator outcomes.

    Yields (k, probability) pairs, one per outcome.
    """
    n = len(probs)
    for bits in itertools.product((0, 1), repeat=n):
        prob = 1.0
        for b, p in zip(bits, probs):
            prob *= p if b else (1.0 - p)
        yield sum(bits), prob


def enumerated_pmf(probs):
    """Exact pmf of the indicator sum by outcome enumeration (n small)."""
    mass = [0.0] * (len(probs) + 1)
    for k, prob in enumerate_outcomes(probs):
        mass[k] += prob
    return mass


def enumerated_factorial_moment(probs, m):
    """E[(S)_m] by outcome enumeration."""
    total = 0.0
    for k, prob in enumerate_outcomes(probs):
        ff = 1.0
        for i in range(m):
            ff *= k - i
        total += prob * ff
    return total


def rel_close(a, b, rtol, floor=1.0):
    return abs(a - b) <= rtol * max(floor, abs(a), abs(b))
