import random
from fractions import Fraction

import pytest


def random_unimodular_integer(k, rng, steps=6, mult=2):
    """Integer matrix with det +-1 built from elementary row operations."""
    M = [[int(i == j) for j in range(k)] for i in range(k)]
    for _ in range(steps):
        i, j = rng.sample(range(k), 2)
        c = rng.choice([x for x in range(-mult, mult + 1) if x])
        M[i] = [a + c * b for a, b in zip(M[i], M[j])]
    rng.shuffle(M)
    if rng.random() < 0.5:
        M[0] = [-x for x in M[0]]
    return M


def random_unimodular_rational(k, rng):
    """``U1 @ diag(s, 1/s, 1, ...) @ U2`` with small integer unimodular ``U``."""
    s = Fraction(rng.randint(1, 4), rng.randint(1, 4))
    d = [s, 1 / s] + [Fraction(1)] * (k - 2)
    rng.shuffle(d)
    U1 = random_unimodular_integer(k, rng, steps=3, mult=1)
    U2 = random_unimodular_integer(k, rng, steps=3, mult=1)
    mid = [[U1[i][j] * d[j] for j in range(k)] for i in range(k)]
    return [[sum(mid[i][l] * U2[l][j] for l in range(k)) for j in range(k)] for i in range(k)]


@pytest.fixture
def rng():
    return random.Random(20260101)
