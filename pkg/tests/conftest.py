import random

import pytest

from fairalloc import mms_bruteforce, new_instance


def random_matrix(rng, n, m, vmax=50):
    """Mixed-distribution valuation matrix: uniform, bi-valued, or identical."""
    kind = rng.randrange(3)
    if kind == 0:
        return [[rng.randint(0, vmax) for _ in range(m)] for _ in range(n)]
    if kind == 1:
        a, b = rng.randint(0, vmax // 5), rng.randint(vmax // 5 + 1, vmax)
        return [[rng.choice([a, b]) for _ in range(m)] for _ in range(n)]
    row = [rng.randint(0, vmax) for _ in range(m)]
    return [list(row) for _ in range(n)]


def random_instance(rng, n_max=5, m_max=12, vmax=50, n_min=2, m_min=4):
    n = rng.randint(n_min, n_max)
    m = rng.randint(m_min, m_max)
    return new_instance(random_matrix(rng, n, m, vmax))


@pytest.fixture(scope="session")
def corpus500():
    """The shared acceptance corpus with brute-force oracle share records."""
    rng = random.Random(20240815)
    corpus = []
    for _ in range(500):
        inst = random_instance(rng)
        records = [mms_bruteforce(inst, i, inst.n) for i in range(inst.n)]
        corpus.append((inst, records))
    return corpus
