import random

from frfold import _backend
from frfold.model import RnaSequence


def rand_seq(rng: random.Random, n: int, alphabet: str = "ACGU") -> RnaSequence:
    return RnaSequence("".join(rng.choice(alphabet) for _ in range(n)))


def cell(M, i, j):
    return 0 if i > j else int(M[i][j])


def right_vector(M, j, s, w):
    """Column-j differences M[sw+q, j] - M[sw+q+1, j], q = 1..w, LSB first."""
    code = 0
    for q in range(1, w + 1):
        bit = cell(M, s * w + q, j) - cell(M, s * w + q + 1, j)
        assert bit in (0, 1)
        code |= bit << (q - 1)
    return code


def left_vector(M, i, s, w):
    """Row-i differences M[i, sw+q] - M[i, sw+q-1], q = 1..w, LSB first."""
    code = 0
    for q in range(1, w + 1):
        bit = cell(M, i, s * w + q) - cell(M, i, s * w + q - 1)
        assert bit in (0, 1)
        code |= bit << (q - 1)
    return code


def partial(M, i, j, t, o):
    """Best split restricted to l in [t, o]."""
    return max(cell(M, i, l) + cell(M, l + 1, j) for l in range(t, o + 1))


def brute_central(u, v, w):
    """Leftmost argmax of prefix sums of U - V and its gain over t = 1."""
    sums = []
    run = 0
    for t in range(w):
        run += ((u >> t) & 1) - ((v >> t) & 1)
        sums.append(run)
    best = max(sums)
    r = sums.index(best) + 1
    return r, best - sums[0]


HAS_COMPILED = "compiled" in _backend.BACKENDS
BACKEND_NAMES = sorted(_backend.BACKENDS)
