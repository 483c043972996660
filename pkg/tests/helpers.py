"""Shared test utilities: parameter enumeration and small oracles."""

import itertools
import random
from functools import lru_cache

from rackcoop import params


@lru_cache(maxsize=None)
def all_valid_tuples(n_max=24, r_max=8):
    """Every valid (n, k, d, r, e, f) in the desk-scale box."""
    out = []
    for n in range(2, n_max + 1):
        for r in range(2, min(r_max, n) + 1):
            if n % r:
                continue
            for k in range(1, n + 1):
                m = k * r // n
                if m < 1:
                    continue
                for f in range(1, r + 1):
                    if m % f:
                        continue
                    for epf in range(1, n // r + 1):
                        for d in range(m, r - f + 1):
                            try:
                                out.append(params.validate(n, k, d, r, epf * f, f))
                            except params.ParameterError:
                                pass
    return tuple(out)


def sample_tuples(rng: random.Random, count: int, predicate=None, n_max=24, r_max=8):
    pool = [p for p in all_valid_tuples(n_max, r_max) if predicate is None or predicate(p)]
    if len(pool) < count:
        raise AssertionError(f"only {len(pool)} tuples satisfy the predicate")
    return rng.sample(pool, count)


def brute_force_compositions(m, f):
    """Independent enumeration oracle: compositions of m with parts in 1..f."""
    if m == 0:
        return [[]]
    out = []
    for first in range(1, min(f, m) + 1):
        for rest in brute_force_compositions(m - first, f):
            out.append([first] + rest)
    return out


def all_k_subsets(p):
    ids = [
        (rack, node)
        for rack in range(1, p.r + 1)
        for node in range(1, p.nodes_per_rack + 1)
    ]
    return itertools.combinations(ids, p.k)
