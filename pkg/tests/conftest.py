"""Shared brute-force oracles, independent of the package under test.

Everything here counts or sums directly from definitions (divisor
enumeration, trial-division factoring, ordered-tuple recursion) so the
package's sieves and sublinear formulas are checked against arithmetic that
shares no code with them.
"""

from __future__ import annotations

import math
from functools import lru_cache

import pytest


def brute_divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def brute_divisor_count(n: int) -> int:
    return len(brute_divisors(n))


def brute_mobius(n: int) -> int:
    if n == 1:
        return 1
    result = 1
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            result = -result
        p += 1
    if m > 1:
        result = -result
    return result


@lru_cache(maxsize=None)
def brute_dk(n: int, k: int) -> int:
    """Ordered k-tuples of positive integers with product n, by recursion
    over the first coordinate."""
    if k == 1:
        return 1
    return sum(brute_dk(n // a, k - 1) for a in brute_divisors(n))


def brute_summatory(f, x: int) -> int:
    return sum(f(n) for n in range(1, x + 1))


@pytest.fixture(scope="session")
def small_tables():
    """Production tables reused across tests: d, d3, d4, mu, d^2 up to 3000."""
    import divisum.tables as sv

    limit = 3000
    return {
        "limit": limit,
        "d": sv.sieve(sv.DIVISOR, limit),
        "d2sq": sv.sieve(sv.DIVISOR_SQUARED, limit),
        "d3": sv.sieve(sv.divisor_k(3), limit),
        "d4": sv.sieve(sv.divisor_k(4), limit),
        "mu": sv.sieve(sv.MOBIUS, limit),
    }
