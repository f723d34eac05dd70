"""Exact summatory functions of the divisor-family tables.

Evaluates D_k(x) = sum_{n<=x} d_k(n) and the divisor mean square
S(x) = sum_{n<=x} d(n)^2 two ways: by sieving (the linear-time oracle) and
by sublinear algorithms built on the floor-quotient structure of x.  All
results are exact integers; any two methods for the same quantity agree
bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .tables import (
    DEFAULT_MEMORY_CAP,
    DEFAULT_SEGMENT_LENGTH,
    DEFAULT_SEGMENT_THRESHOLD,
    DIVISOR,
    DIVISOR_SQUARED,
    MOBIUS,
    FunctionKind,
    SizingError,
    divisor_k,
    iter_sieve_segments,
    sieve,
)

__all__ = [
    "METHODS",
    "FloorQuotients",
    "SummatoryValue",
    "d4_summatory",
    "divisor_summatory_hyperbola",
    "dk_summatory_recursive",
    "floor_quotients",
    "isqrt_exact",
    "mean_square_summatory",
    "oracle_prefix_values",
    "result_record",
    "summatory_oracle",
]

METHODS = ("sieve", "hyperbola", "dirichlet_square", "mobius_weighted", "recursion")

# Hard ceiling on arguments: inputs themselves must stay well inside int64
# so the vectorized floor divisions are trustworthy.
_MAX_ARGUMENT = 10**18
# Below these, every intermediate of the corresponding numpy path provably
# fits int64; above, exact object/Python paths take over.
_NP_SAFE_HYPERBOLA_X = 10**16
_NP_SAFE_WEIGHTED_X = 2 * 10**13
_CHUNK = 1 << 22
_FLAT_CHUNK = 1 << 21


def isqrt_exact(x: int) -> int:
    """Floor square root, exact for arbitrary non-negative integers."""
    return math.isqrt(x)


def _validate_x(x: int) -> None:
    if x < 1:
        raise ValueError(f"summation bound must be >= 1, got {x}")
    if x > _MAX_ARGUMENT:
        raise ValueError(f"summation bound {x} beyond supported range {_MAX_ARGUMENT}")


@dataclass(frozen=True)
class SummatoryValue:
    """An exact summatory value at x together with the method that produced it."""

    x: int
    value: int
    method: str

    def __post_init__(self) -> None:
        if self.x < 1:
            raise ValueError(f"x must be >= 1, got {self.x}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.value < 1:
            raise ValueError("summatory values of the supported functions are >= 1")


def result_record(
    function: str, result: SummatoryValue, elapsed_ms: float | None = None
) -> dict:
    """JSON-ready record; the exact value is a decimal string so consumers
    limited to 64-bit floats cannot truncate it."""
    record = {
        "x": result.x,
        "function": function,
        "method": result.method,
        "value": str(result.value),
    }
    if elapsed_ms is not None:
        record["elapsed_ms"] = elapsed_ms
    return record


@dataclass(frozen=True)
class FloorQuotients:
    """The distinct values of floor(x/n) with their maximal index ranges.

    Blocks are ordered by strictly decreasing quotient and partition [1, x];
    there are at most 2*isqrt(x) of them.  Stored as parallel arrays to keep
    large x cheap.
    """

    x: int
    q: np.ndarray
    n_lo: np.ndarray
    n_hi: np.ndarray

    def __len__(self) -> int:
        return len(self.q)

    def __iter__(self) -> Iterator[tuple[int, int, int]]:
        for i in range(len(self.q)):
            yield int(self.q[i]), int(self.n_lo[i]), int(self.n_hi[i])

    @property
    def blocks(self) -> list[tuple[int, int, int]]:
        return list(self)


def floor_quotients(x: int) -> FloorQuotients:
    """Complete block decomposition of n -> floor(x/n) on [1, x].

    For n <= isqrt(x) the quotients are pairwise distinct, so those blocks
    are singletons; the remaining quotient values K..1 (K = x // (isqrt(x)+1))
    each occupy one maximal interval.
    """
    _validate_x(x)
    root = isqrt_exact(x)
    small_count = x // (root + 1)
    ns = np.arange(1, root + 1, dtype=np.int64)
    q_large = x // ns
    q_small = np.arange(small_count, 0, -1, dtype=np.int64)
    lo_small = x // (q_small + 1) + 1
    hi_small = x // q_small
    return FloorQuotients(
        x=x,
        q=np.concatenate([q_large, q_small]),
        n_lo=np.concatenate([ns, lo_small]),
        n_hi=np.concatenate([ns, hi_small]),
    )


def divisor_summatory_hyperbola(x: int) -> SummatoryValue:
    """Exact D_2(x) in O(sqrt(x)) operations.

    Counts lattice points under the hyperbola mn <= x:
    D_2(x) = 2 * sum_{n<=isqrt(x)} floor(x/n) - isqrt(x)^2.
    """
    _validate_x(x)
    return SummatoryValue(x=x, value=_d2_raw(x), method="hyperbola")


def _d2_raw(x: int) -> int:
    root = math.isqrt(x)
    if x > _NP_SAFE_HYPERBOLA_X:
        total = sum(x // n for n in range(1, root + 1))
        return 2 * total - root * root
    total = 0
    for lo in range(1, root + 1, _CHUNK):
        hi = min(lo + _CHUNK - 1, root)
        ns = np.arange(lo, hi + 1, dtype=np.int64)
        total += int(np.sum(x // ns))
    return 2 * total - root * root


# ---------------------------------------------------------------------------
# Sieve oracle
# ---------------------------------------------------------------------------


def oracle_prefix_values(
    kind: FunctionKind,
    xs: Sequence[int],
    *,
    memory_cap: int = DEFAULT_MEMORY_CAP,
) -> list[int]:
    """Exact prefix sums sum_{n<=x} f(n) at several points in one sieve sweep.

    Streams segments when max(xs) exceeds the segmentation threshold, so the
    memory footprint is bounded by the segment length.
    """
    if kind == MOBIUS:
        raise ValueError("signed mobius prefix sums are not a supported summatory")
    if not xs:
        return []
    for x in xs:
        _validate_x(x)
    order = sorted(range(len(xs)), key=lambda i: xs[i])
    limit = xs[order[-1]]
    out = [0] * len(xs)
    if limit <= DEFAULT_SEGMENT_THRESHOLD and limit <= DEFAULT_SEGMENT_LENGTH:
        table = sieve(kind, limit, memory_cap=memory_cap)
        csum = np.cumsum(table.values, dtype=np.int64)
        for i in order:
            out[i] = int(csum[xs[i] - 1])
        return out
    base = 0  # running total before the current segment, exact Python int
    pending = iter(order)
    target = next(pending)
    for lo, seg in iter_sieve_segments(kind, limit, memory_cap=memory_cap):
        hi = lo + len(seg) - 1
        csum = np.cumsum(seg, dtype=np.int64)
        while target is not None and xs[target] <= hi:
            out[target] = base + int(csum[xs[target] - lo])
            target = next(pending, None)
        base += int(csum[-1])
        if target is None:
            break
    return out


def summatory_oracle(
    kind: FunctionKind, x: int, *, memory_cap: int = DEFAULT_MEMORY_CAP
) -> SummatoryValue:
    """Exact sum_{n<=x} f(n) by sieving every value up to x."""
    value = oracle_prefix_values(kind, [x], memory_cap=memory_cap)[0]
    return SummatoryValue(x=x, value=value, method="sieve")


# ---------------------------------------------------------------------------
# Sublinear evaluation: D_4 via the Dirichlet square, S via Mobius weights
# ---------------------------------------------------------------------------


class _SummatoryEngine:
    """Shared tables and caches for one sublinear evaluation around x.

    Holds cumulative tables of d and d_4 up to a threshold near x^(2/3) and
    memoizes the few larger D_2/D_4 values on the floor-quotient arguments,
    so a full evaluation costs O(x^(2/3)) time and memory.
    """

    def __init__(self, x: int, memory_cap: int = DEFAULT_MEMORY_CAP):
        self.x = x
        root = math.isqrt(x)
        table_cap = max(1024, memory_cap // 48)
        self.table_limit = min(x, max(1024, root + 1, round(x ** (2 / 3))), table_cap)
        if self.table_limit < root:
            raise SizingError(
                f"memory cap {memory_cap} bytes cannot hold the isqrt(x)={root} "
                "entry tables this evaluation needs"
            )
        d_table = sieve(DIVISOR, self.table_limit, memory_cap=memory_cap)
        self._d = d_table.values
        self._d2_prefix = np.cumsum(self._d, dtype=np.int64)
        d4_table = sieve(divisor_k(4), self.table_limit, memory_cap=memory_cap)
        self._d4_prefix = np.cumsum(d4_table.values, dtype=np.int64)
        self._d2_cache: dict[int, int] = {}
        self._d4_cache: dict[int, int] = {}

    def d2(self, y: int) -> int:
        if y <= self.table_limit:
            return int(self._d2_prefix[y - 1]) if y >= 1 else 0
        cached = self._d2_cache.get(y)
        if cached is None:
            cached = _d2_raw(y)
            self._d2_cache[y] = cached
        return cached

    def d4(self, y: int) -> int:
        """Exact D_4(y) via d_4 = d * d: 2*sum_{n<=isqrt(y)} d(n)*D_2(y//n)
        minus D_2(isqrt(y))^2."""
        if y <= self.table_limit:
            return int(self._d4_prefix[y - 1]) if y >= 1 else 0
        cached = self._d4_cache.get(y)
        if cached is not None:
            return cached
        root = math.isqrt(y)
        split = y // (self.table_limit + 1)  # n <= split have y//n above the table
        total = 0
        for n in range(1, split + 1):
            total += int(self._d[n - 1]) * self.d2(y // n)
        if split < root and y <= _NP_SAFE_WEIGHTED_X:
            ns = np.arange(split + 1, root + 1, dtype=np.int64)
            quotients = y // ns
            weights = self._d[split:root].astype(np.int64)
            total += int(np.dot(weights, self._d2_prefix[quotients - 1]))
        else:
            for n in range(split + 1, root + 1):
                total += int(self._d[n - 1]) * self.d2(y // n)
        value = 2 * total - self.d2(root) ** 2
        self._d4_cache[y] = value
        return value


def d4_summatory(x: int, *, memory_cap: int = DEFAULT_MEMORY_CAP) -> SummatoryValue:
    """Exact D_4(x) through the Dirichlet-square identity d_4 = d * d."""
    _validate_x(x)
    engine = _SummatoryEngine(x, memory_cap)
    return SummatoryValue(x=x, value=engine.d4(x), method="dirichlet_square")


def mean_square_summatory(
    x: int, *, memory_cap: int = DEFAULT_MEMORY_CAP
) -> SummatoryValue:
    """Exact S(x) = sum_{n<=x} d(n)^2 in sublinear time.

    Uses the pointwise identity d(n)^2 = sum_{delta^2 | n} mu(delta)
    d_4(n/delta^2), summed over n <= x:
    S(x) = sum_{delta<=isqrt(x)} mu(delta) * D_4(x // delta^2).
    """
    _validate_x(x)
    engine = _SummatoryEngine(x, memory_cap)
    root = math.isqrt(x)
    mu = sieve(MOBIUS, root, memory_cap=memory_cap).values
    total = 0
    for delta in range(1, root + 1):
        m = int(mu[delta - 1])
        if m:
            total += m * engine.d4(x // (delta * delta))
    return SummatoryValue(x=x, value=total, method="mobius_weighted")


# ---------------------------------------------------------------------------
# General D_k by the reduction D_k(x) = sum over blocks of len * D_{k-1}(q)
# ---------------------------------------------------------------------------


def _isqrt_array(a: np.ndarray) -> np.ndarray:
    """Elementwise floor sqrt, exact (float estimate plus correction)."""
    r = np.sqrt(a.astype(np.float64)).astype(np.int64)
    r -= r * r > a
    r += (r + 1) * (r + 1) <= a
    return r


def _grouped_arange(lengths: np.ndarray) -> np.ndarray:
    """Concatenation of arange(1, L+1) for each L in lengths."""
    total = int(lengths.sum())
    starts = np.zeros(len(lengths), dtype=np.int64)
    np.cumsum(lengths[:-1], out=starts[1:])
    return np.arange(1, total + 1, dtype=np.int64) - np.repeat(starts, lengths)


def _chunk_bounds(lengths: np.ndarray, target: int) -> list[tuple[int, int]]:
    """Split group indices so each chunk carries about `target` flat elements."""
    cum = np.cumsum(lengths)
    total = int(cum[-1]) if len(cum) else 0
    cuts = np.searchsorted(cum, np.arange(target, total + target, target), side="left")
    bounds = []
    prev = 0
    for c in cuts:
        c = min(int(c) + 1, len(lengths))
        if c > prev:
            bounds.append((prev, c))
            prev = c
    if prev < len(lengths):
        bounds.append((prev, len(lengths)))
    return bounds


def _dk_over_quotients(x: int, k: int) -> int:
    """D_k(x) by iterating D_j(q) = sum over blocks of q of len * D_{j-1},
    computed level by level on the full floor-quotient set of x.

    Every quotient of a quotient of x is again a quotient of x, so one
    descending table per level memoizes all O(sqrt(x)) distinct arguments.
    """
    root = math.isqrt(x)
    small_count = x // (root + 1)
    # Quotients themselves always fit int64 (arguments are capped); only the
    # value table may outgrow it, so just that switches to object dtype.
    use_object = x > _NP_SAFE_WEIGHTED_X
    ns = np.arange(1, root + 1, dtype=np.int64)
    q_values = np.concatenate([x // ns, np.arange(small_count, 0, -1, dtype=np.int64)])
    if x <= 2**52:
        roots = _isqrt_array(q_values)
    else:
        roots = np.array([math.isqrt(int(v)) for v in q_values], dtype=np.int64)
    m = len(q_values)
    level = q_values.astype(object) if use_object else q_values.copy()
    if k == 1:
        return int(level[0])
    tails = q_values // (roots + 1)
    bounds = _chunk_bounds(roots + tails, _FLAT_CHUNK)
    zero = np.zeros(1, dtype=object if use_object else np.int64)
    for _ in range(2, k + 1):
        nxt = np.empty(m, dtype=object if use_object else np.int64)
        for i0, i1 in bounds:
            q = q_values[i0:i1]
            len1 = roots[i0:i1]
            len2 = tails[i0:i1]
            # singleton blocks n = 1..isqrt(q): gather D_{j-1}(q//n)
            j_idx = _grouped_arange(len1)
            vals = np.repeat(q, len1) // j_idx
            pos = np.where(vals > small_count, x // vals - 1, m - vals)
            gathered = level[pos.astype(np.int64)]
            csum = np.concatenate([zero, np.cumsum(gathered)])
            offs = np.concatenate([[0], np.cumsum(len1)])
            part1 = csum[offs[1:]] - csum[offs[:-1]]
            # interval blocks with quotient v = 1..tail(q): weight by length
            v_idx = _grouped_arange(len2)
            q_rep = np.repeat(q, len2)
            weights = q_rep // v_idx - q_rep // (v_idx + 1)
            terms = weights * level[(m - v_idx).astype(np.int64)]
            csum2 = np.concatenate([zero, np.cumsum(terms)])
            offs2 = np.concatenate([[0], np.cumsum(len2)])
            nxt[i0:i1] = part1 + (csum2[offs2[1:]] - csum2[offs2[:-1]])
        level = nxt
    return int(level[0])


def dk_summatory_recursive(
    k: int, x: int, *, memory_cap: int = DEFAULT_MEMORY_CAP
) -> SummatoryValue:
    """Exact D_k(x) by the block recursion with base D_1(x) = x."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    _validate_x(x)
    root = math.isqrt(x)
    # four int64/object arrays over the quotient set, plus flat chunks
    flat_bytes = 4 * 2 * root * 8 + 8 * _FLAT_CHUNK * 8
    if flat_bytes > memory_cap:
        raise SizingError(
            f"recursion at x={x} needs about {flat_bytes} bytes of quotient "
            f"tables, exceeding the memory cap of {memory_cap} bytes"
        )
    return SummatoryValue(x=x, value=_dk_over_quotients(x, k), method="recursion")
