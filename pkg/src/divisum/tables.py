"""Exact tables of pointwise arithmetic functions on an integer interval.

Supported functions: the Mobius function mu(n), the divisor-count function
d(n), the k-fold divisor function d_k(n) (ordered k-tuples with product n),
and d(n)^2.  Tables are exact integers and serve as the brute-force oracle
for the summatory and asymptotic layers.

Two independent strategies are provided: a vectorized multiple-marking sieve
(production path, segmentable) and a pure-Python smallest-prime-factor
linear sieve (reference path).  Both produce identical tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Iterator

import numpy as np

__all__ = [
    "DEFAULT_MEMORY_CAP",
    "DEFAULT_SEGMENT_LENGTH",
    "DEFAULT_SEGMENT_THRESHOLD",
    "MOBIUS",
    "DIVISOR",
    "DIVISOR_SQUARED",
    "ArithmeticTable",
    "CoverageError",
    "FunctionKind",
    "SizingError",
    "convolution_check",
    "divisor_k",
    "iter_sieve_segments",
    "primes_upto",
    "sieve",
    "verify_convolution_range",
    "write_table_csv",
]

DEFAULT_MEMORY_CAP = 2 * 1024**3  # bytes (2 GiB)
DEFAULT_SEGMENT_THRESHOLD = 10**8  # entries; larger requests must stream
DEFAULT_SEGMENT_LENGTH = 1 << 23  # entries per streamed segment

# Transient working arrays of the marking sieve, per table entry:
# exponent (1) + prime-power part (8) + leftover compare (8).
_AUX_BYTES_PER_ENTRY = 17

_KIND_NAMES = ("mobius", "divisor", "divisor_k", "divisor_squared")


class SizingError(MemoryError):
    """A requested allocation does not fit under the configured memory cap."""


class CoverageError(ValueError):
    """A supplied table does not cover the arguments an operation needs."""


@dataclass(frozen=True)
class FunctionKind:
    """Which arithmetic function a table holds; divisor_k carries its order k."""

    name: str
    k: int | None = None

    def __post_init__(self) -> None:
        if self.name not in _KIND_NAMES:
            raise ValueError(f"unknown function kind {self.name!r}")
        if self.name == "divisor_k":
            if self.k is None or self.k < 1:
                raise ValueError("divisor_k requires k >= 1")
        elif self.k is not None:
            raise ValueError(f"kind {self.name!r} does not take a parameter")

    @property
    def label(self) -> str:
        """Short token used by the CLI and serialized outputs."""
        return {
            "mobius": "mu",
            "divisor": "d",
            "divisor_squared": "d2",
        }.get(self.name) or f"dk:{self.k}"


MOBIUS = FunctionKind("mobius")
DIVISOR = FunctionKind("divisor")
DIVISOR_SQUARED = FunctionKind("divisor_squared")


def divisor_k(k: int) -> FunctionKind:
    """The k-fold divisor function d_k; d_1 is identically 1, d_2 = d."""
    return FunctionKind("divisor_k", k)


@dataclass(frozen=True)
class ArithmeticTable:
    """Exact values of one arithmetic function on 1..limit.

    ``values[i]`` holds f(i + 1); the array length equals ``limit``.
    Tables are immutable after construction and safe to share across threads.
    """

    limit: int
    kind: FunctionKind
    values: np.ndarray

    def __post_init__(self) -> None:
        if len(self.values) != self.limit:
            raise ValueError("table length must equal its limit")
        self.values.setflags(write=False)

    def __len__(self) -> int:
        return self.limit

    def value(self, n: int) -> int:
        if not 1 <= n <= self.limit:
            raise CoverageError(
                f"argument {n} outside table range 1..{self.limit}"
            )
        return int(self.values[n - 1])


def _check_allocation(n_bytes: int, memory_cap: int, what: str) -> None:
    if n_bytes > memory_cap:
        raise SizingError(
            f"{what} needs {n_bytes} bytes, exceeding the memory cap of "
            f"{memory_cap} bytes ({memory_cap / 1024**3:.2f} GiB)"
        )


def primes_upto(limit: int) -> np.ndarray:
    """All primes <= limit, ascending (Eratosthenes, vectorized)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.nonzero(flags)[0].astype(np.int64)


def _prime_power_values(kind: FunctionKind, limit: int) -> np.ndarray:
    """f(p^e) for e = 0 .. max exponent possible below ``limit``.

    All supported functions take a prime-independent value at p^e, which is
    what makes one marking pass serve every kind.
    """
    max_e = max(1, limit.bit_length() - 1)
    if kind.name == "mobius":
        vals = [1, -1] + [0] * (max_e - 1)
    elif kind.name == "divisor":
        vals = [e + 1 for e in range(max_e + 1)]
    elif kind.name == "divisor_squared":
        vals = [(e + 1) ** 2 for e in range(max_e + 1)]
    else:
        k = kind.k
        vals = [math.comb(e + k - 1, k - 1) for e in range(max_e + 1)]
    if max(abs(v) for v in vals) >= 2**62:
        return np.array(vals, dtype=object)
    return np.array(vals, dtype=np.int64)


def _max_value_bound(kind: FunctionKind, limit: int) -> int:
    """Exact maximum of the function over 1..limit.

    The maximum of a multiplicative function whose prime-power values depend
    only on the exponent is attained with non-increasing exponents on the
    smallest primes, so a tiny recursive search over those shapes is exact.
    """
    if kind.name == "mobius":
        return 1
    fpp = _prime_power_values(kind, limit)
    plist = [int(p) for p in primes_upto(max(3, limit.bit_length() * 3))]

    def rec(i: int, room: int, max_e: int) -> int:
        best = 1
        p = plist[i]
        pe, e = p, 1
        while pe <= room and e <= max_e:
            sub = rec(i + 1, room // pe, e) if i + 1 < len(plist) else 1
            best = max(best, int(fpp[e]) * sub)
            pe *= p
            e += 1
        return best

    return rec(0, limit, limit.bit_length() + 1)


def _sieve_block(
    kind: FunctionKind,
    lo: int,
    hi: int,
    primes: np.ndarray,
    fpp: np.ndarray,
    use_object: bool,
) -> np.ndarray:
    """Values of ``kind`` on [lo, hi] by marking prime-power multiples.

    ``primes`` must cover every prime <= isqrt(hi).
    """
    size = hi - lo + 1
    dtype = object if use_object else np.int64
    f = np.ones(size, dtype=dtype)
    ppart = np.ones(size, dtype=np.int64)
    expo = np.zeros(size, dtype=np.int8)
    for p in primes:
        p = int(p)
        start = ((lo + p - 1) // p) * p
        if start > hi:
            continue
        pk, e = p, 1
        while pk <= hi:
            first = ((lo + pk - 1) // pk) * pk
            if first > hi:
                break
            expo[first - lo :: pk] = e
            pk *= p
            e += 1
        ppows = p ** np.arange(e, dtype=np.int64)
        sl = slice(start - lo, size, p)
        marked = expo[sl].astype(np.int64)
        f[sl] *= fpp[marked]
        ppart[sl] *= ppows[marked]
        expo[sl] = 0
    # Whatever is not accounted for by primes <= isqrt(hi) is a single
    # prime factor with exponent 1.
    leftover = ppart != np.arange(lo, hi + 1, dtype=np.int64)
    f[leftover] *= fpp[1]
    return f


_OUTPUT_DTYPES = {"mobius": np.int8, "divisor": np.int32}


def _output_dtype(kind: FunctionKind, limit: int) -> type:
    if kind.name in _OUTPUT_DTYPES:
        return _OUTPUT_DTYPES[kind.name]
    if kind.name == "divisor_k" and _max_value_bound(kind, limit) >= 2**62:
        return object
    return np.int64


def _sieve_marking(kind: FunctionKind, limit: int) -> np.ndarray:
    primes = primes_upto(math.isqrt(limit))
    fpp = _prime_power_values(kind, limit)
    out_dtype = _output_dtype(kind, limit)
    f = _sieve_block(kind, 1, limit, primes, fpp, out_dtype is object)
    if out_dtype is object:
        return f
    return f.astype(out_dtype)


def _sieve_linear(kind: FunctionKind, limit: int) -> np.ndarray:
    """Smallest-prime-factor linear sieve; pure-Python reference strategy.

    O(limit) multiplications: every composite is visited once through its
    smallest prime factor, and f follows from f(p^e) multiplicatively.
    """
    fpp = _prime_power_values(kind, limit)

    def at_prime_power(e: int) -> int:
        return int(fpp[e])

    f = [0] * (limit + 1)
    f[1] = 1 if limit >= 1 else 0
    spf_pow = [0] * (limit + 1)  # p^e part for p = smallest prime factor
    spf_exp = [0] * (limit + 1)
    is_comp = bytearray(limit + 1)
    primes: list[int] = []
    for i in range(2, limit + 1):
        if not is_comp[i]:
            primes.append(i)
            spf_pow[i] = i
            spf_exp[i] = 1
            f[i] = at_prime_power(1)
        fi = f[i]
        for p in primes:
            m = i * p
            if m > limit:
                break
            is_comp[m] = 1
            if i % p == 0:
                spf_pow[m] = spf_pow[i] * p
                spf_exp[m] = spf_exp[i] + 1
                rest = m // spf_pow[m]
                if rest == 1:
                    f[m] = at_prime_power(spf_exp[m])
                else:
                    f[m] = f[rest] * f[spf_pow[m]]
                break
            spf_pow[m] = p
            spf_exp[m] = 1
            f[m] = fi * at_prime_power(1)
    out_dtype = _output_dtype(kind, limit)
    return np.array(f[1:], dtype=out_dtype)


def sieve(
    kind: FunctionKind,
    limit: int,
    *,
    strategy: str = "marking",
    memory_cap: int = DEFAULT_MEMORY_CAP,
) -> ArithmeticTable:
    """Exact table of ``kind`` on 1..limit.

    ``strategy`` selects ``"marking"`` (vectorized multiple-marking, the
    production path) or ``"linear"`` (smallest-prime-factor linear sieve,
    the independent reference).  Raises :class:`SizingError` when the table
    plus its working arrays would not fit under ``memory_cap``; tables that
    large should be consumed through :func:`iter_sieve_segments` instead.
    """
    if limit < 1:
        raise ValueError(f"table limit must be >= 1, got {limit}")
    if strategy not in ("marking", "linear"):
        raise ValueError(f"unknown sieve strategy {strategy!r}")
    out_dtype = _output_dtype(kind, limit)
    item = 8 if out_dtype is object else np.dtype(out_dtype).itemsize
    _check_allocation(
        limit * (item + _AUX_BYTES_PER_ENTRY),
        memory_cap,
        f"sieve table for {kind.label} up to {limit}",
    )
    if limit > DEFAULT_SEGMENT_THRESHOLD:
        raise SizingError(
            f"table of {limit} entries exceeds the segmentation threshold "
            f"{DEFAULT_SEGMENT_THRESHOLD}; use iter_sieve_segments"
        )
    build = _sieve_marking if strategy == "marking" else _sieve_linear
    return ArithmeticTable(limit=limit, kind=kind, values=build(kind, limit))


def iter_sieve_segments(
    kind: FunctionKind,
    limit: int,
    *,
    segment_length: int = DEFAULT_SEGMENT_LENGTH,
    memory_cap: int = DEFAULT_MEMORY_CAP,
) -> Iterator[tuple[int, np.ndarray]]:
    """Stream ``kind`` values over 1..limit as ``(start_n, values)`` segments.

    Segments are fixed-size (the final one may be shorter) and arrive in
    order; ``values[i]`` is f(start_n + i).  Memory stays bounded by the
    segment length regardless of ``limit``.
    """
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    if segment_length < 1:
        raise ValueError("segment_length must be >= 1")
    root = math.isqrt(limit)
    _check_allocation(
        root + segment_length * (8 + _AUX_BYTES_PER_ENTRY),
        memory_cap,
        f"segmented sieve for {kind.label} up to {limit}",
    )
    primes = primes_upto(root)
    fpp = _prime_power_values(kind, limit)
    out_dtype = _output_dtype(kind, limit)
    for lo in range(1, limit + 1, segment_length):
        hi = min(lo + segment_length - 1, limit)
        block = _sieve_block(kind, lo, hi, primes, fpp, out_dtype is object)
        yield lo, block if out_dtype is object else block.astype(out_dtype)


def convolution_check(
    n: int, d4_table: ArithmeticTable, mu_table: ArithmeticTable
) -> int:
    """Mobius-weighted square-divisor sum at n: sum over delta^2 | n of
    mu(delta) * d_4(n / delta^2).

    Equals d(n)^2 pointwise; the caller compares.  Needs d_4 covering n and
    mu covering isqrt(n), else :class:`CoverageError`.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if d4_table.kind != divisor_k(4):
        raise CoverageError("d4_table must hold divisor_k(4) values")
    if mu_table.kind != MOBIUS:
        raise CoverageError("mu_table must hold mobius values")
    root = math.isqrt(n)
    if d4_table.limit < n:
        raise CoverageError(
            f"d4 table covers 1..{d4_table.limit}, need {n}"
        )
    if mu_table.limit < root:
        raise CoverageError(
            f"mobius table covers 1..{mu_table.limit}, need {root}"
        )
    total = 0
    for delta in range(1, root + 1):
        sq = delta * delta
        if n % sq == 0:
            mu = mu_table.value(delta)
            if mu:
                total += mu * d4_table.value(n // sq)
    return total


def verify_convolution_range(
    limit: int, *, memory_cap: int = DEFAULT_MEMORY_CAP
) -> int:
    """Count of n in 1..limit where the Mobius-weighted square-divisor sum
    equals d(n)^2 (vectorized batch evaluation of the same sum as
    :func:`convolution_check`)."""
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    d4 = sieve(divisor_k(4), limit, memory_cap=memory_cap).values
    mu = sieve(MOBIUS, math.isqrt(limit), memory_cap=memory_cap).values
    d = sieve(DIVISOR, limit, memory_cap=memory_cap).values
    lhs = np.zeros(limit + 1, dtype=np.int64)
    for delta in range(1, math.isqrt(limit) + 1):
        m = int(mu[delta - 1])
        if m:
            sq = delta * delta
            lhs[sq::sq] += m * d4[: limit // sq]
    rhs = d.astype(np.int64) ** 2
    return int(np.count_nonzero(lhs[1:] == rhs))


def write_table_csv(table: ArithmeticTable, stream: IO[str]) -> None:
    """CSV export: header ``n,value``, one row per n, decimal integers."""
    stream.write("n,value\n")
    for i, v in enumerate(table.values, start=1):
        stream.write(f"{i},{int(v)}\n")
