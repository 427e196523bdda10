"""Prime helpers: factor queries for the MP intrinsics and ascending prime streams."""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

_sieve_limit = 1
_sieve_primes = np.zeros(0, dtype=np.int64)


def _sieve(limit: int) -> np.ndarray:
    """All primes <= limit (cached, grows geometrically)."""
    global _sieve_limit, _sieve_primes
    if limit > _sieve_limit:
        limit = max(limit, 2 * _sieve_limit, 1 << 16)
        flags = np.ones(limit + 1, dtype=bool)
        flags[:2] = False
        flags[4::2] = False
        for p in range(3, math.isqrt(limit) + 1, 2):
            if flags[p]:
                flags[p * p :: 2 * p] = False
        _sieve_primes = np.flatnonzero(flags).astype(np.int64)
        _sieve_limit = limit
    return _sieve_primes


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n <= _sieve_limit or n < (1 << 20):
        ps = _sieve(max(n, 1))
        i = np.searchsorted(ps, n)
        return i < len(ps) and ps[i] == n
    return factorize(n) == [n]


def factorize(n: int) -> list[int]:
    """Prime factors of n > 0 with multiplicity, ascending."""
    return list(_factorize(n))


SPF_LIMIT = 1 << 22
_spf = None


def _spf_table() -> np.ndarray:
    """Smallest prime factor of every n < SPF_LIMIT."""
    global _spf
    if _spf is None:
        spf = np.zeros(SPF_LIMIT, dtype=np.int32)
        for p in _sieve(math.isqrt(SPF_LIMIT - 1)):
            p = int(p)
            block = spf[p * p :: p]
            block[block == 0] = p
        spf[spf == 0] = np.arange(SPF_LIMIT, dtype=np.int32)[spf == 0]
        _spf = spf
    return _spf


@lru_cache(maxsize=1 << 16)
def _factorize(n: int) -> tuple:
    if n < 1:
        raise ValueError("factorize expects a positive integer")
    out = []
    if n < SPF_LIMIT:
        spf = _spf_table()
        while n > 1:
            p = int(spf[n])
            out.append(p)
            n //= p
        return tuple(out)
    if n.bit_length() > 48:
        from sympy import factorint

        for p, e in sorted(factorint(n).items()):
            out += [p] * e
        return tuple(out)
    ps = _sieve(math.isqrt(n))
    ps = ps[: np.searchsorted(ps, math.isqrt(n), side="right")]
    for p in ps[(n % ps) == 0].tolist():
        while n % p == 0:
            out.append(p)
            n //= p
    if n > 1:
        out.append(n)  # no prime factor up to the original square root remains
    return tuple(out)


def smallest_factor_above(n: int, k: int) -> int | None:
    """Smallest prime factor of n exceeding k, or None."""
    for p in _factorize(n):
        if p > k:
            return p
    return None


def largest_factor_above(n: int, k: int) -> int | None:
    """Largest prime factor of n exceeding k, or None."""
    fs = _factorize(n)
    if fs and fs[-1] > k:
        return fs[-1]
    return None


def primes_above(k: int):
    """Ascending stream of primes p > k (unbounded)."""
    lo = k + 1
    limit = max(2 * lo, 1 << 16)
    while True:
        ps = _sieve(limit)
        start = int(np.searchsorted(ps, lo))
        for p in ps[start:]:
            yield int(p)
        lo = int(ps[-1]) + 1 if len(ps) else lo
        limit *= 2


def first_primes_above(k: int, count: int) -> list[int]:
    return list(itertools.islice(primes_above(k), count))
