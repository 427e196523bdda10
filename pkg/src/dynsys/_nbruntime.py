"""
int64 runtime for numba-compiled system definitions.

Every helper propagates the OVF / INAPP sentinels from ``expr`` and keeps
magnitudes below ``LIM`` so that nothing can wrap.  Callers that see OVF
fall back to exact Python integers.
"""
from __future__ import annotations

import numba
from numba import njit

from .expr import INAPP, LIM, OVF, numba_bool_source, numba_rules_source


@njit(cache=True)
def _bad(a, b):
    if a == OVF or b == OVF:
        return OVF
    return INAPP


@njit(cache=True)
def _chk(x):
    if x > LIM or x < -LIM:
        return OVF
    return x


@njit(cache=True)
def _nadd(a, b):
    if a <= INAPP or b <= INAPP:
        return _bad(a, b)
    return _chk(a + b)


@njit(cache=True)
def _nsub(a, b):
    if a <= INAPP or b <= INAPP:
        return _bad(a, b)
    return _chk(a - b)


@njit(cache=True)
def _nneg(a):
    if a <= INAPP:
        return a
    return -a


@njit(cache=True)
def _nmul(a, b):
    if a <= INAPP or b <= INAPP:
        return _bad(a, b)
    if a == 0 or b == 0:
        return 0
    if abs(a) > LIM // abs(b):
        return OVF
    return a * b


@njit(cache=True)
def _ndiv(a, b):
    if a <= INAPP or b <= INAPP:
        return _bad(a, b)
    if b == 0:
        return INAPP
    if a % b != 0:
        return INAPP
    return a // b


@njit(cache=True)
def _nmod(a, b):
    if a <= INAPP or b <= INAPP:
        return _bad(a, b)
    if b == 0:
        return INAPP
    return a % b


@njit(cache=True)
def _npow(a, b):
    if a <= INAPP or b <= INAPP:
        return _bad(a, b)
    if b < 0:
        return INAPP
    r = 1
    for _ in range(b):
        r = _nmul(r, a)
        if r == OVF:
            return OVF
        if r == 0 or r == 1:
            break
    if r == 1 and a == -1 and b % 2 == 1:
        return -1
    return r


@njit(cache=True)
def _nodd_part(x):
    if x <= INAPP:
        return x
    if x <= 0:
        return INAPP
    while x % 2 == 0:
        x //= 2
    return x


@njit(cache=True)
def _nv2(x):
    if x <= INAPP:
        return x
    if x <= 0:
        return INAPP
    c = 0
    while x % 2 == 0:
        x //= 2
        c += 1
    return c


@njit(cache=True)
def _nmsb2(x):
    if x <= INAPP:
        return x
    if x <= 0:
        return INAPP
    p = 1
    while p <= x // 2:
        p *= 2
    return p


@njit(cache=True)
def _nspf_gt(x, k):
    if x <= INAPP or k <= INAPP:
        return _bad(x, k)
    if x <= 0:
        return INAPP
    d = 2
    while d * d <= x:
        if x % d == 0:
            if d > k:
                return d
            while x % d == 0:
                x //= d
        d += 1 if d == 2 else 2
    if x > 1 and x > k:
        return x
    return INAPP


@njit(cache=True)
def _nlpf_gt(x, k):
    if x <= INAPP or k <= INAPP:
        return _bad(x, k)
    if x <= 0:
        return INAPP
    best = 0
    d = 2
    while d * d <= x:
        while x % d == 0:
            best = d
            x //= d
        d += 1 if d == 2 else 2
    if x > 1:
        best = x
    if best > k:
        return best
    return INAPP


@njit(cache=True)
def _tri(a, b):
    if a == OVF or b == OVF:
        return -2
    return -1


@njit(cache=True)
def _neq(a, b):
    if a <= INAPP or b <= INAPP:
        return _tri(a, b)
    return 1 if a == b else 0


@njit(cache=True)
def _nne(a, b):
    if a <= INAPP or b <= INAPP:
        return _tri(a, b)
    return 1 if a != b else 0


@njit(cache=True)
def _nlt(a, b):
    if a <= INAPP or b <= INAPP:
        return _tri(a, b)
    return 1 if a < b else 0


@njit(cache=True)
def _nle(a, b):
    if a <= INAPP or b <= INAPP:
        return _tri(a, b)
    return 1 if a <= b else 0


@njit(cache=True)
def _ngt(a, b):
    if a <= INAPP or b <= INAPP:
        return _tri(a, b)
    return 1 if a > b else 0


@njit(cache=True)
def _nge(a, b):
    if a <= INAPP or b <= INAPP:
        return _tri(a, b)
    return 1 if a >= b else 0


@njit(cache=True)
def _nand(x, y):
    if x < 0:
        return x
    if x == 0:
        return 0
    return y


@njit(cache=True)
def _nor(x, y):
    if x < 0:
        return x
    if x == 1:
        return 1
    return y


@njit(cache=True)
def _nnot(x):
    if x < 0:
        return x
    return 1 - x


_NAMESPACE = {name: obj for name, obj in globals().items() if name.startswith("_n")}
_NAMESPACE.update(OVF=OVF, INAPP=INAPP)


def _jit_from_source(source: str, name: str):
    namespace = dict(_NAMESPACE)
    exec(compile(source, f"<dynsys-numba:{name}>", "exec"), namespace)
    return numba.njit(namespace[name])


def jit_rules(rules):
    return _jit_from_source(numba_rules_source(rules), "_step")


def jit_predicate(node):
    return _jit_from_source(numba_bool_source(node), "_pred")
