"""The built-in systems, written in the definition language."""
from __future__ import annotations

from functools import lru_cache

from .sysdef import SystemDef, parse_system_def

SOURCES = {
    # 3n+1 on all positive integers; the cycle (1, 4, 2) has no declared fixed point
    "collatz": """\
name = collatz
admit = "n >= 1"
if n mod 2 = 1 -> 3 * n + 1
if n mod 2 = 0 -> n / 2
list: 2 * m
list if m mod 6 = 4: (m - 1) / 3
""",
    # odd values not divisible by 3, all halvings folded into one step
    "collatz-reduced": """\
name = collatz-reduced
admit = "n >= 1 and n mod 2 != 0 and n mod 3 != 0"
fixed = 1
if n >= 1 -> odd_part(3 * n + 1)
family mu >= 1 : (2^mu * m - 1) / 3 where integral and admitted
""",
    # same, restricted to at least two halvings (4 | 3n+1); other values have no successor
    "collatz-reduced-nu2": """\
name = collatz-reduced-nu2
admit = "n >= 1 and n mod 2 != 0 and n mod 3 != 0"
fixed = 1
if (3 * n + 1) mod 4 = 0 -> odd_part(3 * n + 1)
family mu >= 2 : (2^mu * m - 1) / 3 where integral and admitted
""",
    "simple": """\
name = simple
admit = "n >= 1"
fixed = 1
if n = 1 -> n
if n > 1 and n mod 2 = 1 -> (n - 1) / 2
if n mod 2 = 0 -> n / 2
list: 2 * m, 2 * m + 1
""",
    # multiplied primes: strip the largest prime factor > 3
    "mp": """\
name = mp
admit = "n >= 1 and n mod 2 != 0 and n mod 3 != 0"
fixed = 1
if n = 1 -> 1
if n > 1 -> n / lpf_gt(n, 3)
primes p > 3 : m * p where m = 1 or p >= lpf_gt(m, 3)
""",
    # same family member with the smallest prime factor; finite predecessor sets
    "mp-smallest": """\
name = mp-smallest
admit = "n >= 1 and n mod 2 != 0 and n mod 3 != 0"
fixed = 1
if n = 1 -> 1
if n > 1 -> n / spf_gt(n, 3)
primes p > 3 : m * p where m = 1 or p <= spf_gt(m, 3)
""",
    # subtract the largest power of two
    "pow2": """\
name = pow2
admit = "n >= 0"
fixed = 0
if n = 0 -> 0
if n >= 1 -> n - msb2(n)
family mu >= 0 : m + 2^mu where integral and admitted and 2^mu > m
""",
    # (n + 1) / 2^nu on odd values
    "incr": """\
name = incr
admit = "n >= 1 and n mod 2 = 1"
fixed = 1
if n >= 1 -> odd_part(n + 1)
family mu >= 1 : 2^mu * m - 1 where integral and admitted
""",
}

NAMES = ("collatz", "collatz-reduced", "collatz-reduced-nu2", "simple", "mp", "pow2", "incr")


class UnknownSystem(KeyError):
    pass


@lru_cache(maxsize=None)
def builtin(name: str) -> SystemDef:
    """Return the built-in system called ``name``."""
    try:
        src = SOURCES[name]
    except KeyError:
        known = ", ".join(sorted(SOURCES))
        raise UnknownSystem(f"unknown system {name!r} (known: {known})") from None
    return parse_system_def(src)
