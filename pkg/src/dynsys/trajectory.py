"""
Forward iteration of a system from a seed, with exact root classification.

Cycles are found by remembering every visited value; once a trajectory has
stored ``memory_cap`` values the remainder is scanned with Brent's algorithm
instead, so memory stays bounded.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .expr import ValueLimitExceeded
from .sysdef import DomainError, SystemDef, admits, raw_step

DEFAULT_MAX_STEPS = 10**6
DEFAULT_MAX_VALUE = 2**127


@dataclass(frozen=True)
class Limits:
    max_steps: int = DEFAULT_MAX_STEPS
    max_value: int = DEFAULT_MAX_VALUE


@dataclass(frozen=True)
class Root:
    """Terminal object of a trajectory.

    kind is one of ``fixed``, ``cycle``, ``step_bound``, ``value_bound``,
    ``left_domain`` or ``no_rule``.  ``value`` is the fixed point, the minimal
    cycle member, or the value at which the trajectory stopped.
    """

    kind: str
    value: Optional[int] = None
    cycle: tuple = ()

    @property
    def converged(self) -> bool:
        return self.kind in ("fixed", "cycle")

    @property
    def label(self) -> str:
        if self.kind == "fixed":
            return f"FixedPoint({self.value})"
        if self.kind == "cycle":
            return "Cycle(" + ",".join(map(str, self.cycle)) + ")"
        if self.kind == "step_bound":
            return "ExceededStepBound"
        if self.kind == "value_bound":
            return "ExceededValueBound"
        if self.kind == "left_domain":
            return f"LeftDomain({self.value})"
        return f"NoRuleApplies({self.value})"

    def __str__(self):
        return self.label

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "value": self.value}
        if self.kind == "cycle":
            d["cycle"] = list(self.cycle)
        return d


def FixedPoint(v: int) -> Root:
    return Root("fixed", v)


def Cycle(members) -> Root:
    """Cycle rotated to start at its minimal member."""
    members = tuple(members)
    if len(members) < 2:
        raise ValueError("a cycle has at least two members; use FixedPoint")
    i = members.index(min(members))
    rot = members[i:] + members[:i]
    return Root("cycle", rot[0], rot)


ExceededStepBound = Root("step_bound")
ExceededValueBound = Root("value_bound")


def LeftDomain(v: int) -> Root:
    return Root("left_domain", v)


def NoRule(v: int) -> Root:
    return Root("no_rule", v)


@dataclass
class TrajectoryRecord:
    seed: int
    values: list
    root: Root
    steps_to_root: int
    total_stop: Optional[int]
    max_excursion: int
    truncated: bool = False  # values holds only a prefix (memory cap reached)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "root": self.root.to_dict(),
            "root_label": self.root.label,
            "steps_to_root": self.steps_to_root,
            "total_stop": self.total_stop,
            "max_excursion": self.max_excursion,
            "length": len(self.values),
            "truncated": self.truncated,
            "values": list(self.values),
        }


def classify_root(values, fixed_point: Optional[int] = None) -> Optional[Root]:
    """Classify the end of an observed value sequence, or None if undecided.

    ``[1, 4, 2, 1]`` is a cycle, ``[1, 1]`` a fixed point; a sequence ending at
    the declared fixed point is classified as that fixed point.
    """
    values = list(values)
    if not values:
        return None
    last = values[-1]
    if len(values) >= 2 and values[-2] == last:
        return FixedPoint(last)
    if fixed_point is not None and last == fixed_point:
        return FixedPoint(last)
    first = values.index(last)
    if first < len(values) - 1:
        return Cycle(values[first:-1])
    return None


def stop_target(sys: SystemDef) -> int:
    """Value whose first arrival ends the total stopping time."""
    return sys.fixed_point if sys.fixed_point is not None else 1


def trace(sys: SystemDef, seed: int, limits: Limits | None = None, *, memory_cap: int = 1_000_000) -> TrajectoryRecord:
    """Iterate ``sys`` from ``seed`` until a root or a limit is reached."""
    limits = limits or Limits()
    if not admits(sys, seed):
        raise DomainError(f"seed {seed} is not admitted by system {sys.name!r}")
    target = stop_target(sys)
    step = sys._step_fn
    admit = sys._admit_fn
    max_steps, max_value = limits.max_steps, limits.max_value

    values = [seed]
    seen = {seed: 0}
    cur = seed
    root = None
    if seed > max_value:
        root = ExceededValueBound
    while root is None:
        if len(values) - 1 >= max_steps:
            root = ExceededStepBound
            break
        try:
            v = step(cur)
        except ValueLimitExceeded:
            root = ExceededValueBound
            break
        if v is None:
            root = NoRule(cur)
            break
        if v == cur:
            root = FixedPoint(cur)
            break
        values.append(v)
        if v < 0 or not admit(v):
            root = LeftDomain(v)
            break
        if v > max_value:
            root = ExceededValueBound
            break
        if v in seen:
            root = Cycle(values[seen[v]:-1])
            return _record(seed, values, root, seen[v], target)
        if len(seen) >= memory_cap:
            return _brent_tail(sys, seed, values, target, limits)
        seen[v] = len(values) - 1
        cur = v
    return _record(seed, values, root, len(values) - 1, target)


def _record(seed, values, root, steps_to_root, target) -> TrajectoryRecord:
    try:
        total = values.index(target)
    except ValueError:
        total = None
    return TrajectoryRecord(seed, values, root, steps_to_root, total, max(values))


def _brent_tail(sys, seed, values, target, limits) -> TrajectoryRecord:
    """Continue a long trajectory without storing values (Brent cycle detection)."""
    step = sys._step_fn
    admit = sys._admit_fn
    i0 = len(values) - 1
    x0 = values[-1]
    try:
        total = values.index(target)
    except ValueError:
        total = None
    peak = max(values)

    def advance(x, idx):
        """One checked step; returns (next value, terminal root or None)."""
        if idx >= limits.max_steps:
            return None, ExceededStepBound
        try:
            v = step(x)
        except ValueLimitExceeded:
            return None, ExceededValueBound
        if v is None:
            return None, NoRule(x)
        if v == x:
            return None, FixedPoint(x)
        if v < 0 or not admit(v):
            return v, LeftDomain(v)
        if v > limits.max_value:
            return v, ExceededValueBound
        return v, None

    power = lam = 1
    tortoise = x0
    idx = i0
    hare, stop = advance(x0, idx)
    while stop is None:
        idx += 1
        peak = max(peak, hare)
        if total is None and hare == target:
            total = idx
        if tortoise == hare:
            break
        if power == lam:
            tortoise = hare
            power *= 2
            lam = 0
        hare, stop = advance(hare, idx)
        lam += 1
    if stop is not None:
        if hare is not None:
            idx += 1
            peak = max(peak, hare)
        return TrajectoryRecord(seed, values, stop, idx, total, peak, truncated=True)

    # cycle of length lam; locate its first index after x0
    tortoise = hare = x0
    for _ in range(lam):
        hare = step(hare)
    mu = 0
    while tortoise != hare:
        tortoise = step(tortoise)
        hare = step(hare)
        mu += 1
    members = [tortoise]
    x = step(tortoise)
    while x != tortoise:
        members.append(x)
        x = step(x)
    return TrajectoryRecord(seed, values, Cycle(members), i0 + mu, total, peak, truncated=True)


# --------------------------------------------------------------------------
# descent (every admitted n above the fixed point has a smaller successor)


@dataclass
class DescentResult:
    verdict: str  # pass | fail | inconclusive
    witness: Optional[tuple] = None
    no_rule: list = field(default_factory=list)
    checked: int = 0
    reason: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def descent_check(sys: SystemDef, lo: int, hi: int) -> DescentResult:
    """First (n, f(n)) with n above the fixed point and f(n) >= n, scanning upward.

    Values with no applicable rule are collected in ``no_rule`` rather than
    counted as failures.  A successor outside the admitted set is a failure.
    """
    if sys.fixed_point is None:
        return DescentResult("inconclusive", reason="no declared fixed point")
    fp = sys.fixed_point
    step, admit = sys._step_fn, sys._admit_fn
    out = DescentResult("pass")
    for n in range(max(lo, fp + 1, 0), hi + 1):
        if not admit(n):
            continue
        out.checked += 1
        v = step(n)
        if v is None:
            out.no_rule.append(n)
            continue
        if v >= n or v < 0 or not admit(v):
            out.verdict = "fail"
            out.witness = (n, v)
            return out
    return out
