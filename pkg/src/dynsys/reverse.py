"""
Predecessor enumeration from reverse families, breadth-first predecessor
trees, predecessor counts (eta profiles) and coverage checks.

Every candidate produced by a family is kept only if it is integral,
admitted, passes the family's guards, differs from m, and evaluates forward
back to m.  Candidates failing the last test are recorded as violations.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from . import expr as ex
from .expr import Inapplicable, ValueLimitExceeded
from .primes import primes_above
from .sysdef import DomainError, SystemDef, admits

MAX_PARAM_SCAN = 256  # exponent values tried when no param cap is given
MAX_PRIME_SCAN = 10_000  # primes examined per prime family and node


class NoReverseFamily(ValueError):
    pass


@dataclass(frozen=True)
class Caps:
    """Enumeration bounds.

    param_cap: largest exponent for ``family`` lines; most members taken
        from a ``primes`` line.
    value_cap: largest predecessor value.
    count_cap: most predecessors kept per node.
    node_cap: most nodes in a tree.
    """

    param_cap: Optional[int] = 24
    value_cap: Optional[int] = 2**40
    count_cap: Optional[int] = None
    node_cap: int = 1_000_000


DEFAULT_CAPS = Caps()


@dataclass
class PredecessorScan:
    m: int
    values: list
    truncated: bool = False  # a cap stopped the enumeration
    unbounded: bool = False  # some family is parametric
    violations: list = field(default_factory=list)
    duplicates: int = 0

    @property
    def count(self) -> int:
        return len(self.values)


_FULL = (None, None)


def _param_interval(node, param):
    """Build ``f(m) -> (lo, hi) | None`` bracketing the parameter values a guard can accept.

    The bracket is a superset (the guard is still evaluated per candidate);
    None means no value is accepted and a None bound means unbounded.
    """
    if node is None:
        return lambda m: _FULL
    if param not in ex.variables(node):
        cond = ex.compile_python_bool(node, ("m",))
        return lambda m: _FULL if cond(m) else None
    if isinstance(node, ex.Cmp):
        op, left, right = node.op, node.left, node.right
        if isinstance(right, ex.Var) and right.name == param and param not in ex.variables(left):
            op = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "=", "!=": "!="}[op]
            left, right = right, left
        if isinstance(left, ex.Var) and left.name == param and param not in ex.variables(right) and op != "!=":
            bound = ex.compile_python_expr(right, ("m",))

            def cmp_interval(m):
                try:
                    e = bound(m)
                except ArithmeticError:
                    return None
                return {">=": (e, None), ">": (e + 1, None), "<=": (None, e), "<": (None, e - 1), "=": (e, e)}[op]

            return cmp_interval
        return lambda m: _FULL
    if isinstance(node, (ex.And, ex.Or)):
        parts = [_param_interval(x, param) for x in node.items]
        conj = isinstance(node, ex.And)

        def combine(m):
            acc = None
            for i, f in enumerate(parts):
                r = f(m)
                if conj:
                    if r is None:
                        return None
                    if i == 0:
                        acc = r
                        continue
                    lo = r[0] if acc[0] is None else acc[0] if r[0] is None else max(acc[0], r[0])
                    hi = r[1] if acc[1] is None else acc[1] if r[1] is None else min(acc[1], r[1])
                    acc = (lo, hi)
                else:
                    if r is None:
                        continue
                    if acc is None:
                        acc = r
                        continue
                    lo = None if acc[0] is None or r[0] is None else min(acc[0], r[0])
                    hi = None if acc[1] is None or r[1] is None else max(acc[1], r[1])
                    acc = (lo, hi)
            return acc

        return combine
    return lambda m: _FULL


def _family_candidates(fam, m, caps: Caps):
    """Yield (value, cut) pairs; cut=True marks that a cap ended the scan."""
    fns, guard, where = fam.compiled
    if fam.kind == "list":
        if guard is not None and not guard(m):
            return
        for fn in fns:
            try:
                v = fn(m)
            except (Inapplicable, ValueLimitExceeded):
                continue
            if caps.value_cap is not None and v > caps.value_cap:
                yield None, True
                continue
            yield v, False
        return

    fn = fns[0]
    if fam.kind == "family":
        top = caps.param_cap if caps.param_cap is not None else fam.bound + MAX_PARAM_SCAN
        for mu in range(fam.bound, top + 1):
            try:
                v = fn(m, mu)
            except (Inapplicable, ValueLimitExceeded):
                continue
            # members grow with the exponent, so the first one past the cap ends the scan
            if caps.value_cap is not None and v > caps.value_cap:
                yield None, True
                return
            if where is not None and not where(m, mu):
                continue
            yield v, False
        yield None, True
        return

    span = _prime_span(fam)(m)
    if span is None:
        return
    lo, hi = span
    start = fam.bound if lo is None else max(fam.bound, lo - 1)
    accepted = 0
    for i, p in enumerate(primes_above(start)):
        if hi is not None and p > hi:
            return  # every admissible prime has been examined
        if i >= MAX_PRIME_SCAN:
            break
        try:
            v = fn(m, p)
        except (Inapplicable, ValueLimitExceeded):
            continue
        if caps.value_cap is not None and v > caps.value_cap:
            break
        if where is not None and not where(m, p):
            continue
        yield v, False
        accepted += 1
        if caps.param_cap is not None and accepted >= caps.param_cap:
            break
    yield None, True


_span_cache: dict = {}


def _prime_span(fam):
    if fam not in _span_cache:
        _span_cache[fam] = _param_interval(fam.where, fam.param)
    return _span_cache[fam]


def scan_predecessors(sys: SystemDef, m: int, caps: Caps = DEFAULT_CAPS) -> PredecessorScan:
    """Enumerate direct predecessors of m with bookkeeping about caps and violations."""
    if not sys.reverse:
        raise NoReverseFamily(f"system {sys.name!r} declares no reverse family")
    if not admits(sys, m):
        raise DomainError(f"{m} is not admitted by system {sys.name!r}")
    out = PredecessorScan(m, [], unbounded=any(f.parametric for f in sys.reverse))
    seen = set()
    step = sys._step_fn
    for fam in sys.reverse:
        for v, cut in _family_candidates(fam, m, caps):
            if cut:
                out.truncated = True
                continue
            if v == m or v < 0 or not admits(sys, v):
                continue
            if v in seen:
                out.duplicates += 1
                continue
            try:
                back = step(v)
            except ArithmeticError:
                back = None
            if back != m:
                out.violations.append((v, back))
                continue
            seen.add(v)
            out.values.append(v)
            if caps.count_cap is not None and len(out.values) >= caps.count_cap:
                out.truncated = True
                return out
    return out


def predecessors(sys: SystemDef, m: int, caps: Caps = DEFAULT_CAPS) -> list[int]:
    """Direct predecessors of m, in family order then ascending parameter."""
    return scan_predecessors(sys, m, caps).values


# --------------------------------------------------------------------------


class Frontier(enum.Enum):
    COMPLETE = "complete"
    DEPTH = "truncated_by_depth"
    CAP = "truncated_by_cap"


@dataclass
class ReverseTree:
    root: int
    depth: int
    caps: Caps
    parent: dict = field(default_factory=dict)
    depth_of: dict = field(default_factory=dict)
    children: dict = field(default_factory=dict)
    frontier: dict = field(default_factory=dict)
    duplicate_rejections: int = 0
    cycle_closures: int = 0  # predecessor already in the tree through a cycle
    violations: list = field(default_factory=list)

    @property
    def nodes(self) -> set:
        return set(self.depth_of)

    def __len__(self):
        return len(self.depth_of)

    def __contains__(self, n):
        return n in self.depth_of

    def level(self, k: int) -> list[int]:
        return sorted(n for n, d in self.depth_of.items() if d == k)

    @property
    def cap_truncated(self) -> bool:
        return any(f is Frontier.CAP for f in self.frontier.values())

    def cap_truncated_nodes(self) -> list[int]:
        return sorted(n for n, f in self.frontier.items() if f is Frontier.CAP)

    def level_counts(self) -> list[int]:
        counts = [0] * (self.depth + 1)
        for d in self.depth_of.values():
            counts[d] += 1
        return counts

    def complete_levels(self) -> int:
        """Number of leading levels whose size is exact (no cap cut above them)."""
        worst = self.depth + 1
        for n, f in self.frontier.items():
            if f is Frontier.CAP:
                worst = min(worst, self.depth_of[n] + 1)
        return worst

    def to_dict(self) -> dict:
        return {
            "root": self.root,
            "depth": self.depth,
            "nodes": [
                {"value": n, "parent": self.parent[n], "depth": self.depth_of[n], "frontier": self.frontier[n].value}
                for n in sorted(self.depth_of, key=lambda x: (self.depth_of[x], x))
            ],
        }


def build_reverse_tree(sys: SystemDef, root: int, depth: int, caps: Caps = DEFAULT_CAPS, *, cache: dict | None = None) -> ReverseTree:
    """Breadth-first predecessor tree of ``root`` down to ``depth`` levels.

    ``cache`` (value -> PredecessorScan) may be shared between trees built
    with the same system and caps.
    """
    if not admits(sys, root):
        raise DomainError(f"{root} is not admitted by system {sys.name!r}")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    t = ReverseTree(root, depth, caps)
    t.parent[root] = None
    t.depth_of[root] = 0
    t.children[root] = []
    queue = deque([root])
    while queue:
        m = queue.popleft()
        d = t.depth_of[m]
        if d >= depth:
            t.frontier[m] = Frontier.DEPTH
            continue
        if len(t.depth_of) >= caps.node_cap:
            t.frontier[m] = Frontier.CAP
            continue
        if cache is None:
            scan = scan_predecessors(sys, m, caps)
        else:
            scan = cache.get(m)
            if scan is None:
                scan = cache[m] = scan_predecessors(sys, m, caps)
        t.violations += [(v, m, back) for v, back in scan.violations]
        t.duplicate_rejections += scan.duplicates
        for v in scan.values:
            if v in t.depth_of:
                if _is_ancestor(t, v, m):
                    t.cycle_closures += 1
                else:
                    t.duplicate_rejections += 1
                continue
            t.parent[v] = m
            t.depth_of[v] = d + 1
            t.children[v] = []
            t.children[m].append(v)
            queue.append(v)
        t.frontier[m] = Frontier.CAP if scan.truncated else Frontier.COMPLETE
    return t


def _is_ancestor(t: ReverseTree, a: int, n: int) -> bool:
    while n is not None:
        if n == a:
            return True
        n = t.parent[n]
    return False


# --------------------------------------------------------------------------


@dataclass
class EtaProfile:
    counts: dict  # node -> predecessor count within caps
    unbounded: dict  # node -> True when a parametric family contributes
    truncated: dict  # node -> True when a cap cut the enumeration

    def finite_values(self) -> set:
        return {c for n, c in self.counts.items() if not self.unbounded[n]}

    def to_dict(self) -> dict:
        return {
            str(n): {"count": self.counts[n], "unbounded": self.unbounded[n], "truncated": self.truncated[n]}
            for n in sorted(self.counts)
        }


def eta_profile(sys: SystemDef, nodes, caps: Caps = DEFAULT_CAPS) -> EtaProfile:
    counts, unb, trunc = {}, {}, {}
    for n in sorted(set(nodes)):
        s = scan_predecessors(sys, n, caps)
        counts[n] = s.count
        unb[n] = s.unbounded
        trunc[n] = s.truncated
    return EtaProfile(counts, unb, trunc)


@dataclass
class Coverage:
    covered: set
    uncovered: set
    tree: ReverseTree

    @property
    def complete(self) -> bool:
        return not self.uncovered


def coverage_check(sys: SystemDef, root: int, bound: int, depth: int, caps: Caps = DEFAULT_CAPS) -> Coverage:
    """Split the admitted values <= bound into those reached by the reverse tree and the rest."""
    tree = build_reverse_tree(sys, root, depth, caps)
    admitted = {n for n in range(0, bound + 1) if admits(sys, n)}
    covered = admitted & tree.nodes
    return Coverage(covered, admitted - covered, tree)
