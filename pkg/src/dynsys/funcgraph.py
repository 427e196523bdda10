"""
Finite functional graphs with replayable structure-preserving reductions.

Each node has at most one successor: another node, a ``Boundary`` (the
value lies outside the materialized window) or ``None`` (a fixed point or a
value where no rule applies).  Reductions mutate the graph in place and are
appended to ``log``; ``replay`` reapplies a log to a copy of the original.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Hashable, Iterable, Optional

from .canonical import ahu_encode
from .sysdef import SystemDef, admits, raw_step


class GraphError(ValueError):
    """A reduction was requested whose precondition does not hold."""


@dataclass(frozen=True)
class Boundary:
    value: int

    def __repr__(self):
        return f"Boundary({self.value})"


@dataclass(frozen=True)
class RootEntry:
    kind: str  # fixed | cycle | boundary
    nodes: tuple  # the fixed node, the cycle from its smallest member, or the exit node
    basin: frozenset
    exit: Optional[Boundary] = None

    @property
    def key(self):
        return self.nodes[0]


class FuncGraph:
    def __init__(self, succ: dict, labels: Optional[dict] = None):
        self.succ: dict = dict(succ)
        self.labels: Optional[dict] = dict(labels) if labels is not None else None
        self.log: list = []
        self.preds: dict = {n: set() for n in self.succ}
        for n, s in self.succ.items():
            if s is None or isinstance(s, Boundary):
                continue
            if s not in self.succ:
                raise GraphError(f"successor {s!r} of {n!r} is not a node")
            self.preds[s].add(n)
        if self.labels is not None:
            if set(self.labels) != set(self.succ):
                raise GraphError("labels must cover exactly the node set")
            if len(set(self.labels.values())) != len(self.labels):
                raise GraphError("labels must be unique")

    # ---------------------------------------------------------------- basics

    @property
    def nodes(self) -> list:
        return sorted(self.succ, key=self._order)

    def _order(self, n):
        return (self.labels[n], repr(n)) if self.labels is not None else (0, n) if isinstance(n, int) else (1, repr(n))

    def label(self, n):
        return self.labels[n] if self.labels is not None else n

    def node_of_label(self, value):
        if self.labels is None:
            return value if value in self.succ else None
        for n, v in self.labels.items():
            if v == value:
                return n
        return None

    def __len__(self):
        return len(self.succ)

    def __contains__(self, n):
        return n in self.succ

    def in_degree(self, n) -> int:
        return len(self.preds[n])

    def copy(self) -> "FuncGraph":
        g = FuncGraph.__new__(FuncGraph)
        g.succ = dict(self.succ)
        g.labels = dict(self.labels) if self.labels is not None else None
        g.log = [dict(e) for e in self.log]
        g.preds = {n: set(p) for n, p in self.preds.items()}
        return g

    def __eq__(self, other):
        if not isinstance(other, FuncGraph):
            return NotImplemented
        return self.succ == other.succ and self.labels == other.labels

    def edges(self) -> list:
        return [(n, self.succ[n]) for n in self.nodes]

    def is_cycle_member(self, n) -> bool:
        x = self.succ[n]
        steps = 0
        while x is not None and not isinstance(x, Boundary) and steps <= len(self.succ):
            if x == n:
                return True
            x = self.succ[x]
            steps += 1
        return False

    def check_functional(self) -> bool:
        """Out-degree <= 1 holds by construction; verify the pred index agrees."""
        for n, s in self.succ.items():
            if s is not None and not isinstance(s, Boundary) and n not in self.preds[s]:
                return False
        return all(self.succ[p] == n for n, ps in self.preds.items() for p in ps)

    # ------------------------------------------------------------ internals

    def _set_succ(self, n, s):
        old = self.succ[n]
        if old is not None and not isinstance(old, Boundary):
            self.preds[old].discard(n)
        self.succ[n] = s
        if s is not None and not isinstance(s, Boundary):
            self.preds[s].add(n)

    def _remove(self, n):
        self._set_succ(n, None)
        for p in list(self.preds[n]):
            raise GraphError(f"internal: removing {n!r} with live input {p!r}")
        del self.preds[n]
        del self.succ[n]
        if self.labels is not None:
            del self.labels[n]

    def _redirect_inputs(self, src, dst):
        for p in list(self.preds[src]):
            self._set_succ(p, dst)

    def _log(self, block: int, params: dict, removed: list):
        self.log.append({"index": len(self.log), "block": block, "params": params, "removed": removed})

    # ----------------------------------------------------------- reductions

    def contract_chain(self, chain: list, keep: str = "first") -> "FuncGraph":
        """Block 1: replace the path ``chain[0] -> ... -> chain[-1]`` by one node.

        With ``keep="first"`` the first node survives and takes over the last
        node's successor; interior nodes must have in-degree exactly 1.  With
        ``keep="last"`` the last node survives and every input into the
        removed nodes is redirected to it.
        """
        chain = list(chain)
        if keep not in ("first", "last"):
            raise GraphError("keep must be 'first' or 'last'")
        if not chain:
            raise GraphError("empty chain")
        for n in chain:
            if n not in self.succ:
                raise GraphError(f"{n!r} is not a node")
        if len(set(chain)) != len(chain):
            raise GraphError("chain repeats a node")
        for a, b in zip(chain, chain[1:]):
            if self.succ[a] != b:
                raise GraphError(f"{a!r} -> {b!r} is not an edge")
        for n in chain:
            if self.is_cycle_member(n):
                raise GraphError(f"{n!r} is a cycle member")
        if keep == "first":
            for n in chain[1:]:
                if self.in_degree(n) != 1:
                    raise GraphError(f"interior node {n!r} has in-degree {self.in_degree(n)}")
        if len(chain) == 1:
            self._log(1, {"chain": chain, "keep": keep}, [])
            return self
        if keep == "first":
            head, tail = chain[0], chain[-1]
            target = self.succ[tail]
            self._set_succ(tail, None)
            removed = chain[1:]
            for n in removed:
                self._redirect_inputs(n, head)
            self._set_succ(head, None)
            for n in removed:
                self._set_succ(n, None)
            for n in removed:
                self._remove(n)
            self._set_succ(head, target)
        else:
            keeper = chain[-1]
            removed = chain[:-1]
            for n in removed:
                self._set_succ(n, None)
            for n in removed:
                self._redirect_inputs(n, keeper)
            for n in removed:
                self._remove(n)
        self._log(1, {"chain": chain, "keep": keep}, removed)
        return self

    def collapse_cycle(self, cycle: list) -> "FuncGraph":
        """Block 2: replace a cycle by one fixed node (the smallest member)."""
        cycle = list(cycle)
        if len(cycle) < 1 or len(set(cycle)) != len(cycle):
            raise GraphError("not a cycle")
        for n in cycle:
            if n not in self.succ:
                raise GraphError(f"{n!r} is not a node")
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            if self.succ[a] != b:
                raise GraphError(f"{a!r} -> {b!r} is not a cycle edge")
        keeper = min(cycle, key=self._order)
        others = [n for n in cycle if n != keeper]
        for n in cycle:
            self._set_succ(n, None)
        for n in others:
            self._redirect_inputs(n, keeper)
        for n in others:
            self._remove(n)
        self._log(2, {"cycle": cycle}, others)
        return self

    def prune_no_input(self, node) -> "FuncGraph":
        """Block 3: remove a node without inputs that is not a fixed point."""
        if node not in self.succ:
            raise GraphError(f"{node!r} is not a node")
        if self.in_degree(node):
            raise GraphError(f"{node!r} has {self.in_degree(node)} input(s)")
        if self.succ[node] is None:
            raise GraphError(f"{node!r} is a fixed point")
        self._set_succ(node, None)
        self._remove(node)
        self._log(3, {"node": node}, [node])
        return self

    def branch(self, delegate) -> list:
        """The delegate and all its direct and indirect predecessors."""
        out, stack = [], [delegate]
        seen = {delegate}
        while stack:
            n = stack.pop()
            out.append(n)
            for p in self.preds[n]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return sorted(out, key=self._order)

    def remove_branch(self, delegate) -> "FuncGraph":
        """Block 4: remove the branch of a delegate whose successor stays in the graph."""
        if delegate not in self.succ:
            raise GraphError(f"{delegate!r} is not a node")
        s = self.succ[delegate]
        if s is None:
            raise GraphError(f"{delegate!r} is a fixed point")
        if isinstance(s, Boundary):
            raise GraphError(f"successor of {delegate!r} lies outside the graph")
        if self.is_cycle_member(delegate):
            raise GraphError(f"{delegate!r} is a cycle member")
        nodes = self.branch(delegate)
        for n in nodes:
            self._set_succ(n, None)
        for n in nodes:
            self._remove(n)
        self._log(4, {"delegate": delegate}, nodes)
        return self

    def permute_labels(self, mapping: dict) -> "FuncGraph":
        """Block 5: rename labels by a bijection of (a subset of) the label set."""
        if self.labels is None:
            raise GraphError("graph has no labels")
        mapping = dict(mapping)
        present = set(self.labels.values())
        if not set(mapping) <= present:
            raise GraphError("mapping names labels not in the graph")
        if set(mapping.values()) != set(mapping) or len(set(mapping.values())) != len(mapping):
            raise GraphError("mapping is not a bijection on its labels")
        self.labels = {n: mapping.get(v, v) for n, v in self.labels.items()}
        self._log(5, {"mapping": sorted(mapping.items())}, [])
        return self

    # ---------------------------------------------------------------- roots

    def roots(self) -> list[RootEntry]:
        """Every node's terminal object: fixed node, cycle, or boundary exit."""
        owner: dict = {}
        entries: list = []
        for start in self.nodes:
            if start in owner:
                continue
            path, pos = [], {}
            x = start
            while True:
                if x in owner:
                    rid = owner[x]
                    break
                if x in pos:
                    cyc = path[pos[x]:]
                    i = cyc.index(min(cyc, key=self._order))
                    cyc = cyc[i:] + cyc[:i]
                    rid = len(entries)
                    entries.append(["cycle", tuple(cyc), None])
                    break
                pos[x] = len(path)
                path.append(x)
                s = self.succ[x]
                if s is None:
                    rid = len(entries)
                    entries.append(["fixed", (x,), None])
                    break
                if isinstance(s, Boundary):
                    rid = len(entries)
                    entries.append(["boundary", (x,), s])
                    break
                x = s
            for n in path:
                owner[n] = rid
        basins: list = [[] for _ in entries]
        for n, r in owner.items():
            basins[r].append(n)
        out = [RootEntry(k, nodes, frozenset(basins[i]), exit) for i, (k, nodes, exit) in enumerate(entries)]
        return sorted(out, key=lambda e: ({"fixed": 0, "cycle": 1, "boundary": 2}[e.kind], self._order(e.key)))

    def cycles(self) -> list[tuple]:
        return [e.nodes for e in self.roots() if e.kind == "cycle"]

    # ------------------------------------------------------- serialization

    def to_dict(self) -> dict:
        def enc(s):
            if s is None:
                return None
            if isinstance(s, Boundary):
                return {"boundary": s.value}
            return s

        return {
            "nodes": [
                {"id": n, "label": self.label(n), "succ": enc(self.succ[n])}
                for n in self.nodes
            ],
            "labelled": self.labels is not None,
            "log": self.log,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), default=repr)

    @classmethod
    def from_dict(cls, d: dict) -> "FuncGraph":
        succ, labels = {}, {}
        for item in d["nodes"]:
            s = item["succ"]
            succ[item["id"]] = Boundary(s["boundary"]) if isinstance(s, dict) else s
            labels[item["id"]] = item["label"]
        g = cls(succ, labels if d.get("labelled", True) else None)
        g.log = list(d.get("log", []))
        return g


# --------------------------------------------------------------------------


def from_system(sys: SystemDef, lo: int, hi: int) -> FuncGraph:
    """Materialize ``sys`` on the admitted values of ``[lo, hi]``; node ids are the values."""
    if lo > hi:
        raise ValueError(f"empty window [{lo}, {hi}]")
    nodes = [n for n in range(max(lo, 0), hi + 1) if admits(sys, n)]
    inside = set(nodes)
    succ = {}
    for n in nodes:
        try:
            v = raw_step(sys, n)
        except ArithmeticError:
            v = None
        if v is None or v == n:
            succ[n] = None
        elif v in inside:
            succ[n] = v
        else:
            succ[n] = Boundary(v)
    return FuncGraph(succ, {n: n for n in nodes})


def from_succ(succ: dict) -> FuncGraph:
    """Unlabelled graph from a successor map (self-loops become fixed nodes)."""
    return FuncGraph({n: (None if s == n else s) for n, s in succ.items()})


def _apply(g: FuncGraph, block: int, params: dict) -> FuncGraph:
    if block == 1:
        return g.contract_chain(params["chain"], params.get("keep", "first"))
    if block == 2:
        return g.collapse_cycle(params["cycle"])
    if block == 3:
        return g.prune_no_input(params["node"])
    if block == 4:
        return g.remove_branch(params["delegate"])
    if block == 5:
        return g.permute_labels(dict((a, b) for a, b in params["mapping"]))
    raise GraphError(f"unknown block {block}")


def apply_block(g: FuncGraph, block: int, **params) -> FuncGraph:
    """Copying form of a reduction: returns a new graph, ``g`` is untouched."""
    return _apply(g.copy(), block, params)


def block1_contract_chain(g: FuncGraph, chain, keep: str = "first") -> FuncGraph:
    return g.copy().contract_chain(chain, keep)


def block2_cycle_to_fixed(g: FuncGraph, cycle) -> FuncGraph:
    return g.copy().collapse_cycle(cycle)


def block3_prune_no_input(g: FuncGraph, node) -> FuncGraph:
    return g.copy().prune_no_input(node)


def block4_remove_branch(g: FuncGraph, delegate) -> FuncGraph:
    return g.copy().remove_branch(delegate)


def block5_permute_labels(g: FuncGraph, mapping: dict) -> FuncGraph:
    return g.copy().permute_labels(mapping)


def replay(original: FuncGraph, log: Iterable[dict]) -> FuncGraph:
    """Reapply logged reductions to a copy of ``original``."""
    g = original.copy()
    for entry in log:
        _apply(g, entry["block"], entry["params"])
    return g


# --------------------------------------------------------------------------


class UncollapsedCycle(GraphError):
    pass


def strip_labels(g: FuncGraph) -> list[tuple]:
    """Label-free structure: sorted (root kind, AHU string) pairs, one per root.

    Raises UncollapsedCycle if a cycle is still present; collapse it first.
    """
    out = []
    for e in g.roots():
        if e.kind == "cycle":
            raise UncollapsedCycle(f"cycle {e.nodes!r} must be collapsed before encoding")
        out.append((e.kind, ahu_encode(e.key, lambda n: g.preds[n])))
    return sorted(out)


def component_form(g: FuncGraph, node) -> str:
    """AHU string of the in-tree of ``node`` (node as root, predecessors as children)."""
    return ahu_encode(node, lambda n: g.preds[n])


def count_roots(succ: dict) -> int:
    """Brute-force root count: distinct terminal sets reached by walking every node."""
    terminals = set()
    for start in succ:
        seen = []
        x = start
        while True:
            s = succ[x]
            if s is None or isinstance(s, Boundary) or s == x:
                terminals.add(("end", x))
                break
            if x in seen:
                terminals.add(("cycle", frozenset(seen[seen.index(x):])))
                break
            seen.append(x)
            x = s
    return len(terminals)
