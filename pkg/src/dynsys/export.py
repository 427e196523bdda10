"""DOT and JSON renderings of functional graphs and reverse trees."""
from __future__ import annotations

import json

from .funcgraph import Boundary, FuncGraph
from .reverse import Frontier, ReverseTree


def _q(text) -> str:
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def graph_to_dot(g: FuncGraph, name: str = "graph") -> str:
    """Deterministic DOT: nodes by ascending label, out-of-window successors as dashed edges to diamonds."""
    order = g.nodes
    ids = {n: f"n{i}" for i, n in enumerate(order)}
    lines = [f"digraph {_q(name)} {{", "  node [shape=circle];"]
    for n in order:
        attrs = [f"label={_q(g.label(n))}"]
        if g.succ[n] is None:
            attrs.append("shape=doublecircle")
        lines.append(f"  {ids[n]} [{', '.join(attrs)}];")
    exits = sorted({s.value for s in g.succ.values() if isinstance(s, Boundary)})
    bids = {v: f"b{i}" for i, v in enumerate(exits)}
    for v in exits:
        lines.append(f"  {bids[v]} [label={_q(v)}, shape=diamond, style=dashed];")
    for n in order:
        s = g.succ[n]
        if s is None:
            continue
        if isinstance(s, Boundary):
            lines.append(f"  {ids[n]} -> {bids[s.value]} [style=dashed];")
        else:
            lines.append(f"  {ids[n]} -> {ids[s]};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def tree_to_dot(t: ReverseTree, name: str = "tree") -> str:
    """Deterministic DOT of a reverse tree; edges point forward (child -> parent)."""
    order = sorted(t.depth_of)
    ids = {n: f"n{i}" for i, n in enumerate(order)}
    lines = [f"digraph {_q(name)} {{", "  node [shape=circle];"]
    for n in order:
        attrs = [f"label={_q(n)}"]
        if n == t.root:
            attrs.append("shape=doublecircle")
        f = t.frontier[n]
        if f is Frontier.CAP:
            attrs.append("style=dashed")
        elif f is Frontier.DEPTH:
            attrs.append("color=gray")
        lines.append(f"  {ids[n]} [{', '.join(attrs)}];")
    for n in order:
        p = t.parent[n]
        if p is not None:
            lines.append(f"  {ids[n]} -> {ids[p]};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def tree_to_json(t: ReverseTree) -> str:
    return json.dumps(t.to_dict(), indent=2)


def graph_to_json(g: FuncGraph) -> str:
    return json.dumps(g.to_dict(), indent=2, default=repr)
