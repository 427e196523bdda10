"""
AHU canonical strings for rooted unordered trees.

A leaf is ``()``, an inner node is ``(`` + its children's strings in sorted
order + ``)``.  Two trees get the same string exactly when they are
isomorphic.  Nodes whose predecessor set was cut short carry the atom
``[T]``, which only ever matches another ``[T]``.
"""
from __future__ import annotations

from typing import Callable, Hashable, Iterable, Mapping

TRUNC = "[T]"


def ahu_encode(root: Hashable, children: Callable[[Hashable], Iterable] | Mapping, mark: Callable | None = None) -> str:
    """Canonical string of the tree below ``root``.

    ``children`` maps a node to its children.  ``mark(node)`` may return
    ``None`` (ordinary node), ``"cut"`` (append a ``[T]`` child atom) or
    ``"atom"`` (the node itself is encoded as ``[T]``).
    """
    kids = children.__getitem__ if isinstance(children, Mapping) else children
    enc: dict = {}
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        m = mark(node) if mark else None
        if m == "atom":
            enc[node] = TRUNC
            continue
        if not done:
            stack.append((node, True))
            stack.extend((c, False) for c in kids(node))
            continue
        parts = sorted(enc.pop(c) for c in kids(node))
        if m == "cut":
            parts.append(TRUNC)
            parts.sort()
        enc[node] = "(" + "".join(parts) + ")"
    return enc[root]


def tree_form(tree, mark_depth: bool = False) -> str:
    """Canonical string of a ReverseTree.

    Cap-truncated nodes get a ``[T]`` child atom.  Depth-truncated frontier
    nodes look like leaves unless ``mark_depth`` is set, in which case they
    become the ``[T]`` atom themselves.
    """
    from .reverse import Frontier

    def mark(n):
        f = tree.frontier[n]
        if f is Frontier.CAP:
            return "cut"
        if f is Frontier.DEPTH and mark_depth:
            return "atom"
        return None

    return ahu_encode(tree.root, tree.children, mark)


def parent_array_form(parents) -> str:
    """Canonical string of a tree given as a parent array (root has parent -1)."""
    kids: dict = {i: [] for i in range(len(parents))}
    root = None
    for i, p in enumerate(parents):
        if p < 0:
            root = i
        else:
            kids[p].append(i)
    return ahu_encode(root, kids)
