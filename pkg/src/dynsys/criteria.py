"""
Bounded, witness-producing versions of six convergence criteria.

Each checker returns a CriterionReport whose verdict is one of ``Pass``,
``Pass under caps`` (unbounded predecessor counts that agree as far as the
caps allow), ``Fail`` (with a concrete witness) or ``Inconclusive``.  Pass is
never reported when a cap cut the enumeration in the inspected region.

  1  isomorphic reverse trees          4  equal predecessor counts
  2  reverse tree covers all values    5  graph peels down to one fixed node
  3  every branch looks like the whole 6  every value above the fixed point descends
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .canonical import tree_form
from .funcgraph import Boundary, FuncGraph
from .reverse import (
    DEFAULT_CAPS,
    Caps,
    NoReverseFamily,
    ReverseTree,
    build_reverse_tree,
    coverage_check,
    eta_profile,
)
from .sysdef import SystemDef, admits
from .trajectory import Limits, descent_check, trace

PASS = "Pass"
PASS_UNDER_CAPS = "Pass under caps"
FAIL = "Fail"
INCONCLUSIVE = "Inconclusive"

DEFAULT_SEED = 20240607
SAMPLE_DENSE = 10**3
SAMPLE_RANDOM = 100
SAMPLE_RANDOM_MAX = 10**6


@dataclass
class CriterionReport:
    criterion: int
    verdict: str
    scope: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)
    canonical_forms: dict = field(default_factory=dict)
    evidence: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict in (PASS, PASS_UNDER_CAPS)

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "verdict": self.verdict,
            "scope": self.scope,
            "witnesses": self.witnesses,
            "canonical_forms": self.canonical_forms,
            "evidence": self.evidence,
            "notes": self.notes,
        }

    def summary(self) -> str:
        text = f"C{self.criterion}: {self.verdict}"
        if self.witnesses:
            text += f" (witness {self.witnesses[0]})"
        elif self.notes:
            text += f" ({self.notes[0]})"
        return text


def sampling_seed() -> int:
    env = os.environ.get("DYNSYS_SEED")
    return int(env) if env else DEFAULT_SEED


def default_sample(sys: SystemDef, seed: Optional[int] = None) -> list[int]:
    """All admitted values <= 1000 plus 100 pseudo-random admitted values <= 10^6."""
    seed = sampling_seed() if seed is None else seed
    dense = [n for n in range(0, SAMPLE_DENSE + 1) if admits(sys, n)]
    rng = np.random.default_rng(seed)
    extra, tries = [], 0
    while len(extra) < SAMPLE_RANDOM and tries < 100 * SAMPLE_RANDOM:
        n = int(rng.integers(SAMPLE_DENSE + 1, SAMPLE_RANDOM_MAX + 1))
        tries += 1
        if admits(sys, n):
            extra.append(n)
    return sorted(set(dense + extra))


def _caps_dict(caps: Caps) -> dict:
    return {"param_cap": caps.param_cap, "value_cap": caps.value_cap, "count_cap": caps.count_cap, "node_cap": caps.node_cap}


def _need_fixed_reverse(sys: SystemDef):
    if not sys.reverse:
        raise NoReverseFamily(f"system {sys.name!r} declares no reverse family")
    return sys.fixed_point


def level_eta(tree: ReverseTree) -> list[list[int]]:
    """Sorted child counts of the expanded nodes, level by level."""
    out = []
    for k in range(tree.depth):
        out.append(sorted(len(tree.children[n]) for n in tree.level(k)))
    return out


def definite_difference(a: ReverseTree, b: ReverseTree) -> Optional[dict]:
    """A sound reason why the untruncated trees must differ, or None.

    Level sizes above the first cap cut are exact; below it they are lower
    bounds.  An exact size smaller than the other tree's lower bound, or two
    differing exact sizes, proves the trees differ.
    """
    ea, eb = a.complete_levels(), b.complete_levels()
    ca, cb = a.level_counts(), b.level_counts()
    for k in range(min(len(ca), len(cb))):
        exact_a, exact_b = k < ea, k < eb
        if exact_a and exact_b and ca[k] != cb[k]:
            return {"level": k, "counts": [ca[k], cb[k]], "exact": [True, True]}
        if exact_a and not exact_b and cb[k] > ca[k]:
            return {"level": k, "counts": [ca[k], cb[k]], "exact": [True, False]}
        if exact_b and not exact_a and ca[k] > cb[k]:
            return {"level": k, "counts": [ca[k], cb[k]], "exact": [False, True]}
    return None


def first_difference(a: ReverseTree, b: ReverseTree, mark_depth: bool = False) -> list:
    """Path of corresponding (a, b) node pairs down to where the subtrees disagree."""
    from .canonical import ahu_encode

    def forms(t):
        from .reverse import Frontier

        enc = {}

        def mark(n):
            return "cut" if t.frontier[n] is Frontier.CAP else None

        for n in sorted(t.depth_of, key=lambda x: -t.depth_of[x]):
            enc[n] = ahu_encode(n, t.children, mark)
        return enc

    fa, fb = forms(a), forms(b)
    path = [(a.root, b.root)]
    x, y = a.root, b.root
    while True:
        kx, ky = a.children[x], b.children[y]
        if len(kx) != len(ky):
            break
        sx = sorted(fa[c] for c in kx)
        sy = sorted(fb[c] for c in ky)
        only_a = [c for c in kx if fa[c] not in sy]
        only_b = [c for c in ky if fb[c] not in sx]
        if not only_a or not only_b:
            break
        x = min(only_a, key=lambda c: (fa[c], c))
        y = min(only_b, key=lambda c: (fb[c], c))
        path.append((x, y))
    return [
        {"a": p, "b": q, "children_a": len(a.children[p]), "children_b": len(b.children[q])} for p, q in path
    ]


# --------------------------------------------------------------------------


def check_c1_isomorphic(A: SystemDef, B: SystemDef, depth: int, caps: Caps = DEFAULT_CAPS) -> CriterionReport:
    """Compare the depth-limited reverse trees grown from both fixed points."""
    fa, fb = _need_fixed_reverse(A), _need_fixed_reverse(B)
    scope = {"systems": [A.name, B.name], "depth": depth, "caps": _caps_dict(caps)}
    if fa is None or fb is None:
        missing = [s.name for s, f in ((A, fa), (B, fb)) if f is None]
        return CriterionReport(1, INCONCLUSIVE, scope, notes=[f"no declared fixed point: {', '.join(missing)}"])
    ta = build_reverse_tree(A, fa, depth, caps)
    tb = build_reverse_tree(B, fb, depth, caps)
    form_a, form_b = tree_form(ta), tree_form(tb)
    eta_a, eta_b = level_eta(ta), level_eta(tb)
    rep = CriterionReport(1, INCONCLUSIVE, scope, canonical_forms={A.name: form_a, B.name: form_b})
    rep.evidence = {
        "nodes": [len(ta), len(tb)],
        "level_counts": [ta.level_counts(), tb.level_counts()],
        "eta_profiles": {A.name: eta_a, B.name: eta_b},
        "eta_profiles_match": eta_a == eta_b,
        "cap_truncated": [ta.cap_truncated, tb.cap_truncated],
    }
    truncated = ta.cap_truncated or tb.cap_truncated
    if not truncated:
        if form_a == form_b:
            rep.verdict = PASS
        else:
            rep.verdict = FAIL
            rep.witnesses = first_difference(ta, tb)
        return rep
    diff = definite_difference(ta, tb)
    if diff is not None:
        rep.verdict = FAIL
        rep.witnesses = [diff]
        rep.notes.append("level sizes differ beyond what the caps can hide")
        return rep
    rep.notes.append("cap truncation on unbounded reverse families")
    if eta_a == eta_b:
        rep.notes.append("bounded predecessor counts match level by level")
    return rep


def check_c2_coverage(sys: SystemDef, bound: int, depth: int, caps: Caps = DEFAULT_CAPS, limits: Limits | None = None) -> CriterionReport:
    """Does the reverse tree from the fixed point reach every admitted value <= bound?

    Covered values are certainly covered, so an empty residue passes even if
    caps cut the tree.  Each uncovered value is traced forward and tagged
    ``depth_shortfall`` (reaches the fixed point in more than ``depth`` steps),
    ``cap_hidden`` (reaches it in time, so a cap hid it) or ``other_root``.
    """
    fp = _need_fixed_reverse(sys)
    scope = {"system": sys.name, "bound": bound, "depth": depth, "caps": _caps_dict(caps)}
    if fp is None:
        return CriterionReport(2, INCONCLUSIVE, scope, notes=["no declared fixed point"])
    cov = coverage_check(sys, fp, bound, depth, caps)
    rep = CriterionReport(2, PASS, scope)
    rep.evidence = {"covered": len(cov.covered), "uncovered": len(cov.uncovered), "tree_nodes": len(cov.tree),
                    "cap_truncated": cov.tree.cap_truncated}
    if cov.complete:
        return rep
    kinds = {"depth_shortfall": 0, "cap_hidden": 0, "other_root": 0}
    for n in sorted(cov.uncovered):
        rec = trace(sys, n, limits)
        if rec.root.kind == "fixed" and rec.root.value == fp:
            kind = "depth_shortfall" if rec.steps_to_root > depth else "cap_hidden"
        else:
            kind = "other_root"
        kinds[kind] += 1
        rep.witnesses.append({"value": n, "root": rec.root.label, "steps": rec.steps_to_root, "reason": kind})
    rep.evidence["uncovered_by_reason"] = kinds
    if kinds["depth_shortfall"] or kinds["other_root"]:
        rep.verdict = FAIL
        if kinds["depth_shortfall"]:
            rep.notes.append("uncovered values need more reverse steps than the depth allows")
    else:
        rep.verdict = INCONCLUSIVE
        rep.notes.append("uncovered values reach the fixed point in time; caps hid them")
    return rep


def check_c3_self_similar(sys: SystemDef, depth: int, samples=None, caps: Caps = DEFAULT_CAPS) -> CriterionReport:
    """Compare the depth-limited tree at the fixed point with the trees at sampled nodes."""
    fp = _need_fixed_reverse(sys)
    seed = sampling_seed() if samples is None else None
    samples = default_sample(sys, seed) if samples is None else sorted(set(samples))
    scope = {"system": sys.name, "depth": depth, "samples": len(samples), "caps": _caps_dict(caps)}
    if seed is not None:
        scope["sampling_seed"] = seed
    if fp is None:
        return CriterionReport(3, INCONCLUSIVE, scope, notes=["no declared fixed point"])
    cache: dict = {}
    ref = build_reverse_tree(sys, fp, depth, caps, cache=cache)
    ref_form = tree_form(ref)
    rep = CriterionReport(3, PASS, scope, canonical_forms={str(fp): ref_form})
    truncated = ref.cap_truncated
    unresolved = []
    for n in samples:
        if not admits(sys, n):
            continue
        t = build_reverse_tree(sys, n, depth, caps, cache=cache)
        truncated |= t.cap_truncated
        form = tree_form(t)
        if form == ref_form:
            continue
        if not (t.cap_truncated or ref.cap_truncated):
            rep.witnesses.append({"node": n, "difference": first_difference(ref, t)})
            rep.canonical_forms.setdefault(str(n), form)
            continue
        diff = definite_difference(ref, t)
        if diff is not None:
            rep.witnesses.append({"node": n, "difference": diff})
        else:
            unresolved.append(n)
    rep.evidence = {"cap_truncated": truncated, "unresolved": unresolved[:50], "unresolved_count": len(unresolved)}
    if rep.witnesses:
        rep.verdict = FAIL
    elif truncated:
        rep.verdict = INCONCLUSIVE
        rep.notes.append("cap truncation in the compared trees")
    return rep


def check_c4_eta(sys: SystemDef, nodes=None, caps: Caps = DEFAULT_CAPS) -> CriterionReport:
    """Do all sampled nodes have the same number of direct predecessors?"""
    if not sys.reverse:
        raise NoReverseFamily(f"system {sys.name!r} declares no reverse family")
    seed = sampling_seed() if nodes is None else None
    nodes = default_sample(sys, seed) if nodes is None else [n for n in sorted(set(nodes)) if admits(sys, n)]
    scope = {"system": sys.name, "nodes": len(nodes), "caps": _caps_dict(caps)}
    if seed is not None:
        scope["sampling_seed"] = seed
    prof = eta_profile(sys, nodes, caps)
    counts = sorted(set(prof.counts.values()))
    unbounded = any(prof.unbounded.values())
    rep = CriterionReport(4, INCONCLUSIVE, scope)
    rep.evidence = {"counts": {str(c): sum(1 for v in prof.counts.values() if v == c) for c in counts},
                    "unbounded": unbounded}
    if not nodes:
        rep.notes.append("no admitted nodes to inspect")
        return rep
    if not unbounded:
        if len(counts) == 1:
            rep.verdict = PASS
            rep.evidence["eta"] = counts[0]
        else:
            rep.verdict = FAIL
            lo_node = min(n for n, c in prof.counts.items() if c == counts[0])
            hi_node = min(n for n, c in prof.counts.items() if c == counts[-1])
            rep.witnesses = [{"node": lo_node, "eta": counts[0]}, {"node": hi_node, "eta": counts[-1]}]
        return rep
    rep.evidence["eta"] = "unbounded"
    if len(counts) == 1:
        rep.verdict = PASS_UNDER_CAPS
        rep.notes.append(f"every node has {counts[0]} predecessors within caps; the families are unbounded")
    else:
        rep.notes.append("counts under caps differ between nodes of an unbounded family")
    return rep


def check_c5_branch_peel(g: FuncGraph, fixed=None) -> CriterionReport:
    """Peel removable branches (Block 4) leaves first; pass if one fixed node remains."""
    work = g.copy()
    queue = sorted((n for n in work.succ if work.in_degree(n) == 0), key=work._order)
    peeled = 0
    while queue:
        n = queue.pop()
        if n not in work.succ or work.in_degree(n):
            continue
        s = work.succ[n]
        if s is None or isinstance(s, Boundary) or work.is_cycle_member(n):
            continue
        work.remove_branch(n)
        peeled += 1
        if work.in_degree(s) == 0:
            queue.append(s)
    residue = work.nodes
    labels = [work.label(n) for n in residue]
    boundary = [work.label(n) for n in residue if isinstance(work.succ[n], Boundary)]
    fixed_nodes = [work.label(n) for n in residue if work.succ[n] is None]
    scope = {"nodes": len(g), "fixed": fixed}
    rep = CriterionReport(5, FAIL, scope)
    rep.evidence = {"peeled": peeled, "residue": labels[:200], "residue_size": len(labels),
                    "boundary": boundary[:200], "fixed_nodes": fixed_nodes[:200]}
    if boundary:
        rep.verdict = INCONCLUSIVE
        rep.notes.append("successors leave the window; the peel cannot be completed inside it")
    elif len(residue) == 1 and fixed_nodes and (fixed is None or fixed_nodes[0] == fixed):
        rep.verdict = PASS
    else:
        rep.witnesses = [{"residue": labels[:200]}]
    return rep


def check_c6_descent(sys: SystemDef, lo: int, hi: int) -> CriterionReport:
    """Every admitted n above the fixed point must step to a smaller value."""
    scope = {"system": sys.name, "range": [lo, hi]}
    fp = sys.fixed_point
    if fp is None:
        return CriterionReport(6, INCONCLUSIVE, scope, notes=["no declared fixed point"])
    smaller = next((n for n in range(0, fp) if admits(sys, n)), None)
    if smaller is not None:
        return CriterionReport(6, INCONCLUSIVE, scope, notes=[f"fixed point {fp} is not the smallest admitted value ({smaller} is admitted)"])
    res = descent_check(sys, lo, hi)
    rep = CriterionReport(6, PASS if res.verdict == "pass" else FAIL, scope)
    rep.evidence = {"checked": res.checked, "no_rule": res.no_rule, "no_rule_count": len(res.no_rule)}
    if res.witness is not None:
        rep.witnesses = [list(res.witness)]
    if res.no_rule:
        rep.notes.append(f"{len(res.no_rule)} values have no applicable rule and are listed separately")
    return rep
