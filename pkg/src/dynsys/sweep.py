"""
Memoized range sweeps.

Every admitted seed in ``[lo, hi]`` is classified.  Values inside a dense
window are remembered together with their root, steps to the root, total
stopping time and maximum excursion, so a trajectory stops as soon as it
meets a known value and inherits the rest.  The inner walk runs in an
int64 kernel (numba when available); anything the kernel cannot settle
(new roots, overflow, values leaving the domain, no applicable rule) is
handed to the exact tracer, whose result then seeds the memo.
"""
from __future__ import annotations

import csv
import io
import json
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import multiprocessing
import numpy as np

from .expr import LIM, ValueLimitExceeded
from .sysdef import SystemDef, parse_system_def, to_dsl
from .trajectory import Limits, Root, TrajectoryRecord, stop_target, trace

UNKNOWN = -1
NOT_ADMITTED = -2
SETTLED = -3  # seed traced exactly, result kept outside the memo
BIG = -1  # max-excursion slot whose value lives in the side table

FAST_THRESHOLD = 50_000
LOW_WINDOW = 1 << 22  # values below this are always memoized

_KERNEL_SOURCE = """
def _kernel(lo, hi, low, mlo, mhi, root, steps, total, mexc, target, pathcap):
    # slots: [0, low) hold values 0..low-1, the rest hold mlo..mhi
    shift = mlo - low
    path = np.empty(pathcap, np.int64)
    for s in range(lo, hi + 1):
        if root[s - shift] != -1:
            continue
        a = _pred(s)
        if a == 0:
            root[s - shift] = -2
            continue
        if a < 0:
            return s
        path[0] = s
        k = 0
        x = s
        ok = False
        while True:
            j = -1
            if x < low:
                j = x
            elif x >= mlo and x <= mhi:
                j = x - shift
            if j >= 0 and root[j] >= 0:
                ok = mexc[j] >= 0
                break
            st, v = _step(x)
            if st != 0 or v == x or v < 0:
                break
            if _pred(v) != 1:
                break
            k += 1
            if k >= pathcap:
                break
            path[k] = v
            x = v
        if not ok:
            return s
        r = root[j]
        sc = steps[j]
        tt = total[j]
        me = mexc[j]
        for i in range(k - 1, -1, -1):
            y = path[i]
            sc += 1
            if y == target:
                tt = 0
            elif tt >= 0:
                tt += 1
            if y > me:
                me = y
            q = -1
            if y < low:
                q = y
            elif y >= mlo and y <= mhi:
                q = y - shift
            if q >= 0:
                steps[q] = sc
                total[q] = tt
                mexc[q] = me
                root[q] = r
    return hi + 1
"""


def _py_adapters(sys: SystemDef):
    step_fn, admit_fn = sys._step_fn, sys._admit_fn

    def _step(x):
        try:
            v = step_fn(x)
        except ValueLimitExceeded:
            return 2, 0
        if v is None:
            return 1, 0
        if v > LIM or v < -LIM:
            return 2, 0
        return 0, v

    def _pred(x):
        return 1 if admit_fn(x) else 0

    return _step, _pred


_kernel_cache: dict = {}


def _kernel_for(sys: SystemDef, fast: bool):
    key = (sys, fast)
    if key in _kernel_cache:
        return _kernel_cache[key]
    if fast:
        import numba

        from ._nbruntime import jit_predicate, jit_rules

        ns = {"np": np, "_step": jit_rules([(r.guard, r.expr) for r in sys.forward]), "_pred": jit_predicate(sys.admit)}
        exec(compile(_KERNEL_SOURCE, "<dynsys-sweep-kernel>", "exec"), ns)
        fn = numba.njit(ns["_kernel"])
    else:
        _step, _pred = _py_adapters(sys)
        ns = {"np": np, "_step": _step, "_pred": _pred}
        exec(compile(_KERNEL_SOURCE, "<dynsys-sweep-kernel>", "exec"), ns)
        fn = ns["_kernel"]
    _kernel_cache[key] = fn
    return fn


# --------------------------------------------------------------------------


def _memoizable(root: Root) -> bool:
    return root.kind in ("fixed", "cycle", "no_rule", "left_domain")


def _extra_steps(root: Root) -> int:
    """Evaluations needed beyond steps_to_root for a trace to settle on ``root``."""
    if root.kind == "cycle":
        return len(root.cycle)
    if root.kind == "left_domain":
        return 0
    return 1


def record_breakers(seeds, totals, excursions) -> list[tuple]:
    """Seeds whose total stopping time or max excursion beats every smaller seed.

    ``totals`` may hold None (or a negative value) for seeds that never stop;
    those never break the stopping-time record.
    """
    out = []
    best_t = -1
    best_m = -1
    for s, t, m in zip(seeds, totals, excursions):
        t = -1 if t is None or t < 0 else int(t)
        m = int(m)
        if t > best_t or m > best_m:
            out.append((int(s), t if t >= 0 else None, m))
            best_t = max(best_t, t)
            best_m = max(best_m, m)
    return out


@dataclass
class SweepReport:
    system: str
    lo: int
    hi: int
    limits: Limits
    roots: list
    root_index: np.ndarray  # per seed: index into roots, NOT_ADMITTED, or UNKNOWN (see exact)
    steps: np.ndarray
    total: np.ndarray
    excursion: np.ndarray
    big_excursion: dict = field(default_factory=dict)
    exact: dict = field(default_factory=dict)  # seed -> TrajectoryRecord for non-memoized seeds
    elapsed: float = 0.0

    def _seed_rows(self):
        for i, r in enumerate(self.root_index):
            s = self.lo + i
            if r == NOT_ADMITTED:
                continue
            if s in self.exact:
                rec = self.exact[s]
                yield s, rec.root, rec.steps_to_root, rec.total_stop, rec.max_excursion
            else:
                me = int(self.excursion[i])
                if me == BIG:
                    me = self.big_excursion[s]
                t = int(self.total[i])
                yield s, self.roots[r], int(self.steps[i]), (t if t >= 0 else None), me

    def seed_result(self, seed: int):
        """(root, steps_to_root, total_stop, max_excursion) for one seed, None if not admitted."""
        i = seed - self.lo
        if not 0 <= i < len(self.root_index):
            raise IndexError(f"seed {seed} outside [{self.lo}, {self.hi}]")
        if self.root_index[i] == NOT_ADMITTED:
            return None
        if seed in self.exact:
            rec = self.exact[seed]
            return rec.root, rec.steps_to_root, rec.total_stop, rec.max_excursion
        me = int(self.excursion[i])
        if me == BIG:
            me = self.big_excursion[seed]
        t = int(self.total[i])
        return self.roots[self.root_index[i]], int(self.steps[i]), (t if t >= 0 else None), me

    @property
    def admitted(self) -> int:
        return int(np.count_nonzero(self.root_index != NOT_ADMITTED))

    @property
    def tallies(self) -> Counter:
        c = Counter()
        idx = self.root_index[self.root_index >= 0]
        for r, n in zip(*np.unique(idx, return_counts=True)):
            c[self.roots[r].label] += int(n)
        for rec in self.exact.values():
            c[rec.root.label] += 1
        return c

    @property
    def non_converged(self) -> list[int]:
        bad = [r for r, root in enumerate(self.roots) if not root.converged]
        seeds = []
        if bad:
            seeds += (np.flatnonzero(np.isin(self.root_index, bad)) + self.lo).tolist()
        seeds += [s for s, rec in self.exact.items() if not rec.root.converged]
        return sorted(seeds)

    @property
    def all_converged(self) -> bool:
        return not self.non_converged

    @property
    def records(self) -> list[tuple]:
        conv = [r for r, root in enumerate(self.roots) if root.converged]
        mask = np.isin(self.root_index, conv)
        if not self.big_excursion and not self.exact:
            seeds = np.flatnonzero(mask)
            return _records_fast(seeds + self.lo, self.total[seeds], self.excursion[seeds])
        rows = [(s, t, m) for s, root, _, t, m in self._seed_rows() if root.converged]
        return record_breakers(*zip(*rows)) if rows else []

    def to_dict(self, include_seeds: bool = False) -> dict:
        d = {
            "system": self.system,
            "range": [self.lo, self.hi],
            "limits": {"max_steps": self.limits.max_steps, "max_value": self.limits.max_value},
            "admitted": self.admitted,
            "tallies": dict(sorted(self.tallies.items())),
            "non_converged": self.non_converged,
            "records": [{"seed": s, "total_stop": t, "max_excursion": m} for s, t, m in self.records],
            "elapsed": round(self.elapsed, 6),
        }
        if include_seeds:
            d["seeds"] = [
                {"seed": s, "root": root.to_dict(), "steps": st, "total_stop": t, "max_excursion": m}
                for s, root, st, t, m in self._seed_rows()
            ]
        return d

    def to_json(self, include_seeds: bool = False) -> str:
        return json.dumps(self.to_dict(include_seeds), indent=2)

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["seed", "root_kind", "root_value", "steps", "total_stop", "max_excursion"])
        for s, root, st, t, m in self._seed_rows():
            value = root.value if root.value is not None else ""
            w.writerow([s, root.kind, value, st, "" if t is None else t, m])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


def _records_fast(seeds, totals, excursions) -> list[tuple]:
    if len(seeds) == 0:
        return []
    t = totals.astype(np.int64)
    m = excursions.astype(np.int64)
    prev_t = np.concatenate(([-1], np.maximum.accumulate(t)[:-1]))
    prev_m = np.concatenate(([-1], np.maximum.accumulate(m)[:-1]))
    hit = np.flatnonzero((t > prev_t) | (m > prev_m))
    return [(int(seeds[i]), int(t[i]) if t[i] >= 0 else None, int(m[i])) for i in hit]


# --------------------------------------------------------------------------


class _Memo:
    def __init__(self, sys: SystemDef, lo: int, hi: int, mlo: int):
        self.sys = sys
        self.mlo, self.mhi = mlo, hi
        self.low = min(mlo, LOW_WINDOW)
        self.shift = mlo - self.low
        size = self.low + hi - mlo + 1
        self.root = np.full(size, UNKNOWN, dtype=np.int32)
        self.steps = np.zeros(size, dtype=np.int32)
        self.total = np.full(size, -1, dtype=np.int32)
        self.mexc = np.zeros(size, dtype=np.int64)
        self.big: dict = {}
        self.roots: list = []
        self._root_ids: dict = {}
        self.target = stop_target(sys)

    def root_id(self, root: Root) -> int:
        if root not in self._root_ids:
            self._root_ids[root] = len(self.roots)
            self.roots.append(root)
        return self._root_ids[root]

    def absorb(self, rec: TrajectoryRecord) -> None:
        """Store per-value stats of every window value on a settled trajectory."""
        root = rec.root
        if rec.truncated or not _memoizable(root):
            return
        vals = rec.values
        rid = self.root_id(root)
        n = len(vals)
        if root.kind == "cycle":
            L = rec.steps_to_root
            cyc = vals[L : n - 1]
            clen = len(cyc)
            cmax = max(cyc)
            pos = {v: i for i, v in enumerate(cyc)}
            tpos = pos.get(self.target)
            for i, v in enumerate(cyc):
                t = -1 if tpos is None else (tpos - i) % clen
                self._put(v, rid, 0, t, cmax)
            me, t = cmax, (-1 if tpos is None else tpos)
            for i in range(L - 1, -1, -1):
                v = vals[i]
                me = max(me, v)
                t = 0 if v == self.target else (t + 1 if t >= 0 else -1)
                self._put(v, rid, L - i, t, me)
            return
        last = n - 1
        me = vals[last]
        t = -1
        for i in range(last, -1, -1):
            v = vals[i]
            me = max(me, v)
            t = 0 if v == self.target else (t + 1 if t >= 0 else -1)
            if i < last or root.kind != "left_domain":
                self._put(v, rid, last - i, t, me)

    def _put(self, v, rid, steps, total, me):
        if v < self.low:
            q = v
        elif self.mlo <= v <= self.mhi:
            q = v - self.shift
        else:
            return
        self.root[q] = rid
        self.steps[q] = steps
        self.total[q] = total
        if me > LIM:
            self.mexc[q] = BIG
            self.big[v] = me
        else:
            self.mexc[q] = me


def _window_start(lo: int, hi: int) -> int:
    # memoize small values too when they are cheap relative to the range
    return 0 if lo <= 4 * (hi - lo + 1) else lo


def sweep(
    sys: SystemDef,
    lo: int,
    hi: int,
    limits: Limits | None = None,
    *,
    fast: Optional[bool] = None,
    jobs: int = 1,
) -> SweepReport:
    """Classify every admitted seed in ``[lo, hi]``.

    ``fast`` selects the compiled kernel (default: when the range is large);
    ``jobs > 1`` splits the range across worker processes with private memos.
    """
    if lo > hi:
        raise ValueError(f"empty range [{lo}, {hi}]")
    if lo < 0:
        raise ValueError("seeds are natural numbers")
    limits = limits or Limits()
    if fast is None:
        fast = hi - lo + 1 >= FAST_THRESHOLD
    t0 = time.perf_counter()
    if jobs > 1 and hi - lo + 1 >= 2 * jobs:
        report = _sweep_parallel(sys, lo, hi, limits, fast, jobs)
    else:
        report = _sweep_serial(sys, lo, hi, limits, fast, _window_start(lo, hi))
    report.elapsed = time.perf_counter() - t0
    return report


def _sweep_serial(sys, lo, hi, limits, fast, mlo) -> SweepReport:
    memo = _Memo(sys, lo, hi, mlo)
    kernel = _kernel_for(sys, fast)
    pathcap = int(min(limits.max_steps + 2, 20_000))
    exact: dict = {}
    s = lo
    while s <= hi:
        # the kernel stops at the first seed it cannot settle
        s = kernel(s, hi, memo.low, mlo, hi, memo.root, memo.steps, memo.total, memo.mexc, memo.target, pathcap)
        if s > hi:
            break
        rec = trace(sys, s, limits)
        memo.absorb(rec)
        if memo.root[s - memo.shift] == UNKNOWN:
            exact[s] = rec
            memo.root[s - memo.shift] = SETTLED
        s += 1

    seg = slice(lo - memo.shift, hi - memo.shift + 1)
    root_index = memo.root[seg].copy()
    root_index[root_index == SETTLED] = UNKNOWN
    steps = memo.steps[seg].copy()
    total = memo.total[seg].copy()
    mexc = memo.mexc[seg].copy()
    big = {s: v for s, v in memo.big.items() if lo <= s <= hi}

    # composed stats are limit-free; seeds that would hit a limit get an exact trace
    extra = np.array([_extra_steps(r) for r in memo.roots] or [0], dtype=np.int64)
    known = np.flatnonzero(root_index >= 0)
    need = steps[known].astype(np.int64) + extra[root_index[known]] > limits.max_steps
    if limits.max_value < LIM:
        need |= mexc[known] > limits.max_value
    redo = (known[need] + lo).tolist()
    redo += [s for s, v in big.items() if v > limits.max_value and root_index[s - lo] >= 0]
    for s in sorted(set(redo)):
        rec = trace(sys, s, limits)
        if rec.root in memo._root_ids and _memoizable(rec.root) and rec.steps_to_root == steps[s - lo]:
            continue
        exact[s] = rec
        root_index[s - lo] = UNKNOWN

    return SweepReport(sys.name, lo, hi, limits, memo.roots, root_index, steps, total, mexc, big, exact)


def _worker(args):
    text, lo, hi, limits, fast = args
    sys = parse_system_def(text)
    return _sweep_serial(sys, lo, hi, limits, fast, lo)


def _sweep_parallel(sys, lo, hi, limits, fast, jobs) -> SweepReport:
    bounds = np.linspace(lo, hi + 1, jobs + 1).astype(np.int64)
    tasks = [(to_dsl(sys), int(a), int(b) - 1, limits, fast) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    ctx = multiprocessing.get_context("fork" if os.name == "posix" else "spawn")
    with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as pool:
        parts = list(pool.map(_worker, tasks))
    return merge_reports(sys.name, parts, limits)


def merge_reports(name: str, parts: list, limits: Limits) -> SweepReport:
    """Concatenate reports over adjacent ranges, unifying their root tables."""
    parts = sorted(parts, key=lambda p: p.lo)
    roots: list = []
    ids: dict = {}
    pieces = []
    for p in parts:
        remap = np.empty(len(p.roots) + 3, dtype=np.int32)
        for i, r in enumerate(p.roots):
            if r not in ids:
                ids[r] = len(roots)
                roots.append(r)
            remap[i] = ids[r]
        idx = p.root_index.copy()
        pos = idx >= 0
        idx[pos] = remap[idx[pos]]
        pieces.append(idx)
    out = SweepReport(
        name, parts[0].lo, parts[-1].hi, limits, roots,
        np.concatenate(pieces),
        np.concatenate([p.steps for p in parts]),
        np.concatenate([p.total for p in parts]),
        np.concatenate([p.excursion for p in parts]),
    )
    for p in parts:
        out.big_excursion.update(p.big_excursion)
        out.exact.update(p.exact)
    return out
