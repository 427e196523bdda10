"""
``dynsys`` command line.

Exit status: 0 success or Pass, 1 Fail, 2 usage or parse error,
3 Inconclusive when ``--strict`` is given.
"""
from __future__ import annotations

import argparse
import json
import os
import shlex
import sys as _sys
from typing import Optional

from . import criteria as cr
from .builtins import SOURCES, UnknownSystem, builtin
from .canonical import tree_form
from .expr import ParseError, to_text
from .export import graph_to_dot, graph_to_json, tree_to_dot, tree_to_json
from .funcgraph import FuncGraph, GraphError, from_system
from .reverse import DEFAULT_CAPS, Caps, NoReverseFamily, build_reverse_tree
from .sweep import sweep
from .sysdef import DomainError, SystemDef, parse_system_def, to_dsl
from .trajectory import DEFAULT_MAX_STEPS, DEFAULT_MAX_VALUE, Limits, trace

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def load_system(spec: str) -> SystemDef:
    """A built-in name, or a path to a ``.dsys`` file."""
    if spec in SOURCES:
        return builtin(spec)
    if spec.endswith(".dsys") or os.path.exists(spec):
        try:
            with open(spec, "rb") as fh:
                data = fh.read()
        except OSError as err:
            raise UsageError(f"cannot read system file {spec!r}: {err.strerror}") from None
        return parse_system_def(data)
    return builtin(spec)


def parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _mapping(text: str) -> dict:
    out = {}
    for pair in text.split(","):
        try:
            a, b = pair.split(":")
            out[int(a)] = int(b)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a:b,c:d, got {text!r}") from None
    return out


def _emit(args, text: str) -> None:
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        _sys.stdout.write(text)


def _limits(args) -> Limits:
    return Limits(max_steps=args.max_steps, max_value=args.max_value)


def _caps(args) -> Caps:
    return Caps(param_cap=args.param_cap, value_cap=args.value_cap, count_cap=args.count_cap)


def _cap_value(text: str) -> Optional[int]:
    if text.lower() in ("none", "inf", "off"):
        return None
    return _power_int(text)


def _power_int(text: str) -> int:
    """Integer, also accepting ``2^127`` and ``10**6`` spellings."""
    t = text.replace("**", "^")
    try:
        if "^" in t:
            base, exp = t.split("^")
            return int(base) ** int(exp)
        return int(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None


# --------------------------------------------------------------------------
# subcommands


def cmd_show(args) -> int:
    s = load_system(args.system)
    if args.format == "dsys":
        _emit(args, to_dsl(s))
    elif args.format == "json":
        d = {
            "name": s.name,
            "fixed_point": s.fixed_point,
            "admit": to_text(s.admit),
            "forward": [str(r) for r in s.forward],
            "reverse": [str(f) for f in s.reverse],
        }
        _emit(args, json.dumps(d, indent=2) + "\n")
    else:
        fp = "none" if s.fixed_point is None else s.fixed_point
        head = f"system {s.name} (fixed point: {fp}, {len(s.forward)} rule(s), {len(s.reverse)} reverse line(s))\n"
        _emit(args, head + to_dsl(s))
    return EXIT_OK


def cmd_trace(args) -> int:
    s = load_system(args.system)
    rec = trace(s, args.seed, _limits(args))
    if args.format == "json":
        _emit(args, json.dumps(rec.to_dict(), indent=2) + "\n")
    else:
        vals = rec.values
        shown = " ".join(map(str, vals)) if len(vals) <= 200 else " ".join(map(str, vals[:100])) + f" ... ({len(vals) - 100} more)"
        lines = [
            f"seed {rec.seed} under {s.name}",
            f"root: {rec.root.label}",
            f"steps to root: {rec.steps_to_root}",
            f"total stopping time: {rec.total_stop if rec.total_stop is not None else 'never'}",
            f"max excursion: {rec.max_excursion}",
            f"values: {shown}",
        ]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    s = load_system(args.system)
    lo, hi = args.range
    rep = sweep(s, lo, hi, _limits(args), fast=False if args.no_jit else None, jobs=args.jobs)
    if args.format == "csv":
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                rep.write_csv(fh)
        else:
            rep.write_csv(_sys.stdout)
    elif args.format == "json":
        _emit(args, rep.to_json(include_seeds=args.seeds) + "\n")
    else:
        lines = [f"sweep of {s.name} over [{lo}, {hi}]: {rep.admitted} admitted seeds in {rep.elapsed:.2f}s"]
        for label, n in sorted(rep.tallies.items()):
            lines.append(f"  {label}: {n}")
        nc = rep.non_converged
        lines.append(f"non-converged: {len(nc)}" + (f" (first: {nc[:10]})" if nc else ""))
        recs = rep.records
        lines.append(f"record breakers: {len(recs)}")
        for seed, t, m in recs[-5:]:
            lines.append(f"  seed {seed}: total stopping time {t}, max excursion {m}")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def _tree_args(args, s: SystemDef):
    root = args.root if args.root is not None else s.fixed_point
    if root is None:
        raise UsageError(f"system {s.name} has no fixed point; pass --root")
    return build_reverse_tree(s, root, args.depth, _caps(args))


def cmd_reverse(args) -> int:
    s = load_system(args.system)
    t = _tree_args(args, s)
    if args.format == "json":
        d = t.to_dict()
        d["canonical_form"] = tree_form(t)
        _emit(args, json.dumps(d, indent=2) + "\n")
    elif args.format == "dot":
        _emit(args, tree_to_dot(t, f"{s.name}-reverse-{t.root}"))
    else:
        lines = [f"reverse tree of {t.root} under {s.name}, depth {t.depth}: {len(t)} nodes"]
        for k in range(t.depth + 1):
            lvl = t.level(k)
            shown = " ".join(map(str, lvl[:30])) + (" ..." if len(lvl) > 30 else "")
            lines.append(f"  depth {k} ({len(lvl)}): {shown}")
        cut = t.cap_truncated_nodes()
        lines.append(f"cap-truncated nodes: {len(cut)}")
        lines.append(f"canonical form: {tree_form(t) if len(t) <= 200 else '(' + str(len(t)) + ' nodes, use --format json)'}")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def parse_script_line(line: str) -> Optional[tuple[int, dict]]:
    """``block2 cycle=1,4,2`` style line -> (block, params); None for blanks and comments."""
    line = line.split("#", 1)[0].strip()
    if not line:
        return None
    words = shlex.split(line)
    head = words[0].lower()
    if not head.startswith("block") or head[5:] not in {"1", "2", "3", "4", "5"}:
        raise UsageError(f"unknown script command {words[0]!r}")
    params = {}
    for w in words[1:]:
        if "=" not in w:
            raise UsageError(f"expected key=value, got {w!r}")
        k, v = w.split("=", 1)
        params[k] = v
    return int(head[5:]), params


def _apply_block(g: FuncGraph, block: int, params: dict) -> None:
    try:
        if block == 1:
            g.contract_chain(_int_list(params["chain"]), params.get("keep", "first"))
        elif block == 2:
            g.collapse_cycle(_int_list(params["cycle"]))
        elif block == 3:
            g.prune_no_input(int(params["node"]))
        elif block == 4:
            g.remove_branch(int(params["delegate"]))
        else:
            g.permute_labels(_mapping(params["map"]))
    except KeyError as err:
        raise UsageError(f"block {block} needs parameter {err.args[0]!r}") from None
    except (argparse.ArgumentTypeError, ValueError) as err:
        if isinstance(err, GraphError):
            raise
        raise UsageError(str(err)) from None


def _build_graph(args, s: SystemDef) -> FuncGraph:
    lo, hi = args.range
    g = from_system(s, lo, hi)
    steps = []
    if getattr(args, "script", None):
        with open(args.script, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                try:
                    parsed = parse_script_line(line)
                except UsageError as err:
                    raise UsageError(f"{args.script}:{lineno}: {err}") from None
                if parsed:
                    steps.append(parsed)
    if getattr(args, "block", None):
        params = {}
        for key in ("chain", "keep", "cycle", "node", "delegate", "map"):
            v = getattr(args, key, None)
            if v is not None:
                params[key] = v
        steps.append((args.block, params))
    for block, params in steps:
        _apply_block(g, block, params)
    return g


def cmd_reduce(args) -> int:
    s = load_system(args.system)
    if not args.block and not args.script:
        raise UsageError("reduce needs --block or --script")
    g = _build_graph(args, s)
    if args.format == "json":
        _emit(args, graph_to_json(g) + "\n")
    elif args.format == "dot":
        _emit(args, graph_to_dot(g, f"{s.name}-reduced"))
    else:
        roots = g.roots()
        lines = [f"{s.name} on [{args.range[0]}, {args.range[1]}] after {len(g.log)} reduction(s): {len(g)} nodes"]
        for e in g.log:
            lines.append(f"  block {e['block']} {e['params']} removed {len(e['removed'])}")
        lines.append("roots: " + ", ".join(
            f"{e.kind}{tuple(g.label(n) for n in e.nodes)}" + (f"->{e.exit.value}" if e.exit else "") for e in roots[:20]
        ) + (" ..." if len(roots) > 20 else ""))
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def _criterion_report(args) -> cr.CriterionReport:
    s = load_system(args.system)
    c = args.criterion
    caps = _caps(args)
    samples = args.samples
    if c == 1:
        if not args.other:
            raise UsageError("criterion 1 needs --other SYSTEM")
        return cr.check_c1_isomorphic(s, load_system(args.other), args.depth, caps)
    if c == 2:
        bound = args.bound if args.bound is not None else (args.range[1] if args.range else 1000)
        return cr.check_c2_coverage(s, bound, args.depth, caps, _limits(args))
    if c == 3:
        return cr.check_c3_self_similar(s, args.depth, samples, caps)
    if c == 4:
        return cr.check_c4_eta(s, samples, caps)
    if c == 5:
        if not args.range:
            raise UsageError("criterion 5 needs --range lo:hi")
        g = _build_graph(args, s)
        for cyc in g.cycles():
            g.collapse_cycle(list(cyc))
        return cr.check_c5_branch_peel(g, s.fixed_point)
    lo, hi = args.range if args.range else (1, 10**4)
    return cr.check_c6_descent(s, lo, hi)


def cmd_check(args) -> int:
    rep = _criterion_report(args)
    if args.format == "json":
        _emit(args, json.dumps(rep.to_dict(), indent=2, default=str) + "\n")
    else:
        lines = [rep.summary()]
        for k, v in rep.scope.items():
            lines.append(f"  {k}: {v}")
        for w in rep.witnesses[:10]:
            lines.append(f"  witness: {w}")
        for n in rep.notes:
            lines.append(f"  note: {n}")
        _emit(args, "\n".join(lines) + "\n")
    if rep.verdict == cr.FAIL:
        return EXIT_FAIL
    if rep.verdict == cr.INCONCLUSIVE and args.strict:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_export(args) -> int:
    s = load_system(args.system)
    if args.what == "tree":
        t = _tree_args(args, s)
        _emit(args, tree_to_dot(t, f"{s.name}-reverse-{t.root}") if args.format == "dot" else tree_to_json(t) + "\n")
    else:
        if not args.range:
            raise UsageError("graph export needs --range lo:hi")
        g = _build_graph(args, s)
        if args.format == "dot":
            _emit(args, graph_to_dot(g, f"{s.name}-{args.range[0]}-{args.range[1]}"))
        else:
            _emit(args, graph_to_json(g) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dynsys", description="Explore dynamic integer systems.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, formats):
        sp.add_argument("--system", required=True, help="built-in name or path to a .dsys file")
        sp.add_argument("--format", choices=formats, default=formats[0])
        sp.add_argument("--output", "-o", help="write to this file instead of stdout")

    def limits(sp):
        sp.add_argument("--max-steps", type=_power_int, default=DEFAULT_MAX_STEPS)
        sp.add_argument("--max-value", type=_power_int, default=DEFAULT_MAX_VALUE)

    def caps(sp):
        sp.add_argument("--param-cap", type=_cap_value, default=DEFAULT_CAPS.param_cap)
        sp.add_argument("--value-cap", type=_cap_value, default=DEFAULT_CAPS.value_cap)
        sp.add_argument("--count-cap", type=_cap_value, default=DEFAULT_CAPS.count_cap)

    def blocks(sp):
        sp.add_argument("--block", type=int, choices=[1, 2, 3, 4, 5])
        sp.add_argument("--chain", help="block 1: comma-separated path")
        sp.add_argument("--keep", choices=["first", "last"], help="block 1: surviving end of the chain")
        sp.add_argument("--cycle", help="block 2: comma-separated cycle")
        sp.add_argument("--node", help="block 3: node without inputs")
        sp.add_argument("--delegate", help="block 4: branch delegate")
        sp.add_argument("--map", help="block 5: label permutation a:b,b:a")
        sp.add_argument("--script", help="file of block applications, one per line")

    sp = sub.add_parser("show", help="print a system definition")
    common(sp, ["text", "dsys", "json"])
    sp.set_defaults(func=cmd_show)

    sp = sub.add_parser("trace", help="iterate one seed")
    common(sp, ["text", "json"])
    sp.add_argument("--seed", type=_power_int, required=True)
    limits(sp)
    sp.set_defaults(func=cmd_trace)

    sp = sub.add_parser("sweep", help="classify every seed in a range")
    common(sp, ["text", "json", "csv"])
    sp.add_argument("--range", type=parse_range, required=True)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--no-jit", action="store_true", help="use the pure-Python kernel")
    sp.add_argument("--seeds", action="store_true", help="include per-seed rows in JSON")
    limits(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("reverse", help="build a predecessor tree")
    common(sp, ["text", "json", "dot"])
    sp.add_argument("--root", type=int)
    sp.add_argument("--depth", type=int, default=3)
    caps(sp)
    sp.set_defaults(func=cmd_reverse)

    sp = sub.add_parser("reduce", help="apply reduction blocks to a windowed graph")
    common(sp, ["text", "json", "dot"])
    sp.add_argument("--range", type=parse_range, required=True)
    blocks(sp)
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("check", help="run one convergence criterion")
    common(sp, ["text", "json"])
    sp.add_argument("--criterion", type=int, choices=range(1, 7), required=True)
    sp.add_argument("--range", type=parse_range)
    sp.add_argument("--depth", type=int, default=3)
    sp.add_argument("--bound", type=int)
    sp.add_argument("--other", help="second system for criterion 1")
    sp.add_argument("--samples", type=_int_list, help="comma-separated nodes for criteria 3 and 4")
    sp.add_argument("--strict", action="store_true", help="exit 3 on Inconclusive")
    caps(sp)
    limits(sp)
    blocks(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("export", help="write a graph or tree as DOT or JSON")
    common(sp, ["dot", "json"])
    sp.add_argument("what", choices=["graph", "tree"])
    sp.add_argument("--range", type=parse_range)
    sp.add_argument("--root", type=int)
    sp.add_argument("--depth", type=int, default=3)
    caps(sp)
    blocks(sp)
    sp.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return int(err.code) if err.code is not None else EXIT_OK
    try:
        return args.func(args)
    except ParseError as err:
        print(f"dynsys: parse error: {err}", file=_sys.stderr)
        return EXIT_USAGE
    except (UsageError, UnknownSystem, DomainError, NoReverseFamily, GraphError) as err:
        msg = err.args[0] if isinstance(err, KeyError) else str(err)
        print(f"dynsys: {msg}", file=_sys.stderr)
        return EXIT_USAGE
    except OSError as err:
        print(f"dynsys: {err}", file=_sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
