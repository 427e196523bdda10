"""
Dynamic integer systems: admission predicate, ordered forward rules,
optional reverse families and a declared fixed point.

A system is written in a small line-oriented language (``.dsys``)::

    name = simple
    admit = "n >= 1"
    fixed = 1
    if n = 1 -> n
    if n > 1 and n mod 2 = 1 -> (n - 1) / 2
    if n mod 2 = 0 -> n / 2
    list: 2 * m, 2 * m + 1

Reverse lines come in three kinds::

    list [if <cond on m>] : <expr in m>, ...
    family mu >= 1 : <expr in m, mu> where integral and admitted [and <cond>]
    primes p > 3 : <expr in m, p> [where <cond>]
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from . import expr as ex
from .expr import ParseError


class DomainError(ValueError):
    """A value outside the system's admitted set was passed where one is required."""


class StepKind(enum.Enum):
    NEXT = "next"
    SELF_FIXED = "self_fixed"
    NO_RULE = "no_rule"


@dataclass(frozen=True)
class StepResult:
    kind: StepKind
    value: Optional[int] = None

    def __repr__(self):
        if self.kind is StepKind.NEXT:
            return f"Next({self.value})"
        if self.kind is StepKind.SELF_FIXED:
            return "SelfFixed"
        return "NoRuleApplies"


def Next(value: int) -> StepResult:
    return StepResult(StepKind.NEXT, value)


SelfFixed = StepResult(StepKind.SELF_FIXED)
NoRuleApplies = StepResult(StepKind.NO_RULE)


@dataclass(frozen=True)
class ForwardRule:
    guard: ex.BoolExpr
    expr: ex.Expr

    def __str__(self):
        return f"if {ex.to_text(self.guard)} -> {ex.to_text(self.expr)}"


@dataclass(frozen=True)
class ReverseFamily:
    """One reverse line.

    ``kind`` is ``"list"`` (fixed expressions in m, optional guard on m),
    ``"family"`` (exponent parameter from ``bound`` upwards) or ``"primes"``
    (prime parameter strictly above ``bound``).
    """

    kind: str
    exprs: tuple
    guard: Optional[ex.BoolExpr] = None
    param: Optional[str] = None
    bound: int = 0
    where: Optional[ex.BoolExpr] = None

    @property
    def parametric(self) -> bool:
        return self.kind != "list"

    def __str__(self):
        if self.kind == "list":
            head = "list" if self.guard is None else f"list if {ex.to_text(self.guard)}"
            return f"{head}: " + ", ".join(ex.to_text(e) for e in self.exprs)
        op = ">=" if self.kind == "family" else ">"
        text = f"{self.kind} {self.param} {op} {self.bound} : {ex.to_text(self.exprs[0])}"
        if self.where is not None:
            text += f" where {ex.to_text(self.where)}"
        return text

    @cached_property
    def compiled(self):
        params = ("m",) if self.kind == "list" else ("m", self.param)
        fns = tuple(ex.compile_python_expr(e, params) for e in self.exprs)
        guard = ex.compile_python_bool(self.guard, ("m",)) if self.guard is not None else None
        where = ex.compile_python_bool(self.where, params) if self.where is not None else None
        return fns, guard, where


@dataclass(frozen=True)
class SystemDef:
    name: str
    admit: ex.BoolExpr
    forward: tuple
    reverse: tuple = ()
    fixed_point: Optional[int] = None
    source: Optional[str] = field(default=None, compare=False, repr=False)

    @cached_property
    def _admit_fn(self):
        return ex.compile_python_bool(self.admit, ("n",))

    @cached_property
    def _step_fn(self):
        return ex.compile_python_rules([(r.guard, r.expr) for r in self.forward])

    @cached_property
    def intrinsics(self) -> set:
        names = set()
        stack = [self.admit] + [r.guard for r in self.forward] + [r.expr for r in self.forward]
        while stack:
            x = stack.pop()
            if isinstance(x, ex.Call):
                names.add(x.name)
                stack.extend(x.args)
            elif isinstance(x, (ex.BinOp, ex.Cmp)):
                stack.extend((x.left, x.right))
            elif isinstance(x, (ex.Neg, ex.Not)):
                stack.append(x.operand)
            elif isinstance(x, (ex.And, ex.Or)):
                stack.extend(x.items)
        return names

    def admits(self, n: int) -> bool:
        return admits(self, n)

    def step(self, n: int) -> StepResult:
        return eval_forward(self, n)

    def to_dsl(self) -> str:
        return to_dsl(self)

    def __str__(self):
        return self.name


def admits(sys: SystemDef, n: int) -> bool:
    """True iff n is an admitted value of ``sys``."""
    if not isinstance(n, int) or n < 0:
        return False
    return sys._admit_fn(n)


def eval_forward(sys: SystemDef, n: int) -> StepResult:
    """Apply the first applicable forward rule to an admitted n."""
    if not admits(sys, n):
        raise DomainError(f"{n} is not admitted by system {sys.name!r}")
    v = sys._step_fn(n)
    if v is None:
        return NoRuleApplies
    if v == n:
        return SelfFixed
    return Next(v)


def raw_step(sys: SystemDef, n: int):
    """Forward value without admission check; None when no rule applies."""
    return sys._step_fn(n)


# --------------------------------------------------------------------------
# DSL documents

_HEADER_RE = re.compile(r"^(name|admit|fixed)\s*=\s*(.*)$")
_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*$")


def _strip_comment(line: str) -> str:
    in_str = False
    for i, ch in enumerate(line):
        if ch == '"':
            in_str = not in_str
        elif ch == "#" and not in_str:
            return line[:i]
    return line


def parse_system_def(text) -> SystemDef:
    """Parse and validate a ``.dsys`` document.

    Raises ParseError carrying line/column on any syntax or validation problem.
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as err:
            raise ParseError(f"input is not valid UTF-8 ({err.reason})", 1, 1) from None
    if not isinstance(text, str):
        raise ParseError("input must be text", 1, 1)

    name = admit = None
    fixed = None
    fixed_pos = (1, 1)
    forward, reverse = [], []
    seen_header = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        body = line.strip()
        if not body:
            continue
        col = len(line) - len(line.lstrip()) + 1
        m = _HEADER_RE.match(body)
        if m:
            key, value = m.group(1), m.group(2).strip()
            vcol = col + m.start(2) + (len(m.group(2)) - len(m.group(2).lstrip()))
            if key in seen_header:
                raise ParseError(f"duplicate header {key!r}", lineno, col)
            seen_header.add(key)
            if key == "name":
                if not _NAME_RE.match(value):
                    raise ParseError(f"invalid system name {value!r}", lineno, vcol)
                name = value
            elif key == "admit":
                if len(value) < 2 or value[0] != '"' or value[-1] != '"':
                    raise ParseError("admit expects a double-quoted condition", lineno, vcol)
                admit = ex.parse_bool(value[1:-1], ("n",), lineno, vcol + 1)
            else:
                if not value.isdigit():
                    raise ParseError("fixed expects a natural number", lineno, vcol)
                fixed = int(value)
                fixed_pos = (lineno, vcol)
            continue

        tokens = ex.tokenize(body, lineno, col)
        head = tokens[0]
        if head.kind == "ident" and head.text == "if":
            forward.append(_parse_forward(tokens))
        elif head.kind == "ident" and head.text in ("list", "family", "primes"):
            reverse.append(_parse_reverse(tokens))
        else:
            raise ParseError(f"unrecognised line starting with {head.text!r}", lineno, head.column)

    if name is None:
        raise ParseError("missing 'name = ...' header", 1, 1)
    if admit is None:
        raise ParseError("missing 'admit = \"...\"' header", 1, 1)
    if not forward:
        raise ParseError("at least one forward rule 'if <cond> -> <expr>' is required", 1, 1)

    sys = SystemDef(name, admit, tuple(forward), tuple(reverse), fixed, source=text)
    if fixed is not None:
        if not admits(sys, fixed):
            raise ParseError(f"declared fixed point {fixed} is not admitted", *fixed_pos)
        try:
            v = raw_step(sys, fixed)
        except ArithmeticError as err:
            raise ParseError(f"declared fixed point {fixed} cannot be evaluated: {err}", *fixed_pos)
        if v != fixed:
            shown = "no rule applies" if v is None else f"f({fixed}) = {v}"
            raise ParseError(f"declared fixed point {fixed} violates f(n) = n ({shown})", *fixed_pos)
    return sys


def _parse_forward(tokens) -> ForwardRule:
    p = ex.ExprParser(tokens, frozenset({"n"}))
    p.expect("if")
    guard = p.boolean()
    p.expect("->")
    rhs = p.expr()
    if not p.at_end():
        p.error(f"unexpected {p.tok.text!r} after rule expression")
    return ForwardRule(guard, rhs)


def _parse_reverse(tokens) -> ReverseFamily:
    kind = tokens[0].text
    if kind == "list":
        p = ex.ExprParser(tokens, frozenset({"m"}))
        p.pos = 1
        guard = p.boolean() if p.accept("if") else None
        p.expect(":")
        exprs = [p.expr()]
        while p.accept(","):
            exprs.append(p.expr())
        if not p.at_end():
            p.error(f"unexpected {p.tok.text!r} in list")
        return ReverseFamily("list", tuple(exprs), guard=guard)

    if len(tokens) < 2 or tokens[1].kind != "ident" or tokens[1].text in ex.KEYWORDS or tokens[1].text in ("m", "n"):
        tok = tokens[1] if len(tokens) > 1 else tokens[0]
        raise ParseError(f"{kind} needs a parameter name", tok.line, tok.column)
    param = tokens[1].text
    p = ex.ExprParser(tokens, frozenset({"m", param}), keywords_ok=True)
    p.pos = 2
    p.expect(">=" if kind == "family" else ">")
    if p.tok.kind != "num":
        p.error("expected a natural number bound")
    bound = int(p.tok.text)
    p.pos += 1
    p.expect(":")
    body = p.expr()
    where = p.boolean() if p.accept("where") else None
    if not p.at_end():
        p.error(f"unexpected {p.tok.text!r} in {kind} line")
    return ReverseFamily(kind, (body,), param=param, bound=bound, where=where)


def to_dsl(sys: SystemDef) -> str:
    """Emit a ``.dsys`` document that re-parses to an equal SystemDef."""
    lines = [f"name = {sys.name}", f'admit = "{ex.to_text(sys.admit)}"']
    if sys.fixed_point is not None:
        lines.append(f"fixed = {sys.fixed_point}")
    lines += [str(r) for r in sys.forward]
    lines += [str(f) for f in sys.reverse]
    return "\n".join(lines) + "\n"
