"""
Integer expression language used by system definitions.

Arithmetic expressions are built from naturals, variables, ``+ - * / % ^``,
unary minus and a fixed table of intrinsics.  Boolean expressions combine
comparisons with ``and``/``or``/``not``.  ``/`` is exact division: a
non-integral quotient makes the surrounding rule inapplicable instead of
raising an error.

Two evaluators are generated from the same syntax tree:

* an exact one over Python integers (``compile_python_*``), and
* an int64 one with explicit overflow detection for numba
  (``numba_source_*``), where overflow is reported, never wrapped.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from . import primes


class ParseError(ValueError):
    """Syntax or validation error with a 1-based source position."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class Inapplicable(ArithmeticError):
    """Raised when an expression has no integer value (e.g. 7/2, odd_part(0))."""


class ValueLimitExceeded(ArithmeticError):
    """Raised when an intermediate value would be absurdly large (huge powers)."""


# --------------------------------------------------------------------------
# syntax tree


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Keyword:
    """``integral`` / ``admitted`` inside a family ``where`` clause; always enforced."""

    name: str


@dataclass(frozen=True)
class Cmp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class And:
    items: tuple


@dataclass(frozen=True)
class Or:
    items: tuple


@dataclass(frozen=True)
class Not:
    operand: "BoolExpr"


Expr = Union[Num, Var, Neg, BinOp, Call]
BoolExpr = Union[Const, Keyword, Cmp, And, Or, Not]

INTRINSICS = {
    "odd_part": 1,
    "v2": 1,
    "msb2": 1,
    "spf_gt": 2,
    "lpf_gt": 2,
}

KEYWORDS = {
    "if", "and", "or", "not", "mod", "true", "false", "list", "family",
    "primes", "where", "integral", "admitted",
}


def variables(node) -> set:
    """Free variable names occurring in an expression or boolean expression."""
    out = set()
    stack = [node]
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            out.add(x.name)
        elif isinstance(x, (Neg, Not)):
            stack.append(x.operand)
        elif isinstance(x, (BinOp, Cmp)):
            stack.extend((x.left, x.right))
        elif isinstance(x, Call):
            stack.extend(x.args)
        elif isinstance(x, (And, Or)):
            stack.extend(x.items)
    return out


# --------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<str>"[^"\n]*")
  | (?P<op>->|<=|>=|!=|==|≥|≤|≠|[-+*/%^(),=<>:])
    """,
    re.VERBOSE,
)

_UNICODE_OPS = {"≥": ">=", "≤": "<=", "≠": "!=", "==": "="}


@dataclass(frozen=True)
class Token:
    kind: str  # num | ident | str | op | eof
    text: str
    line: int
    column: int


def tokenize(text: str, line: int = 1, column: int = 1) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, column + pos)
        kind = m.lastgroup
        if kind != "ws":
            tok = m.group()
            if kind == "op":
                tok = _UNICODE_OPS.get(tok, tok)
            tokens.append(Token(kind, tok, line, column + pos))
        pos = m.end()
    tokens.append(Token("eof", "", line, column + len(text)))
    return tokens


# --------------------------------------------------------------------------
# recursive descent parser

_CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")


class ExprParser:
    """Parses expressions from a token list; ``allowed`` restricts free variables."""

    def __init__(self, tokens: list[Token], allowed: frozenset, keywords_ok: bool = False):
        self.tokens = tokens
        self.pos = 0
        self.allowed = allowed
        self.keywords_ok = keywords_ok

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(message, tok.line, tok.column)

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind in ("op", "ident"):
            self.pos += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            found = self.tok.text or "end of line"
            self.error(f"expected {text!r}, found {found!r}")

    def at_end(self) -> bool:
        return self.tok.kind == "eof"

    # boolean layer

    def boolean(self) -> BoolExpr:
        items = [self._conj()]
        while self.accept("or"):
            items.append(self._conj())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def _conj(self) -> BoolExpr:
        items = [self._negation()]
        while self.accept("and"):
            items.append(self._negation())
        return items[0] if len(items) == 1 else And(tuple(items))

    def _negation(self) -> BoolExpr:
        if self.accept("not"):
            return Not(self._negation())
        return self._bool_atom()

    def _bool_atom(self) -> BoolExpr:
        tok = self.tok
        if tok.kind == "ident" and tok.text in ("true", "false"):
            self.pos += 1
            return Const(tok.text == "true")
        if tok.kind == "ident" and tok.text in ("integral", "admitted"):
            if not self.keywords_ok:
                self.error(f"{tok.text!r} is only allowed in a family 'where' clause")
            self.pos += 1
            return Keyword(tok.text)
        if tok.text == "(":
            # either a parenthesised boolean or an arithmetic operand of a comparison
            saved = self.pos
            try:
                return self._comparison()
            except ParseError as err:
                first_error = err
            self.pos = saved + 1
            try:
                inner = self.boolean()
                self.expect(")")
                return inner
            except ParseError as err:
                if (err.line, err.column) >= (first_error.line, first_error.column):
                    raise
                raise first_error from None
        return self._comparison()

    def _comparison(self) -> Cmp:
        left = self.expr()
        tok = self.tok
        if tok.kind == "op" and tok.text in _CMP_OPS:
            self.pos += 1
            return Cmp(tok.text, left, self.expr())
        self.error(f"expected a comparison operator, found {tok.text or 'end of line'!r}")

    # arithmetic layer

    def expr(self) -> Expr:
        node = self._term()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.tok.text
            self.pos += 1
            node = BinOp(op, node, self._term())
        return node

    def _term(self) -> Expr:
        node = self._unary()
        while True:
            tok = self.tok
            if tok.kind == "op" and tok.text in ("*", "/", "%"):
                op = tok.text
            elif tok.kind == "ident" and tok.text == "mod":
                op = "%"
            else:
                return node
            self.pos += 1
            node = BinOp(op, node, self._unary())

    def _unary(self) -> Expr:
        if self.accept("-"):
            return Neg(self._unary())
        return self._power()

    def _power(self) -> Expr:
        base = self._atom()
        if self.accept("^"):
            return BinOp("^", base, self._unary())
        return base

    def _atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.pos += 1
            return Num(int(tok.text))
        if tok.text == "(" and tok.kind == "op":
            self.pos += 1
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            self.pos += 1
            if self.tok.text == "(" and self.tok.kind == "op":
                if tok.text not in INTRINSICS:
                    self.error(f"unknown intrinsic {tok.text!r}", tok)
                self.pos += 1
                args = [self.expr()]
                while self.accept(","):
                    args.append(self.expr())
                self.expect(")")
                arity = INTRINSICS[tok.text]
                if len(args) != arity:
                    self.error(f"{tok.text}() takes {arity} argument(s), got {len(args)}", tok)
                return Call(tok.text, tuple(args))
            if tok.text not in self.allowed:
                self.error(f"free variable {tok.text!r}", tok)
            return Var(tok.text)
        self.error(f"expected an expression, found {tok.text or 'end of line'!r}")


def parse_expr(text: str, allowed=("n",), line: int = 1, column: int = 1) -> Expr:
    p = ExprParser(tokenize(text, line, column), frozenset(allowed))
    node = p.expr()
    if not p.at_end():
        p.error(f"unexpected {p.tok.text!r}")
    return node


def parse_bool(text: str, allowed=("n",), line: int = 1, column: int = 1, keywords_ok=False) -> BoolExpr:
    p = ExprParser(tokenize(text, line, column), frozenset(allowed), keywords_ok)
    node = p.boolean()
    if not p.at_end():
        p.error(f"unexpected {p.tok.text!r}")
    return node


# --------------------------------------------------------------------------
# printer (inverse of the parser up to whitespace)

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "%": 2, "neg": 3, "^": 4}


def _prec(node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    return 5


def to_text(node) -> str:
    if isinstance(node, Num):
        return str(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        return f"-({inner})" if _prec(node.operand) < 3 else f"-{inner}"
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        left, right = to_text(node.left), to_text(node.right)
        if node.op == "^":
            if _prec(node.left) <= p:
                left = f"({left})"
            if _prec(node.right) < 3:
                right = f"({right})"
            return f"{left}^{right}"
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
        op = "mod" if node.op == "%" else node.op
        return f"{left} {op} {right}"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(to_text(a) for a in node.args)})"
    if isinstance(node, Const):
        return "true" if node.value else "false"
    if isinstance(node, Keyword):
        return node.name
    if isinstance(node, Cmp):
        return f"{to_text(node.left)} {node.op} {to_text(node.right)}"
    if isinstance(node, And):
        return " and ".join(
            f"({to_text(x)})" if isinstance(x, (And, Or)) else to_text(x) for x in node.items
        )
    if isinstance(node, Or):
        return " or ".join(
            f"({to_text(x)})" if isinstance(x, Or) else to_text(x) for x in node.items
        )
    if isinstance(node, Not):
        inner = to_text(node.operand)
        return f"not ({inner})" if isinstance(node.operand, (And, Or, Cmp)) else f"not {inner}"
    raise TypeError(f"not a syntax node: {node!r}")


# --------------------------------------------------------------------------
# exact evaluation over Python integers

MAX_POWER_BITS = 1 << 24


def _div(a: int, b: int) -> int:
    if b == 0:
        raise Inapplicable("division by zero")
    q, r = divmod(a, b)
    if r:
        raise Inapplicable("non-integral division")
    return q


def _mod(a: int, b: int) -> int:
    if b == 0:
        raise Inapplicable("modulo by zero")
    return a % b


def _pow(a: int, b: int) -> int:
    if b < 0:
        raise Inapplicable("negative exponent")
    if abs(a) > 1 and b * abs(a).bit_length() > MAX_POWER_BITS:
        raise ValueLimitExceeded("power too large")
    return a**b


def odd_part(x: int) -> int:
    if x <= 0:
        raise Inapplicable("odd_part of non-positive value")
    return x >> ((x & -x).bit_length() - 1)


def v2(x: int) -> int:
    if x <= 0:
        raise Inapplicable("v2 of non-positive value")
    return (x & -x).bit_length() - 1


def msb2(x: int) -> int:
    if x <= 0:
        raise Inapplicable("msb2 of non-positive value")
    return 1 << (x.bit_length() - 1)


def spf_gt(x: int, k: int) -> int:
    p = primes.smallest_factor_above(x, k) if x > 0 else None
    if p is None:
        raise Inapplicable(f"no prime factor above {k}")
    return p


def lpf_gt(x: int, k: int) -> int:
    p = primes.largest_factor_above(x, k) if x > 0 else None
    if p is None:
        raise Inapplicable(f"no prime factor above {k}")
    return p


PY_RUNTIME = {
    "_div": _div,
    "_mod": _mod,
    "_pow": _pow,
    "_odd_part": odd_part,
    "_v2": v2,
    "_msb2": msb2,
    "_spf_gt": spf_gt,
    "_lpf_gt": lpf_gt,
    "Inapplicable": Inapplicable,
}

_PY_BINOPS = {"+": "({} + {})", "-": "({} - {})", "*": "({} * {})",
              "/": "_div({}, {})", "%": "_mod({}, {})", "^": "_pow({}, {})"}
_PY_CMP = {"=": "==", "!=": "!=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


def _py_source(node) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return f"v_{node.name}"
    if isinstance(node, Neg):
        return f"(-{_py_source(node.operand)})"
    if isinstance(node, BinOp):
        return _PY_BINOPS[node.op].format(_py_source(node.left), _py_source(node.right))
    if isinstance(node, Call):
        return f"_{node.name}({', '.join(_py_source(a) for a in node.args)})"
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Keyword):
        return "True"
    if isinstance(node, Cmp):
        return f"({_py_source(node.left)} {_PY_CMP[node.op]} {_py_source(node.right)})"
    if isinstance(node, And):
        return "(" + " and ".join(_py_source(x) for x in node.items) + ")"
    if isinstance(node, Or):
        return "(" + " or ".join(_py_source(x) for x in node.items) + ")"
    if isinstance(node, Not):
        return f"(not {_py_source(node.operand)})"
    raise TypeError(f"not a syntax node: {node!r}")


def _build(source: str, name: str):
    namespace = dict(PY_RUNTIME)
    exec(compile(source, f"<dynsys:{name}>", "exec"), namespace)
    return namespace[name]


def compile_python_expr(node: Expr, params: tuple[str, ...]):
    """Exact evaluator ``f(*params) -> int``; raises Inapplicable."""
    args = ", ".join(f"v_{p}" for p in params)
    src = f"def _f({args}):\n    return {_py_source(node)}\n"
    return _build(src, "_f")


def compile_python_bool(node: BoolExpr, params: tuple[str, ...]):
    """Exact predicate ``f(*params) -> bool``; inapplicable subterms make it False."""
    args = ", ".join(f"v_{p}" for p in params)
    src = (
        f"def _f({args}):\n"
        f"    try:\n"
        f"        return bool({_py_source(node)})\n"
        f"    except Inapplicable:\n"
        f"        return False\n"
    )
    return _build(src, "_f")


def python_rules_source(rules, var: str = "n") -> str:
    """Source of ``_step(v_n) -> int | None`` applying guarded rules first-match."""
    lines = ["def _step(v_%s):" % var]
    for guard, expr in rules:
        lines += [
            "    try:",
            f"        if {_py_source(guard)}:",
            f"            return {_py_source(expr)}",
            "    except Inapplicable:",
            "        pass",
        ]
    lines.append("    return None")
    return "\n".join(lines) + "\n"


def compile_python_rules(rules, var: str = "n"):
    return _build(python_rules_source(rules, var), "_step")


# --------------------------------------------------------------------------
# int64 code generation for numba (overflow reported, never wrapped)
#
# Sentinels: OVF marks overflow, INAPP an inapplicable subterm.  Booleans
# are tri-state ints: 1 true, 0 false, -1 inapplicable, -2 overflow.

OVF = -(1 << 63)
INAPP = OVF + 1
LIM = 1 << 61

_NB_BINOPS = {"+": "_nadd", "-": "_nsub", "*": "_nmul", "/": "_ndiv", "%": "_nmod", "^": "_npow"}
_NB_CMP = {"=": "_neq", "!=": "_nne", "<": "_nlt", "<=": "_nle", ">": "_ngt", ">=": "_nge"}


def _nb_source(node) -> str:
    if isinstance(node, Num):
        return repr(node.value) if node.value <= LIM else "OVF"
    if isinstance(node, Var):
        return f"v_{node.name}"
    if isinstance(node, Neg):
        return f"_nneg({_nb_source(node.operand)})"
    if isinstance(node, BinOp):
        return f"{_NB_BINOPS[node.op]}({_nb_source(node.left)}, {_nb_source(node.right)})"
    if isinstance(node, Call):
        return f"_n{node.name}({', '.join(_nb_source(a) for a in node.args)})"
    if isinstance(node, Const):
        return "1" if node.value else "0"
    if isinstance(node, Keyword):
        return "1"
    if isinstance(node, Cmp):
        return f"{_NB_CMP[node.op]}({_nb_source(node.left)}, {_nb_source(node.right)})"
    if isinstance(node, (And, Or)):
        fn = "_nand" if isinstance(node, And) else "_nor"
        acc = _nb_source(node.items[-1])
        for item in reversed(node.items[:-1]):
            acc = f"{fn}({_nb_source(item)}, {acc})"
        return acc
    if isinstance(node, Not):
        return f"_nnot({_nb_source(node.operand)})"
    raise TypeError(f"not a syntax node: {node!r}")


def numba_rules_source(rules, var: str = "n") -> str:
    """Source of ``_step(v_n) -> (status, value)``; status 0 next, 1 no rule, 2 overflow."""
    lines = [f"def _step(v_{var}):"]
    for guard, expr in rules:
        lines += [
            f"    g = {_nb_source(guard)}",
            "    if g == -2:",
            "        return 2, 0",
            "    if g == 1:",
            f"        v = {_nb_source(expr)}",
            "        if v == OVF:",
            "            return 2, 0",
            "        if v != INAPP:",
            "            return 0, v",
        ]
    lines.append("    return 1, 0")
    return "\n".join(lines) + "\n"


def numba_bool_source(node: BoolExpr, var: str = "n") -> str:
    return f"def _pred(v_{var}):\n    return {_nb_source(node)}\n"
