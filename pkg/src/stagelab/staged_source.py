"""The staged source language: arithmetic, booleans, conditionals, and ``~()``.

An escape ``~(e)`` is evaluated while compiling and replaced by the literal
of its value, so ``x + ~(1+1)`` and ``x + 2`` compile to the same code.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from . import machine as m
from .fuel import Fuel, FuelExhausted
from .machine import DEFAULT_FUEL, MachineCode


# Syntax trees.

@dataclass(frozen=True)
class Lit:
    value: int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - *
    left: "SourceTerm"
    right: "SourceTerm"


@dataclass(frozen=True)
class Cmp:
    op: str  # one of < =
    left: "SourceTerm"
    right: "SourceTerm"


@dataclass(frozen=True)
class If:
    cond: "SourceTerm"
    then: "SourceTerm"
    else_: "SourceTerm"


@dataclass(frozen=True)
class Escape:
    body: "SourceTerm"


SourceTerm = Union[Lit, BoolLit, Var, BinOp, Cmp, If, Escape]

ARITH_OPS = ("+", "-", "*")
CMP_OPS = ("<", "=")
KEYWORDS = frozenset({"if", "then", "else", "true", "false"})


def children(t):
    if isinstance(t, (BinOp, Cmp)):
        return (t.left, t.right)
    if isinstance(t, If):
        return (t.cond, t.then, t.else_)
    if isinstance(t, Escape):
        return (t.body,)
    return ()


def free_vars(t) -> frozenset:
    if isinstance(t, Var):
        return frozenset((t.name,))
    out = frozenset()
    for c in children(t):
        out |= free_vars(c)
    return out


def escapes_closed(t) -> bool:
    if isinstance(t, Escape) and free_vars(t.body):
        return False
    return all(escapes_closed(c) for c in children(t))


# Parsing.

class SourceSyntaxError(ValueError):
    def __init__(self, pos, message):
        super().__init__("position %d: %s" % (pos, message))
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(~\(|[-+*<=()]))")


def _tokenize(text):
    tokens = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        mt = _TOKEN.match(text, pos)
        if not mt:
            raise SourceSyntaxError(pos, "unexpected character %r" % text[pos])
        start = mt.start(mt.lastindex)
        if mt.group(1) is not None:
            tokens.append(("int", int(mt.group(1)), start))
        elif mt.group(2) is not None:
            word = mt.group(2)
            tokens.append(("kw" if word in KEYWORDS else "ident", word, start))
        else:
            tokens.append(("op", mt.group(3), start))
        pos = mt.end()
    tokens.append(("eof", None, n))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, offset=0):
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def is_(self, kind, value=None):
        k, v, _ = self.peek()
        return k == kind and (value is None or v == value)

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind, value):
        k, v, pos = self.peek()
        if k != kind or v != value:
            found = "end of input" if k == "eof" else repr(v)
            raise SourceSyntaxError(pos, "expected %r, found %s" % (value, found))
        return self.advance()

    def expr(self):
        if self.is_("kw", "if"):
            self.advance()
            cond = self.expr()
            self.expect("kw", "then")
            then = self.expr()
            self.expect("kw", "else")
            return If(cond, then, self.expr())
        return self.comparison()

    def comparison(self):
        left = self.additive()
        while self.peek()[0] == "op" and self.peek()[1] in CMP_OPS:
            op = self.advance()[1]
            left = Cmp(op, left, self.additive())
        return left

    def additive(self):
        left = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in ("+", "-"):
            op = self.advance()[1]
            left = BinOp(op, left, self.term())
        return left

    def term(self):
        left = self.atom()
        while self.is_("op", "*"):
            self.advance()
            left = BinOp("*", left, self.atom())
        return left

    def atom(self):
        kind, value, pos = self.peek()
        if kind == "int":
            self.advance()
            return Lit(value)
        if kind == "op" and value == "-" and self.peek(1)[0] == "int":
            self.advance()
            return Lit(-self.advance()[1])
        if kind == "ident":
            self.advance()
            return Var(value)
        if kind == "kw" and value in ("true", "false"):
            self.advance()
            return BoolLit(value == "true")
        if kind == "op" and value == "~(":
            self.advance()
            body = self.expr()
            self.expect("op", ")")
            return Escape(body)
        if kind == "op" and value == "(":
            self.advance()
            inner = self.expr()
            self.expect("op", ")")
            return inner
        found = "end of input" if kind == "eof" else repr(value)
        raise SourceSyntaxError(pos, "unexpected %s" % found)


def parse_source(text: str) -> SourceTerm:
    p = _Parser(text)
    term = p.expr()
    kind, value, pos = p.peek()
    if kind != "eof":
        raise SourceSyntaxError(pos, "trailing input starting at %r" % (value,))
    return term


# Binding strength: if < comparison < additive < multiplicative < atom.
_LEVEL = {"<": 1, "=": 1, "+": 2, "-": 2, "*": 3}


def pretty(t, level=0) -> str:
    """Print with the fewest parentheses that parse back to ``t``."""
    if isinstance(t, Lit):
        return str(t.value)
    if isinstance(t, BoolLit):
        return "true" if t.value else "false"
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Escape):
        return "~(%s)" % pretty(t.body)
    if isinstance(t, If):
        s = "if %s then %s else %s" % (pretty(t.cond), pretty(t.then), pretty(t.else_))
        return s if level == 0 else "(%s)" % s
    mine = _LEVEL[t.op]
    s = "%s %s %s" % (pretty(t.left, mine), t.op, pretty(t.right, mine + 1))
    return s if level <= mine else "(%s)" % s


def member_LA(text) -> bool:
    """Decide membership: the text parses and every escape body is closed."""
    try:
        term = parse_source(text) if isinstance(text, str) else text
    except SourceSyntaxError:
        return False
    return escapes_closed(term)


# Compile-time evaluation.

class EscapeEvalError(Exception):
    pass


def _is_int(v):
    return type(v) is int


def _eval_closed(t, fuel: Fuel):
    fuel.tick()
    if isinstance(t, Lit):
        return t.value
    if isinstance(t, BoolLit):
        return t.value
    if isinstance(t, Var):
        raise EscapeEvalError("free variable %s in escape" % t.name)
    if isinstance(t, Escape):
        return _eval_closed(t.body, fuel)
    if isinstance(t, If):
        c = _eval_closed(t.cond, fuel)
        if type(c) is not bool:
            raise EscapeEvalError("condition evaluated to non-boolean %r" % (c,))
        return _eval_closed(t.then if c else t.else_, fuel)
    a = _eval_closed(t.left, fuel)
    b = _eval_closed(t.right, fuel)
    if not (_is_int(a) and _is_int(b)):
        raise EscapeEvalError("%s applied to %s and %s" % (
            t.op, _show(a), _show(b)))
    if t.op == "+":
        return a + b
    if t.op == "-":
        return a - b
    if t.op == "*":
        return a * b
    if t.op == "<":
        return a < b
    return a == b


def _show(v):
    if type(v) is bool:
        return "true" if v else "false"
    return str(v)


def eval_escape(body, fuel=DEFAULT_FUEL):
    """Evaluate a closed escape body; nested escapes reduce innermost first.

    Raises ``EscapeEvalError`` on type confusion and ``FuelExhausted`` when
    the step budget runs out.
    """
    return _eval_closed(body, fuel if isinstance(fuel, Fuel) else Fuel(fuel))


def _literal(v):
    return BoolLit(v) if type(v) is bool else Lit(v)


def collapse_escapes(t, fuel: Fuel):
    if isinstance(t, Escape):
        return _literal(_eval_closed(t.body, fuel))
    if isinstance(t, BinOp):
        return BinOp(t.op, collapse_escapes(t.left, fuel), collapse_escapes(t.right, fuel))
    if isinstance(t, Cmp):
        return Cmp(t.op, collapse_escapes(t.left, fuel), collapse_escapes(t.right, fuel))
    if isinstance(t, If):
        return If(collapse_escapes(t.cond, fuel), collapse_escapes(t.then, fuel),
                  collapse_escapes(t.else_, fuel))
    return t


# Code generation.

_OPCODE = {"+": m.IADD, "-": m.ISUB, "*": m.IMUL, "<": m.ILT, "=": m.IEQ}


def _emit(t, out):
    if isinstance(t, Lit):
        out.append(m.PUSHI(t.value))
    elif isinstance(t, BoolLit):
        out.append(m.PUSHI(1 if t.value else 0))
    elif isinstance(t, Var):
        out.append(m.LOADV(t.name))
    elif isinstance(t, (BinOp, Cmp)):
        _emit(t.left, out)
        _emit(t.right, out)
        out.append(_OPCODE[t.op])
    elif isinstance(t, If):
        then, else_ = [], []
        _emit(t.then, then)
        _emit(t.else_, else_)
        _emit(t.cond, out)
        out.append(m.JMPZ(len(then) + 1))
        out.extend(then)
        out.append(m.JMP(len(else_)))
        out.extend(else_)
    else:
        raise TypeError("escape survived collapsing: %r" % (t,))


def _as_term(p):
    return parse_source(p) if isinstance(p, str) else p


def compile_with(p, fuel: Fuel) -> m.CompiledProgram:
    """The source compiler, charging escape evaluation to a shared budget."""
    try:
        term = _as_term(p)
    except SourceSyntaxError as exc:
        return m.Error("syntax error: %s" % exc)
    if not escapes_closed(term):
        return m.Error("not a program: escape body has free variables")
    try:
        residual = collapse_escapes(term, fuel)
    except FuelExhausted:
        return m.Bottom
    except EscapeEvalError as exc:
        return m.Error("escape evaluation: %s" % exc)
    out = []
    _emit(residual, out)
    return m.Code(MachineCode(tuple(out)))


def compile_a(p, fuel=DEFAULT_FUEL) -> m.CompiledProgram:
    return compile_with(p, Fuel(fuel))


# The safety calculus.

@dataclass(frozen=True)
class Safe:
    type: str  # "int" or "bool"

    def __bool__(self):
        return True


@dataclass(frozen=True)
class NotSafe:
    reason: str

    def __bool__(self):
        return False


class _IllTyped(Exception):
    pass


def _type_of(t):
    if isinstance(t, Lit) or isinstance(t, Var):
        return "int"
    if isinstance(t, BoolLit):
        return "bool"
    if isinstance(t, Escape):
        if free_vars(t.body):
            raise _IllTyped("escape body is not closed")
        return _type_of(t.body)
    if isinstance(t, If):
        if _type_of(t.cond) != "bool":
            raise _IllTyped("condition of if must be bool: %s" % pretty(t.cond))
        a, b = _type_of(t.then), _type_of(t.else_)
        if a != b:
            raise _IllTyped("branches of if disagree: %s vs %s" % (a, b))
        return a
    for side in (t.left, t.right):
        if _type_of(side) != "int":
            raise _IllTyped("operand of %s must be int: %s" % (t.op, pretty(side)))
    return "int" if isinstance(t, BinOp) else "bool"


def typecheck(p):
    """Decide the safety judgment; free variables are taken to be ints."""
    try:
        term = _as_term(p)
    except SourceSyntaxError as exc:
        return NotSafe("syntax error: %s" % exc)
    try:
        return Safe(_type_of(term))
    except _IllTyped as exc:
        return NotSafe(str(exc))


def compile_a_safe_with(p, fuel: Fuel) -> m.CompiledProgram:
    try:
        term = _as_term(p)
    except SourceSyntaxError as exc:
        return m.Error("syntax error: %s" % exc)
    if not escapes_closed(term):
        return m.Error("not a program: escape body has free variables")
    if not typecheck(term):
        return m.Unsafe
    return compile_with(term, fuel)


def compile_a_safe(p, fuel=DEFAULT_FUEL) -> m.CompiledProgram:
    return compile_a_safe_with(p, Fuel(fuel))


def fold_constants(t):
    """Fold arithmetic and comparisons whose operands are both int literals.

    Works bottom-up, also inside escape bodies; the escape nodes themselves
    are kept.
    """
    if isinstance(t, Escape):
        return Escape(fold_constants(t.body))
    if isinstance(t, If):
        return If(fold_constants(t.cond), fold_constants(t.then), fold_constants(t.else_))
    if not isinstance(t, (BinOp, Cmp)):
        return t
    left, right = fold_constants(t.left), fold_constants(t.right)
    if isinstance(left, Lit) and isinstance(right, Lit):
        a, b = left.value, right.value
        if t.op == "+":
            return Lit(a + b)
        if t.op == "-":
            return Lit(a - b)
        if t.op == "*":
            return Lit(a * b)
        return BoolLit(a < b if t.op == "<" else a == b)
    return type(t)(t.op, left, right)
