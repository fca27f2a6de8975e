"""The metaprogramming host language.

A host program is ``(emit E)``.  Compiling it runs the meta-expression ``E``
to completion at compile time and the residual machine program is exactly
the code value ``E`` produced.  Meta-expressions are a call-by-value lambda
calculus with ``fix``, lists, symbols, and quoted source and machine code,
so any computable function over codes can run inside the compiler, up to
the fuel bound.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Callable, Union

from . import machine as m
from . import staged_source as src
from .fuel import Fuel, FuelExhausted
from .machine import DEFAULT_FUEL, MachineCode


# Meta-expressions.

@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class SymLit:
    name: str


@dataclass(frozen=True)
class Nil:
    pass


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class PrimRef:
    name: str


@dataclass(frozen=True)
class Lambda:
    param: str
    body: "MetaExpr"


@dataclass(frozen=True)
class Apply:
    fn: "MetaExpr"
    arg: "MetaExpr"


@dataclass(frozen=True)
class Fix:
    fn: "MetaExpr"


@dataclass(frozen=True)
class If:
    cond: "MetaExpr"
    then: "MetaExpr"
    else_: "MetaExpr"


@dataclass(frozen=True)
class BinPrim:
    op: str
    left: "MetaExpr"
    right: "MetaExpr"


@dataclass(frozen=True)
class QuoteA:
    term: src.SourceTerm


@dataclass(frozen=True)
class QuoteM:
    code: MachineCode


@dataclass(frozen=True)
class Hole:
    """The code-argument position of a program template ``P[.]``."""


MetaExpr = Union[IntLit, BoolLit, SymLit, Nil, VarRef, PrimRef, Lambda, Apply,
                 Fix, If, BinPrim, QuoteA, QuoteM, Hole]

BIN_OPS = ("+", "-", "*", "<", "=")


# Meta-values.

@dataclass(frozen=True)
class MInt:
    value: int


@dataclass(frozen=True)
class MBool:
    value: bool


@dataclass(frozen=True)
class MSym:
    name: str


@dataclass(frozen=True)
class MList:
    items: tuple = ()


@dataclass(frozen=True)
class MCodeA:
    term: src.SourceTerm


@dataclass(frozen=True)
class MCodeM:
    code: MachineCode


@dataclass(frozen=True)
class _MUnsafe:
    def __repr__(self):
        return "MUnsafe"


@dataclass(frozen=True)
class _MBottomMark:
    def __repr__(self):
        return "MBottomMark"


MUnsafe = _MUnsafe()
MBottomMark = _MBottomMark()


@dataclass(eq=False)
class MClosure:
    param: str
    body: MetaExpr
    env: dict


@dataclass(eq=False)
class MFix:
    fn: object


@dataclass(eq=False)
class MPrim:
    name: str
    args: tuple = ()


class MetaError(Exception):
    pass


def _kind(v):
    return type(v).__name__.lstrip("_")


# Codes.

def encode_source(p) -> MCodeA:
    return MCodeA(p)


def encode_machine(code: MachineCode) -> MCodeM:
    return MCodeM(code)


def decode(v):
    if isinstance(v, MCodeA):
        return v.term
    if isinstance(v, MCodeM):
        return v.code
    raise TypeError("not a code value: %r" % (v,))


def term_sexpr(t) -> str:
    if isinstance(t, src.Lit):
        return "(lit %d)" % t.value
    if isinstance(t, src.BoolLit):
        return "(bool %s)" % ("true" if t.value else "false")
    if isinstance(t, src.Var):
        return "(var %s)" % t.name
    if isinstance(t, src.Escape):
        return "(escape %s)" % term_sexpr(t.body)
    if isinstance(t, src.If):
        return "(if %s %s %s)" % tuple(term_sexpr(c) for c in src.children(t))
    tag = "binop" if isinstance(t, src.BinOp) else "cmp"
    return "(%s %s %s %s)" % (tag, t.op, term_sexpr(t.left), term_sexpr(t.right))


def canonical(v) -> str:
    """A serialized form of a code value, injective on codes."""
    if isinstance(v, MCodeA):
        return "A" + term_sexpr(v.term)
    if isinstance(v, MCodeM):
        return "M[" + ";".join(str(i) for i in v.code.instrs) + "]"
    raise TypeError("not a code value: %r" % (v,))


# Primitives.  Each takes its evaluated arguments and the running fuel meter.

@dataclass(frozen=True)
class Prim:
    arity: int
    fn: Callable


PRIMS: dict[str, Prim] = {}


def primitive(name, arity):
    def register(fn):
        PRIMS[name] = Prim(arity, fn)
        return fn
    return register


def _want(v, cls, prim):
    if not isinstance(v, cls):
        raise MetaError("%s expects %s, got %s" % (prim, cls.__name__.lstrip("_"), _kind(v)))
    return v


def encode_outcome(outcome: m.CompiledProgram):
    """The meta-level value coding a compiler outcome."""
    if isinstance(outcome, m.Code):
        return MCodeM(outcome.code)
    if outcome is m.Unsafe:
        return MUnsafe
    if outcome is m.Bottom:
        return MBottomMark
    raise MetaError(outcome.message)


def _run_compiler(compile_fn, code, fuel):
    # The source compiler runs at the same fuel as the whole host compilation,
    # on its own budget, so the primitive computes exactly the function the
    # source compiler is at that fuel.  A source-side divergence comes back
    # as the code of bottom.
    return encode_outcome(compile_fn(code.term, Fuel(fuel.limit)))


@primitive("compile_a", 1)
def _p_compile_a(args, fuel):
    return _run_compiler(src.compile_with, _want(args[0], MCodeA, "compile_a"), fuel)


@primitive("compile_a_safe", 1)
def _p_compile_a_safe(args, fuel):
    code = _want(args[0], MCodeA, "compile_a_safe")
    return _run_compiler(src.compile_a_safe_with, code, fuel)


@primitive("typecheck_a", 1)
def _p_typecheck_a(args, fuel):
    return MBool(bool(src.typecheck(_want(args[0], MCodeA, "typecheck_a").term)))


@primitive("unsafe", 0)
def _p_unsafe(args, fuel):
    return MUnsafe


@primitive("bottom", 0)
def _p_bottom(args, fuel):
    return MBottomMark


@primitive("not", 1)
def _p_not(args, fuel):
    return MBool(not _want(args[0], MBool, "not").value)


@primitive("cons", 2)
def _p_cons(args, fuel):
    return MList((args[0],) + _want(args[1], MList, "cons").items)


@primitive("head", 1)
def _p_head(args, fuel):
    items = _want(args[0], MList, "head").items
    if not items:
        raise MetaError("head of empty list")
    return items[0]


@primitive("tail", 1)
def _p_tail(args, fuel):
    items = _want(args[0], MList, "tail").items
    if not items:
        raise MetaError("tail of empty list")
    return MList(items[1:])


@primitive("null?", 1)
def _p_null(args, fuel):
    return MBool(not _want(args[0], MList, "null?").items)


_A_KIND = {src.Lit: "lit", src.BoolLit: "bool", src.Var: "var", src.BinOp: "binop",
           src.Cmp: "cmp", src.If: "if", src.Escape: "escape"}


@primitive("a_kind", 1)
def _p_a_kind(args, fuel):
    return MSym(_A_KIND[type(_want(args[0], MCodeA, "a_kind").term)])


@primitive("a_children", 1)
def _p_a_children(args, fuel):
    term = _want(args[0], MCodeA, "a_children").term
    return MList(tuple(MCodeA(c) for c in src.children(term)))


@primitive("a_rebuild", 2)
def _p_a_rebuild(args, fuel):
    t = _want(args[0], MCodeA, "a_rebuild").term
    new = tuple(_want(c, MCodeA, "a_rebuild").term
                for c in _want(args[1], MList, "a_rebuild").items)
    if len(new) != len(src.children(t)):
        raise MetaError("a_rebuild: %s node takes %d children, got %d"
                        % (_A_KIND[type(t)], len(src.children(t)), len(new)))
    if isinstance(t, (src.BinOp, src.Cmp)):
        return MCodeA(type(t)(t.op, *new))
    if isinstance(t, src.If):
        return MCodeA(src.If(*new))
    if isinstance(t, src.Escape):
        return MCodeA(src.Escape(*new))
    return MCodeA(t)


@primitive("a_int", 1)
def _p_a_int(args, fuel):
    t = _want(args[0], MCodeA, "a_int").term
    if not isinstance(t, src.Lit):
        raise MetaError("a_int of a %s node" % _A_KIND[type(t)])
    return MInt(t.value)


@primitive("a_bool", 1)
def _p_a_bool(args, fuel):
    t = _want(args[0], MCodeA, "a_bool").term
    if not isinstance(t, src.BoolLit):
        raise MetaError("a_bool of a %s node" % _A_KIND[type(t)])
    return MBool(t.value)


@primitive("a_op", 1)
def _p_a_op(args, fuel):
    t = _want(args[0], MCodeA, "a_op").term
    if not isinstance(t, (src.BinOp, src.Cmp)):
        raise MetaError("a_op of a %s node" % _A_KIND[type(t)])
    return MSym(t.op)


@primitive("a_name", 1)
def _p_a_name(args, fuel):
    t = _want(args[0], MCodeA, "a_name").term
    if not isinstance(t, src.Var):
        raise MetaError("a_name of a %s node" % _A_KIND[type(t)])
    return MSym(t.name)


@primitive("a_mk_int", 1)
def _p_a_mk_int(args, fuel):
    return MCodeA(src.Lit(_want(args[0], MInt, "a_mk_int").value))


@primitive("a_mk_bool", 1)
def _p_a_mk_bool(args, fuel):
    return MCodeA(src.BoolLit(_want(args[0], MBool, "a_mk_bool").value))


@primitive("m_append", 2)
def _p_m_append(args, fuel):
    return MCodeM(_want(args[0], MCodeM, "m_append").code + _want(args[1], MCodeM, "m_append").code)


@primitive("m_length", 1)
def _p_m_length(args, fuel):
    return MInt(len(_want(args[0], MCodeM, "m_length").code))


@primitive("m_pushi", 1)
def _p_m_pushi(args, fuel):
    return MCodeM(MachineCode((m.PUSHI(_want(args[0], MInt, "m_pushi").value),)))


_EQ_KINDS = (MInt, MBool, MSym, MCodeA, MCodeM, _MUnsafe, _MBottomMark)


def _binop(op, a, b):
    if op == "=":
        if not (isinstance(a, _EQ_KINDS) and isinstance(b, _EQ_KINDS)):
            raise MetaError("= cannot compare %s with %s" % (_kind(a), _kind(b)))
        return MBool(a == b)
    if not (isinstance(a, MInt) and isinstance(b, MInt)):
        raise MetaError("%s expects integers, got %s and %s" % (op, _kind(a), _kind(b)))
    x, y = a.value, b.value
    if op == "+":
        return MInt(x + y)
    if op == "-":
        return MInt(x - y)
    if op == "*":
        return MInt(x * y)
    return MBool(x < y)


# Evaluation: an explicit-continuation machine, so deep meta-level
# recursion is bounded by fuel rather than by the Python stack.

def meta_eval(e: MetaExpr, fuel=DEFAULT_FUEL):
    """Evaluate a closed meta-expression call-by-value.

    Raises ``FuelExhausted`` when the step budget runs out and ``MetaError``
    on a dynamic error (applying a non-function, wrong constructor, ...).
    """
    meter = fuel if isinstance(fuel, Fuel) else Fuel(fuel)
    kont = []
    env: dict = {}
    value = None
    evaluating = True
    while True:
        if evaluating:
            meter.tick()
            if isinstance(e, Apply):
                kont.append(("arg", e.arg, env))
                e = e.fn
                continue
            if isinstance(e, If):
                kont.append(("if", e.then, e.else_, env))
                e = e.cond
                continue
            if isinstance(e, BinPrim):
                kont.append(("binl", e.op, e.right, env))
                e = e.left
                continue
            if isinstance(e, Fix):
                kont.append(("fix",))
                e = e.fn
                continue
            if isinstance(e, VarRef):
                if e.name not in env:
                    raise MetaError("unbound variable %s" % e.name)
                value = env[e.name]
            elif isinstance(e, Lambda):
                value = MClosure(e.param, e.body, env)
            elif isinstance(e, IntLit):
                value = MInt(e.value)
            elif isinstance(e, BoolLit):
                value = MBool(e.value)
            elif isinstance(e, SymLit):
                value = MSym(e.name)
            elif isinstance(e, Nil):
                value = MList()
            elif isinstance(e, QuoteA):
                value = MCodeA(e.term)
            elif isinstance(e, QuoteM):
                value = MCodeM(e.code)
            elif isinstance(e, PrimRef):
                if e.name not in PRIMS:
                    raise MetaError("unknown primitive %s" % e.name)
                prim = PRIMS[e.name]
                value = prim.fn((), meter) if prim.arity == 0 else MPrim(e.name)
            elif isinstance(e, Hole):
                raise MetaError("program template has an unfilled code argument")
            else:
                raise MetaError("not a meta-expression: %r" % (e,))
            evaluating = False
            continue

        if not kont:
            return value
        frame = kont.pop()
        tag = frame[0]
        if tag == "arg":
            kont.append(("call", value))
            e, env = frame[1], frame[2]
            evaluating = True
            continue
        if tag == "if":
            if not isinstance(value, MBool):
                raise MetaError("if expects a boolean condition, got %s" % _kind(value))
            e = frame[1] if value.value else frame[2]
            env = frame[3]
            evaluating = True
            continue
        if tag == "binl":
            kont.append(("binr", frame[1], value))
            e, env = frame[2], frame[3]
            evaluating = True
            continue
        if tag == "binr":
            value = _binop(frame[1], frame[2], value)
            continue
        if tag == "fix":
            if not isinstance(value, (MClosure, MPrim, MFix)):
                raise MetaError("fix expects a function, got %s" % _kind(value))
            value = MFix(value)
            continue
        # "call" applies frame[1] to value; "applyto" applies value to frame[1].
        if tag == "call":
            fn, arg = frame[1], value
        else:
            fn, arg = value, frame[1]
        while isinstance(fn, MFix):
            # fix g applied to v steps to (g (fix g)) v.
            kont.append(("applyto", arg))
            fn, arg = fn.fn, fn
        if isinstance(fn, MClosure):
            env = dict(fn.env)
            env[fn.param] = arg
            e = fn.body
            evaluating = True
        elif isinstance(fn, MPrim):
            args = fn.args + (arg,)
            prim = PRIMS[fn.name]
            value = prim.fn(args, meter) if len(args) == prim.arity else MPrim(fn.name, args)
        else:
            raise MetaError("cannot apply a %s" % _kind(fn))


# Programs.

@dataclass(frozen=True)
class HostProgram:
    emit_arg: MetaExpr

    def holes(self):
        return _count_holes(self.emit_arg)

    def __str__(self):
        return format_host(self)


def _subexprs(e):
    if isinstance(e, Lambda):
        return (e.body,)
    if isinstance(e, Apply):
        return (e.fn, e.arg)
    if isinstance(e, Fix):
        return (e.fn,)
    if isinstance(e, If):
        return (e.cond, e.then, e.else_)
    if isinstance(e, BinPrim):
        return (e.left, e.right)
    return ()


def _count_holes(e):
    if isinstance(e, Hole):
        return 1
    return sum(_count_holes(c) for c in _subexprs(e))


def meta_free_vars(e) -> frozenset:
    if isinstance(e, VarRef):
        return frozenset((e.name,))
    if isinstance(e, Lambda):
        return meta_free_vars(e.body) - {e.param}
    out = frozenset()
    for c in _subexprs(e):
        out |= meta_free_vars(c)
    return out


def _fill(e, filler):
    if isinstance(e, Hole):
        return filler
    if isinstance(e, Lambda):
        return Lambda(e.param, _fill(e.body, filler))
    if isinstance(e, Apply):
        return Apply(_fill(e.fn, filler), _fill(e.arg, filler))
    if isinstance(e, Fix):
        return Fix(_fill(e.fn, filler))
    if isinstance(e, If):
        return If(_fill(e.cond, filler), _fill(e.then, filler), _fill(e.else_, filler))
    if isinstance(e, BinPrim):
        return BinPrim(e.op, _fill(e.left, filler), _fill(e.right, filler))
    return e


def compile_u(P: HostProgram, fuel=DEFAULT_FUEL) -> m.CompiledProgram:
    """Compile a host program: run its meta-expression, residualize the code."""
    try:
        v = meta_eval(P.emit_arg, fuel)
    except FuelExhausted:
        return m.Bottom
    except MetaError as exc:
        return m.Error(str(exc))
    if isinstance(v, MCodeM):
        return m.Code(v.code)
    if v is MUnsafe:
        return m.Unsafe
    if v is MBottomMark:
        return m.Bottom
    return m.Error("emit expects machine code, got %s" % _kind(v))


# The machine-code interpreter and program composition.

INTERPRETER = HostProgram(Hole())


def interp_program(code_expr: MetaExpr) -> HostProgram:
    """``I_M[code_expr]``: a host program behaving as the coded machine program."""
    return HostProgram(code_expr)


class CompositionError(ValueError):
    pass


def instantiate(P: HostProgram, code_expr: MetaExpr) -> HostProgram:
    """``P[code_expr]``: plug a code argument into a program template."""
    if P.holes() != 1:
        raise CompositionError("program template must have exactly one code argument, "
                               "found %d" % P.holes())
    return HostProgram(_fill(P.emit_arg, code_expr))


_FUNCTION_SHAPES = (Lambda, PrimRef, Fix, Apply, VarRef)


def _check_function(F):
    if not isinstance(F, _FUNCTION_SHAPES):
        raise CompositionError("%s is not a function expression" % type(F).__name__)
    if meta_free_vars(F) or _count_holes(F):
        raise CompositionError("function expression must be closed")


def apply_program(P: HostProgram, F: MetaExpr) -> HostProgram:
    """``P[F(.)]``: the template that runs ``F`` on its code argument first."""
    _check_function(F)
    if P.holes() != 1:
        raise CompositionError("program template must have exactly one code argument, "
                               "found %d" % P.holes())
    return HostProgram(_fill(P.emit_arg, Apply(F, Hole())))


def compose(F: MetaExpr, G: MetaExpr) -> MetaExpr:
    """``F . G`` as a meta-level function."""
    _check_function(F)
    _check_function(G)
    return Lambda("c", Apply(F, Apply(G, VarRef("c"))))


def quote(obj) -> MetaExpr:
    """The meta-expression denoting the code of a source term, machine program,
    or compiler outcome."""
    if isinstance(obj, MachineCode):
        return QuoteM(obj)
    if isinstance(obj, m.Code):
        return QuoteM(obj.code)
    if obj is m.Unsafe:
        return PrimRef("unsafe")
    if obj is m.Bottom:
        return PrimRef("bottom")
    if isinstance(obj, m.Error):
        raise ValueError("an error outcome has no code: %s" % obj.message)
    if isinstance(obj, (src.Lit, src.BoolLit, src.Var, src.BinOp, src.Cmp, src.If, src.Escape)):
        return QuoteA(obj)
    raise TypeError("cannot quote %r" % (obj,))


# Surface syntax.

class HostSyntaxError(ValueError):
    def __init__(self, pos, message):
        super().__init__("position %d: %s" % (pos, message))
        self.pos = pos


_HOST_TOKEN = re.compile(r"""\s*(?:(\()|(\))|("(?:[^"\\]|\\.)*")|'([^\s()"']+)|([^\s()"']+))""")
_INT = re.compile(r"-?\d+\Z")


def _host_tokens(text):
    pos = 0
    toks = []
    while True:
        mt = _HOST_TOKEN.match(text, pos)
        if not mt:
            rest = text[pos:]
            if rest.strip() == "":
                break
            raise HostSyntaxError(pos + len(rest) - len(rest.lstrip()), "bad token")
        start = mt.start(mt.lastindex)
        if mt.group(1):
            toks.append(("(", None, start))
        elif mt.group(2):
            toks.append((")", None, start))
        elif mt.group(3) is not None:
            try:
                toks.append(("str", json.loads(mt.group(3)), start))
            except ValueError:
                raise HostSyntaxError(start, "malformed string literal") from None
        elif mt.group(4) is not None:
            toks.append(("sym", mt.group(4), start))
        else:
            toks.append(("atom", mt.group(5), start))
        pos = mt.end()
    return toks


def _read(toks, i):
    """Read one s-expression; lists become Python lists of tokens/lists."""
    if i >= len(toks):
        raise HostSyntaxError(toks[-1][2] if toks else 0, "unexpected end of input")
    kind, val, pos = toks[i]
    if kind == ")":
        raise HostSyntaxError(pos, "unexpected ')'")
    if kind != "(":
        return toks[i], i + 1
    items = []
    i += 1
    while True:
        if i >= len(toks):
            raise HostSyntaxError(pos, "unclosed '('")
        if toks[i][0] == ")":
            return (items, pos), i + 1
        item, i = _read(toks, i)
        items.append(item)


def _is_list(x):
    return isinstance(x[0], list)


def _atom(x, expected="identifier"):
    if _is_list(x) or x[0] != "atom":
        raise HostSyntaxError(_pos(x), "expected %s" % expected)
    return x[1]


def _pos(x):
    return x[1] if _is_list(x) else x[2]


def _to_meta(x, scope):
    if not _is_list(x):
        kind, val, pos = x
        if kind == "str":
            raise HostSyntaxError(pos, "string literal outside quoteA/quoteM")
        if kind == "sym":
            return SymLit(val)
        if _INT.match(val):
            return IntLit(int(val))
        if val in ("true", "#t"):
            return BoolLit(True)
        if val in ("false", "#f"):
            return BoolLit(False)
        if val == "nil":
            return Nil()
        if val == "_":
            return Hole()
        if val in scope or val not in PRIMS:
            return VarRef(val)
        return PrimRef(val)
    items, pos = x
    if not items:
        raise HostSyntaxError(pos, "empty application")
    head = items[0]
    name = None if _is_list(head) or head[0] != "atom" else head[1]
    args = items[1:]

    def arity(n):
        if len(args) != n:
            raise HostSyntaxError(pos, "%s takes %d argument(s)" % (name, n))

    if name == "lambda":
        if len(args) != 2 or not _is_list(args[0]) or not args[0][0]:
            raise HostSyntaxError(pos, "lambda needs (lambda (params...) body)")
        params = [_atom(p, "parameter name") for p in args[0][0]]
        body = _to_meta(args[1], scope | set(params))
        for p in reversed(params):
            body = Lambda(p, body)
        return body
    if name == "let":
        if len(args) != 2 or not _is_list(args[0]):
            raise HostSyntaxError(pos, "let needs (let ((name expr)...) body)")
        bindings = []
        inner = set(scope)
        for b in args[0][0]:
            if not _is_list(b) or len(b[0]) != 2:
                raise HostSyntaxError(_pos(b), "let binding must be (name expr)")
            bname = _atom(b[0][0], "binding name")
            bindings.append((bname, _to_meta(b[0][1], inner)))
            inner = inner | {bname}
        body = _to_meta(args[1], inner)
        for bname, bexpr in reversed(bindings):
            body = Apply(Lambda(bname, body), bexpr)
        return body
    if name == "fix":
        arity(1)
        return Fix(_to_meta(args[0], scope))
    if name == "if":
        arity(3)
        return If(*(_to_meta(a, scope) for a in args))
    if name in BIN_OPS:
        arity(2)
        return BinPrim(name, _to_meta(args[0], scope), _to_meta(args[1], scope))
    if name in ("quoteA", "quoteM"):
        arity(1)
        if _is_list(args[0]) or args[0][0] != "str":
            raise HostSyntaxError(pos, "%s takes a string literal" % name)
        text = args[0][1]
        try:
            if name == "quoteA":
                return QuoteA(src.parse_source(text))
            return QuoteM(m.parse_machine(text))
        except (src.SourceSyntaxError, m.MachineParseError) as exc:
            raise HostSyntaxError(_pos(args[0]), "inside %s: %s" % (name, exc)) from None
    if name == "emit":
        raise HostSyntaxError(pos, "emit may only appear at the top level")
    if not args:
        raise HostSyntaxError(pos, "application needs at least one argument")
    out = _to_meta(head, scope)
    for a in args:
        out = Apply(out, _to_meta(a, scope))
    return out


def parse_meta(text: str) -> MetaExpr:
    toks = _host_tokens(text)
    x, i = _read(toks, 0)
    if i != len(toks):
        raise HostSyntaxError(toks[i][2], "trailing input")
    return _to_meta(x, frozenset())


def parse_host(text: str) -> HostProgram:
    toks = _host_tokens(text)
    x, i = _read(toks, 0)
    if i != len(toks):
        raise HostSyntaxError(toks[i][2], "trailing input")
    if not _is_list(x) or len(x[0]) != 2 or _is_list(x[0][0]) or x[0][0][1] != "emit":
        raise HostSyntaxError(_pos(x), "a host program has the form (emit expr)")
    return HostProgram(_to_meta(x[0][1], frozenset()))


def format_meta(e: MetaExpr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, SymLit):
        return "'" + e.name
    if isinstance(e, Nil):
        return "nil"
    if isinstance(e, Hole):
        return "_"
    if isinstance(e, (VarRef, PrimRef)):
        return e.name
    if isinstance(e, Lambda):
        return "(lambda (%s) %s)" % (e.param, format_meta(e.body))
    if isinstance(e, Fix):
        return "(fix %s)" % format_meta(e.fn)
    if isinstance(e, If):
        return "(if %s %s %s)" % (format_meta(e.cond), format_meta(e.then), format_meta(e.else_))
    if isinstance(e, BinPrim):
        return "(%s %s %s)" % (e.op, format_meta(e.left), format_meta(e.right))
    if isinstance(e, QuoteA):
        return "(quoteA %s)" % json.dumps(src.pretty(e.term))
    if isinstance(e, QuoteM):
        return "(quoteM %s)" % json.dumps(m.format_machine(e.code))
    if isinstance(e, Apply):
        args = []
        while isinstance(e, Apply):
            args.append(e.arg)
            e = e.fn
        parts = [format_meta(e)] + [format_meta(a) for a in reversed(args)]
        return "(%s)" % " ".join(parts)
    raise TypeError("not a meta-expression: %r" % (e,))


def format_host(P: HostProgram) -> str:
    return "(emit %s)" % format_meta(P.emit_arg)


# Meta-level programs shipped with the package.

PHI_A = PrimRef("compile_a")
PHI_A_SAFE = PrimRef("compile_a_safe")

CONSTANT_FOLDER_SRC = """
(let ((map (fix (lambda (map) (lambda (f xs)
              (if (null? xs) nil (cons (f (head xs)) (map f (tail xs)))))))))
  (fix (lambda (fold) (lambda (c)
    (let ((d (a_rebuild c (map fold (a_children c))))
          (k (a_kind d)))
      (if (if (= k 'binop) true (= k 'cmp))
          (let ((l (head (a_children d)))
                (r (head (tail (a_children d)))))
            (if (if (= (a_kind l) 'lit) (= (a_kind r) 'lit) false)
                (let ((x (a_int l)) (y (a_int r)) (o (a_op d)))
                  (if (= o '+) (a_mk_int (+ x y))
                  (if (= o '-) (a_mk_int (- x y))
                  (if (= o '*) (a_mk_int (* x y))
                  (if (= o '<) (a_mk_bool (< x y))
                      (a_mk_bool (= x y)))))))
                d))
          d))))))
"""

# The safety-checking compiler written in the host language itself.
SAFE_COMPILER_SRC = "(lambda (c) (if (typecheck_a c) (compile_a c) unsafe))"


def constant_folder() -> MetaExpr:
    return parse_meta(CONSTANT_FOLDER_SRC)


def safe_compiler() -> MetaExpr:
    return parse_meta(SAFE_COMPILER_SRC)
