"""Seeded random corpora: source terms, escape-rewritten duplicates, ill-typed
terms, and machine programs.  A fixed seed always yields the same corpus."""

from __future__ import annotations

import random

from . import machine as m
from .staged_source import (ARITH_OPS, CMP_OPS, BinOp, BoolLit, Cmp, Escape, If, Lit, Var,
                            children)

VARS = ("x", "y", "z")
MAX_DEPTH = 6


def gen_typed(rng: random.Random, ty: str, depth: int, closed=False):
    """A well-typed term of type ``ty`` ("int" or "bool") at most ``depth`` deep."""
    if depth <= 1 or rng.random() < 0.2:
        if ty == "bool":
            return BoolLit(rng.random() < 0.5)
        if not closed and rng.random() < 0.45:
            return Var(rng.choice(VARS))
        return Lit(rng.randint(-5, 9))
    d = depth - 1
    r = rng.random()
    if r < 0.12:
        return Escape(gen_typed(rng, ty, d, closed=True))
    if r < 0.3:
        return If(gen_typed(rng, "bool", d, closed), gen_typed(rng, ty, d, closed),
                  gen_typed(rng, ty, d, closed))
    if ty == "int":
        return BinOp(rng.choice(ARITH_OPS), gen_typed(rng, "int", d, closed),
                     gen_typed(rng, "int", d, closed))
    return Cmp(rng.choice(CMP_OPS), gen_typed(rng, "int", d, closed),
               gen_typed(rng, "int", d, closed))


def gen_any(rng: random.Random, depth: int, closed=False):
    """A term ignoring types; escape bodies are still closed."""
    if depth <= 1 or rng.random() < 0.2:
        r = rng.random()
        if r < 0.2:
            return BoolLit(rng.random() < 0.5)
        if not closed and r < 0.55:
            return Var(rng.choice(VARS))
        return Lit(rng.randint(-5, 9))
    d = depth - 1
    r = rng.random()
    if r < 0.12:
        return Escape(gen_any(rng, d, closed=True))
    if r < 0.3:
        return If(gen_any(rng, d, closed), gen_any(rng, d, closed), gen_any(rng, d, closed))
    if r < 0.75:
        return BinOp(rng.choice(ARITH_OPS), gen_any(rng, d, closed), gen_any(rng, d, closed))
    return Cmp(rng.choice(CMP_OPS), gen_any(rng, d, closed), gen_any(rng, d, closed))


# Escape-rewrite duplicates: replace a literal by an escape that computes it.

def _expr_for_int(rng, n, nest):
    a = rng.randint(-4, 6)
    shape = rng.randrange(3)
    if shape == 0:
        left, right, op = Lit(a), Lit(n - a), "+"
    elif shape == 1:
        left, right, op = Lit(n + a), Lit(a), "-"
    else:
        left, right, op = Lit(n), Lit(1), "*"
    if nest > 0 and rng.random() < 0.5:
        # A literal inside the escape may itself be spelled out.
        if rng.random() < 0.5:
            left = _expr_for_int(rng, left.value, nest - 1)
        else:
            right = _expr_for_int(rng, right.value, nest - 1)
    if nest > 0 and rng.random() < 0.15:
        return Escape(BinOp(op, left, right))
    return BinOp(op, left, right)


def _expr_for_bool(rng, b):
    a = rng.randint(-4, 6)
    if rng.random() < 0.5:
        return Cmp("<", Lit(a), Lit(a + 1 if b else a))
    return Cmp("=", Lit(a), Lit(a if b else a + 2))


def _literal_paths(t, path=()):
    if isinstance(t, (Lit, BoolLit)):
        yield path
    for i, c in enumerate(children(t)):
        yield from _literal_paths(c, path + (i,))


def _replace(t, path, new):
    if not path:
        return new
    kids = list(children(t))
    kids[path[0]] = _replace(kids[path[0]], path[1:], new)
    if isinstance(t, (BinOp, Cmp)):
        return type(t)(t.op, *kids)
    if isinstance(t, If):
        return If(*kids)
    return Escape(*kids)


def escape_rewrite(rng: random.Random, t):
    """Replace one literal of ``t`` by an escape evaluating to the same value.

    Returns ``None`` when ``t`` has no literal.
    """
    paths = list(_literal_paths(t))
    if not paths:
        return None
    path = rng.choice(paths)
    node = t
    for i in path:
        node = children(node)[i]
    if isinstance(node, Lit):
        body = _expr_for_int(rng, node.value, nest=2)
    else:
        body = _expr_for_bool(rng, node.value)
    return _replace(t, path, Escape(body))


def generate_corpus(n: int, seed: int, dup_rate=0.5, untyped_rate=0.1):
    """``n`` source terms with escape-rewritten duplicates mixed in.

    Duplicates land next to the term they were derived from, so nontrivial
    kernel classes are always present.
    """
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        depth = rng.randint(1, MAX_DEPTH)
        if rng.random() < untyped_rate:
            base = gen_any(rng, depth)
        else:
            base = gen_typed(rng, "int" if rng.random() < 0.8 else "bool", depth)
        out.append(base)
        current = base
        while len(out) < n and rng.random() < dup_rate:
            dup = escape_rewrite(rng, current)
            if dup is None:
                break
            out.append(dup)
            current = dup
    return out


def _ill_typed_core(rng, depth):
    d = max(depth - 1, 1)
    shape = rng.randrange(5)
    if shape == 0:
        return BinOp(rng.choice(ARITH_OPS), gen_typed(rng, "int", d), gen_typed(rng, "bool", d))
    if shape == 1:
        return BinOp(rng.choice(ARITH_OPS), gen_typed(rng, "bool", d), gen_typed(rng, "int", d))
    if shape == 2:
        return If(gen_typed(rng, "int", d), gen_typed(rng, "int", d), gen_typed(rng, "int", d))
    if shape == 3:
        return If(gen_typed(rng, "bool", d), gen_typed(rng, "int", d), gen_typed(rng, "bool", d))
    return Cmp(rng.choice(CMP_OPS), gen_typed(rng, "bool", d), gen_typed(rng, "int", d))


def _ill_typed(rng, depth):
    core = _ill_typed_core(rng, depth)
    r = rng.random()
    if r < 0.4:
        return core
    if r < 0.55:
        # Closed cores can be hidden under an escape.
        closed = _ill_typed_closed(rng)
        return BinOp("+", gen_typed(rng, "int", 2), Escape(closed))
    if r < 0.8:
        return BinOp(rng.choice(ARITH_OPS), gen_typed(rng, "int", 3), core)
    return If(gen_typed(rng, "bool", 3), core, gen_typed(rng, "int", 3))


def _ill_typed_closed(rng):
    return BinOp(rng.choice(ARITH_OPS), gen_typed(rng, "int", 2, closed=True),
                 gen_typed(rng, "bool", 2, closed=True))


def generate_safety_corpus(n: int, seed: int, ill_rate=0.5):
    """``n`` terms, about ``ill_rate`` of them ill-typed by construction.

    Returns a list of ``(term, constructed_safe)`` pairs.
    """
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        depth = rng.randint(2, MAX_DEPTH)
        if rng.random() < ill_rate:
            out.append((_ill_typed(rng, depth), False))
        else:
            out.append((gen_typed(rng, "int" if rng.random() < 0.8 else "bool", depth), True))
    return out


def generate_machine_programs(n: int, seed: int, max_len=12):
    rng = random.Random(seed)
    nullary = [m.IADD, m.ISUB, m.IMUL, m.ILT, m.IEQ, m.TRAP]
    progs = []
    for _ in range(n):
        length = rng.randint(0, max_len)
        instrs = []
        for pc in range(length):
            room = length - pc - 1
            r = rng.random()
            if r < 0.3:
                instrs.append(m.PUSHI(rng.randint(-10, 10)))
            elif r < 0.45:
                instrs.append(m.LOADV(rng.choice(VARS)))
            elif r < 0.55:
                instrs.append(m.JMP(rng.randint(0, room)))
            elif r < 0.65:
                instrs.append(m.JMPZ(rng.randint(0, room)))
            else:
                instrs.append(rng.choice(nullary))
        progs.append(m.MachineCode(tuple(instrs)))
    return progs
