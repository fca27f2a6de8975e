"""The machine language: a small stack machine every compiler targets.

Programs are flat instruction sequences with relative forward jumps, which
keeps compiled output canonical so that two compilers' outputs can be
compared with plain structural equality.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

DEFAULT_FUEL = 100_000
SUITE_VALUES = (-3, -1, 0, 1, 2, 7, 100)
SUITE_CAP = 64

IDENT = re.compile(r"[a-zA-Z_][a-zA-Z0-9_]*\Z")

NULLARY = frozenset({"IADD", "ISUB", "IMUL", "ILT", "IEQ", "TRAP"})
INT_OPERAND = frozenset({"PUSHI"})
NAME_OPERAND = frozenset({"LOADV"})
JUMPS = frozenset({"JMP", "JMPZ"})
MNEMONICS = NULLARY | INT_OPERAND | NAME_OPERAND | JUMPS


class MachineError(ValueError):
    pass


class MachineParseError(MachineError):
    def __init__(self, line, message):
        super().__init__("line %d: %s" % (line, message))
        self.line = line


@dataclass(frozen=True)
class Instr:
    op: str
    arg: int | str | None = None

    def __post_init__(self):
        op, arg = self.op, self.arg
        if op not in MNEMONICS:
            raise MachineError("unknown mnemonic %r" % (op,))
        if op in NULLARY:
            if arg is not None:
                raise MachineError("%s takes no operand" % op)
        elif op in NAME_OPERAND:
            if not isinstance(arg, str) or not IDENT.match(arg):
                raise MachineError("%s needs an identifier, got %r" % (op, arg))
        else:
            if type(arg) is not int:
                raise MachineError("%s needs an integer, got %r" % (op, arg))
            if op in JUMPS and arg < 0:
                raise MachineError("%s offset must be non-negative" % op)

    def __str__(self):
        return self.op if self.arg is None else "%s %s" % (self.op, self.arg)


def PUSHI(n):
    return Instr("PUSHI", n)


def LOADV(name):
    return Instr("LOADV", name)


def JMP(d):
    return Instr("JMP", d)


def JMPZ(d):
    return Instr("JMPZ", d)


IADD = Instr("IADD")
ISUB = Instr("ISUB")
IMUL = Instr("IMUL")
ILT = Instr("ILT")
IEQ = Instr("IEQ")
TRAP = Instr("TRAP")


@dataclass(frozen=True)
class MachineCode:
    instrs: tuple[Instr, ...] = ()

    def __post_init__(self):
        instrs = tuple(self.instrs)
        object.__setattr__(self, "instrs", instrs)
        n = len(instrs)
        for pc, ins in enumerate(instrs):
            if not isinstance(ins, Instr):
                raise MachineError("not an instruction: %r" % (ins,))
            if ins.op in JUMPS and pc + 1 + ins.arg > n:
                raise MachineError(
                    "%s at %d jumps past the end of a %d-instruction program"
                    % (ins, pc, n))

    def __len__(self):
        return len(self.instrs)

    def __iter__(self):
        return iter(self.instrs)

    def __add__(self, other):
        return MachineCode(self.instrs + tuple(other.instrs))

    def free_names(self):
        return sorted({i.arg for i in self.instrs if i.op == "LOADV"})

    def __str__(self):
        return format_machine(self)


# Compiler outcomes.  Every compiler in the package is total into this type.

class CompiledProgram:
    kind: str = ""


@dataclass(frozen=True)
class Code(CompiledProgram):
    code: MachineCode
    kind = "code"


@dataclass(frozen=True)
class _Unsafe(CompiledProgram):
    kind = "unsafe"

    def __repr__(self):
        return "Unsafe"


@dataclass(frozen=True)
class _Bottom(CompiledProgram):
    kind = "bottom"

    def __repr__(self):
        return "Bottom"


@dataclass(frozen=True)
class Error(CompiledProgram):
    message: str
    kind = "error"


Unsafe = _Unsafe()
Bottom = _Bottom()


def describe(outcome: CompiledProgram) -> str:
    """Render an outcome the way the CLI prints it."""
    if isinstance(outcome, Code):
        return format_machine(outcome.code)
    if isinstance(outcome, _Unsafe):
        return "UNSAFE"
    if isinstance(outcome, _Bottom):
        return "BOTTOM"
    return "ERROR(%s)" % outcome.message


# Run results.

class RunResult:
    pass


@dataclass(frozen=True)
class Value(RunResult):
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Trapped(RunResult):
    # The reason is diagnostic only; all traps are the same observation.
    reason: str = field(default="", compare=False)

    def __str__(self):
        return "TRAP" + (" (%s)" % self.reason if self.reason else "")


@dataclass(frozen=True)
class _FuelOut(RunResult):
    def __str__(self):
        return "FUEL"


FuelExhaustedResult = _FuelOut()


_ARITH = {
    "IADD": lambda a, b: a + b,
    "ISUB": lambda a, b: a - b,
    "IMUL": lambda a, b: a * b,
    "ILT": lambda a, b: 1 if a < b else 0,
    "IEQ": lambda a, b: 1 if a == b else 0,
}


def run_machine(code: MachineCode, env: Mapping[str, int], fuel: int = DEFAULT_FUEL) -> RunResult:
    if fuel < 1:
        raise ValueError("fuel must be positive")
    instrs = code.instrs
    n = len(instrs)
    stack: list[int] = []
    pc = 0
    steps = 0
    while pc < n:
        if steps == fuel:
            return FuelExhaustedResult
        steps += 1
        ins = instrs[pc]
        op = ins.op
        pc += 1
        if op == "PUSHI":
            stack.append(ins.arg)
        elif op == "LOADV":
            if ins.arg not in env:
                return Trapped("unbound variable %s" % ins.arg)
            stack.append(env[ins.arg])
        elif op in _ARITH:
            if len(stack) < 2:
                return Trapped("stack underflow at %s" % op)
            b = stack.pop()
            a = stack.pop()
            stack.append(_ARITH[op](a, b))
        elif op == "JMP":
            pc += ins.arg
        elif op == "JMPZ":
            if not stack:
                return Trapped("stack underflow at JMPZ")
            if stack.pop() == 0:
                pc += ins.arg
        else:
            return Trapped()
    if not stack:
        return Trapped("empty stack at end of program")
    return Value(stack[-1])


# Observational equivalence.

def default_suite(names: Iterable[str]) -> list[dict[str, int]]:
    """Deterministic input environments for the given free variables.

    Every variable ranges over ``SUITE_VALUES``; when the full cross product
    exceeds ``SUITE_CAP`` environments, evenly spaced points of it are kept.
    """
    names = sorted(set(names))
    k = len(SUITE_VALUES)
    total = k ** len(names)
    if total <= SUITE_CAP:
        return [dict(zip(names, combo))
                for combo in itertools.product(SUITE_VALUES, repeat=len(names))]
    envs = []
    for j in range(SUITE_CAP):
        index = j * total // SUITE_CAP
        env = {}
        for name in reversed(names):
            index, digit = divmod(index, k)
            env[name] = SUITE_VALUES[digit]
        envs.append(env)
    return envs


def obs_equiv(a: CompiledProgram, b: CompiledProgram,
              suite: Sequence[Mapping[str, int]] | None = None,
              fuel: int = DEFAULT_FUEL) -> bool:
    """Approximate program equivalence.

    Non-code outcomes are each their own singleton class.  Two code outcomes
    are equivalent when they produce the same run result on every
    environment of ``suite``; with no suite, ``default_suite`` over the
    union of their free variables is used.
    """
    if not isinstance(a, Code) or not isinstance(b, Code):
        return a.kind == b.kind
    if suite is None:
        suite = default_suite(a.code.free_names() + b.code.free_names())
    if not suite:
        raise ValueError("observational comparison needs a nonempty suite")
    return all(run_machine(a.code, env, fuel) == run_machine(b.code, env, fuel)
               for env in suite)


# Text format.

def format_machine(code: MachineCode) -> str:
    return "\n".join(str(i) for i in code.instrs)


def parse_machine(text: str) -> MachineCode:
    instrs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        op, operands = parts[0], parts[1:]
        if op not in MNEMONICS:
            raise MachineParseError(lineno, "unknown mnemonic %r" % op)
        want = 0 if op in NULLARY else 1
        if len(operands) != want:
            raise MachineParseError(
                lineno, "%s expects %d operand(s), got %d" % (op, want, len(operands)))
        arg = None
        if want:
            arg = operands[0]
            if op not in NAME_OPERAND:
                try:
                    arg = int(arg)
                except ValueError:
                    raise MachineParseError(lineno, "malformed integer %r" % arg) from None
        try:
            instrs.append(Instr(op, arg))
        except MachineError as exc:
            raise MachineParseError(lineno, str(exc)) from None
    try:
        return MachineCode(tuple(instrs))
    except MachineError as exc:
        raise MachineParseError(len(text.splitlines()) or 1, str(exc)) from None
