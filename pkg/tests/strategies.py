"""Hypothesis strategies for source terms and machine programs."""

from hypothesis import strategies as st

from stagelab import machine as m
from stagelab.staged_source import BinOp, BoolLit, Cmp, Escape, If, Lit, Var

VARS = ("x", "y", "z")

ints = st.integers(-50, 50)


def _tree(closed):
    leaves = [ints.map(Lit), st.booleans().map(BoolLit)]
    if not closed:
        leaves.append(st.sampled_from(VARS).map(Var))

    def extend(kids):
        return st.one_of(
            st.builds(BinOp, st.sampled_from(["+", "-", "*"]), kids, kids),
            st.builds(Cmp, st.sampled_from(["<", "="]), kids, kids),
            st.builds(If, kids, kids, kids),
            st.builds(Escape, closed_terms),
        )
    return st.recursive(st.one_of(*leaves), extend, max_leaves=12)


closed_terms = st.deferred(lambda: _tree(True))
terms = _tree(False)


@st.composite
def machine_code(draw, max_len=12):
    n = draw(st.integers(0, max_len))
    instrs = []
    for pc in range(n):
        room = n - pc - 1
        kind = draw(st.sampled_from(["PUSHI", "LOADV", "JMP", "JMPZ", "IADD", "ISUB", "IMUL",
                                     "ILT", "IEQ", "TRAP"]))
        if kind == "PUSHI":
            instrs.append(m.PUSHI(draw(ints)))
        elif kind == "LOADV":
            instrs.append(m.LOADV(draw(st.sampled_from(VARS))))
        elif kind in ("JMP", "JMPZ"):
            instrs.append(m.Instr(kind, draw(st.integers(0, room))))
        else:
            instrs.append(m.Instr(kind))
    return m.MachineCode(tuple(instrs))


envs = st.fixed_dictionaries({v: ints for v in VARS})
