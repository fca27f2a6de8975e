import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stagelab import machine as m
from stagelab.machine import (IADD, IEQ, ILT, JMP, JMPZ, LOADV, PUSHI, TRAP, Bottom, Code,
                              Error, MachineCode, Trapped, Unsafe, Value, obs_equiv,
                              parse_machine, format_machine, run_machine)

from oracles import trace_jumps
from strategies import envs, machine_code


def code(*instrs):
    return MachineCode(instrs)


def test_push_add():
    assert run_machine(code(PUSHI(2), PUSHI(3), IADD), {}, 100) == Value(5)


def test_loadv_add():
    assert run_machine(code(LOADV("x"), PUSHI(2), IADD), {"x": 40}, 100) == Value(42)


def test_jmpz_taken():
    prog = [PUSHI(0), JMPZ(1), PUSHI(7), PUSHI(9)]
    # Hand trace: positions 0, 1, 3 -- the PUSHI 7 is skipped.
    assert trace_jumps(prog) == ([0, 1, 3], [9])
    assert run_machine(code(*prog), {}, 100) == Value(9)


def test_jmpz_not_taken_and_jmp():
    prog = code(PUSHI(1), JMPZ(2), PUSHI(7), JMP(1), PUSHI(9))
    assert run_machine(prog, {}, 100) == Value(7)


@pytest.mark.parametrize("prog", [
    code(TRAP),
    code(IADD),
    code(PUSHI(1), IADD),
    code(JMPZ(0)),
    code(LOADV("nope")),
    code(),
])
def test_traps(prog):
    assert isinstance(run_machine(prog, {}, 100), Trapped)


def test_trap_reasons_do_not_distinguish():
    assert run_machine(code(TRAP), {}, 10) == run_machine(code(IADD), {}, 10)
    assert "unbound variable q" in str(run_machine(code(LOADV("q")), {}, 10))


def test_comparisons_push_bits():
    assert run_machine(code(PUSHI(1), PUSHI(2), ILT), {}, 10) == Value(1)
    assert run_machine(code(PUSHI(2), PUSHI(1), ILT), {}, 10) == Value(0)
    assert run_machine(code(PUSHI(4), PUSHI(4), IEQ), {}, 10) == Value(1)


def test_fuel_counts_instruction_steps():
    prog = code(PUSHI(1), PUSHI(2), IADD)
    assert run_machine(prog, {}, 3) == Value(3)
    assert run_machine(prog, {}, 2) is m.FuelExhaustedResult


def test_jump_past_end_rejected():
    with pytest.raises(m.MachineError):
        code(JMP(1))
    code(PUSHI(0), JMP(0))
    code(JMPZ(1), PUSHI(1))


def test_bad_operands_rejected():
    with pytest.raises(m.MachineError):
        m.Instr("JMP", -1)
    with pytest.raises(m.MachineError):
        m.Instr("LOADV", "9x")
    with pytest.raises(m.MachineError):
        m.Instr("PUSHI", True)


# Observational equivalence.

def test_unsafe_is_its_own_class():
    assert obs_equiv(Unsafe, Unsafe)
    assert not obs_equiv(Unsafe, Code(code(TRAP)))


@pytest.mark.parametrize("a", [Unsafe, Bottom, Error("x")])
@pytest.mark.parametrize("b", [Unsafe, Bottom, Error("y")])
def test_singleton_cross_table(a, b):
    assert obs_equiv(a, b) == (a.kind == b.kind)


def test_commuted_addition_equivalent_on_suite():
    a = Code(code(PUSHI(2), LOADV("x"), IADD))
    b = Code(code(LOADV("x"), PUSHI(2), IADD))
    suite = [{"x": -3}, {"x": 0}, {"x": 5}]
    assert obs_equiv(a, b, suite, 100)


def test_obs_equiv_distinguishes():
    a = Code(code(LOADV("x"), PUSHI(2), IADD))
    b = Code(code(LOADV("x"), PUSHI(3), IADD))
    assert not obs_equiv(a, b)
    assert not obs_equiv(a, Error("boom"))


def test_empty_suite_rejected():
    with pytest.raises(ValueError):
        obs_equiv(Code(code(PUSHI(1))), Code(code(PUSHI(1))), [], 10)


def test_default_suite():
    assert m.default_suite([]) == [{}]
    assert len(m.default_suite(["x"])) == 7
    assert len(m.default_suite(["x", "y"])) == 49
    big = m.default_suite(["x", "y", "z"])
    assert len(big) == 64
    assert big[0] == {"x": -3, "y": -3, "z": -3}
    assert len({tuple(sorted(e.items())) for e in big}) == 64
    assert m.default_suite(["y", "x", "z"]) == big


# Text format.

def test_parse_simple():
    assert parse_machine("PUSHI 2\nIADD") == code(PUSHI(2), IADD)


def test_parse_comments_and_blanks():
    assert parse_machine("# header\n\nPUSHI -4\n  LOADV x_1  \n") == code(PUSHI(-4), LOADV("x_1"))


@pytest.mark.parametrize("text, line", [
    ("FOO 3", 1),
    ("PUSHI 1\nPUSHI x", 2),
    ("IADD 1", 1),
    ("PUSHI", 1),
    ("LOADV 3x", 1),
    ("JMP -1", 1),
])
def test_parse_errors_name_line(text, line):
    with pytest.raises(m.MachineParseError) as info:
        parse_machine(text)
    assert info.value.line == line
    assert "line %d" % line in str(info.value)


def test_parse_rejects_jump_out_of_range():
    with pytest.raises(m.MachineParseError):
        parse_machine("JMP 3\nPUSHI 1")


@given(machine_code())
def test_round_trip(c):
    assert parse_machine(format_machine(c)) == c


@given(machine_code(), envs, st.integers(1, 50))
def test_deterministic(c, env, fuel):
    assert run_machine(c, env, fuel) == run_machine(c, env, fuel)


@given(machine_code(), envs, st.integers(1, 30), st.integers(0, 50))
def test_fuel_monotone(c, env, fuel, extra):
    r = run_machine(c, env, fuel)
    if r is not m.FuelExhaustedResult:
        assert run_machine(c, env, fuel + extra) == r


@settings(max_examples=60)
@given(machine_code(6), machine_code(6), machine_code(6))
def test_obs_equiv_is_an_equivalence(a, b, c):
    suite = [{"x": 1, "y": 0, "z": -2}, {"x": 0, "y": 5, "z": 0}]
    A, B, C = Code(a), Code(b), Code(c)
    assert obs_equiv(A, A, suite)
    assert obs_equiv(A, B, suite) == obs_equiv(B, A, suite)
    if obs_equiv(A, B, suite) and obs_equiv(B, C, suite):
        assert obs_equiv(A, C, suite)
