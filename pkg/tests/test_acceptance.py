"""Acceptance criteria, each run at its stated size and time limit.

Run with ``pytest tests/test_acceptance.py -s -v`` to see one PASS/FAIL line
per criterion.
"""

import json
import time
from pathlib import Path

import pytest

from stagelab import cli
from stagelab import generators as gen
from stagelab import host as h
from stagelab import machine as m
from stagelab import staged_source as s
from stagelab.embedding import (check_realizable, check_safety_preserving,
                                check_semantics_preserving, check_stage_preserving,
                                embed_stage, folder_pipeline)

from oracles import OracleError, as_machine_value, big_step, fold, hand_compile, types_of

SEED = 7
CORPUS = Path(__file__).resolve().parent.parent / "corpora" / "escapes.corpus"


def verdict(n, what, ok, elapsed, limit):
    within = limit is None or elapsed < limit
    passed = ok and within
    budget = "" if limit is None else " (limit %.0f s)" % limit
    print("\n[%s] criterion %d: %s -- %.2f s%s" % ("PASS" if passed else "FAIL", n, what,
                                                   elapsed, budget))
    assert ok, "criterion %d: %s" % (n, what)
    assert within, "criterion %d took %.2f s, limit %.0f s" % (n, elapsed, limit)


@pytest.fixture(scope="module")
def corpus():
    return gen.generate_corpus(1000, seed=SEED)


def test_criterion_1_kernel_of_escape_corpus(capsys):
    t0 = time.perf_counter()
    status = cli.main(["--format", "json", "kernel", str(CORPUS), "a"])
    elapsed = time.perf_counter() - t0
    data = json.loads(capsys.readouterr().out)
    classes = [sorted(c["members"]) for c in data["classes"]]
    expected = [sorted(["x + 2", "x + ~(1+1)", "x + ~(1+(2-1))"]), sorted(["y + 2", "y + ~(4-2)"])]
    with capsys.disabled():
        verdict(1, "exactly 2 kernel classes with the expected members",
                status == 0 and classes == expected and data["unmapped"] == [], elapsed, 1)


def test_criterion_2_stage_preservation(corpus, capsys):
    t0 = time.perf_counter()
    r = check_stage_preserving("stage", corpus)
    elapsed = time.perf_counter() - t0
    with capsys.disabled():
        verdict(2, "%d terms, %d related pairs, %d violations"
                % (len(corpus), r.pairs_checked, r.stage.failed),
                len(corpus) >= 1000 and r.pairs_checked > 0 and r.stage.failed == 0 and r.ok,
                elapsed, 30)


def test_criterion_3_semantics_preservation(corpus, capsys):
    t0 = time.perf_counter()
    r = check_semantics_preserving("stage", corpus)
    elapsed = time.perf_counter() - t0
    with capsys.disabled():
        verdict(3, "%d/%d terms observationally equivalent"
                % (r.semantics.passed, len(corpus)),
                r.semantics.passed == len(corpus) and r.semantics.failed == 0, elapsed, 60)


def test_criterion_4_interpreter_equation(capsys):
    progs = gen.generate_machine_programs(200, seed=SEED)
    t0 = time.perf_counter()
    bad = [c for c in progs if h.compile_u(h.interp_program(h.QuoteM(c))) != m.Code(c)]
    elapsed = time.perf_counter() - t0
    with capsys.disabled():
        verdict(4, "%d machine programs, %d violations" % (len(progs), len(bad)),
                len(progs) >= 100 and not bad, elapsed, 5)


def test_criterion_5_safety_biconditional(capsys):
    pairs = gen.generate_safety_corpus(1000, seed=SEED)
    terms = [t for t, _ in pairs]
    t0 = time.perf_counter()
    r = check_safety_preserving(terms)
    elapsed = time.perf_counter() - t0
    ill = sum(1 for t in terms if not types_of(t))
    with capsys.disabled():
        verdict(5, "%d terms (%d ill-typed), %d violations" % (len(terms), ill, r.safety.failed),
                r.safety.failed == 0 and r.ok and 400 <= ill <= 600, elapsed, 30)


def _raising(oracle):
    def run(x):
        try:
            return oracle(x)
        except OracleError as exc:
            raise ValueError(str(exc)) from None
    return run


def test_criterion_6_realizability(capsys):
    samples = gen.generate_corpus(150, seed=SEED)
    t0 = time.perf_counter()
    folder = check_realizable(h.constant_folder(), _raising(fold), samples, folder_pipeline(),
                              name="constant_folder")
    phi = check_realizable(h.PHI_A, _raising(hand_compile), samples, h.INTERPRETER,
                           name="compile_a")
    elapsed = time.perf_counter() - t0
    with capsys.disabled():
        verdict(6, "folder %d/%d, compile_a %d/%d (skipped %d), 0 violations required"
                % (folder.passed, len(samples), phi.passed, len(samples), phi.skipped),
                folder.failed == phi.failed == 0 and folder.passed >= 100 and phi.passed >= 100,
                elapsed, 10)


def test_criterion_7_bottom_and_singletons(capsys):
    loop = h.parse_host("(emit ((fix (lambda (f) (lambda (x) (f x)))) 0))")
    t0 = time.perf_counter()
    bottoms = [h.compile_u(loop, fuel) is m.Bottom for fuel in (10**3, 10**4, 10**5)]
    outcomes = [m.Unsafe, m.Bottom, m.Error("a")]
    table = [m.obs_equiv(a, b) == (i == j)
             for i, a in enumerate(outcomes) for j, b in enumerate(outcomes)]
    elapsed = time.perf_counter() - t0
    with capsys.disabled():
        verdict(7, "Bottom at 3 fuels: %s; cross table %d/9" % (all(bottoms), sum(table)),
                all(bottoms) and len(table) == 9 and all(table), elapsed, 5)


def test_criterion_8_big_step_agrees_with_machine(capsys):
    safe = [t for t, ok in gen.generate_safety_corpus(2400, seed=SEED) if ok][:1000]
    t0 = time.perf_counter()
    checked, bad = 0, []
    for t in safe:
        out = s.compile_a(t)
        suite = m.default_suite(sorted(s.free_vars(t)))
        for env in suite:
            try:
                expected = m.Value(as_machine_value(big_step(t, env)))
            except OracleError:
                bad.append(t)
                break
            if out.kind != "code" or m.run_machine(out.code, env) != expected:
                bad.append(t)
                break
        checked += 1
    elapsed = time.perf_counter() - t0
    with capsys.disabled():
        verdict(8, "%d safe terms over the default suite, %d violations" % (checked, len(bad)),
                checked >= 1000 and not bad, elapsed, 60)


def test_criterion_9_determinism(capsys):
    argv = ["--format", "json", "--seed", str(SEED), "check", "all", "--generate", "1000"]
    t0 = time.perf_counter()
    first = cli.main(argv), capsys.readouterr().out
    second = cli.main(argv), capsys.readouterr().out
    elapsed = time.perf_counter() - t0
    with capsys.disabled():
        verdict(9, "two seeded full check runs byte-identical (%d bytes), status %d"
                % (len(first[1]), first[0]),
                first == second and first[0] == 0 and first[1].encode() == second[1].encode(),
                elapsed, None)
