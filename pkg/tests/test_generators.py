import random

from stagelab import generators as gen
from stagelab import machine as m
from stagelab import staged_source as s

from oracles import big_step, types_of


def depth(t):
    return 1 + max((depth(c) for c in s.children(t)), default=0)


def test_corpus_is_reproducible():
    assert gen.generate_corpus(300, seed=9) == gen.generate_corpus(300, seed=9)
    assert gen.generate_corpus(300, seed=9) != gen.generate_corpus(300, seed=10)
    assert gen.generate_safety_corpus(100, 3) == gen.generate_safety_corpus(100, 3)
    assert gen.generate_machine_programs(100, 3) == gen.generate_machine_programs(100, 3)


def test_corpus_members_are_programs():
    corpus = gen.generate_corpus(1000, seed=1)
    assert len(corpus) == 1000
    assert all(s.member_LA(t) for t in corpus)


def test_typed_terms_have_their_type_and_depth():
    rng = random.Random(0)
    for _ in range(300):
        ty = rng.choice(["int", "bool"])
        t = gen.gen_typed(rng, ty, 5)
        assert types_of(t) == {ty}
        assert depth(t) <= 5


def test_escape_rewrite_preserves_the_kernel_class():
    rng = random.Random(2)
    for t in gen.generate_corpus(300, seed=2):
        dup = gen.escape_rewrite(rng, t)
        if dup is None:
            continue
        assert dup != t
        assert s.compile_a(dup) == s.compile_a(t)


def test_escape_rewrite_without_literals():
    assert gen.escape_rewrite(random.Random(0), s.Var("x")) is None


def test_rewritten_escape_bodies_evaluate():
    rng = random.Random(5)
    t = s.Lit(2)
    for _ in range(50):
        dup = gen.escape_rewrite(rng, t)
        assert isinstance(dup, s.Escape) and big_step(dup, {}) == 2


def test_corpus_contains_nontrivial_classes():
    corpus = gen.generate_corpus(1000, seed=7)
    outs = [s.compile_a(t) for t in corpus]
    shared = sum(1 for i in range(1, len(outs)) if outs[i] == outs[i - 1] and corpus[i] != corpus[i - 1])
    assert shared > 200


def test_safety_corpus_labels_match_the_oracle():
    pairs = gen.generate_safety_corpus(1000, seed=4)
    for t, constructed_safe in pairs:
        assert bool(types_of(t)) == constructed_safe
    ill = sum(1 for _, ok in pairs if not ok)
    assert 400 <= ill <= 600


def test_machine_programs_are_valid():
    for code in gen.generate_machine_programs(200, seed=1, max_len=8):
        assert len(code.instrs) <= 8
        assert m.parse_machine(m.format_machine(code)) == code
