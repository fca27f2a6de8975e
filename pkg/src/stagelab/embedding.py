"""Embedding staged source programs into the host language, and checkers for
the properties an embedding should have.

``embed_stage(p)`` is ``I_M[Phi_A(<p>)]``: the host program that compiles
``<p>`` with the source compiler at host compile time and emits the result.
``embed_safe`` does the same through the safety-checking compiler.  Because
both run the source compiler entirely inside the host's compile-time
evaluation, any two programs the source compiler identifies are identified
again after embedding.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

from . import host as h
from . import machine as m
from . import staged_source as src
from .machine import DEFAULT_FUEL

MAX_WITNESSES = 20


def embed_stage(p) -> h.HostProgram:
    return h.interp_program(h.Apply(h.PHI_A, h.QuoteA(_term(p))))


def embed_safe(p) -> h.HostProgram:
    return h.interp_program(h.Apply(h.PHI_A_SAFE, h.QuoteA(_term(p))))


def _term(p):
    return src.parse_source(p) if isinstance(p, str) else p


@dataclass(frozen=True)
class Embedding:
    name: str
    build: Callable
    # The source-side compiler whose kernel and outputs the embedding answers to.
    source_compiler: Callable


EMBEDDINGS = {
    "stage": Embedding("stage", embed_stage, src.compile_a),
    "safe": Embedding("safe", embed_safe, src.compile_a_safe),
}


def _embedding(e):
    return EMBEDDINGS[e] if isinstance(e, str) else e


@dataclass
class Tally:
    passed: int = 0
    failed: int = 0
    witnesses: list = field(default_factory=list)

    def fail(self, witness):
        self.failed += 1
        if len(self.witnesses) < MAX_WITNESSES:
            self.witnesses.append(witness)

    @property
    def ok(self):
        return self.failed == 0


@dataclass
class EmbeddingReport:
    check: str
    embedding: str
    corpus_size: int
    fuel: int
    pairs_checked: int = 0
    semantics: Tally | None = None
    stage: Tally | None = None
    injectivity: Tally | None = None
    safety: Tally | None = None
    # source judgment -> target outcome kind -> count
    safety_table: dict | None = None
    plain_unsafe: Tally | None = None

    @property
    def ok(self):
        return all(t.ok for t in (self.semantics, self.stage, self.injectivity,
                                  self.safety, self.plain_unsafe) if t is not None)

    def to_dict(self):
        d = asdict(self)
        d["ok"] = self.ok
        return d


def _witness(i, p, **extra):
    w = {"index": i, "program": src.pretty(p)}
    w.update(extra)
    return w


def check_semantics_preserving(e, corpus: Sequence, suite=None, fuel=DEFAULT_FUEL) -> EmbeddingReport:
    """Source and embedded compilations must agree observationally, per program."""
    e = _embedding(e)
    corpus = [_term(p) for p in corpus]
    tally = Tally()
    for i, p in enumerate(corpus):
        a = e.source_compiler(p, fuel)
        u = h.compile_u(e.build(p), fuel)
        if m.obs_equiv(a, u, suite, fuel):
            tally.passed += 1
        else:
            tally.fail(_witness(i, p, source=m.describe(a), embedded=m.describe(u)))
    return EmbeddingReport("semantics", e.name, len(corpus), fuel,
                           pairs_checked=len(corpus), semantics=tally)


def _pairs(k):
    return k * (k - 1) // 2


def check_stage_preserving(e, corpus: Sequence, fuel=DEFAULT_FUEL) -> EmbeddingReport:
    """Every pair in the source compiler's kernel must stay in the host compiler's kernel.

    Pairs are counted, not enumerated: within one source kernel class of size
    k whose embedded outputs split into groups of sizes k_j, exactly
    C(k,2) - sum C(k_j,2) pairs violate the implication.
    """
    e = _embedding(e)
    corpus = [_term(p) for p in corpus]
    classes: dict = {}
    for i, p in enumerate(corpus):
        classes.setdefault(e.source_compiler(p, fuel), []).append(i)
    stage = Tally()
    pairs = 0
    for members in classes.values():
        groups: dict = {}
        for i in members:
            groups.setdefault(h.compile_u(e.build(corpus[i]), fuel), []).append(i)
        total = _pairs(len(members))
        good = sum(_pairs(len(g)) for g in groups.values())
        pairs += total
        stage.passed += good
        if total != good:
            stage.failed += total - good
            firsts = [g[0] for g in groups.values()]
            for j in firsts[1:MAX_WITNESSES + 1]:
                if len(stage.witnesses) < MAX_WITNESSES:
                    stage.witnesses.append(
                        {"pair": [firsts[0], j],
                         "programs": [src.pretty(corpus[firsts[0]]), src.pretty(corpus[j])]})
    return EmbeddingReport("stage", e.name, len(corpus), fuel, pairs_checked=pairs,
                           stage=stage, injectivity=check_injective(e, corpus))


def check_injective(e, corpus: Sequence) -> Tally:
    """Distinct programs must embed to distinct host programs."""
    e = _embedding(e)
    seen: dict = {}
    tally = Tally()
    for i, p in enumerate(corpus):
        p = _term(p)
        img = e.build(p)
        if img in seen and seen[img][1] != p:
            tally.fail({"pair": [seen[img][0], i]})
        else:
            tally.passed += 1
            seen.setdefault(img, (i, p))
    return tally


def check_safety_preserving(corpus: Sequence, fuel=DEFAULT_FUEL) -> EmbeddingReport:
    """The safe embedding compiles to ``Unsafe`` exactly for the programs the
    safety judgment rejects, and exactly where the safety-checking source
    compiler says ``Unsafe``.

    Also records the plain embedding against the plain compiler: it is
    safety-preserving too, but only vacuously, since the plain compiler never
    outputs ``Unsafe``.
    """
    corpus = [_term(p) for p in corpus]
    safety, plain_unsafe = Tally(), Tally()
    table: dict = {"safe": {}, "notsafe": {}}
    for i, p in enumerate(corpus):
        judged_unsafe = not src.typecheck(p)
        source_unsafe = src.compile_a_safe(p, fuel) is m.Unsafe
        target = h.compile_u(embed_safe(p), fuel)
        row = table["notsafe" if judged_unsafe else "safe"]
        row[target.kind] = row.get(target.kind, 0) + 1
        if judged_unsafe == source_unsafe == (target is m.Unsafe):
            safety.passed += 1
        else:
            safety.fail(_witness(i, p, judged_unsafe=judged_unsafe,
                                 source=m.describe(src.compile_a_safe(p, fuel)),
                                 embedded=m.describe(target)))
        plain_src = src.compile_a(p, fuel) is m.Unsafe
        plain_tgt = h.compile_u(embed_stage(p), fuel) is m.Unsafe
        if plain_src == plain_tgt:
            plain_unsafe.passed += 1
        else:
            plain_unsafe.fail(_witness(i, p))
    return EmbeddingReport("safety", "safe", len(corpus), fuel, pairs_checked=len(corpus),
                           safety=safety, safety_table=table, plain_unsafe=plain_unsafe)


@dataclass
class RealizabilityReport:
    function: str
    samples: int
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    fuel: int = DEFAULT_FUEL
    witnesses: list = field(default_factory=list)
    skipped_samples: list = field(default_factory=list)

    @property
    def ok(self):
        return self.failed == 0

    def to_dict(self):
        d = asdict(self)
        d["ok"] = self.ok
        return d


def _show_code(x):
    if isinstance(x, m.MachineCode):
        return m.format_machine(x)
    if isinstance(x, m.CompiledProgram):
        return m.describe(x)
    return src.pretty(x)


def check_realizable(F: h.MetaExpr, oracle: Callable, samples: Sequence, P: h.HostProgram,
                     fuel=DEFAULT_FUEL, name="F") -> RealizabilityReport:
    """Check that ``F`` computes ``oracle`` inside the host compiler's kernel.

    For each sample ``x`` with ``y = oracle(x)``, the program template ``P``
    run on ``F(<x>)`` must compile to exactly what ``P`` run on ``<y>``
    compiles to.  Samples where the oracle raises, or returns something
    without a code, are skipped and listed.
    """
    PF = h.apply_program(P, F)
    report = RealizabilityReport(name, len(samples), fuel=fuel)
    for i, x in enumerate(samples):
        try:
            y_code = h.quote(oracle(x))
        except Exception as exc:  # the oracle is user code; anything goes
            report.skipped += 1
            report.skipped_samples.append({"index": i, "reason": str(exc)})
            continue
        left = h.compile_u(h.instantiate(PF, h.quote(x)), fuel)
        right = h.compile_u(h.instantiate(P, y_code), fuel)
        if left == right:
            report.passed += 1
        else:
            report.failed += 1
            if len(report.witnesses) < MAX_WITNESSES:
                report.witnesses.append({"index": i, "sample": _show_code(x),
                                         "via_F": m.describe(left),
                                         "via_oracle": m.describe(right)})
    return report


# The realizability instances the package ships.

def folder_pipeline() -> h.HostProgram:
    """``P[c] = emit(compile_a(c))``: source code in, compiled code out."""
    return h.HostProgram(h.Apply(h.PHI_A, h.Hole()))


def realizability_suite(samples: Sequence, fuel=DEFAULT_FUEL):
    """Run the shipped instances over source-term samples.

    * the host-language constant folder against the Python folder;
    * the source compiler primitive against the source compiler;
    * the host-language safety-checking compiler against its Python twin.
    """
    samples = [_term(p) for p in samples]

    def outcome_or_raise(compile_fn):
        def run(x):
            out = compile_fn(x, fuel)
            if isinstance(out, m.Error):
                raise ValueError(out.message)
            return out
        return run

    return [
        check_realizable(h.constant_folder(), src.fold_constants, samples,
                         folder_pipeline(), fuel, name="constant_folder"),
        check_realizable(h.PHI_A, outcome_or_raise(src.compile_a), samples,
                         h.INTERPRETER, fuel, name="compile_a"),
        check_realizable(h.safe_compiler(), outcome_or_raise(src.compile_a_safe), samples,
                         h.INTERPRETER, fuel, name="compile_a_safe"),
    ]
