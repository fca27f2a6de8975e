"""Kernels of compilers, restricted to a finite corpus.

The kernel of a compiler relates two programs when they compile to the same
target.  Over a corpus it is a partition, and comparing the partitions of
two pipelines shows which one does more work at compile time.  Comparisons
are empirical: a result is consistent with an ordering of staging power on
this corpus, never a proof of it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import host as h
from . import machine as m
from . import staged_source as src
from .embedding import embed_safe, embed_stage
from .machine import DEFAULT_FUEL


def _through_source(compile_fn):
    def run(p, fuel=DEFAULT_FUEL):
        try:
            term = src.parse_source(p) if isinstance(p, str) else p
        except src.SourceSyntaxError as exc:
            return m.Error("syntax error: %s" % exc)
        return compile_fn(term, fuel)
    return run


def _embedded(embed):
    def compile_embedded(term, fuel):
        if not src.escapes_closed(term):
            return m.Error("not a program: escape body has free variables")
        return h.compile_u(embed(term), fuel)
    return compile_embedded


COMPILERS: dict[str, Callable] = {
    "a": _through_source(src.compile_a),
    "a-safe": _through_source(src.compile_a_safe),
    "u": _through_source(_embedded(embed_stage)),
    "u-safe": _through_source(_embedded(embed_safe)),
}


def _compiler(c):
    if callable(c):
        return c
    try:
        return COMPILERS[c]
    except KeyError:
        raise ValueError("unknown compiler %r (choose from %s)"
                         % (c, ", ".join(COMPILERS))) from None


@dataclass
class KernelClass:
    target: m.CompiledProgram
    members: list = field(default_factory=list)


@dataclass
class KernelPartition:
    classes: list = field(default_factory=list)
    # (member, outcome) for members compiling to Bottom or Error.
    unmapped: list = field(default_factory=list)

    def class_of(self):
        """Map each member label to its class index; unmapped members get none."""
        return {mem: i for i, c in enumerate(self.classes) for mem in c.members}

    def to_dict(self):
        return {
            "classes": [{"target": _target_lines(c.target), "members": list(c.members)}
                        for c in self.classes],
            "unmapped": [{"member": mem, "outcome": m.describe(out)}
                         for mem, out in self.unmapped],
        }

    def to_text(self):
        lines = []
        for i, c in enumerate(self.classes, 1):
            lines.append("class %d (%d member%s)" % (i, len(c.members),
                                                    "" if len(c.members) == 1 else "s"))
            lines.append("  target:")
            lines.extend("    " + t for t in _target_lines(c.target) or ["(empty program)"])
            lines.append("  members:")
            lines.extend("    " + mem for mem in c.members)
        lines.append("unmapped (%d)" % len(self.unmapped))
        for mem, out in self.unmapped:
            lines.append("    %s  =>  %s" % (mem, m.describe(out)))
        return "\n".join(lines)


def _target_lines(target):
    if isinstance(target, m.Code):
        return [str(i) for i in target.code.instrs]
    return [m.describe(target)]


def _label(p):
    return p if isinstance(p, str) else src.pretty(p)


def _outcomes(corpus, compiler, fuel):
    fn = _compiler(compiler)
    return [fn(p, fuel) for p in corpus]


def _partition(corpus, outcomes):
    by_target: dict = {}
    part = KernelPartition()
    for p, out in zip(corpus, outcomes):
        if out is m.Bottom or isinstance(out, m.Error):
            part.unmapped.append((_label(p), out))
            continue
        if out not in by_target:
            by_target[out] = KernelClass(out)
            part.classes.append(by_target[out])
        by_target[out].members.append(_label(p))
    return part


def kernel_classes(corpus: Sequence, compiler="a", fuel=DEFAULT_FUEL) -> KernelPartition:
    """Partition ``corpus`` by structural equality of compiled output.

    Classes are ordered by first occurrence.  Members that compile to Bottom
    or Error are kept out of the classes and listed as unmapped.
    """
    return _partition(corpus, _outcomes(corpus, compiler, fuel))


def read_corpus(path) -> list[str]:
    """One program per line; blank lines and ``#`` comment lines are skipped."""
    with open(path, encoding="utf-8") as fh:
        return [ln.strip() for ln in fh if ln.strip() and not ln.strip().startswith("#")]


def _block_ids(outcomes):
    ids, seen = [], {}
    for i, out in enumerate(outcomes):
        if out is m.Bottom or isinstance(out, m.Error):
            ids.append(("unmapped", i))
        else:
            ids.append(seen.setdefault(out, len(seen)))
    return ids


def _violations(corpus, ids_a, ids_b, limit):
    """Pairs related by A but not by B: count and up to ``limit`` witnesses."""
    blocks: dict = {}
    for i, b in enumerate(ids_a):
        blocks.setdefault(b, []).append(i)
    count, witnesses = 0, []
    for members in blocks.values():
        sub: dict = {}
        for i in members:
            sub.setdefault(ids_b[i], []).append(i)
        k = len(members)
        count += k * (k - 1) // 2 - sum(len(g) * (len(g) - 1) // 2 for g in sub.values())
        firsts = [g[0] for g in sub.values()]
        for j in firsts[1:]:
            if len(witnesses) < limit:
                witnesses.append((_label(corpus[firsts[0]]), _label(corpus[j])))
    return count, witnesses


@dataclass
class StagingComparison:
    relation: str  # "equal", "refines", "coarsens" or "incomparable"
    corpus_size: int
    a_not_b: int = 0
    b_not_a: int = 0
    witnesses_a_not_b: list = field(default_factory=list)
    witnesses_b_not_a: list = field(default_factory=list)

    def summary(self):
        phrase = {
            "equal": "the two kernels coincide",
            "refines": "pipeline A's kernel is contained in pipeline B's",
            "coarsens": "pipeline B's kernel is contained in pipeline A's",
            "incomparable": "neither kernel contains the other",
        }[self.relation]
        return "consistent with: %s (corpus of %d)" % (phrase, self.corpus_size)

    def to_dict(self):
        return {"relation": self.relation, "corpus_size": self.corpus_size,
                "a_not_b": self.a_not_b, "b_not_a": self.b_not_a,
                "witnesses_a_not_b": [list(w) for w in self.witnesses_a_not_b],
                "witnesses_b_not_a": [list(w) for w in self.witnesses_b_not_a],
                "summary": self.summary()}


def compare_staging(corpus: Sequence, pipeline_a="a", pipeline_b="u", fuel=DEFAULT_FUEL,
                    max_witnesses=10) -> StagingComparison:
    """Compare the corpus kernels of two pipelines.

    "refines" means every pair pipeline A identifies is identified by
    pipeline B as well: B stages at least as much as A on this corpus.
    """
    ids_a = _block_ids(_outcomes(corpus, pipeline_a, fuel))
    ids_b = _block_ids(_outcomes(corpus, pipeline_b, fuel))
    ab, wab = _violations(corpus, ids_a, ids_b, max_witnesses)
    ba, wba = _violations(corpus, ids_b, ids_a, max_witnesses)
    if ab == 0 and ba == 0:
        relation = "equal"
    elif ab == 0:
        relation = "refines"
    elif ba == 0:
        relation = "coarsens"
    else:
        relation = "incomparable"
    return StagingComparison(relation, len(corpus), ab, ba, wab, wba)
