"""Classical (two-valued) disjunctive programs with aggregates.

A classical program is embedded into the fuzzy language by annotating every
atom, aggregate and set element with the grade 1; answer sets of the embedded
program come back as sets of atoms through :func:`extract`.
:func:`classical_oracle` computes classical answer sets directly, by brute
force, so the embedding can be checked against it.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import Iterable, Union

from .core import (
    ONE,
    ONE_ANN,
    ZERO,
    AggregateAtom,
    AnnotatedAtom,
    Atom,
    Const,
    Constant,
    FuzzySet,
    Interpretation,
    Program,
    Rule,
    SetElement,
    Term,
)
from .errors import NonBooleanGrade, OracleSpaceOverflow

DEFAULT_ORACLE_ATOMS = 20

CLASSICAL_AGGREGATES = ("sum", "times", "min", "max", "count")


@dataclass(frozen=True)
class ClassicalElement:
    item: Term
    conj: tuple

    def __post_init__(self):
        object.__setattr__(self, "conj", tuple(self.conj))

    def __str__(self):
        return f"{self.item} | {', '.join(str(a) for a in self.conj)}"


@dataclass(frozen=True)
class ClassicalAggregate:
    fn: str
    elements: tuple
    cmp: str
    guard: Term

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.fn not in CLASSICAL_AGGREGATES:
            raise ValueError(f"unknown aggregate {self.fn!r}")

    def __str__(self):
        return f"#{self.fn}{{ {' ; '.join(str(e) for e in self.elements)} }} {self.cmp} {self.guard}"


ClassicalLiteral = Union[Atom, ClassicalAggregate]


@dataclass(frozen=True)
class ClassicalRule:
    head: tuple
    pos: tuple = ()
    neg: tuple = ()

    def __post_init__(self):
        for name in ("head", "pos", "neg"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not self.head:
            raise ValueError("rule head must be non-empty")

    def __str__(self):
        text = " | ".join(str(h) for h in self.head)
        body = [str(l) for l in self.pos] + [f"not {l}" for l in self.neg]
        if body:
            text += " :- " + ", ".join(body)
        return text + "."


@dataclass(frozen=True)
class ClassicalProgram:
    rules: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))

    def __str__(self):
        return "\n".join(str(r) for r in self.rules)


ClassicalAnswerSet = frozenset


def print_classical(p: ClassicalProgram) -> str:
    return str(p)


# --------------------------------------------------------------------------
# Embedding and its inverse


def _embed_literal(lit: ClassicalLiteral):
    if isinstance(lit, Atom):
        return AnnotatedAtom(lit, ONE_ANN)
    elements = [SetElement(e.item, ONE_ANN, [AnnotatedAtom(a, ONE_ANN) for a in e.conj]) for e in lit.elements]
    return AggregateAtom(lit.fn + "_f", FuzzySet(elements), lit.cmp, lit.guard, ONE_ANN)


def embed(p: ClassicalProgram) -> Program:
    """Annotate everything with 1."""
    rules = []
    for r in p.rules:
        rules.append(Rule(
            [AnnotatedAtom(h, ONE_ANN) for h in r.head],
            [_embed_literal(l) for l in r.pos],
            [_embed_literal(l) for l in r.neg],
        ))
    return Program(rules)


def _one(ann, where) -> None:
    if not (isinstance(ann, Const) and ann.value == ONE):
        raise ValueError(f"{where} carries annotation {ann}; only programs annotated with 1 are classical")


def _erase_literal(lit):
    if isinstance(lit, AnnotatedAtom):
        _one(lit.ann, lit.atom)
        return lit.atom
    _one(lit.ann, "aggregate")
    elements = []
    for e in lit.fset.elements:
        _one(e.grade, e.item)
        for a in e.conj:
            _one(a.ann, a.atom)
        elements.append(ClassicalElement(e.item, [a.atom for a in e.conj]))
    return ClassicalAggregate(lit.fn[:-2], elements, lit.cmp, lit.guard)


def erase(p: Program) -> ClassicalProgram:
    """Drop the annotations of a program in which every annotation is 1."""
    rules = []
    for r in p.rules:
        rules.append(ClassicalRule(
            [_erase_literal(h) for h in r.head],
            [_erase_literal(l) for l in r.pos],
            [_erase_literal(l) for l in r.neg],
        ))
    return ClassicalProgram(rules)


def parse_classical(text: str, filename: str = "<input>") -> ClassicalProgram:
    from .parser import parse_program

    return erase(parse_program(text, filename, classical=True))


def extract(i: Interpretation) -> ClassicalAnswerSet:
    """Atoms at grade 1; anything strictly between 0 and 1 is rejected."""
    out = set()
    for atom, g in i.items():
        if g != ONE:
            raise NonBooleanGrade(f"{atom} has grade {g}, expected 0 or 1")
        out.add(atom)
    return frozenset(out)


# --------------------------------------------------------------------------
# Brute-force classical answer sets

_CMP = {"=": operator.eq, "!=": operator.ne, "<": operator.lt, ">": operator.gt,
        "<=": operator.le, ">=": operator.ge}


def _agg_value(fn: str, items: list):
    if fn == "count":
        return len(items)
    if not items:
        return {"sum": ZERO, "times": ONE}.get(fn)
    if fn == "sum":
        return sum(items, ZERO)
    if fn == "times":
        out = ONE
        for x in items:
            out *= x
        return out
    return min(items) if fn == "min" else max(items)


class _Compiled:
    """A ground classical rule over a bit-indexed atom base."""

    __slots__ = ("head", "pos", "neg", "pos_aggs", "neg_aggs")

    def __init__(self, rule: ClassicalRule, index: dict):
        # a set, so a repeated atom contributes its bit once
        bit = lambda atoms: sum(1 << index[a] for a in set(atoms) if a in index)
        self.head = bit(rule.head)
        pos_atoms = [l for l in rule.pos if isinstance(l, Atom)]
        # a positive atom outside the base is never true: mark the body impossible
        self.pos = bit(pos_atoms) if all(a in index for a in pos_atoms) else -1
        self.neg = bit(l for l in rule.neg if isinstance(l, Atom))
        self.pos_aggs = [self._agg(l, index) for l in rule.pos if isinstance(l, ClassicalAggregate)]
        self.neg_aggs = [self._agg(l, index) for l in rule.neg if isinstance(l, ClassicalAggregate)]

    @staticmethod
    def _agg(a: ClassicalAggregate, index):
        elements = []
        for e in a.elements:
            if all(x in index for x in e.conj):
                item = e.item.value if isinstance(e.item, Constant) and e.item.is_numeric else e.item
                elements.append((item, sum(1 << index[x] for x in set(e.conj))))
        guard = a.guard.value
        # identical (item, conjunction) pairs are one element of the set
        return a.fn, list(dict.fromkeys(elements)), _CMP[a.cmp], guard

    @staticmethod
    def agg_holds(agg, m: int) -> bool:
        fn, elements, cmp, guard = agg
        items = [item for item, need in elements if m & need == need]
        value = _agg_value(fn, items)
        return value is not None and cmp(value, guard)

    def body(self, m: int) -> bool:
        if self.pos < 0 or m & self.pos != self.pos or m & self.neg:
            return False
        return all(self.agg_holds(a, m) for a in self.pos_aggs) and not any(
            self.agg_holds(a, m) for a in self.neg_aggs)

    def satisfied(self, m: int) -> bool:
        return bool(m & self.head) or not self.body(m)


def _ground(p: ClassicalProgram, func_depth: int) -> list[ClassicalRule]:
    from .grounder import ground_program

    return list(erase(ground_program(embed(p), func_depth)).rules)


def _possible_atoms(rules: list[ClassicalRule]) -> list[Atom]:
    """Atoms derivable when negation and aggregates are ignored; answer sets live inside."""
    possible: set = set()
    changed = True
    while changed:
        changed = False
        for r in rules:
            if all(l in possible for l in r.pos if isinstance(l, Atom)):
                for h in r.head:
                    if h not in possible:
                        possible.add(h)
                        changed = True
    return sorted(possible, key=str)


def _monotone_aggregate(a: ClassicalAggregate) -> bool:
    if a.fn in ("sum", "count"):
        items_ok = a.fn == "count" or all(
            isinstance(e.item, Constant) and e.item.is_numeric and e.item.value >= 0 for e in a.elements)
        return items_ok and a.cmp in (">", ">=")
    if a.fn == "max":
        return a.cmp in (">", ">=")
    if a.fn == "min":
        return a.cmp in ("<", "<=")
    return False


def _least_model(rules: list[ClassicalRule]) -> ClassicalAnswerSet:
    atoms = _possible_atoms(rules)
    index = {a: k for k, a in enumerate(atoms)}
    compiled = [_Compiled(r, index) for r in rules]
    m = 0
    changed = True
    while changed:
        changed = False
        for c in compiled:
            if not m & c.head and c.body(m):
                m |= c.head
                changed = True
    return frozenset(a for a, k in index.items() if m >> k & 1)


def _is_definite(rules: list[ClassicalRule]) -> bool:
    return all(len(r.head) == 1 and not r.neg and all(
        isinstance(l, Atom) or _monotone_aggregate(l) for l in r.pos) for r in rules)


def classical_oracle(p: ClassicalProgram, max_atoms: int = DEFAULT_ORACLE_ATOMS,
                     func_depth: int = 0, shortcut: bool = True) -> list[ClassicalAnswerSet]:
    """All classical answer sets of ``p``, sorted.

    Normal programs without negation whose aggregates are monotone have exactly
    one answer set, their least model, computed by fixpoint iteration.  Anything
    else is solved by enumerating subsets of the derivable atoms: a subset ``M``
    is kept when it is a minimal model of the rules whose bodies ``M`` satisfies.
    ``shortcut=False`` forces the enumeration.
    """
    rules = _ground(p, func_depth)
    if shortcut and _is_definite(rules):
        return [_least_model(rules)]
    atoms = _possible_atoms(rules)
    if len(atoms) > max_atoms:
        raise OracleSpaceOverflow(
            f"{len(atoms)} derivable atoms means {2 ** len(atoms)} subsets; limit is 2^{max_atoms}",
            2 ** len(atoms))
    index = {a: k for k, a in enumerate(atoms)}
    compiled = [_Compiled(r, index) for r in rules]
    found = []
    for m in range(1 << len(atoms)):
        if not all(c.satisfied(m) for c in compiled):
            continue
        reduct = [c for c in compiled if c.body(m)]
        if any(all(c.satisfied(n) for c in reduct) for n in _proper_submasks(m)):
            continue
        found.append(frozenset(a for a, k in index.items() if m >> k & 1))
    return sort_answer_sets(found)


def _proper_submasks(m: int) -> Iterable[int]:
    sub = (m - 1) & m
    while True:
        if sub != m:
            yield sub
        if sub == 0:
            return
        sub = (sub - 1) & m


def sort_answer_sets(sets: Iterable[ClassicalAnswerSet]) -> list[ClassicalAnswerSet]:
    return sorted(set(sets), key=lambda s: sorted(str(a) for a in s))


def format_answer_set(s: ClassicalAnswerSet) -> str:
    atoms = sorted(str(a) for a in s)
    return "{ " + ", ".join(atoms) + " }" if atoms else "{ }"
