"""Satisfaction, fuzzy reducts, minimality and answer-set enumeration.

Annotation variables in a rule body are bound to the grade of the positive
atoms they annotate (the meet, when a variable annotates several atoms); the
binding is then used to evaluate every other annotation in the rule.

Two enumeration strategies are available.  ``naive`` walks the whole product
of per-atom candidate grades.  ``split`` (the default) evaluates the atom
dependency graph component by component, bottom-up; it gives the same answer
sets (the test suite checks this against ``naive`` and the brute-force
oracle) while keeping each search local.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Union

import networkx as nx

from .aggregates import satisfies_aggregate_atom
from .core import (
    ZERO,
    AnnotatedAtom,
    AnnVar,
    Atom,
    Interpretation,
    Program,
    Rule,
    ann_vars,
    binders,
    eval_annotation,
    is_monotone,
)
from .errors import CandidateSpaceOverflow
from .grounder import (
    DEFAULT_ITER_CAP,
    DEFAULT_LATTICE_CAP,
    GradeLattice,
    GroundProgram,
    grade_lattice,
    ground_program,
    rule_status,
)

DEFAULT_CANDIDATE_CAP = 10**7


def _rules(p) -> Iterable[Rule]:
    return p.rules if hasattr(p, "rules") else p


def body_binding(r: Rule, i: Interpretation) -> Optional[dict[str, Fraction]]:
    """The annotation binding if ``i`` satisfies the body of ``r``, else None."""
    binding: dict[str, Fraction] = {}
    for lit in r.pos:
        if isinstance(lit, AnnotatedAtom) and isinstance(lit.ann, AnnVar):
            g = i[lit.atom]
            name = lit.ann.name
            binding[name] = g if name not in binding else min(binding[name], g)
    for positive, lit in r.body():
        if isinstance(lit, AnnotatedAtom):
            if (eval_annotation(lit.ann, binding) <= i[lit.atom]) != positive:
                return None
        elif not satisfies_aggregate_atom(lit, i, not positive, binding):
            return None
    return binding


def satisfies_body(r: Rule, i: Interpretation) -> bool:
    return body_binding(r, i) is not None


def satisfies_rule(r: Rule, i: Interpretation) -> bool:
    binding = body_binding(r, i)
    if binding is None:
        return True
    return any(eval_annotation(h.ann, binding) <= i[h.atom] for h in r.head)


def satisfies_program(p, i: Interpretation) -> bool:
    """Every rule is satisfied, and each atom reaches the largest head annotation
    through which a firing rule is satisfied (implied by the former, checked anyway)."""
    best: dict[Atom, Fraction] = {}
    for r in _rules(p):
        binding = body_binding(r, i)
        if binding is None:
            continue
        satisfied = False
        for h in r.head:
            mu = eval_annotation(h.ann, binding)
            if mu <= i[h.atom]:
                satisfied = True
                if mu > best.get(h.atom, ZERO):
                    best[h.atom] = mu
        if not satisfied:
            return False
    return all(mu <= i[a] for a, mu in best.items())


@dataclass(frozen=True)
class Reduct:
    rules: tuple


def reduct(p, i: Interpretation) -> Reduct:
    return Reduct(tuple(r for r in _rules(p) if satisfies_body(r, i)))


def _model_below(rules, i: Interpretation, atoms, grids) -> bool:
    """Some model of ``rules`` lies strictly below ``i`` and differs from it only on ``atoms``.

    Depth-first over ``grids(a)`` capped at ``i(a)``; a rule is checked as soon
    as every one of its searched atoms has a value.
    """
    rules = list(rules)
    mentioned = {a for r in rules for a in r.atoms()}
    atoms = [a for a in dict.fromkeys(atoms) if i[a] > ZERO]
    if any(a not in mentioned for a in atoms):
        # that atom can drop to 0 without touching any rule
        return satisfies_program(rules, i)
    position = {a: k for k, a in enumerate(atoms)}
    due: list[list[Rule]] = [[] for _ in atoms]
    d = i.as_dict()
    j = Interpretation._trusted(d)
    for r in rules:
        ks = [position[a] for a in r.atoms() if a in position]
        if ks:
            due[max(ks)].append(r)
        elif not satisfies_rule(r, j):
            return False
    options = [[v for v in sorted(set(grids(a)) | {i[a], ZERO}, reverse=True) if v <= i[a]] for a in atoms]

    def walk(k: int, lowered: bool) -> bool:
        if k == len(atoms):
            return lowered
        a = atoms[k]
        for v in options[k]:
            d[a] = v
            if all(satisfies_rule(r, j) for r in due[k]) and walk(k + 1, lowered or v < i[a]):
                return True
        d[a] = i[a]
        return False

    return walk(0, False)


def is_minimal_model(p, i: Interpretation, lattice: GradeLattice) -> bool:
    """No interpretation below ``i`` on the lattice grid satisfies ``p``."""
    return not _model_below(_rules(p), i, i.support(), lattice.lower_values)


@dataclass(frozen=True)
class AnswerSetReport:
    interpretation: Interpretation
    minimality_witness_checked: bool
    candidate_space_size: int


def _naive(p, lattice: GradeLattice, cap: int):
    atoms = [a for a in p.atoms() if len(lattice.values(a)) > 1]
    grids = [lattice.values(a) for a in atoms]
    size = math.prod(len(g) for g in grids)
    if size > cap:
        raise CandidateSpaceOverflow(
            f"candidate space has {size} interpretations, cap is {cap}; raise --candidate-cap", size)
    found = []
    for combo in itertools.product(*grids):
        i = Interpretation._trusted({a: v for a, v in zip(atoms, combo) if v})
        red = reduct(p, i)
        if satisfies_program(red.rules, i) and is_minimal_model(red.rules, i, lattice):
            found.append(i)
    return found, size


def dependency_components(rules: list[Rule], atoms: list[Atom]) -> list[list[Atom]]:
    """Strongly connected components of the atom dependency graph, dependencies first.

    Head atoms of one rule are merged.  When a head annotation is not monotone
    in a bound variable, the binding atoms are merged with the head too, since
    lowering them could break the head in a later component.
    """
    g = nx.DiGraph()
    g.add_nodes_from(atoms)
    for r in rules:
        heads = [h.atom for h in r.head]
        body = [a for a in r.atoms()][len(heads):]
        for h in heads:
            for b in body:
                g.add_edge(h, b)
        for h1, h2 in zip(heads, heads[1:]):
            g.add_edge(h1, h2)
            g.add_edge(h2, h1)
        bound = binders(r.pos)
        for h in r.head:
            if not is_monotone(h.ann):
                for name in ann_vars(h.ann):
                    for b in bound.get(name, ()):
                        g.add_edge(b, h.atom)
    cond = nx.condensation(g)
    members = cond.graph["mapping"]
    groups: dict[int, list[Atom]] = {}
    for atom, comp in members.items():
        groups.setdefault(comp, []).append(atom)
    order = nx.lexicographical_topological_sort(cond, key=lambda c: min(str(a) for a in groups[c]))
    return [sorted(groups[c], key=str) for c in reversed(list(order))]


def _split(p, lattice: GradeLattice, cap: int):
    values = {a: set(lattice.values(a)) for a in p.atoms()}
    active = [r for r in p.rules if rule_status(r, values) == "active"]
    atoms = p.atoms()
    comps = dependency_components(active, atoms)
    where = {a: k for k, comp in enumerate(comps) for a in comp}
    by_comp: dict[int, list[Rule]] = {}
    for r in active:
        by_comp.setdefault(where[r.head[0].atom], []).append(r)

    partials: list[dict] = [{}]
    explored = 0
    for k, comp in enumerate(comps):
        rules = by_comp.get(k)
        if not rules:
            continue  # nothing supports these atoms: only the all-zero choice is minimal
        free = [a for a in comp if len(lattice.values(a)) > 1]
        grids = [lattice.values(a) for a in free]
        size = math.prod(len(g) for g in grids)
        if size > cap:
            raise CandidateSpaceOverflow(
                f"component of {len(free)} atoms has {size} candidate interpretations, cap is {cap}", size)
        extended = []
        for base in partials:
            explored += size
            for combo in itertools.product(*grids):
                d = dict(base)
                for a, v in zip(free, combo):
                    if v:
                        d[a] = v
                i = Interpretation._trusted(d)
                if not satisfies_program(rules, i):
                    continue
                red = [r for r in rules if satisfies_body(r, i)]
                if not _model_below(red, i, free, lattice.lower_values):
                    extended.append(d)
        partials = extended
        if not partials:
            break
    return [Interpretation._trusted(d) for d in partials], explored


def enumerate_answer_sets(p, lattice: Optional[GradeLattice] = None, limit: Optional[int] = None,
                          candidate_cap: int = DEFAULT_CANDIDATE_CAP,
                          strategy: str = "split") -> list[AnswerSetReport]:
    if lattice is None:
        lattice = grade_lattice(p)
    if strategy == "naive":
        found, size = _naive(p, lattice, candidate_cap)
    elif strategy == "split":
        found, size = _split(p, lattice, candidate_cap)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    found = sorted(set(found), key=Interpretation.sort_key)
    for i in found:
        if not satisfies_program(p, i):
            raise RuntimeError(f"internal error: emitted answer set {i} is not a model of the program")
    if limit is not None:
        found = found[:limit]
    return [AnswerSetReport(i, True, size) for i in found]


@dataclass
class Solution:
    ground: GroundProgram
    lattice: GradeLattice
    reports: list = field(default_factory=list)

    @property
    def answer_sets(self) -> list[Interpretation]:
        return [r.interpretation for r in self.reports]


def solve(program: Union[Program, str], *, limit: Optional[int] = None,
          lattice_cap: int = DEFAULT_LATTICE_CAP, iter_cap: int = DEFAULT_ITER_CAP,
          candidate_cap: int = DEFAULT_CANDIDATE_CAP, func_depth: int = 0,
          strategy: str = "split") -> Solution:
    """Parse (if given text), ground and enumerate answer sets."""
    if isinstance(program, str):
        from .parser import parse_program

        program = parse_program(program)
    ground = ground_program(program, func_depth)
    lattice = grade_lattice(ground, lattice_cap, iter_cap)
    reports = enumerate_answer_sets(ground, lattice, limit, candidate_cap, strategy)
    return Solution(ground, lattice, reports)
