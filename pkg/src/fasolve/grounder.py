"""Ground instantiation and the finite grade lattice used by the solver.

Only object variables are instantiated.  Annotation variables stay symbolic in
the ground program and are bound at evaluation time to the grades of the atoms
they annotate.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .aggregates import compare, eval_aggregate
from .core import (
    NUMERIC_AGGREGATES,
    ONE,
    ZERO,
    AggregateAtom,
    AnnotatedAtom,
    AnnVar,
    Atom,
    Constant,
    FuncTerm,
    FuzzySet,
    Program,
    Rule,
    SetElement,
    Term,
    Var,
    ann_constants,
    ann_vars,
    binders,
    eval_annotation,
    is_monotone,
    term_depth,
    term_key,
    term_vars,
)
from .errors import FunctionDepthError, GuardTypeMismatch, LatticeOverflow, UngroundGuard, UnsafeRule

log = logging.getLogger(__name__)

DEFAULT_LATTICE_CAP = 10_000
DEFAULT_ITER_CAP = 16


@dataclass(frozen=True)
class HerbrandUniverse:
    constants: tuple

    def __iter__(self):
        return iter(self.constants)

    def __len__(self):
        return len(self.constants)


@dataclass(frozen=True)
class Provenance:
    rule_index: int
    substitution: tuple  # sorted (var, term) pairs for the global variables


@dataclass(frozen=True)
class GroundProgram(Program):
    provenance: tuple = field(default=(), compare=False)
    universe: HerbrandUniverse = field(default=HerbrandUniverse(()), compare=False)


# --------------------------------------------------------------------------
# Substitution


def subst_term(t: Term, theta: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return theta.get(t.name, t)
    if isinstance(t, FuncTerm):
        return FuncTerm(t.name, tuple(subst_term(a, theta) for a in t.args))
    return t


def subst_atom(a: Atom, theta) -> Atom:
    if not a.args:
        return a
    return Atom(a.pred, tuple(subst_term(t, theta) for t in a.args))


def subst_ann_atom(a: AnnotatedAtom, theta) -> AnnotatedAtom:
    return AnnotatedAtom(subst_atom(a.atom, theta), a.ann)


def subst_element(e: SetElement, theta) -> SetElement:
    return SetElement(subst_term(e.item, theta), e.grade, tuple(subst_ann_atom(a, theta) for a in e.conj))


def subst_literal(lit, theta):
    if isinstance(lit, AnnotatedAtom):
        return subst_ann_atom(lit, theta)
    fset = FuzzySet(tuple(subst_element(e, theta) for e in lit.fset.elements))
    return AggregateAtom(lit.fn, fset, lit.cmp, subst_term(lit.guard, theta), lit.ann)


# --------------------------------------------------------------------------
# Universe and variables


def _walk_terms(p: Program):
    for rule in p.rules:
        for atom in rule.atoms():
            yield from atom.args
        for _, lit in rule.body():
            if isinstance(lit, AggregateAtom):
                for e in lit.fset.elements:
                    yield e.item


def _subterms(t: Term):
    yield t
    if isinstance(t, FuncTerm):
        for a in t.args:
            yield from _subterms(a)


def herbrand_universe(p: Program, max_depth: int = 0) -> HerbrandUniverse:
    """Constants of ``p`` (atom arguments and aggregate items), closed under its
    function symbols up to nesting depth ``max_depth``.  Aggregate guards are
    comparison values, not domain elements, and are left out."""
    consts, functors = set(), set()
    for t in _walk_terms(p):
        for s in _subterms(t):
            if isinstance(s, Constant):
                consts.add(s)
            elif isinstance(s, FuncTerm):
                if term_depth(s) > max_depth:
                    raise FunctionDepthError(
                        f"function term {s} has nesting depth {term_depth(s)} > {max_depth}")
                functors.add((s.name, len(s.args)))
    terms = set(consts)
    for _ in range(max_depth):
        layer = set(terms)
        for name, arity in functors:
            for args in itertools.product(sorted(terms, key=term_key), repeat=arity):
                layer.add(FuncTerm(name, args))
        terms = layer
    return HerbrandUniverse(tuple(sorted(terms, key=term_key)))


def _outside_vars(rule: Rule, skip: Optional[AggregateAtom] = None) -> set[str]:
    out = set()
    for h in rule.head:
        out |= h.atom.vars()
    for _, lit in rule.body():
        if lit is skip:
            out |= term_vars(lit.guard)
        elif isinstance(lit, AnnotatedAtom):
            out |= lit.atom.vars()
        else:
            out |= lit.fset.vars() | term_vars(lit.guard)
    return out


def global_vars(rule: Rule) -> set[str]:
    """Object variables of ``rule`` that are not local to any of its aggregates."""
    glob = set()
    for h in rule.head:
        glob |= h.atom.vars()
    for _, lit in rule.body():
        if isinstance(lit, AnnotatedAtom):
            glob |= lit.atom.vars()
        else:
            glob |= term_vars(lit.guard)
            # a set variable that also appears elsewhere in the rule is global
            glob |= lit.fset.vars() & _outside_vars(rule, skip=lit)
    return glob


def local_vars(rule: Rule, agg: AggregateAtom) -> set[str]:
    return agg.fset.vars() - global_vars(rule)


def check_safety(rule: Rule) -> None:
    where = f" (rule at {rule.span})" if rule.span else ""
    glob = global_vars(rule)
    positive = set()
    for lit in rule.pos:
        if isinstance(lit, AnnotatedAtom):
            positive |= lit.atom.vars()
        else:
            # a guard compares against a value, it cannot produce one
            positive |= lit.fset.vars()
    unsafe = sorted(glob - positive)
    if unsafe:
        raise UnsafeRule(f"Unsafe Rule: variable(s) {', '.join(unsafe)} must occur in a positive body literal{where}")

    bound = set(binders(rule.pos))
    needed = set()
    for h in rule.head:
        needed |= ann_vars(h.ann)
    for _, lit in rule.body():
        needed |= ann_vars(lit.ann)
    missing = sorted(needed - bound)
    if missing:
        raise UnsafeRule(
            f"Unsafe Rule: annotation variable(s) {', '.join(missing)} need a positive body atom annotated "
            f"with the bare variable{where}")

    for _, lit in rule.body():
        if not isinstance(lit, AggregateAtom):
            continue
        loc = local_vars(rule, lit)
        for e in lit.fset.elements:
            set_bound = set(binders(e.conj))
            set_needed = ann_vars(e.grade).union(*(ann_vars(a.ann) for a in e.conj))
            if set_needed - set_bound:
                raise UnsafeRule(
                    f"Unsafe Rule: set annotation variable(s) {', '.join(sorted(set_needed - set_bound))} "
                    f"must be bound inside the set's conjunction{where}")
            if set_needed & bound or set_needed & needed:
                raise UnsafeRule(f"Unsafe Rule: set annotation variables must be local to the set{where}")
            conj_vars = set().union(*(a.atom.vars() for a in e.conj))
            free_items = (term_vars(e.item) & loc) - conj_vars
            if free_items:
                raise UnsafeRule(
                    f"Unsafe Rule: item variable(s) {', '.join(sorted(free_items))} must occur in the conjunction{where}")


# --------------------------------------------------------------------------
# Grounding


def _is_ground(t: Term) -> bool:
    return not term_vars(t)


def _numeric(t: Term) -> bool:
    return isinstance(t, Constant) and t.is_numeric


def ground_fuzzy_set(s: FuzzySet, u: HerbrandUniverse, fn: Optional[str] = None,
                     local: Optional[Iterable[str]] = None, dropped: Optional[list] = None) -> FuzzySet:
    """One ground pair per substitution of the local object variables.

    ``local`` defaults to every variable still present in ``s`` (global
    variables are expected to be substituted already).  For numeric aggregates
    pairs with a non-numeric item are dropped (and appended to ``dropped``).
    """
    pairs = {}
    universe = list(u)
    for e in s.elements:
        names = sorted(e.vars() if local is None else e.vars() & set(local))
        for values in itertools.product(universe, repeat=len(names)):
            g = subst_element(e, dict(zip(names, values)))
            if fn in NUMERIC_AGGREGATES and not _numeric(g.item):
                log.debug("dropping pair with non-numeric item %s from #%s", g.item, fn)
                if dropped is not None:
                    dropped.append(g)
                continue
            pairs.setdefault(g, None)
    return FuzzySet(tuple(pairs))


def ground_rule(r: Rule, u: HerbrandUniverse) -> list[Rule]:
    return [g for g, _ in _ground_rule(r, u)]


def _ground_rule(r: Rule, u: HerbrandUniverse, dropped: Optional[list] = None):
    check_safety(r)
    glob = sorted(global_vars(r))
    guard_vars = set()
    for _, lit in r.body():
        if isinstance(lit, AggregateAtom):
            guard_vars |= term_vars(lit.guard)
            if _is_ground(lit.guard) and not _numeric(lit.guard):
                raise GuardTypeMismatch(f"aggregate guard {lit.guard} is not numeric")
    domains = [[c for c in u if _numeric(c)] if v in guard_vars else list(u) for v in glob]
    out = []
    for values in itertools.product(*domains):
        theta = dict(zip(glob, values))
        head = tuple(subst_ann_atom(h, theta) for h in r.head)
        pos, neg = [], []
        for positive, lit in r.body():
            g = subst_literal(lit, theta)
            if isinstance(g, AggregateAtom):
                if not _is_ground(g.guard):
                    raise UngroundGuard(f"aggregate guard {g.guard} is not ground after substitution")
                if not _numeric(g.guard):
                    raise GuardTypeMismatch(f"aggregate guard {g.guard} is not numeric")
                g = AggregateAtom(g.fn, ground_fuzzy_set(g.fset, u, g.fn, dropped=dropped), g.cmp, g.guard, g.ann)
            (pos if positive else neg).append(g)
        out.append((Rule(head, pos, neg), tuple(sorted(theta.items()))))
    return out


def ground_program(p: Program, max_depth: int = 0) -> GroundProgram:
    u = herbrand_universe(p, max_depth)
    rules, prov, dropped = [], [], []
    for idx, r in enumerate(p.rules):
        for g, theta in _ground_rule(r, u, dropped):
            rules.append(g)
            prov.append(Provenance(idx, theta))
    if dropped:
        log.warning("dropped %d ground pair(s) with non-numeric items from numeric aggregates", len(dropped))
    return GroundProgram(tuple(rules), tuple(prov), u)


# --------------------------------------------------------------------------
# Grade lattice


@dataclass(frozen=True)
class GradeLattice:
    per_atom: Mapping[Atom, frozenset]
    global_values: frozenset
    iterations: int = 0
    converged: bool = True
    switching: frozenset = frozenset()

    def values(self, atom: Atom) -> list[Fraction]:
        """Candidate grades for ``atom``, ascending, always including 0."""
        return sorted(self.per_atom.get(atom, frozenset()) | {ZERO})

    def lower_values(self, atom: Atom) -> list[Fraction]:
        """Grades tried for ``atom`` when searching for a smaller model."""
        if atom in self.switching:
            return sorted(self.global_values | self.per_atom.get(atom, frozenset()) | {ZERO})
        return self.values(atom)


def min_domain(sets: list[Iterable[Fraction]]) -> set[Fraction]:
    """All values ``min(x_1, ..., x_k)`` reachable by picking ``x_i`` from ``sets[i]``."""
    sets = [set(s) for s in sets]
    if not sets:
        return set()
    tops = [max(s) for s in sets]
    floor = min(tops)
    return {v for s in sets for v in s if v <= floor}


def _domains(lits, values) -> dict[str, set[Fraction]]:
    return {v: min_domain([values.get(a, {ZERO}) for a in atoms]) for v, atoms in binders(lits).items()}


def _ann_values(ann, domains) -> set[Fraction]:
    names = sorted(ann_vars(ann))
    if not names:
        return {eval_annotation(ann)}
    out = set()
    for combo in itertools.product(*(sorted(domains[n]) for n in names)):
        out.add(eval_annotation(ann, dict(zip(names, combo))))
    return out


def _element_possible(e: SetElement, values) -> bool:
    doms = _domains(e.conj, values)
    for a in e.conj:
        if isinstance(a.ann, AnnVar):
            continue
        top = max(values.get(a.atom, {ZERO}))
        if not ann_vars(a.ann) and eval_annotation(a.ann) > top:
            return False
    return max(_ann_values(e.grade, doms)) > ZERO


def aggregate_static(agg: AggregateAtom, values) -> Optional[bool]:
    """Truth of the positive aggregate when no pair can ever contribute, else None."""
    if any(_element_possible(e, values) for e in agg.fset.elements):
        return None
    res = eval_aggregate(agg.fn, ())
    if res is None:
        return False
    return compare(res.value, agg.cmp, agg.guard)


def rule_status(r: Rule, values: Mapping[Atom, set]) -> str:
    """``blocked`` if the body can never hold, ``trivial`` if the head always holds, else ``active``.

    ``values`` maps atoms to the grades they may take; missing atoms are fixed at 0.
    """
    doms = _domains(r.pos, values)
    for positive, lit in r.body():
        if isinstance(lit, AnnotatedAtom):
            top = max(values.get(lit.atom, {ZERO}))
            if positive:
                if isinstance(lit.ann, AnnVar):
                    continue
                if min(_ann_values(lit.ann, doms)) > top:
                    return "blocked"
            elif max(_ann_values(lit.ann, doms)) <= ZERO:
                return "blocked"
        else:
            static = aggregate_static(lit, values)
            if static is not None and static != positive:
                return "blocked"
    for h in r.head:
        if max(_ann_values(h.ann, doms)) <= ZERO:
            return "trivial"
    return "active"


def program_constants(g: Program) -> set[Fraction]:
    out = set()
    for r in g.rules:
        for h in r.head:
            out.update(ann_constants(h.ann))
        for _, lit in r.body():
            out.update(ann_constants(lit.ann))
            if isinstance(lit, AggregateAtom):
                for e in lit.fset.elements:
                    out.update(ann_constants(e.grade))
                    for a in e.conj:
                        out.update(ann_constants(a.ann))
    return out


def _widened_atoms(g: Program) -> set[Atom]:
    """Atoms binding a variable of an order-reversing head annotation.

    Raising such an atom can lower what the head demands, so an answer set may
    hold it above every value its own rules derive; it gets every grade instead.
    """
    out = set()
    for r in g.rules:
        bound = binders(r.pos)
        for h in r.head:
            if not is_monotone(h.ann):
                for name in ann_vars(h.ann):
                    out.update(bound.get(name, ()))
    return out


def _switching_atoms(g: Program) -> set[Atom]:
    """Atoms on which some body is not monotone.

    These are atoms inside an aggregate set and binders of variables that
    annotate negated literals or aggregates.  A body can switch off and back on
    as such an atom grows, so a smaller model may hold it strictly between two
    of its derived grades.
    """
    out = set()
    for r in g.rules:
        bound = binders(r.pos)
        names = set()
        for negated, lit in r.body():
            if isinstance(lit, AggregateAtom):
                out.update(a.atom for e in lit.fset.elements for a in e.conj)
                names |= ann_vars(lit.ann)
            elif negated:
                names |= ann_vars(lit.ann)
        for name in names:
            out.update(bound.get(name, ()))
    return out


def grade_lattice(g: Program, cap: int = DEFAULT_LATTICE_CAP, iter_cap: int = DEFAULT_ITER_CAP) -> GradeLattice:
    """Least fixpoint of head grades reachable from rules whose bodies may hold."""
    values: dict[Atom, set[Fraction]] = {a: {ZERO} for a in g.atoms()}
    base = {ZERO, ONE} | program_constants(g)
    widened = _widened_atoms(g)
    iterations, converged = 0, False
    while True:
        changed = False
        for r in g.rules:
            if rule_status(r, values) == "blocked":
                continue
            doms = _domains(r.pos, values)
            for h in r.head:
                new = _ann_values(h.ann, doms) - values[h.atom]
                if new:
                    values[h.atom] |= new
                    changed = True
        everything = base.union(*values.values())
        for a in widened:
            if not everything <= values[a]:
                values[a] |= everything
                changed = True
        total = len(everything)
        if total > cap:
            raise LatticeOverflow(f"grade lattice has {total} values, cap is {cap}", total)
        if not changed:
            converged = True
            break
        iterations += 1
        if iterations >= iter_cap:
            break
    if not converged:
        log.warning("grade lattice did not converge within %d iterations", iter_cap)
    glob = frozenset(base.union(*values.values()))
    return GradeLattice({a: frozenset(v) for a, v in values.items()}, glob, iterations, converged,
                        frozenset(_switching_atoms(g)))
