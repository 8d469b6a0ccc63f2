import logging
from fractions import Fraction as F

import pytest

from fasolve.core import AggregateAtom, Constant, term_vars
from fasolve.errors import FunctionDepthError, GuardTypeMismatch, LatticeOverflow, UnsafeRule
from fasolve.grounder import (
    GroundProgram,
    check_safety,
    grade_lattice,
    ground_fuzzy_set,
    ground_program,
    ground_rule,
    herbrand_universe,
    subst_literal,
)
from fasolve.parser import parse_program


def universe(text, depth=0):
    return [str(t) for t in herbrand_universe(parse_program(text), depth)]


def a(text):
    return parse_program(text + ".").rules[0].head[0].atom


def test_dice_universe(dice):
    assert [str(c) for c in herbrand_universe(dice)] == ["1", "2"]


def test_company_universe_skips_guards(company):
    assert sorted(str(c) for c in herbrand_universe(company)) == ["20", "40", "a", "b", "c"]


def test_no_constants():
    p = parse_program("p :- not q.\nq :- not p.")
    assert len(herbrand_universe(p)) == 0
    assert ground_program(p).rules == p.rules


def test_function_terms_up_to_depth():
    text = "p(f(a)) :- q(a)."
    with pytest.raises(FunctionDepthError):
        herbrand_universe(parse_program(text))
    assert universe(text, 1) == ["a", "f(a)"]
    assert universe("p(f(a)). q(X) :- p(X).", 2) == ["a", "f(a)", "f(f(a))"]


def test_variable_free_rule_grounds_to_itself(dice):
    r = dice.rules[0]
    assert ground_rule(r, herbrand_universe(dice)) == [r]


def test_cartesian_count():
    p = parse_program("r(a). r(b). r(c). p(X,Y) :- r(X), r(Y).")
    ground = ground_rule(p.rules[3], herbrand_universe(p))
    assert len(ground) == 9
    assert len({str(g) for g in ground}) == 9


def test_dice_ground_set_has_four_pairs(dice):
    g = ground_program(dice)
    assert len(g.rules) == 3
    agg = g.rules[2].pos[0]
    pairs = sorted(str(e) for e in agg.fset.elements)
    assert pairs == ["1 : U | a(1,1) : U", "1 : U | a(2,1) : U", "2 : U | a(1,2) : U", "2 : U | a(2,2) : U"]


def test_set_without_local_variables_is_one_pair():
    p = parse_program("a(1,2) : 0.4. s :- #sum_f{ 2 : 0.4 | a(1,2) : 0.4 } <= 11.")
    agg = ground_program(p).rules[1].pos[0]
    assert len(agg.fset.elements) == 1


def test_company_controls_instance(company):
    g = ground_program(company)
    (rule,) = [r for r in g.rules if r.head[0].atom == a("controls(a,c)")]
    agg = rule.pos[0]
    assert agg.guard == Constant(50)
    # one pair per (C2, P) with numeric P: 5 choices of C2 times 2 numeric values
    assert len(agg.fset.elements) == 10
    assert "40 : V | controlStk(a,a,c,40) : V" in {str(e) for e in agg.fset.elements}


def test_company_set_brute_force_count(company):
    # count substitutions of the local variables directly
    agg = company.rules[-1].pos[0]
    u = herbrand_universe(company)
    theta = {"C1": Constant("a"), "C3": Constant("c")}
    partly = subst_literal(agg, theta)
    expected = {(c2, p) for c2 in u for p in u if isinstance(p, Constant) and p.is_numeric}
    pairs = ground_fuzzy_set(partly.fset, u, "sum_f", {"C2", "P"}).elements
    assert {(e.conj[0].atom.args[1], e.item) for e in pairs} == expected


def test_non_numeric_items_warn_once(company, caplog):
    with caplog.at_level(logging.WARNING):
        ground_program(company)
    warnings = [r for r in caplog.records if r.levelno == logging.WARNING]
    assert len(warnings) == 1
    assert "non-numeric" in warnings[0].getMessage()


def test_ground_programs_have_no_object_variables(company):
    g = ground_program(company)
    for r in g.rules:
        for atom in r.atoms():
            assert not atom.vars()
        for _, lit in r.body():
            if isinstance(lit, AggregateAtom):
                assert not term_vars(lit.guard)
                assert all(not term_vars(e.item) for e in lit.fset.elements)


def test_provenance_reproduces_each_ground_rule(company):
    g = ground_program(company)
    assert isinstance(g, GroundProgram) and len(g.provenance) == len(g.rules)
    rebuilt = [set(ground_rule(r, g.universe)) for r in company.rules]
    for rule, prov in zip(g.rules, g.provenance):
        assert rule in rebuilt[prov.rule_index]
        assert sum(rule in group for group in rebuilt) == 1


@pytest.mark.parametrize("text", [
    "p(X) :- not q(X).",
    "p(X).",
    "p : U :- r.",
    "p :- not r : U.",
    "p :- #sum_f{ X : U | q(X) : U } > 1, r : U.",
    "p :- #count_f{ X | q(X) } > Z.",
])
def test_unsafe_rules(text):
    with pytest.raises(UnsafeRule):
        ground_program(parse_program("q(1). r. " + text))


def test_aggregate_binds_global_variables(company):
    for r in company.rules:
        check_safety(r)


def test_guard_must_be_numeric():
    with pytest.raises(GuardTypeMismatch):
        ground_program(parse_program("q(1). p :- #sum_f{ X | q(X) } > a."))


def test_guard_variable_ranges_over_numbers():
    g = ground_program(parse_program("q(1). t(a). t(2). p(N) :- t(N), #count_f{ X | q(X) } >= N."))
    heads = sorted(str(r.head[0].atom) for r in g.rules if r.head[0].atom.pred == "p")
    assert heads == ["p(1)", "p(2)"]


def test_dice_lattice(dice):
    lat = grade_lattice(ground_program(dice))
    values = {str(atom): lat.values(atom) for atom in lat.per_atom}
    assert values == {
        "a(1,1)": [0, F(4, 5)],
        "a(1,2)": [0, F(2, 5)],
        "a(2,1)": [0, F(3, 10)],
        "a(2,2)": [0, F(9, 10)],
        "gamma": [0, 1],
    }
    assert {F(0), F(1)} <= lat.global_values


def test_constant_only_lattice():
    lat = grade_lattice(ground_program(parse_program("a : 0.2. b : 0.7 :- a : 0.1.")))
    assert lat.global_values == {F(0), F(1), F(1, 5), F(7, 10), F(1, 10)}
    assert lat.iterations == 1 and lat.converged


def test_lattice_propagates_through_functions():
    lat = grade_lattice(ground_program(parse_program("a : 0.5. b : prod(V,V) :- a : V.")))
    assert {F(0), F(1, 4)} <= set(lat.values(a("b")))


def test_lattice_is_monotone_in_facts():
    base = "b : prod(V,0.5) :- a : V. c :- b : 0.2."
    small = grade_lattice(ground_program(parse_program("a : 0.4. " + base)))
    big = grade_lattice(ground_program(parse_program("a : 0.4. a : 0.8. " + base)))
    for atom, vals in small.per_atom.items():
        assert vals <= big.per_atom[atom]


def test_lattice_cap():
    text = "a : 0.5. a : prod(V,0.9) :- a : V."
    with pytest.raises(LatticeOverflow):
        grade_lattice(ground_program(parse_program(text)), cap=6)
    lat = grade_lattice(ground_program(parse_program(text)), iter_cap=3)
    assert not lat.converged


def test_annotation_constants_in_global_values(company):
    lat = grade_lattice(ground_program(company))
    assert {F(11, 20), F(3, 5), F(7, 10), F(9, 10)} <= lat.global_values


def test_function_guard_is_not_numeric():
    p = parse_program("q(1). t(1). p :- t(Z), #count_f{ X | q(X) } > f(Z).")
    with pytest.raises(GuardTypeMismatch):
        ground_program(p)
