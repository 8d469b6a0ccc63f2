from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from conftest import expected_lines, load
from fasolve.core import AggregateAtom, Atom, Interpretation, Program
from fasolve.errors import OracleSpaceOverflow
from fasolve.grounder import grade_lattice, ground_program
from fasolve.oracle import (
    Discrepancy,
    GeneratorConfig,
    brute_force_answer_sets,
    differential_check,
    generate_program,
    is_answer_set,
    is_model,
    load_discrepancies,
    refine_grid,
    run_trials,
    worker_count,
    write_discrepancy,
)
from fasolve.parser import parse_program
from fasolve.solver import solve

DICE_GRID = ["0", "0.3", "0.4", "0.8", "0.9", "1"]


def ground(text):
    return ground_program(parse_program(text))


def no_minimality_check(g, lattice):
    """Every model on the per-atom grids, minimal or not."""
    from itertools import product

    atoms = list(lattice.per_atom)
    out = []
    for values in product(*(sorted(lattice.per_atom[a]) for a in atoms)):
        i = Interpretation(dict(zip(atoms, values)))
        if is_model(g.rules, i):
            out.append(i)
    return out


# generator

def test_generator_is_deterministic():
    cfg = GeneratorConfig(seed=1)
    assert str(generate_program(cfg)) == str(generate_program(cfg))


def test_generator_seeds_differ():
    texts = {str(generate_program(GeneratorConfig(seed=s))) for s in range(20)}
    assert len(texts) > 15


def test_no_aggregates_when_disabled():
    for s in range(30):
        p = generate_program(GeneratorConfig(seed=s, aggregate_probability=0))
        assert not any(isinstance(l, AggregateAtom) for r in p.rules for _, l in r.body())


def test_zero_rules():
    assert generate_program(GeneratorConfig(max_rules=0)) == Program()


@pytest.mark.parametrize("field", ["max_atoms", "max_rules", "max_disjuncts", "max_body_lits"])
def test_negative_bounds(field):
    with pytest.raises(ValueError):
        GeneratorConfig(**{field: -1})


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), rules=st.integers(0, 6), body=st.integers(0, 3))
def test_generated_programs_round_trip_and_ground(seed, rules, body):
    p = generate_program(GeneratorConfig(seed=seed, max_rules=rules, max_body_lits=body))
    assert len(p.rules) <= rules
    assert parse_program(str(p)) == p
    ground_program(p)


# brute-force oracle

def test_dice_over_its_grid(dice):
    found = brute_force_answer_sets(ground_program(dice), DICE_GRID)
    assert [str(i) for i in found] == expected_lines("dice.expected")


def test_single_fact():
    (i,) = brute_force_answer_sets(ground("p : 0.5."), ["0", "0.5", "1"])
    assert i == Interpretation({Atom("p"): "0.5"})


@pytest.mark.parametrize("text, grid, expected", [
    ("p :- not p.", ["0", "1"], []),
    ("a | b.", ["0", "1"], ["{ a:1 }", "{ b:1 }"]),
    ("p : 0.4 :- not q : 0.5. q : 0.6 :- not p : 0.4.", ["0", "0.4", "0.6", "1"],
     ["{ p:0.4 }", "{ q:0.6 }"]),
])
def test_small_oracle_examples(text, grid, expected):
    assert [str(i) for i in brute_force_answer_sets(ground(text), grid)] == expected


def test_oracle_cap():
    g = ground(" ".join(f"p{k} | q{k}." for k in range(8)))
    with pytest.raises(OracleSpaceOverflow) as exc:
        brute_force_answer_sets(g, DICE_GRID, cap=10**6)
    assert exc.value.size == 6**16


def test_company_answer_set_is_confirmed(company):
    g = ground_program(company)
    lattice = grade_lattice(g)
    (i,) = solve(company).answer_sets
    assert str(i) == expected_lines("company_fuzzy.expected")[0]
    assert is_answer_set(g, i, lattice.global_values)


def test_samples_fixture():
    g = ground_program(load("samples.dflp"))
    lattice = grade_lattice(g)
    (expected,) = solve(load("samples.dflp")).answer_sets
    assert brute_force_answer_sets(g, lattice.global_values) == [expected]
    assert str(expected) == expected_lines("samples.expected")[0]


def test_is_answer_set_rejects():
    g = ground("a : 0.5. b : 0.3 :- a : 0.5.")
    grid = ["0", "0.3", "0.5", "1"]
    assert is_answer_set(g, Interpretation({Atom("a"): "0.5", Atom("b"): "0.3"}), grid)
    assert not is_answer_set(g, Interpretation({Atom("a"): "0.5"}), grid)
    assert not is_answer_set(g, Interpretation({Atom("a"): "1", Atom("b"): "0.3"}), grid)


def test_refine_grid():
    assert refine_grid(["0", "1"]) == [F(0), F(1, 2), F(1)]
    assert refine_grid(["0.5"]) == [F(0), F(1, 4), F(1, 2), F(3, 4), F(1)]


@pytest.mark.parametrize("seed", range(15))
def test_answer_sets_stable_under_grid_refinement(seed):
    # constant annotations and no aggregates: answer-set grades come from the program constants
    cfg = GeneratorConfig(seed=seed, aggregate_probability=0, function_probability=0,
                          annotation_variable_probability=0, variable_probability=0, max_atoms=3)
    g = ground_program(generate_program(cfg))
    grid = sorted(grade_lattice(g).global_values)
    assert brute_force_answer_sets(g, grid) == brute_force_answer_sets(g, refine_grid(grid))


# differential harness

def test_zero_trials():
    assert differential_check(GeneratorConfig(), 0) == []


def test_solver_agrees_with_oracle():
    results = run_trials(GeneratorConfig(seed=500), 25, workers=1)
    assert [d for r in results for d in r.discrepancies] == []
    assert sum(r.checked for r in results) >= 20


def test_mutant_without_minimality_is_caught():
    found = differential_check(GeneratorConfig(seed=0, aggregate_probability=0), 10,
                               solver=no_minimality_check, workers=1)
    assert found
    assert {d.phase for d in found} == {"minimality"}


def test_discrepancy_fixture_round_trip(tmp_path):
    found = differential_check(GeneratorConfig(seed=3, aggregate_probability=0), 3,
                               solver=no_minimality_check, workers=1, fixture_dir=tmp_path)
    assert found
    loaded = load_discrepancies(tmp_path)
    # one file per (seed, phase); a later discrepancy of the same key overwrites
    last = {(d.seed, d.phase): d for d in found}
    assert {(d.seed, d.phase): d for d in loaded} == last
    for d in loaded:
        parse_program(d.program)


def test_discrepancy_text():
    d = Discrepancy("p :- not p.", 7, "evaluation", ("{ }",), (), "missed { }")
    assert Discrepancy.from_text(d.to_text()) == d
    assert parse_program(d.to_text()) == parse_program("p :- not p.")
    with pytest.raises(ValueError):
        Discrepancy("", 0, "typing")


def test_write_discrepancy_name(tmp_path):
    d = Discrepancy("a.", 4, "minimality")
    assert write_discrepancy(d, tmp_path).name == "seed-4-minimality.dflp"


def test_worker_count(monkeypatch):
    monkeypatch.setenv("FASOLVE_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("FASOLVE_THREADS", "junk")
    assert worker_count() == 1
