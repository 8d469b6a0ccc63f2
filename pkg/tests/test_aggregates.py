import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fasolve.aggregates import Defined, build_multiset, eval_aggregate, satisfies_aggregate_atom
from fasolve.core import AggregateAtom, AnnotatedAtom, Atom, Const, Constant, FuzzySet, Interpretation, SetElement
from fasolve.errors import GuardTypeMismatch
from fasolve.grounder import ground_program
from fasolve.parser import parse_program


def atom(pred, *args):
    return Atom(pred, [Constant(a) for a in args])


@pytest.fixture
def dice_agg(dice):
    return ground_program(dice).rules[2].pos[0]


I = Interpretation({atom("a", 1, 2): "0.4", atom("a", 2, 2): "0.9"})
I_PRIME = Interpretation({atom("a", 1, 1): "0.8", atom("a", 2, 2): "0.9"})


def test_dice_multisets(dice_agg):
    assert sorted(build_multiset(dice_agg.fset, I)) == [(2, F(2, 5)), (2, F(9, 10))]
    assert sorted(build_multiset(dice_agg.fset, I_PRIME)) == [(1, F(4, 5)), (2, F(9, 10))]
    assert build_multiset(dice_agg.fset, Interpretation()) == ()


def test_dice_min(dice_agg):
    assert eval_aggregate("min_f", build_multiset(dice_agg.fset, I)) == Defined(2, F(2, 5))
    assert eval_aggregate("min_f", build_multiset(dice_agg.fset, I_PRIME)) == Defined(1, F(4, 5))


def test_dice_aggregate_atom(dice_agg):
    assert not satisfies_aggregate_atom(dice_agg, I)
    assert satisfies_aggregate_atom(dice_agg, I_PRIME)
    assert satisfies_aggregate_atom(dice_agg, I, negated=True)


@pytest.mark.parametrize("fn, result", [
    ("sum_f", Defined(0, 1)),
    ("times_f", Defined(1, 1)),
    ("count_f", Defined(0, 1)),
    ("min_f", None),
    ("max_f", None),
])
def test_empty_multiset(fn, result):
    assert eval_aggregate(fn, ()) == result


def test_sample_sum():
    assert eval_aggregate("sum_f", ((F(2), F(2, 5)), (F(5), F(7, 10)))) == Defined(7, F(2, 5))


def test_all_functions():
    m = ((F(2), F(1, 2)), (F(3), F(3, 10)), (F(2), F(9, 10)))
    assert eval_aggregate("sum_f", m) == Defined(7, F(3, 10))
    assert eval_aggregate("times_f", m) == Defined(12, F(3, 10))
    assert eval_aggregate("min_f", m) == Defined(2, F(3, 10))
    assert eval_aggregate("max_f", m) == Defined(3, F(3, 10))
    assert eval_aggregate("count_f", m) == Defined(3, F(3, 10))


def test_count_over_symbols():
    g = ground_program(parse_program("p(a) : 0.5. p(b) : 0.7. c :- #count_f{ X : U | p(X) : U } = 2 : 0.5."))
    agg = g.rules[2].pos[0]
    i = Interpretation({atom("p", "a"): "0.5", atom("p", "b"): "0.7"})
    assert eval_aggregate("count_f", build_multiset(agg.fset, i)) == Defined(2, F(1, 2))


def test_negated_min_over_empty_is_true():
    elem = SetElement(Constant(1), Const(F(1)), [AnnotatedAtom(atom("q", 1))])
    agg = AggregateAtom("min_f", FuzzySet([elem]), "<", Constant(5))
    assert not satisfies_aggregate_atom(agg, Interpretation())
    assert satisfies_aggregate_atom(agg, Interpretation(), negated=True)


def test_zero_grade_pairs_are_excluded():
    # the conjunct a : 0 holds everywhere, but a pair graded 0 is not a member
    g = ground_program(parse_program("a(1) : 0.5. p :- #count_f{ X : U | a(X) : U } = 0."))
    agg = g.rules[1].pos[0]
    assert build_multiset(agg.fset, Interpretation()) == ()
    assert len(build_multiset(agg.fset, Interpretation({atom("a", 1): "0.5"}))) == 1


def test_non_numeric_guard():
    agg = AggregateAtom("sum_f", FuzzySet([]), ">", Constant("a"))
    with pytest.raises(GuardTypeMismatch):
        satisfies_aggregate_atom(agg, Interpretation())


GRID = [F(0), F(3, 10), F(1, 2), F(4, 5), F(1)]
ATOMS = [atom("w", k) for k in (1, 2, 3)]


def constant_set(rng):
    elements = []
    for a in ATOMS:
        g = Const(rng.choice(GRID[1:]))
        elements.append(SetElement(a.args[0], g, [AnnotatedAtom(a, g)]))
    return FuzzySet(elements)


interps = st.lists(st.sampled_from(GRID), min_size=3, max_size=3).map(
    lambda gs: Interpretation(dict(zip(ATOMS, gs))))


@given(st.integers(0, 10**6), interps, interps)
def test_constant_sets_grow_with_the_interpretation(seed, i1, i2):
    s = constant_set(random.Random(seed))
    lo = Interpretation({a: min(i1[a], i2[a]) for a in ATOMS})
    small, big = list(build_multiset(s, lo)), list(build_multiset(s, i2))
    for pair in small:
        big.remove(pair)  # raises if not a sub-multiset


@given(st.integers(0, 10**6), interps, st.sampled_from(["sum_f", "times_f", "min_f", "max_f", "count_f"]))
def test_grade_component_is_meet(seed, i, fn):
    m = build_multiset(constant_set(random.Random(seed)), i)
    res = eval_aggregate(fn, m)
    if m:
        assert res.grade == min(g for _, g in m)


@given(st.integers(0, 10**6), interps, st.sampled_from(["sum_f", "times_f", "min_f", "max_f", "count_f"]),
       st.sampled_from(["=", "!=", "<", ">", "<=", ">="]), st.integers(0, 7), st.sampled_from(GRID))
def test_aggregate_and_negation_are_complementary(seed, i, fn, cmp, guard, mu):
    agg = AggregateAtom(fn, constant_set(random.Random(seed)), cmp, Constant(guard), Const(mu))
    assert satisfies_aggregate_atom(agg, i) != satisfies_aggregate_atom(agg, i, negated=True)
