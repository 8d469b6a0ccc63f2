"""Interpreted fuzzy multisets and the five fuzzy aggregate functions.

An aggregate result is either :class:`Defined` or ``None``; ``None`` stands
for the undefined value (min_f / max_f over an empty multiset).
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Union

from .core import (
    ONE,
    ZERO,
    AggregateAtom,
    AnnVar,
    Constant,
    FuzzySet,
    Interpretation,
    SetElement,
    Term,
    eval_annotation,
)
from .errors import GuardTypeMismatch

_CMP = {
    "=": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    ">": operator.gt,
    "<=": operator.le,
    ">=": operator.ge,
}


@dataclass(frozen=True)
class Defined:
    value: Union[Fraction, int]
    grade: Fraction


_EMPTY = {"sum_f": Defined(ZERO, ONE), "times_f": Defined(ONE, ONE), "count_f": Defined(0, ONE)}

FuzzyMultiset = tuple  # of (item, grade) pairs; item is a Fraction or, for count_f, any ground term


def compare(x, cmp: str, guard: Term) -> bool:
    if not (isinstance(guard, Constant) and guard.is_numeric):
        raise GuardTypeMismatch(f"aggregate guard {guard} is not numeric")
    return _CMP[cmp](x, guard.value)


def element_binding(e: SetElement, i: Interpretation) -> dict[str, Fraction]:
    binding: dict[str, Fraction] = {}
    for a in e.conj:
        if isinstance(a.ann, AnnVar):
            g = i[a.atom]
            binding[a.ann.name] = min(g, binding.get(a.ann.name, ONE))
    return binding


def _item_value(t: Term):
    if isinstance(t, Constant) and t.is_numeric:
        return t.value
    return t


def build_multiset(s: FuzzySet, i: Interpretation) -> FuzzyMultiset:
    """Pairs whose conjunction holds under ``i`` and whose bound grade is positive."""
    out = []
    for e in s.elements:
        binding = element_binding(e, i)
        if all(eval_annotation(a.ann, binding) <= i[a.atom] for a in e.conj):
            grade = eval_annotation(e.grade, binding)
            if grade > ZERO:
                out.append((_item_value(e.item), grade))
    return tuple(out)


def eval_aggregate(fn: str, m: FuzzyMultiset) -> Optional[Defined]:
    if not m:
        return _EMPTY.get(fn)
    grade = min(g for _, g in m)
    if fn == "count_f":
        return Defined(len(m), grade)
    items = [x for x, _ in m]
    if any(not isinstance(x, Fraction) for x in items):
        raise TypeError(f"{fn} needs numeric items")
    if fn == "sum_f":
        value = sum(items, ZERO)
    elif fn == "times_f":
        value = math.prod(items, start=ONE)
    elif fn == "min_f":
        value = min(items)
    else:
        value = max(items)
    return Defined(value, grade)


def satisfies_aggregate_atom(atom: AggregateAtom, i: Interpretation, negated: bool = False,
                             binding: Mapping[str, Fraction] = {}) -> bool:
    """Positive form: defined, value passes the guard and annotation <= result grade.
    The negated form is the exact complement."""
    mu = eval_annotation(atom.ann, binding)
    res = eval_aggregate(atom.fn, build_multiset(atom.fset, i))
    holds = res is not None and compare(res.value, atom.cmp, atom.guard) and mu <= res.grade
    return holds != negated
