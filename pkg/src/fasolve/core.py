"""Grades, annotations, terms, atoms, fuzzy sets, rules, programs and interpretations.

Grades are exact :class:`fractions.Fraction` values in ``[0, 1]``.  Every AST
node is a frozen dataclass; the optional ``span`` field records where the node
came from in the source text and never takes part in equality or hashing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Iterator, Mapping, Optional, Union

from .errors import ArityMismatch, GradeRangeError, UnboundAnnotationVariable

Grade = Fraction
ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


def _span():
    return field(default=None, compare=False, repr=False)


def to_fraction(x) -> Fraction:
    """Exact conversion; floats go through their shortest repr so 0.55 == 11/20."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def make_grade(x) -> Fraction:
    g = to_fraction(x)
    if not ZERO <= g <= ONE:
        raise GradeRangeError(f"grade {format_number(g)} outside [0,1]")
    return g


def format_number(q: Fraction) -> str:
    """Shortest exact decimal when the expansion terminates, ``p/q`` otherwise."""
    q = to_fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    d, twos, fives = q.denominator, 0, 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{q.numerator}/{q.denominator}"
    places = max(twos, fives)
    digits = str(abs(q.numerator) * 10**places // q.denominator).rjust(places + 1, "0")
    sign = "-" if q < 0 else ""
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def join(a: Fraction, b: Fraction) -> Fraction:
    return max(a, b)


def meet(a: Fraction, b: Fraction) -> Fraction:
    return min(a, b)


# --------------------------------------------------------------------------
# Annotations


BUILTINS: dict[str, tuple[int, Callable[..., Fraction]]] = {
    "min": (2, min),
    "max": (2, max),
    "prod": (2, lambda x, y: x * y),
    "bsum": (2, lambda x, y: min(ONE, x + y)),
    "comp": (1, lambda x: ONE - x),
    "avg": (2, lambda x, y: (x + y) / 2),
}

# comp is the only order-reversing builtin
ANTIMONOTONE = frozenset({"comp"})


@dataclass(frozen=True)
class Const:
    value: Fraction
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        object.__setattr__(self, "value", make_grade(self.value))

    def __str__(self):
        return format_number(self.value)


@dataclass(frozen=True)
class AnnVar:
    name: str
    span: Optional[SourceSpan] = _span()

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class AnnFunc:
    op: str
    args: tuple
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if self.op not in BUILTINS:
            raise ValueError(f"unknown annotation function {self.op!r}")
        arity = BUILTINS[self.op][0]
        if len(self.args) != arity:
            raise ArityMismatch(f"{self.op} expects {arity} argument(s), got {len(self.args)}")

    def __str__(self):
        return f"{self.op}({','.join(str(a) for a in self.args)})"


Annotation = Union[Const, AnnVar, AnnFunc]
ONE_ANN = Const(ONE)


def eval_annotation(ann: Annotation, binding: Mapping[str, Fraction] = {}) -> Fraction:
    if isinstance(ann, Const):
        return ann.value
    if isinstance(ann, AnnVar):
        try:
            return binding[ann.name]
        except KeyError:
            raise UnboundAnnotationVariable(f"annotation variable {ann.name} is unbound") from None
    arity, fn = BUILTINS[ann.op]
    if len(ann.args) != arity:
        raise ArityMismatch(f"{ann.op} expects {arity} argument(s)")
    return fn(*(eval_annotation(a, binding) for a in ann.args))


def ann_vars(ann: Annotation) -> set[str]:
    if isinstance(ann, AnnVar):
        return {ann.name}
    if isinstance(ann, AnnFunc):
        return set().union(*(ann_vars(a) for a in ann.args))
    return set()


def ann_constants(ann: Annotation) -> Iterator[Fraction]:
    if isinstance(ann, Const):
        yield ann.value
    elif isinstance(ann, AnnFunc):
        for a in ann.args:
            yield from ann_constants(a)


def is_monotone(ann: Annotation, positive: bool = True) -> bool:
    """True when every variable occurrence sits under an even number of order-reversing calls."""
    if isinstance(ann, Const):
        return True
    if isinstance(ann, AnnVar):
        return positive
    flip = ann.op in ANTIMONOTONE
    return all(is_monotone(a, positive != flip) for a in ann.args)


# --------------------------------------------------------------------------
# Terms and atoms


@dataclass(frozen=True)
class Constant:
    """A symbolic constant (``str``) or an exact numeric constant (``Fraction``)."""

    value: Union[str, Fraction]
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        if not isinstance(self.value, str):
            object.__setattr__(self, "value", to_fraction(self.value))

    @property
    def is_numeric(self) -> bool:
        return isinstance(self.value, Fraction)

    def __str__(self):
        return self.value if isinstance(self.value, str) else format_number(self.value)


@dataclass(frozen=True)
class Var:
    name: str
    span: Optional[SourceSpan] = _span()

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class FuncTerm:
    name: str
    args: tuple
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    def __str__(self):
        return f"{self.name}({','.join(str(a) for a in self.args)})"


Term = Union[Constant, Var, FuncTerm]


def term_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, FuncTerm):
        return set().union(*(term_vars(a) for a in t.args))
    return set()


def term_depth(t: Term) -> int:
    if isinstance(t, FuncTerm):
        return 1 + max((term_depth(a) for a in t.args), default=0)
    return 0


def term_key(t: Term):
    """Sort key: numbers (numerically) before symbols before function terms."""
    if isinstance(t, Constant):
        return (0, t.value, "") if t.is_numeric else (1, 0, t.value)
    return (2, 0, str(t))


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple = ()
    span: Optional[SourceSpan] = _span()
    _hash: int = field(default=0, init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        # atoms are dictionary keys in every interpretation; hash once
        object.__setattr__(self, "_hash", hash((self.pred, self.args)))

    def __hash__(self):
        return self._hash

    @property
    def arity(self) -> int:
        return len(self.args)

    def vars(self) -> set[str]:
        return set().union(*(term_vars(a) for a in self.args)) if self.args else set()

    def __str__(self):
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class AnnotatedAtom:
    atom: Atom
    ann: Annotation = ONE_ANN
    span: Optional[SourceSpan] = _span()

    def __str__(self):
        return f"{self.atom} : {self.ann}"


# --------------------------------------------------------------------------
# Fuzzy sets and aggregate atoms

AGGREGATE_FUNCTIONS = ("sum_f", "times_f", "min_f", "max_f", "count_f")
NUMERIC_AGGREGATES = frozenset({"sum_f", "times_f", "min_f", "max_f"})
COMPARATORS = ("=", "!=", "<", ">", "<=", ">=")


@dataclass(frozen=True)
class SetElement:
    """``item : grade | conj``; symbolic while it has object variables, a ground pair otherwise."""

    item: Term
    grade: Annotation
    conj: tuple
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        object.__setattr__(self, "conj", tuple(self.conj))

    def vars(self) -> set[str]:
        out = term_vars(self.item)
        for a in self.conj:
            out |= a.atom.vars()
        return out

    def __str__(self):
        return f"{self.item} : {self.grade} | {', '.join(str(a) for a in self.conj)}"


@dataclass(frozen=True)
class FuzzySet:
    elements: tuple
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))

    def vars(self) -> set[str]:
        return set().union(*(e.vars() for e in self.elements)) if self.elements else set()

    def __str__(self):
        return "{ " + " ; ".join(str(e) for e in self.elements) + " }"


@dataclass(frozen=True)
class AggregateAtom:
    fn: str
    fset: FuzzySet
    cmp: str
    guard: Term
    ann: Annotation = ONE_ANN
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        if self.fn not in AGGREGATE_FUNCTIONS:
            raise ValueError(f"unknown aggregate {self.fn!r}")
        if self.cmp not in COMPARATORS:
            raise ValueError(f"unknown comparator {self.cmp!r}")

    def __str__(self):
        return f"#{self.fn}{self.fset} {self.cmp} {self.guard} : {self.ann}"


Literal = Union[AnnotatedAtom, AggregateAtom]


@dataclass(frozen=True)
class Rule:
    head: tuple
    pos: tuple = ()
    neg: tuple = ()
    span: Optional[SourceSpan] = _span()

    def __post_init__(self):
        for name in ("head", "pos", "neg"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not self.head:
            raise ValueError("rule head must be non-empty")
        if any(not isinstance(h, AnnotatedAtom) for h in self.head):
            raise ValueError("rule heads contain annotated atoms only")

    @property
    def is_fact(self) -> bool:
        return not self.pos and not self.neg

    def body(self) -> Iterator[tuple[bool, Literal]]:
        for lit in self.pos:
            yield True, lit
        for lit in self.neg:
            yield False, lit

    def atoms(self) -> Iterator[Atom]:
        """Every atom mentioned anywhere in the rule, aggregate conjunctions included."""
        for h in self.head:
            yield h.atom
        for _, lit in self.body():
            if isinstance(lit, AnnotatedAtom):
                yield lit.atom
            else:
                for e in lit.fset.elements:
                    for a in e.conj:
                        yield a.atom

    def __str__(self):
        text = " | ".join(str(h) for h in self.head)
        body = [str(l) for l in self.pos] + [f"not {l}" for l in self.neg]
        if body:
            text += " :- " + ", ".join(body)
        return text + "."


@dataclass(frozen=True)
class Program:
    rules: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))

    def atoms(self) -> list[Atom]:
        seen = dict.fromkeys(a for r in self.rules for a in r.atoms())
        return sorted(seen, key=str)

    def __str__(self):
        return "\n".join(str(r) for r in self.rules)


def binders(lits: Iterable[Literal]) -> dict[str, list[Atom]]:
    """Annotation variables bound by plain atoms annotated with a bare variable."""
    out: dict[str, list[Atom]] = {}
    for lit in lits:
        if isinstance(lit, AnnotatedAtom) and isinstance(lit.ann, AnnVar):
            out.setdefault(lit.ann.name, []).append(lit.atom)
    return out


# --------------------------------------------------------------------------
# Interpretations


class Interpretation:
    """Total map from ground atoms to grades; atoms not stored have grade 0."""

    __slots__ = ("_grades", "_hash")

    def __init__(self, grades: Union[Mapping[Atom, Any], Iterable[tuple[Atom, Any]]] = ()):
        items = grades.items() if isinstance(grades, Mapping) else grades
        clean = {}
        for atom, g in items:
            g = make_grade(g)
            if g:
                clean[atom] = g
        self._grades = clean
        self._hash = None

    @classmethod
    def _trusted(cls, grades: dict) -> "Interpretation":
        obj = cls.__new__(cls)
        obj._grades = grades
        obj._hash = None
        return obj

    def __getitem__(self, atom: Atom) -> Fraction:
        return self._grades.get(atom, ZERO)

    get = __getitem__

    def support(self) -> list[Atom]:
        return list(self._grades)

    def items(self):
        return self._grades.items()

    def as_dict(self) -> dict[Atom, Fraction]:
        return dict(self._grades)

    def __len__(self):
        return len(self._grades)

    def __eq__(self, other):
        if not isinstance(other, Interpretation):
            return NotImplemented
        return self._grades == other._grades

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._grades.items()))
        return self._hash

    def __le__(self, other):
        return interp_leq(self, other)

    def __lt__(self, other):
        return interp_leq(self, other) and self != other

    def sort_key(self):
        return sorted((str(a), g) for a, g in self._grades.items())

    def __str__(self):
        entries = sorted((str(a), g) for a, g in self._grades.items())
        if not entries:
            return "{ }"
        return "{ " + ", ".join(f"{a}:{format_number(g)}" for a, g in entries) + " }"

    def __repr__(self):
        return f"Interpretation({self})"


def interp_leq(i1: Interpretation, i2: Interpretation) -> bool:
    return all(g <= i2[a] for a, g in i1.items())
