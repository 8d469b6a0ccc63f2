"""Random syntactic ASTs for printer/parser round trips (no safety or grounding constraints)."""

import random
from fractions import Fraction

from fasolve.core import (
    AGGREGATE_FUNCTIONS,
    BUILTINS,
    COMPARATORS,
    AggregateAtom,
    AnnFunc,
    AnnotatedAtom,
    AnnVar,
    Atom,
    Const,
    Constant,
    FuncTerm,
    FuzzySet,
    Program,
    Rule,
    SetElement,
    Var,
)

PREDICATES = {"p": 0, "q": 1, "r": 2, "s": 3, "ownsStk": 3}
FUNCTIONS = {"f": 1, "g": 2}
SYMBOLS = ("a", "b", "c", "acme", "x_1")
OBJ_VARS = ("X", "Y", "Z", "C1")
ANN_VARS = ("U", "V", "W")
GRADES = (Fraction(0), Fraction(1), Fraction(1, 2), Fraction(3, 10), Fraction(1, 3), Fraction(7, 8))


class AstGen:
    def __init__(self, seed):
        self.rng = random.Random(seed)

    def number(self):
        rng = self.rng
        return Fraction(rng.randint(-50, 120), rng.choice((1, 1, 2, 4, 10, 3)))

    def term(self, depth=0):
        k = self.rng.randrange(4 if depth < 2 else 3)
        if k == 0:
            return Constant(self.rng.choice(SYMBOLS))
        if k == 1:
            return Constant(self.number())
        if k == 2:
            return Var(self.rng.choice(OBJ_VARS))
        name = self.rng.choice(sorted(FUNCTIONS))
        return FuncTerm(name, [self.term(depth + 1) for _ in range(FUNCTIONS[name])])

    def atom(self):
        pred = self.rng.choice(sorted(PREDICATES))
        return Atom(pred, [self.term() for _ in range(PREDICATES[pred])])

    def annotation(self, depth=0):
        k = self.rng.randrange(3 if depth < 2 else 2)
        if k == 0:
            return Const(self.rng.choice(GRADES))
        if k == 1:
            return AnnVar(self.rng.choice(ANN_VARS))
        op = self.rng.choice(sorted(BUILTINS))
        return AnnFunc(op, [self.annotation(depth + 1) for _ in range(BUILTINS[op][0])])

    def annotated(self):
        return AnnotatedAtom(self.atom(), self.annotation())

    def aggregate(self):
        rng = self.rng
        elements = [SetElement(self.term(), self.annotation(), [self.annotated() for _ in range(rng.randint(1, 2))])
                    for _ in range(rng.randint(1, 3))]
        guard = Constant(self.number()) if rng.random() < 0.8 else Var(rng.choice(OBJ_VARS))
        return AggregateAtom(rng.choice(AGGREGATE_FUNCTIONS), FuzzySet(elements), rng.choice(COMPARATORS),
                             guard, self.annotation())

    def literal(self):
        return self.aggregate() if self.rng.random() < 0.25 else self.annotated()

    def rule(self):
        rng = self.rng
        head = [self.annotated() for _ in range(rng.randint(1, 3))]
        pos = [self.literal() for _ in range(rng.randint(0, 3))]
        neg = [self.literal() for _ in range(rng.randint(0, 2))]
        return Rule(head, pos, neg)

    def program(self, max_rules=5):
        return Program([self.rule() for _ in range(self.rng.randint(0, max_rules))])


def random_program(seed, max_rules=5):
    return AstGen(seed).program(max_rules)
