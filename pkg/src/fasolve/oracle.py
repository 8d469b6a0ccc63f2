"""Random program generation and a brute-force reference for answer sets.

The reference deliberately shares nothing with :mod:`fasolve.solver` or
:mod:`fasolve.aggregates`: it has its own satisfaction checker and walks a
uniform grade grid instead of the per-atom lattice.  ``differential_check``
runs both on generated programs and reports every disagreement.
"""

from __future__ import annotations

import logging
import math
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

from .core import (
    ONE,
    ONE_ANN,
    ZERO,
    AggregateAtom,
    AnnFunc,
    AnnotatedAtom,
    AnnVar,
    Atom,
    Const,
    Constant,
    FuzzySet,
    Interpretation,
    Program,
    Rule,
    SetElement,
    Var,
    eval_annotation,
    is_monotone,
    to_fraction,
)
from .errors import FasolveError, OracleSpaceOverflow

log = logging.getLogger(__name__)

DEFAULT_ORACLE_CAP = 2**20
PHASES = ("grounding", "evaluation", "minimality")
MONOTONE_OPS = ("min", "max", "prod", "bsum", "avg")
_CMPS = ("=", "!=", "<", ">", "<=", ">=")


# --------------------------------------------------------------------------
# Generation


@dataclass(frozen=True)
class GeneratorConfig:
    max_atoms: int = 4
    max_rules: int = 4
    max_disjuncts: int = 2
    max_body_lits: int = 2
    grade_pool: tuple = (Fraction(3, 10), Fraction(1, 2), Fraction(4, 5), ONE)
    aggregate_probability: float = 0.25
    negation_probability: float = 0.3
    function_probability: float = 0.2
    annotation_variable_probability: float = 0.3
    variable_probability: float = 0.2
    seed: int = 0

    def __post_init__(self):
        for name in ("max_atoms", "max_rules", "max_disjuncts", "max_body_lits"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.max_rules and (self.max_atoms < 1 or self.max_disjuncts < 1):
            raise ValueError("max_atoms and max_disjuncts must be positive when rules are generated")
        if not self.grade_pool:
            raise ValueError("grade_pool must not be empty")
        object.__setattr__(self, "grade_pool", tuple(to_fraction(g) for g in self.grade_pool))


class _Gen:
    def __init__(self, cfg: GeneratorConfig, classical: bool):
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.classical = classical
        self.props = [Atom(f"p{k}") for k in range(cfg.max_atoms)]
        self.data = [Atom("w", [Constant(k)]) for k in (1, 2)]
        uses_data = cfg.aggregate_probability > 0 or cfg.variable_probability > 0
        self.heads = self.props + (self.data if uses_data else [])
        derived = [Atom("q", [Constant(k)]) for k in (1, 2)] if cfg.variable_probability > 0 else []
        self.bodies = self.heads + derived

    def chance(self, p) -> bool:
        return self.rng.random() < p

    def grade(self):
        return ONE_ANN if self.classical else Const(self.rng.choice(self.cfg.grade_pool))

    def derived_ann(self, bound: list[str]):
        """Constant, bound variable or a monotone function of those."""
        if self.classical:
            return ONE_ANN
        if bound and self.chance(self.cfg.function_probability):
            op = self.rng.choice(MONOTONE_OPS)
            args = [AnnVar(self.rng.choice(bound)) if self.chance(0.6) else self.grade() for _ in range(2)]
            return AnnFunc(op, args)
        if bound and self.chance(0.5):
            return AnnVar(self.rng.choice(bound))
        return self.grade()

    def aggregate(self, k: int = 0) -> AggregateAtom:
        # set variables must not repeat across the rule or they stop being local
        suffix = str(k) if k else ""
        fn = self.rng.choice(("sum_f", "times_f", "min_f", "max_f", "count_f"))
        item = Var("Y" + suffix)
        cond = Atom("w", [item])
        if not self.classical and self.chance(self.cfg.annotation_variable_probability):
            s = AnnVar("S" + suffix)
            element = SetElement(item, s, [AnnotatedAtom(cond, s)])
        else:
            g = self.grade()
            element = SetElement(item, g, [AnnotatedAtom(cond, g)])
        guard = Constant(self.rng.randint(0, 3))
        return AggregateAtom(fn, FuzzySet([element]), self.rng.choice(_CMPS), guard, self.grade())

    def rule(self) -> Rule:
        cfg, rng = self.cfg, self.rng
        relational = self.chance(cfg.variable_probability)
        pos, neg, bound = [], [], []
        shapes = []  # (negated, atom or None for an aggregate, binds)
        n_body = rng.randint(1 if relational else 0, max(cfg.max_body_lits, 1 if relational else 0))
        for k in range(n_body):
            if relational and k == 0:
                shapes.append((False, Atom("w", [Var("X")]), False))
                continue
            negated = self.chance(cfg.negation_probability)
            if self.chance(cfg.aggregate_probability):
                shapes.append((negated, None, False))
                continue
            binds = (not negated and not self.classical
                     and self.chance(cfg.annotation_variable_probability))
            shapes.append((negated, rng.choice(self.bodies), binds))
        for negated, atom, binds in shapes:
            if binds:
                bound.append(f"U{len(bound)}")
        names = iter(bound)
        n_aggs = 0
        for negated, atom, binds in shapes:
            if atom is None:
                lit = self.aggregate(n_aggs)
                n_aggs += 1
            elif binds:
                lit = AnnotatedAtom(atom, AnnVar(next(names)))
            elif negated:
                lit = AnnotatedAtom(atom, self.grade())
            else:
                lit = AnnotatedAtom(atom, self.derived_ann(bound))
            (neg if negated else pos).append(lit)
        k = rng.randint(1, min(cfg.max_disjuncts, len(self.heads)))
        heads = rng.sample(self.heads, k)
        if relational:
            heads[0] = Atom("q", [Var("X")])
        return Rule([AnnotatedAtom(h, self.derived_ann(bound)) for h in heads], pos, neg)

    def program(self) -> Program:
        if self.cfg.max_rules == 0:
            return Program(())
        n = self.rng.randint(1, self.cfg.max_rules)
        return Program([self.rule() for _ in range(n)])


def generate_program(cfg: GeneratorConfig) -> Program:
    """A safe program within the bounds of ``cfg``; the same seed gives the same program."""
    return _Gen(cfg, classical=False).program()


def generate_classical_program(cfg: GeneratorConfig):
    """Like :func:`generate_program` with every annotation fixed at 1, returned annotation-free."""
    from .classical import erase

    return erase(_Gen(cfg, classical=True).program())


# --------------------------------------------------------------------------
# Independent satisfaction checker


def _bindings(conj, i: Interpretation) -> dict:
    out = {}
    for lit in conj:
        if isinstance(lit, AnnotatedAtom) and isinstance(lit.ann, AnnVar):
            out.setdefault(lit.ann.name, []).append(i[lit.atom])
    return {name: min(gs) for name, gs in out.items()}


def _pairs(fset: FuzzySet, i: Interpretation) -> list:
    pairs = []
    for e in fset.elements:
        env = _bindings(e.conj, i)
        if any(i[a.atom] < eval_annotation(a.ann, env) for a in e.conj):
            continue
        g = eval_annotation(e.grade, env)
        if g == ZERO:
            continue
        item = e.item.value if isinstance(e.item, Constant) and e.item.is_numeric else e.item
        pairs.append((item, g))
    return pairs


def aggregate_result(fn: str, pairs: list):
    """``(value, grade)`` or None when undefined."""
    if not pairs:
        return {"sum_f": (ZERO, ONE), "times_f": (ONE, ONE), "count_f": (0, ONE)}.get(fn)
    items = [x for x, _ in pairs]
    grade = min(g for _, g in pairs)
    if fn == "count_f":
        return len(items), grade
    if fn == "sum_f":
        return sum(items), grade
    if fn == "times_f":
        return math.prod(items), grade
    return (min(items) if fn == "min_f" else max(items)), grade


def _compare(x, cmp: str, y) -> bool:
    return {"=": x == y, "!=": x != y, "<": x < y, ">": x > y, "<=": x <= y, ">=": x >= y}[cmp]


def _positive_holds(lit, i: Interpretation, env) -> bool:
    mu = eval_annotation(lit.ann, env)
    if isinstance(lit, AnnotatedAtom):
        return mu <= i[lit.atom]
    res = aggregate_result(lit.fn, _pairs(lit.fset, i))
    if res is None:
        return False
    value, grade = res
    return _compare(value, lit.cmp, lit.guard.value) and mu <= grade


def body_env(r: Rule, i: Interpretation) -> Optional[dict]:
    env = _bindings(r.pos, i)
    if not all(_positive_holds(l, i, env) for l in r.pos):
        return None
    if any(_positive_holds(l, i, env) for l in r.neg):
        return None
    return env


def rule_holds(r: Rule, i: Interpretation) -> bool:
    env = body_env(r, i)
    return env is None or any(eval_annotation(h.ann, env) <= i[h.atom] for h in r.head)


def is_model(rules: Iterable[Rule], i: Interpretation) -> bool:
    return all(rule_holds(r, i) for r in rules)


def fuzzy_reduct(rules: Iterable[Rule], i: Interpretation) -> list[Rule]:
    return [r for r in rules if body_env(r, i) is not None]


# --------------------------------------------------------------------------
# Brute force over a uniform grid


def _search_atoms(rules: Sequence[Rule]) -> list[Atom]:
    """Atoms worth enumerating.  With order-preserving head annotations an answer
    set is zero outside rule heads (zeroing those atoms keeps every reduct rule
    satisfied), so only head atoms are searched."""
    everything = {a for r in rules for a in r.atoms()}
    if all(is_monotone(h.ann) for r in rules for h in r.head):
        everything = {h.atom for r in rules for h in r.head}
    return sorted(everything, key=str)


def _models(rules: Sequence[Rule], atoms: list[Atom], domains: list[list[Fraction]],
            fixed: dict, stop_early: Optional[Callable] = None) -> Iterable[Interpretation]:
    """Depth-first enumeration of models; each rule is checked once all its atoms are set."""
    position = {a: k for k, a in enumerate(atoms)}
    ready: list[list[Rule]] = [[] for _ in atoms]
    always = []
    for r in rules:
        depth = max((position[a] for a in r.atoms() if a in position), default=-1)
        (ready[depth] if depth >= 0 else always).append(r)
    current = {a: g for a, g in fixed.items() if g}
    if not is_model(always, Interpretation._trusted(dict(current))):
        return

    def walk(k):
        if k == len(atoms):
            yield Interpretation._trusted(dict(current))
            return
        a = atoms[k]
        for v in domains[k]:
            if v:
                current[a] = v
            else:
                current.pop(a, None)
            if is_model(ready[k], Interpretation._trusted(current)):
                yield from walk(k + 1)
        current.pop(a, None)

    yield from walk(0)


def _pareto_minimal(models: list[Interpretation]) -> list[Interpretation]:
    models = sorted(models, key=lambda m: sum(g for _, g in m.items()))
    kept: list[Interpretation] = []
    for m in models:
        if not any(k <= m for k in kept):
            kept.append(m)
    return kept


def _downset_has_model(rules, i: Interpretation, atoms, grid) -> bool:
    """Some interpretation strictly below ``i`` on the grid satisfies ``rules``."""
    domains = [[v for v in grid if v <= i[a]] for a in atoms]
    return any(j != i for j in _models(rules, atoms, domains, {}))


def is_answer_set(program, i: Interpretation, grid: Iterable[Fraction]) -> bool:
    """``i`` is a model of ``program`` and minimal, on ``grid``, among models of its reduct."""
    rules = list(program.rules if hasattr(program, "rules") else program)
    if not is_model(rules, i):
        return False
    grid = sorted({to_fraction(g) for g in grid} | {ZERO} | {g for _, g in i.items()})
    atoms = sorted({a for r in rules for a in r.atoms()} | set(i.support()), key=str)
    return not _downset_has_model(fuzzy_reduct(rules, i), i, atoms, grid)


def brute_force_answer_sets(program, grid: Iterable[Fraction], cap: int = DEFAULT_ORACLE_CAP) -> list[Interpretation]:
    """Every answer set of a ground program whose grades lie on ``grid``.

    Answer sets are minimal models of the program itself (a model below one
    would also satisfy its reduct), so the search collects the models, keeps
    the minimal ones and then checks each against its own reduct.
    """
    rules = list(program.rules)
    grid = sorted(set(to_fraction(g) for g in grid) | {ZERO})
    atoms = _search_atoms(rules)
    size = len(grid) ** len(atoms)
    if size > cap:
        raise OracleSpaceOverflow(
            f"{len(grid)} grades over {len(atoms)} atoms is {size} interpretations, cap is {cap}", size)
    models = list(_models(rules, atoms, [grid] * len(atoms), {}))
    found = []
    for m in _pareto_minimal(models):
        if not _downset_has_model(fuzzy_reduct(rules, m), m, atoms, grid):
            found.append(m)
    return sorted(found, key=Interpretation.sort_key)


def refine_grid(grid: Iterable[Fraction]) -> list[Fraction]:
    """Add the midpoint between every pair of neighbouring grades."""
    g = sorted({to_fraction(x) for x in grid} | {ZERO, ONE})
    return sorted(set(g) | {(a + b) / 2 for a, b in zip(g, g[1:])})


# --------------------------------------------------------------------------
# Differential checking


@dataclass(frozen=True)
class Discrepancy:
    program: str
    seed: int
    phase: str
    expected: tuple = ()
    actual: tuple = ()
    detail: str = ""

    def __post_init__(self):
        if self.phase not in PHASES:
            raise ValueError(f"unknown phase {self.phase!r}")

    def to_text(self) -> str:
        lines = [f"% seed: {self.seed}", f"% phase: {self.phase}"]
        if self.detail:
            lines.append(f"% detail: {self.detail}")
        for label, sets in (("expected", self.expected), ("actual", self.actual)):
            lines.extend(f"% {label}: {s}" for s in sets)
            if not sets:
                lines.append(f"% {label}: none")
        return "\n".join(lines) + "\n" + self.program + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Discrepancy":
        header: dict[str, list[str]] = {}
        body = []
        for line in text.splitlines():
            if line.startswith("% ") and ": " in line:
                key, value = line[2:].split(": ", 1)
                header.setdefault(key, []).append(value)
            else:
                body.append(line)
        sets = lambda key: tuple(v for v in header.get(key, []) if v != "none")
        return cls("\n".join(body).strip(), int(header["seed"][0]), header["phase"][0],
                   sets("expected"), sets("actual"), header.get("detail", [""])[0])


def write_discrepancy(d: Discrepancy, directory) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"seed-{d.seed}-{d.phase}.dflp"
    path.write_text(d.to_text(), encoding="utf-8")
    return path


def load_discrepancies(directory) -> list[Discrepancy]:
    return [Discrepancy.from_text(p.read_text(encoding="utf-8"))
            for p in sorted(Path(directory).glob("seed-*.dflp"))]


def default_solver(ground, lattice) -> list[Interpretation]:
    from .solver import enumerate_answer_sets

    return [r.interpretation for r in enumerate_answer_sets(ground, lattice)]


@dataclass
class TrialResult:
    seed: int
    checked: bool
    discrepancies: list = field(default_factory=list)
    answer_sets: int = 0


def run_trial(cfg: GeneratorConfig, solver: Optional[Callable] = None,
              oracle_cap: int = DEFAULT_ORACLE_CAP) -> TrialResult:
    """Generate the program for ``cfg.seed`` and compare solver and oracle on it."""
    from .grounder import grade_lattice, ground_program

    solver = solver or default_solver
    program = generate_program(cfg)
    text = str(program)
    seed = cfg.seed
    try:
        ground = ground_program(program)
        lattice = grade_lattice(ground)
    except FasolveError as exc:
        return TrialResult(seed, True, [Discrepancy(text, seed, "grounding", detail=str(exc))])
    grid = sorted(lattice.global_values)
    actual = solver(ground, lattice)
    shown = lambda sets: tuple(str(s) for s in sets)
    issues = []

    for i in actual:
        if not is_model(ground.rules, i):
            issues.append(("evaluation", f"{i} is not a model"))
    for a in actual:
        for b in actual:
            if a != b and a <= b:
                issues.append(("minimality", f"{a} <= {b}"))
    try:
        expected = brute_force_answer_sets(ground, grid, oracle_cap)
    except OracleSpaceOverflow:
        expected = None
    if expected is not None:
        extra = set(actual) - set(expected)
        missing = set(expected) - set(actual)
        for i in sorted(extra, key=Interpretation.sort_key):
            if is_model(ground.rules, i):
                issues.append(("minimality", f"{i} is not minimal"))
        if missing:
            issues.append(("evaluation", f"missed {', '.join(str(i) for i in missing)}"))
    else:
        for i in actual:
            if is_model(ground.rules, i) and not is_answer_set(ground, i, grid):
                issues.append(("minimality", f"{i} is not minimal"))
    out = [Discrepancy(text, seed, phase, shown(expected or ()), shown(actual), detail)
           for phase, detail in dict.fromkeys(issues)]
    return TrialResult(seed, expected is not None, out, len(actual))


def _run_seed(args):
    cfg, seed, cap = args
    return run_trial(replace(cfg, seed=seed), oracle_cap=cap)


def worker_count(default: int = 1) -> int:
    try:
        return max(1, int(os.environ.get("FASOLVE_THREADS", default)))
    except ValueError:
        return default


def run_trials(cfg: GeneratorConfig, trials: int, solver: Optional[Callable] = None,
               oracle_cap: int = DEFAULT_ORACLE_CAP, workers: Optional[int] = None) -> list[TrialResult]:
    """One :class:`TrialResult` per seed ``cfg.seed, cfg.seed + 1, ...``, in seed order."""
    seeds = [cfg.seed + k for k in range(trials)]
    workers = worker_count() if workers is None else workers
    if solver is None and workers > 1 and trials > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_run_seed, [(cfg, s, oracle_cap) for s in seeds]))
    return [run_trial(replace(cfg, seed=s), solver, oracle_cap) for s in seeds]


def differential_check(cfg: GeneratorConfig, trials: int, solver: Optional[Callable] = None,
                       oracle_cap: int = DEFAULT_ORACLE_CAP, workers: Optional[int] = None,
                       fixture_dir=None) -> list[Discrepancy]:
    """Solver against oracle on ``trials`` generated programs; empty means they agree."""
    found = [d for t in run_trials(cfg, trials, solver, oracle_cap, workers) for d in t.discrepancies]
    if fixture_dir is not None:
        for d in found:
            write_discrepancy(d, fixture_dir)
    return found
