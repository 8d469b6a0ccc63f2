"""Answer sets for disjunctive logic programs with fuzzy annotations and fuzzy aggregates."""

from .aggregates import Defined, build_multiset, eval_aggregate, satisfies_aggregate_atom
from .classical import (
    ClassicalProgram,
    classical_oracle,
    embed,
    erase,
    extract,
    parse_classical,
    print_classical,
)
from .core import (
    AggregateAtom,
    AnnFunc,
    AnnotatedAtom,
    AnnVar,
    Atom,
    Const,
    Constant,
    FuncTerm,
    FuzzySet,
    Interpretation,
    Program,
    Rule,
    SetElement,
    Var,
    eval_annotation,
    format_number,
)
from .errors import (
    ArityMismatch,
    CandidateSpaceOverflow,
    CapOverflow,
    FasolveError,
    FunctionDepthError,
    GradeRangeError,
    GuardTypeMismatch,
    LatticeOverflow,
    NonBooleanGrade,
    OracleSpaceOverflow,
    ParseFailure,
    UnboundAnnotationVariable,
    UngroundGuard,
    UnsafeRule,
)
from .grounder import GradeLattice, GroundProgram, grade_lattice, ground_program, herbrand_universe
from .oracle import GeneratorConfig, brute_force_answer_sets, differential_check, generate_program
from .parser import parse_files, parse_program, print_program
from .solver import enumerate_answer_sets, reduct, satisfies_program, solve

__version__ = "0.1.0"

__all__ = [
    "AggregateAtom",
    "AnnFunc",
    "AnnVar",
    "AnnotatedAtom",
    "ArityMismatch",
    "Atom",
    "CandidateSpaceOverflow",
    "CapOverflow",
    "ClassicalProgram",
    "Const",
    "Constant",
    "Defined",
    "FasolveError",
    "FuncTerm",
    "FunctionDepthError",
    "FuzzySet",
    "GeneratorConfig",
    "GradeLattice",
    "GradeRangeError",
    "GroundProgram",
    "GuardTypeMismatch",
    "Interpretation",
    "LatticeOverflow",
    "NonBooleanGrade",
    "OracleSpaceOverflow",
    "ParseFailure",
    "Program",
    "Rule",
    "SetElement",
    "UnboundAnnotationVariable",
    "UngroundGuard",
    "UnsafeRule",
    "Var",
    "brute_force_answer_sets",
    "build_multiset",
    "classical_oracle",
    "differential_check",
    "embed",
    "enumerate_answer_sets",
    "erase",
    "eval_aggregate",
    "eval_annotation",
    "extract",
    "format_number",
    "generate_program",
    "grade_lattice",
    "ground_program",
    "herbrand_universe",
    "parse_classical",
    "parse_files",
    "parse_program",
    "print_classical",
    "print_program",
    "reduct",
    "satisfies_aggregate_atom",
    "satisfies_program",
    "solve",
    "__version__",
]
