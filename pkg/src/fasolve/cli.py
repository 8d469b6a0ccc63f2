"""``fasolve`` command line: solve programs or run the differential test harness."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from typing import Optional

from .core import format_number
from .errors import CapOverflow, FasolveError, FunctionDepthError, ParseFailure
from .grounder import DEFAULT_ITER_CAP, DEFAULT_LATTICE_CAP, grade_lattice, ground_program
from .solver import DEFAULT_CANDIDATE_CAP, enumerate_answer_sets

EXIT_FOUND, EXIT_NONE, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3


@dataclass
class SolveOptions:
    input_paths: list = field(default_factory=list)
    mode: str = "fuzzy"
    format: str = "text"
    max_answer_sets: Optional[int] = None
    lattice_cap: int = DEFAULT_LATTICE_CAP
    iter_cap: int = DEFAULT_ITER_CAP
    candidate_cap: int = DEFAULT_CANDIDATE_CAP
    func_depth: int = 0
    dump_ground: bool = False


def _interp_json(i) -> dict:
    return {str(a): format_number(g) for a, g in sorted(i.items(), key=lambda kv: str(kv[0]))}


def run(opts: SolveOptions, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    from .classical import extract, format_answer_set
    from .parser import parse_files

    try:
        program = parse_files(opts.input_paths, classical=opts.mode == "classical")
        ground = ground_program(program, opts.func_depth)
        if opts.dump_ground:
            print(f"% ground program: {len(ground.rules)} rules", file=err)
            if ground.rules:
                print(str(ground), file=err)
        lattice = grade_lattice(ground, opts.lattice_cap, opts.iter_cap)
        reports = enumerate_answer_sets(ground, lattice, opts.max_answer_sets, opts.candidate_cap)
    except ParseFailure as exc:
        for e in exc.errors:
            print(str(e), file=err)
        return EXIT_INPUT
    except (CapOverflow, FunctionDepthError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_CAP
    except (FasolveError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT

    answer_sets = [r.interpretation for r in reports]
    if opts.format == "json":
        doc = {
            "answer_sets": [_interp_json(i) for i in answer_sets],
            "count": len(answer_sets),
            "ground_stats": {
                "rules": len(ground.rules),
                "atoms": len(ground.atoms()),
                "universe": len(ground.universe),
                "lattice_values": len(lattice.global_values),
                "lattice_iterations": lattice.iterations,
                "lattice_converged": lattice.converged,
                "candidates": reports[0].candidate_space_size if reports else 0,
            },
        }
        json.dump(doc, out, indent=2)
        out.write("\n")
    elif opts.mode == "classical":
        for i in answer_sets:
            print(format_answer_set(extract(i)), file=out)
    else:
        for i in answer_sets:
            print(str(i), file=out)
    return EXIT_FOUND if answer_sets else EXIT_NONE


def run_tests(trials: int, seed: int, fixture_dir: Optional[str], out=None) -> int:
    from .oracle import GeneratorConfig, run_trials, write_discrepancy

    out = out or sys.stdout
    results = run_trials(GeneratorConfig(seed=seed), trials)
    found = [d for r in results for d in r.discrepancies]
    for d in found:
        line = f"seed {d.seed}: {d.phase}: {d.detail}"
        if fixture_dir:
            line += f" -> {write_discrepancy(d, fixture_dir)}"
        print(line, file=out)
    checked = sum(r.checked for r in results)
    print(f"{trials} trials, {checked} checked against the oracle, {len(found)} discrepancies", file=out)
    return 1 if found else 0


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fasolve", description="Answer sets of fuzzy annotated disjunctive programs.")
    sub = ap.add_subparsers(dest="command")

    s = sub.add_parser("solve", help="solve one or more program files (the default command)")
    s.add_argument("files", nargs="+", help="program files, concatenated in order")
    s.add_argument("--mode", choices=("fuzzy", "classical"), default="fuzzy")
    s.add_argument("--format", choices=("text", "json"), default="text")
    s.add_argument("--max-answer-sets", type=int, default=None, metavar="N", help="print at most N (default: all)")
    s.add_argument("--lattice-cap", type=int, default=DEFAULT_LATTICE_CAP)
    s.add_argument("--iter-cap", type=int, default=DEFAULT_ITER_CAP)
    s.add_argument("--candidate-cap", type=int, default=DEFAULT_CANDIDATE_CAP)
    s.add_argument("--func-depth", type=int, default=0)
    s.add_argument("--dump-ground", action="store_true", help="print the ground program on stderr")

    t = sub.add_parser("test", help="compare the solver with the brute-force oracle on random programs")
    t.add_argument("--trials", type=int, default=100)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--fixtures", default="fixtures/discrepancies",
                   help="directory for discrepancy fixtures ('' to skip writing)")
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] not in ("solve", "test", "-h", "--help"):
        argv.insert(0, "solve")
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="fasolve: %(message)s")
    if args.command == "test":
        return run_tests(args.trials, args.seed, args.fixtures or None)
    if args.command is None:
        _parser().print_help()
        return EXIT_INPUT
    opts = SolveOptions(args.files, args.mode, args.format, args.max_answer_sets, args.lattice_cap,
                        args.iter_cap, args.candidate_cap, args.func_depth, args.dump_ground)
    return run(opts)


if __name__ == "__main__":
    sys.exit(main())
