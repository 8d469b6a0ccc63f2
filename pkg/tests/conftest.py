from pathlib import Path

import pytest

from fasolve.parser import parse_program

ROOT = Path(__file__).resolve().parent.parent
PROGRAMS = ROOT / "fixtures" / "programs"


def program_text(name):
    return (PROGRAMS / name).read_text(encoding="utf-8")


def load(name):
    return parse_program(program_text(name), name)


def expected_lines(name):
    return [l for l in (PROGRAMS / name).read_text(encoding="utf-8").splitlines() if l.strip()]


@pytest.fixture
def dice():
    return load("dice.dflp")


@pytest.fixture
def company():
    return load("company_fuzzy.dflp")
