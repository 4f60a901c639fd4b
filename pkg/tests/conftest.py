import pathlib

import pytest

from occflow.syntax import parse

ROOT = pathlib.Path(__file__).resolve().parents[1]
PROGRAMS = ROOT / "examples" / "programs"

# running example: write 5 through x, then read it back
WRITE = "(let x (ref 3^1)^2 (let y (let z (5^3)^4 (x^5 := z^7)^8)^9 (! x^13)^10)^11)^12"
# a ref created from a variable, then read through its alias
ALIAS = "(let x (3^1)^2 (let y (ref x^3)^4 (! y)))"
# two names for one ref, read through the first
DEREF = "(let x (ref 1^1)^2 (let y (x^3) (! x^4)^5)^6)^7"
# identity function applied twice
TWICE = "(let x (lambda y.(y^1))^2 (let z (x^3 1^4)^5 (x^6 2^7)^8)^9)^10"


@pytest.fixture
def write_prog():
    return parse(WRITE)


@pytest.fixture
def alias_prog():
    return parse(ALIAS)


@pytest.fixture
def deref_prog():
    return parse(DEREF)


# acceptance criteria report: one line per criterion at the end of the run
ACCEPTANCE: dict = {}


def record(number: int, ok: bool, detail: str) -> bool:
    ACCEPTANCE[number] = (ok, detail)
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
