from __future__ import annotations

import pytest

from apartments.octagons import REFERENCE_OCTAGONS, reference_graphs
from apartments.presentations import builtin


@pytest.fixture(scope="session")
def refs():
    return reference_graphs()


@pytest.fixture(scope="session")
def simple_refs(refs):
    return {name: refs[name] for name in REFERENCE_OCTAGONS}


@pytest.fixture(scope="session")
def multi_refs(refs):
    return {name: g for name, g in refs.items() if name not in REFERENCE_OCTAGONS}


@pytest.fixture(scope="session")
def pres():
    return {name: builtin(name) for name in ("T1", "T3", "T9", "T21")}


# criterion number -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
