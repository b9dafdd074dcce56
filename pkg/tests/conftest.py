from __future__ import annotations

from importlib import resources

import pytest

from ceremony_check.compiler import compile_ceremony
from ceremony_check.language import parse_ceremony

CORPUS = ("cutting", "lateral")


def corpus_text(name: str) -> str:
    return (resources.files("ceremony_check") / "corpus" / f"{name}.cer").read_text()


def corpus_path(name: str) -> str:
    return str(resources.files("ceremony_check") / "corpus" / f"{name}.cer")


@pytest.fixture(scope="session")
def cutting_spec():
    return parse_ceremony(corpus_text("cutting"))


@pytest.fixture(scope="session")
def lateral_spec():
    return parse_ceremony(corpus_text("lateral"))


@pytest.fixture(scope="session")
def cutting(cutting_spec):
    return compile_ceremony(cutting_spec)


@pytest.fixture(scope="session")
def lateral(lateral_spec):
    return compile_ceremony(lateral_spec)


@pytest.fixture(scope="session")
def compiled_corpus(cutting, lateral):
    return {"cutting": cutting, "lateral": lateral}


# acceptance criteria record their outcome here; printed at the end of the run
ACCEPTANCE: dict[int, tuple[str, str, float]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, title, seconds = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {title}  ({seconds:.2f}s)")
