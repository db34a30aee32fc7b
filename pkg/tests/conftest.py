from __future__ import annotations

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from slashchart.grammar import load_grammar_file  # noqa: E402
from slashchart.lexicon import data_path  # noqa: E402
from slashchart.pipeline import load_bundle  # noqa: E402

# Filled by the acceptance module; printed once at the end of the session.
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def english():
    return load_grammar_file(data_path("english.rules"))


@pytest.fixture(scope="session")
def bundle():
    return load_bundle(data_path("english.rules"), data_path("sample.model"))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
