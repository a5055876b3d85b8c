import sys
from pathlib import Path

import pytest

from covloop.rtl.parser import parse_file, parse_source

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE))

CORPUS = Path(__file__).parents[1] / "src" / "covloop" / "corpus"
FIXTURES = HERE / "fixtures"
CORPUS_NAMES = ["alu", "capture", "counter3", "fsm4", "handshake", "mux2"]


def unit_of(path):
    return parse_file(path)[0]


def corpus_unit(name):
    return unit_of(CORPUS / f"{name}.v")


def corpus_sva(name):
    p = CORPUS / f"{name}.sva"
    return p.read_text() if p.exists() else ""


def source_unit(text, origin="t.v"):
    return parse_source(text, origin)[0]


@pytest.fixture
def capture():
    return corpus_unit("capture")


@pytest.fixture
def alu_mode():
    return unit_of(FIXTURES / "alu_mode.v")


# one line per acceptance criterion, printed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
