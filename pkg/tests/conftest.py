import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ptasynth import corpus_path, load_corpus  # noqa: E402


@pytest.fixture
def corpus():
    return load_corpus


@pytest.fixture
def corpus_file():
    return lambda name: str(corpus_path(name))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
