import sys
from functools import lru_cache
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from idsearch.generate import generate, preset  # noqa: E402

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


@lru_cache(maxsize=None)
def preset_corpus(name: str):
    return generate(preset(name))


@pytest.fixture(scope="session")
def corpora():
    return preset_corpus


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
