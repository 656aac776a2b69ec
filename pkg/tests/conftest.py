import os
import sys
from contextlib import contextmanager

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

_CRITERIA = {}


@contextmanager
def _record(number, text):
    try:
        yield
    except BaseException as exc:
        _CRITERIA[number] = f"[FAIL] criterion {number}: {text} ({type(exc).__name__}: {exc})"
        raise
    _CRITERIA[number] = f"[PASS] criterion {number}: {text}"


@pytest.fixture
def criterion():
    """Context manager factory: ``with criterion(3, "text"): ...``."""
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[n].splitlines()[0][:300])
