"""Collects one verdict line per acceptance criterion and prints them after the run."""

from __future__ import annotations

from contextlib import contextmanager

import pytest

_VERDICTS: dict[int, tuple[bool, str, str]] = {}


class Criterion:
    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.details: list[str] = []

    def note(self, text: str) -> None:
        self.details.append(text)

    def check(self, condition: bool, text: str) -> None:
        self.note(f"{text}: {'ok' if condition else 'MISMATCH'}")
        assert condition, text


@contextmanager
def _recording(number: int, title: str):
    crit = Criterion(number, title)
    try:
        yield crit
    except BaseException as exc:
        reason = "; ".join(crit.details + [f"{type(exc).__name__}: {exc}".strip()])
        _VERDICTS[number] = (False, title, reason)
        line = f"criterion {number:>2} FAIL  {title}  [{reason}]"
        print(line)
        raise
    _VERDICTS[number] = (True, title, "; ".join(crit.details))
    print(f"criterion {number:>2} PASS  {title}")


@pytest.fixture
def criterion():
    """Use as ``with criterion(n, title) as c:``; the outcome is recorded."""
    return _recording


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        ok, title, detail = _VERDICTS[number]
        terminalreporter.write_line(f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}")
        if detail:
            terminalreporter.write_line(f"    {detail}")
