from __future__ import annotations

import re
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
GOLDEN = Path(__file__).resolve().parent / "golden"

_acceptance: dict[int, list[tuple[str, str]]] = {}


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture
def golden_dir() -> Path:
    return GOLDEN


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        outcome = "SKIP" if report.skipped else ("PASS" if report.passed else "FAIL")
        _acceptance.setdefault(int(m.group(1)), []).append((report.nodeid, outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_acceptance):
        outcomes = {o for _, o in _acceptance[n]}
        status = "FAIL" if "FAIL" in outcomes else ("PASS" if "PASS" in outcomes else "SKIP")
        names = ", ".join(nodeid.split("::")[-1] for nodeid, _ in _acceptance[n])
        terminalreporter.write_line(f"criterion {n:2d}: {status}  ({names})")
