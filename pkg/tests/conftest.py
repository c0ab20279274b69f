from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import pytest

from entail_audit.evidence import Lexicon, load_lexicon
from entail_audit.kb import Ontology, load_kb

FIXTURES = Path(__file__).parent / "fixtures"
DATA = resources.files("entail_audit") / "data"

_acceptance_lines: list[str] = []


@pytest.fixture(scope="session")
def toy() -> Ontology:
    return load_kb(DATA / "toy.kbl")


@pytest.fixture(scope="session")
def cxr() -> Ontology:
    return load_kb(DATA / "cxr.kbl")


@pytest.fixture(scope="session")
def toy_lexicon() -> Lexicon:
    return load_lexicon(DATA / "toy_lexicon.json")


@pytest.fixture(scope="session")
def toy_kb_path() -> Path:
    return Path(str(DATA / "toy.kbl"))


@pytest.fixture(scope="session")
def cxr_kb_path() -> Path:
    return Path(str(DATA / "cxr.kbl"))


@pytest.fixture
def acceptance():
    """Record a one-line pass/fail result printed in the terminal summary."""

    def record(criterion: str, ok: bool, detail: str = "") -> None:
        status = "PASS" if ok else "FAIL"
        _acceptance_lines.append(f"[{status}] {criterion}" + (f": {detail}" if detail else ""))
        assert ok, f"{criterion}: {detail}"

    return record


def read_jsonl(path: Path) -> list[dict]:
    return [json.loads(line) for line in Path(path).read_text(encoding="utf-8").splitlines() if line]


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
