"""Batch auditing over JSONL corpora.

Workers share only the read-only ontology and lexicon; results come back in
input order whatever the pool size, so output bytes do not depend on
``jobs``.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Iterable, Sequence

from entail_audit.evidence import Lexicon
from entail_audit.kb import Ontology
from entail_audit.verifier import Status, Verdict, Verifier

_worker: tuple[Verifier, Lexicon | None] | None = None


def dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False)


def read_jsonl_lines(path) -> list[str]:
    """Non-blank lines of a UTF-8 JSONL file (``-`` for stdin)."""
    if str(path) == "-":
        text = sys.stdin.read()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return [line for line in text.splitlines() if line.strip()]


def _audit_line(verifier: Verifier, lexicon: Lexicon | None, line: str) -> Verdict:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        return Verdict(None, Status.MALFORMED, error=f"invalid JSON: {exc}")
    return verifier.audit(raw, lexicon)


def _init_worker(ontology: Ontology, lexicon: Lexicon | None, emit: bool) -> None:
    global _worker
    _worker = (Verifier(ontology, emit), lexicon)


def _work(line: str) -> Verdict:
    assert _worker is not None
    return _audit_line(_worker[0], _worker[1], line)


def audit_lines(
    ontology: Ontology,
    lines: Sequence[str],
    lexicon: Lexicon | None = None,
    *,
    jobs: int = 1,
    emit_countermodels: bool = False,
) -> list[Verdict]:
    if jobs < 1:
        raise ValueError("jobs must be a positive integer")
    if jobs == 1 or len(lines) < 2:
        verifier = Verifier(ontology, emit_countermodels)
        return [_audit_line(verifier, lexicon, line) for line in lines]
    chunk = max(1, len(lines) // (jobs * 4))
    with ProcessPoolExecutor(
        max_workers=jobs,
        initializer=_init_worker,
        initargs=(ontology, lexicon, emit_countermodels),
    ) as pool:
        return list(pool.map(_work, lines, chunksize=chunk))


# ------------------------------------------------------ byte-level editing


def _skip_ws(s: str, i: int) -> int:
    while i < len(s) and s[i] in " \t\r\n":
        i += 1
    return i


def top_level_spans(line: str) -> dict[str, tuple[int, int]]:
    """Character span of each top-level value in a JSON object line."""
    decoder = json.JSONDecoder()
    spans = {}
    i = _skip_ws(line, 0)
    if line[i : i + 1] != "{":
        raise ValueError("not a JSON object")
    i = _skip_ws(line, i + 1)
    if line[i : i + 1] == "}":
        return spans
    while True:
        if line[i : i + 1] != '"':
            raise ValueError("expected object key")
        key, i = json.decoder.scanstring(line, i + 1)
        i = _skip_ws(line, i)
        if line[i : i + 1] != ":":
            raise ValueError("expected ':'")
        start = _skip_ws(line, i + 1)
        _, end = decoder.raw_decode(line, start)
        spans[key] = (start, end)
        i = _skip_ws(line, end)
        if line[i : i + 1] == "}":
            return spans
        if line[i : i + 1] != ",":
            raise ValueError("expected ',' or '}'")
        i = _skip_ws(line, i + 1)


def set_fields(line: str, updates: dict[str, Any]) -> str:
    """Replace or append top-level fields, leaving every other byte of ``line`` intact."""
    spans = top_level_spans(line)
    edits = []
    appended = []
    for key, value in updates.items():
        if key in spans:
            edits.append((*spans[key], dumps(value)))
        else:
            appended.append(f"{dumps(key)}: {dumps(value)}")
    if appended:
        close = line.rstrip().rindex("}")
        sep = ", " if spans else ""
        edits.append((close, close, sep + ", ".join(appended)))
    for start, end, text in sorted(edits, reverse=True):
        line = line[:start] + text + line[end:]
    return line


def filter_lines(lines: Iterable[str], verdicts: Iterable[Verdict]) -> list[str]:
    """Rewrite each record's ``impression_diagnoses`` to its verified subset.

    Inconsistent records get an empty list plus a ``verification_status``
    sidecar field; malformed records pass through untouched.
    """
    out = []
    for line, verdict in zip(lines, verdicts):
        if verdict.status is Status.MALFORMED:
            out.append(line)
            continue
        updates: dict[str, Any] = {"impression_diagnoses": list(verdict.verified)}
        if verdict.status is Status.INCONSISTENT:
            updates["verification_status"] = verdict.status.value
        out.append(set_fields(line, updates))
    return out
