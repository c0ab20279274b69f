"""Turning report text or pre-structured findings into evidence.

Two routes produce the closed-world finding vector V and the claimed
diagnosis set:

* structured records whose ``findings`` map is completed with ``False`` for
  every finding it does not mention, and
* a lexicon matcher over free text with NegEx-style preceding-window
  negation.  Hedged mentions count as not affirmed.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Any, Iterable, Mapping

from entail_audit.kb import Ontology
from entail_audit.logic import Atom, Formula, Not, conj

DEFAULT_NEGATION_CUES = (
    "no",
    "not",
    "without",
    "absent",
    "negative for",
    "free of",
    "resolved",
)
DEFAULT_HEDGE_CUES = (
    "possible",
    "possibly",
    "probable",
    "probably",
    "likely",
    "may",
    "questionable",
    "cannot exclude",
    "suspicious for",
    "concerning for",
)
DEFAULT_NEGATION_WINDOW = 5

_WORD = re.compile(r"[^\W_]+")
_SENTENCE_BREAK = re.compile(r"[.;\n]")


class RecordError(ValueError):
    """A report record cannot be turned into evidence."""


class MalformedRecordError(RecordError):
    pass


class UnknownPredicateError(RecordError):
    pass


class LexiconError(ValueError):
    pass


def tokenize(text: str) -> list[str]:
    """Lower-cased word tokens; whitespace and punctuation separate tokens."""
    return _WORD.findall(text.lower())


def split_sentences(text: str) -> list[list[str]]:
    return [toks for toks in map(tokenize, _SENTENCE_BREAK.split(text)) if toks]


@dataclass(frozen=True)
class Lexicon:
    findings: dict[str, tuple[str, ...]]
    diagnoses: dict[str, tuple[str, ...]]
    negation_cues: tuple[str, ...] = DEFAULT_NEGATION_CUES
    negation_window: int = DEFAULT_NEGATION_WINDOW
    hedge_cues: tuple[str, ...] = DEFAULT_HEDGE_CUES

    def __post_init__(self) -> None:
        if self.negation_window < 0:
            raise LexiconError("negation_window must be >= 0")
        for table in (self.findings, self.diagnoses):
            for name, phrases in table.items():
                if not phrases:
                    raise LexiconError(f"{name!r} has no phrases")
                for phrase in phrases:
                    if not tokenize(phrase) or phrase != phrase.lower():
                        raise LexiconError(f"bad phrase {phrase!r} for {name!r}")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Lexicon":
        def table(key: str) -> dict[str, tuple[str, ...]]:
            return {k: tuple(v) for k, v in data.get(key, {}).items()}

        return cls(
            findings=table("findings"),
            diagnoses=table("diagnoses"),
            negation_cues=tuple(data.get("negation_cues", DEFAULT_NEGATION_CUES)),
            negation_window=int(data.get("negation_window", DEFAULT_NEGATION_WINDOW)),
            hedge_cues=tuple(data.get("hedge_cues", DEFAULT_HEDGE_CUES)),
        )

    def check(self, ontology: Ontology) -> None:
        """Raise if the lexicon names a predicate the ontology lacks or files it
        under the wrong kind."""
        for kind, table in (("finding", self.findings), ("diagnosis", self.diagnoses)):
            for name in table:
                atom = ontology.by_name.get(name)
                if atom is None or atom.kind != kind:
                    raise UnknownPredicateError(f"lexicon {kind} {name!r} not in the ontology")


def load_lexicon(path) -> Lexicon:
    with open(path, encoding="utf-8") as fh:
        return Lexicon.from_dict(json.load(fh))


def _occurrences(tokens: list[str], phrase: list[str]) -> list[int]:
    n = len(phrase)
    return [i for i in range(len(tokens) - n + 1) if tokens[i : i + n] == phrase]


def _cued(tokens: list[str], start: int, cues: list[list[str]], window: int) -> bool:
    preceding = tokens[max(0, start - window) : start]
    return any(_occurrences(preceding, cue) for cue in cues)


def _affirmed(text: str, table: Mapping[str, Iterable[str]], lexicon: Lexicon) -> set[str]:
    cues = [tokenize(c) for c in (*lexicon.negation_cues, *lexicon.hedge_cues)]
    cues = [c for c in cues if c]
    found = set()
    for sentence in split_sentences(text):
        for name, phrases in table.items():
            if name in found:
                continue
            for phrase in phrases:
                if any(
                    not _cued(sentence, start, cues, lexicon.negation_window)
                    for start in _occurrences(sentence, tokenize(phrase))
                ):
                    found.add(name)
                    break
    return found


@dataclass(frozen=True)
class EvidenceAssignment:
    """Total truth assignment V over the ontology's findings, in declaration order."""

    findings: tuple[Atom, ...]
    bits: tuple[bool, ...]

    def __post_init__(self) -> None:
        if len(self.findings) != len(self.bits):
            raise ValueError("one bit per finding required")

    @classmethod
    def closed_world(cls, ontology: Ontology, affirmed: Iterable[str]) -> "EvidenceAssignment":
        affirmed = set(affirmed)
        findings = ontology.findings
        return cls(findings, tuple(f.name in affirmed for f in findings))

    def __getitem__(self, name: str) -> bool:
        for f, b in zip(self.findings, self.bits):
            if f.name == name:
                return b
        raise KeyError(name)

    def as_dict(self) -> dict[str, bool]:
        return {f.name: b for f, b in zip(self.findings, self.bits)}

    @property
    def affirmed(self) -> list[str]:
        return [f.name for f, b in zip(self.findings, self.bits) if b]


def extract_findings(text: str, lexicon: Lexicon, ontology: Ontology) -> EvidenceAssignment:
    return EvidenceAssignment.closed_world(ontology, _affirmed(text, lexicon.findings, lexicon))


def extract_diagnoses(text: str, lexicon: Lexicon, ontology: Ontology) -> frozenset[str]:
    names = _affirmed(text, lexicon.diagnoses, lexicon)
    return frozenset(d.name for d in ontology.diagnoses if d.name in names)


def phi(evidence: EvidenceAssignment) -> Formula:
    """The conjunction fixing every finding to its value in V."""
    return conj(f if b else Not(f) for f, b in zip(evidence.findings, evidence.bits))


# ----------------------------------------------------------------- records

_TEXT_FIELDS = (
    "findings_text",
    "impression_text",
    "reference_findings_text",
    "reference_impression_text",
)


@dataclass
class ReportRecord:
    id: str
    findings_text: str | None = None
    impression_text: str | None = None
    findings: dict[str, bool] | None = None
    impression_diagnoses: list[str] | None = None
    labels: dict[str, bool] | None = None
    reference_findings_text: str | None = None
    reference_impression_text: str | None = None


@dataclass
class IngestedRecord:
    record: ReportRecord
    evidence: EvidenceAssignment
    claimed: frozenset[str]


def _bool_map(raw: Any, key: str) -> dict[str, bool] | None:
    if raw is None:
        return None
    if not isinstance(raw, dict) or not all(
        isinstance(k, str) and isinstance(v, bool) for k, v in raw.items()
    ):
        raise MalformedRecordError(f"{key!r} must map names to booleans")
    return dict(raw)


def _check_names(names: Iterable[str], ontology: Ontology, kind: str, key: str) -> None:
    for name in names:
        atom = ontology.by_name.get(name)
        if atom is None or atom.kind != kind:
            raise UnknownPredicateError(f"{key!r}: {name!r} is not a declared {kind}")


def parse_record(raw: Any, ontology: Ontology) -> ReportRecord:
    """Validate the JSON shape of one report and the predicate names it uses."""
    if not isinstance(raw, dict):
        raise MalformedRecordError("record must be a JSON object")
    rid = raw.get("id")
    if not isinstance(rid, str):
        raise MalformedRecordError("'id' must be a string")
    for key in _TEXT_FIELDS:
        if raw.get(key) is not None and not isinstance(raw[key], str):
            raise MalformedRecordError(f"{key!r} must be a string")

    findings = _bool_map(raw.get("findings"), "findings")
    labels = _bool_map(raw.get("labels"), "labels")
    diagnoses = raw.get("impression_diagnoses")
    if diagnoses is not None and (
        not isinstance(diagnoses, list) or not all(isinstance(d, str) for d in diagnoses)
    ):
        raise MalformedRecordError("'impression_diagnoses' must be a list of strings")

    if findings is None and raw.get("findings_text") is None:
        raise MalformedRecordError("record has neither 'findings' nor 'findings_text'")
    if diagnoses is None and raw.get("impression_text") is None:
        raise MalformedRecordError(
            "record has neither 'impression_diagnoses' nor 'impression_text'"
        )

    _check_names(findings or (), ontology, "finding", "findings")
    _check_names(diagnoses or (), ontology, "diagnosis", "impression_diagnoses")
    _check_names(labels or (), ontology, "diagnosis", "labels")

    return ReportRecord(
        id=rid,
        findings_text=raw.get("findings_text"),
        impression_text=raw.get("impression_text"),
        findings=findings,
        impression_diagnoses=list(diagnoses) if diagnoses is not None else None,
        labels=labels,
        reference_findings_text=raw.get("reference_findings_text"),
        reference_impression_text=raw.get("reference_impression_text"),
    )


def ingest_record(
    raw: Any, ontology: Ontology, lexicon: Lexicon | None = None
) -> IngestedRecord:
    """Validate ``raw`` and derive (V, claimed diagnoses) under the closed world.

    Structured ``findings`` / ``impression_diagnoses`` take precedence over
    the text fields, which then only feed the lexical metrics.
    """
    record = parse_record(raw, ontology)

    if record.findings is not None:
        evidence = EvidenceAssignment.closed_world(
            ontology, (k for k, v in record.findings.items() if v)
        )
    elif lexicon is None:
        raise MalformedRecordError("findings_text given but no lexicon to extract with")
    else:
        evidence = extract_findings(record.findings_text, lexicon, ontology)

    if record.impression_diagnoses is not None:
        claimed = frozenset(record.impression_diagnoses)
    elif lexicon is None:
        raise MalformedRecordError("impression_text given but no lexicon to extract with")
    else:
        claimed = extract_diagnoses(record.impression_text, lexicon, ontology)

    return IngestedRecord(record, evidence, claimed)
