"""Entailment checks of claimed diagnoses against finding evidence.

A diagnosis d is entailed by evidence V under the rules K when
``phi(V) & K & !d`` is unsatisfiable.  Each diagnosis of the ontology then
falls into exactly one :class:`TaxonomyClass` depending on whether it was
claimed and whether it is entailed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable

from entail_audit.evidence import (
    EvidenceAssignment,
    IngestedRecord,
    Lexicon,
    RecordError,
    ingest_record,
    phi,
)
from entail_audit.kb import Ontology
from entail_audit.logic import Atom, Formula, Not, SatResult, conj, dpll_sat, tseitin_compile


class InconsistentEvidenceError(ValueError):
    """The findings contradict the knowledge base, so every diagnosis would be
    vacuously entailed."""


class EntailedDiagnosisError(ValueError):
    """A countermodel was requested for a diagnosis that is entailed."""


class Status(str, Enum):
    CONSISTENT = "consistent"
    INCONSISTENT = "inconsistent"
    MALFORMED = "malformed"


class TaxonomyClass(str, Enum):
    SUPPORTED = "Supported"
    UNSUPPORTED = "Unsupported"
    MISSED = "Missed"
    CORRECTLY_EXCLUDED = "CorrectlyExcluded"

    @classmethod
    def of(cls, claimed: bool, entailed: bool) -> "TaxonomyClass":
        if claimed:
            return cls.SUPPORTED if entailed else cls.UNSUPPORTED
        return cls.MISSED if entailed else cls.CORRECTLY_EXCLUDED


def _solve(formula: Formula, ontology: Ontology) -> SatResult:
    return dpll_sat(tseitin_compile(formula, len(ontology.atoms)))


def _diagnosis(ontology: Ontology, d: Atom | str) -> Atom:
    atom = ontology.atom(d) if isinstance(d, str) else d
    if atom.kind != "diagnosis":
        raise ValueError(f"{atom.name!r} is not a diagnosis")
    return atom


def check_consistency(evidence: EvidenceAssignment, ontology: Ontology) -> bool:
    return _solve(conj((phi(evidence), ontology.knowledge)), ontology).satisfiable


def _negated_check(evidence: EvidenceAssignment, ontology: Ontology, d: Atom | str) -> SatResult:
    if not check_consistency(evidence, ontology):
        raise InconsistentEvidenceError("findings contradict the knowledge base")
    atom = _diagnosis(ontology, d)
    return _solve(conj((phi(evidence), ontology.knowledge, Not(atom))), ontology)


def entails(evidence: EvidenceAssignment, ontology: Ontology, d: Atom | str) -> bool:
    return not _negated_check(evidence, ontology, d).satisfiable


def countermodel(evidence: EvidenceAssignment, ontology: Ontology, d: Atom | str) -> dict[str, bool]:
    """A model of ``phi(V) & K`` in which ``d`` is false, over all ontology atoms."""
    result = _negated_check(evidence, ontology, d)
    if not result.satisfiable:
        name = d if isinstance(d, str) else d.name
        raise EntailedDiagnosisError(f"{name!r} is entailed; no countermodel exists")
    return result.named(ontology.atoms)


def entailed_set(evidence: EvidenceAssignment, ontology: Ontology) -> tuple[str, ...]:
    """E_V: every diagnosis forced by the evidence, in declaration order."""
    return tuple(d.name for d in ontology.diagnoses if entails(evidence, ontology, d))


@dataclass
class Verdict:
    id: str | None
    status: Status
    entailed: tuple[str, ...] = ()
    claimed: tuple[str, ...] = ()
    verified: tuple[str, ...] = ()
    per_diagnosis: dict[str, TaxonomyClass] | None = None
    countermodels: dict[str, dict[str, bool]] | None = None
    error: str | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "id": self.id,
            "status": self.status.value,
            "entailed": list(self.entailed),
            "claimed": list(self.claimed),
            "verified": list(self.verified),
            "per_diagnosis": {d: c.value for d, c in (self.per_diagnosis or {}).items()},
        }
        if self.countermodels is not None:
            out["countermodels"] = self.countermodels
        if self.error is not None:
            out["error"] = self.error
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Verdict":
        return cls(
            id=data.get("id"),
            status=Status(data["status"]),
            entailed=tuple(data.get("entailed", ())),
            claimed=tuple(data.get("claimed", ())),
            verified=tuple(data.get("verified", ())),
            per_diagnosis={d: TaxonomyClass(c) for d, c in data.get("per_diagnosis", {}).items()},
            countermodels=data.get("countermodels"),
            error=data.get("error"),
        )


@dataclass(frozen=True)
class _Analysis:
    consistent: bool
    entailed: frozenset[str]
    countermodels: dict[str, dict[str, bool]]


class Verifier:
    """Classifies records against one ontology.

    Solver outcomes are memoized per evidence vector, so corpora that repeat
    finding patterns pay for each pattern once.  One solver call is made per
    diagnosis, plus one consistency check.
    """

    def __init__(self, ontology: Ontology, emit_countermodels: bool = False) -> None:
        self.ontology = ontology
        self.emit_countermodels = emit_countermodels
        self._cache: dict[EvidenceAssignment, _Analysis] = {}

    def analyze(self, evidence: EvidenceAssignment) -> _Analysis:
        hit = self._cache.get(evidence)
        if hit is not None:
            return hit
        onto = self.ontology
        context = conj((phi(evidence), onto.knowledge))
        if not _solve(context, onto).satisfiable:
            result = _Analysis(False, frozenset(), {})
        else:
            entailed = set()
            witnesses = {}
            for d in onto.diagnoses:
                check = _solve(conj((context, Not(d))), onto)
                if check.satisfiable:
                    witnesses[d.name] = check.named(onto.atoms)
                else:
                    entailed.add(d.name)
            result = _Analysis(True, frozenset(entailed), witnesses)
        self._cache[evidence] = result
        return result

    def _ordered(self, names: Iterable[str]) -> tuple[str, ...]:
        names = set(names)
        return tuple(d.name for d in self.ontology.diagnoses if d.name in names)

    def classify(self, item: IngestedRecord) -> Verdict:
        analysis = self.analyze(item.evidence)
        claimed = self._ordered(item.claimed)
        if not analysis.consistent:
            return Verdict(item.record.id, Status.INCONSISTENT, claimed=claimed)
        per_diagnosis = {
            d.name: TaxonomyClass.of(d.name in item.claimed, d.name in analysis.entailed)
            for d in self.ontology.diagnoses
        }
        countermodels = None
        if self.emit_countermodels:
            countermodels = {
                name: analysis.countermodels[name]
                for name in per_diagnosis
                if name in analysis.countermodels
            }
        return Verdict(
            id=item.record.id,
            status=Status.CONSISTENT,
            entailed=self._ordered(analysis.entailed),
            claimed=claimed,
            verified=self._ordered(item.claimed & analysis.entailed),
            per_diagnosis=per_diagnosis,
            countermodels=countermodels,
        )

    def audit(self, raw: Any, lexicon: Lexicon | None = None) -> Verdict:
        """Ingest and classify one raw JSON record; bad records become
        ``malformed`` verdicts instead of raising."""
        try:
            item = ingest_record(raw, self.ontology, lexicon)
        except RecordError as exc:
            rid = raw.get("id") if isinstance(raw, dict) else None
            return Verdict(rid if isinstance(rid, str) else None, Status.MALFORMED, error=str(exc))
        return self.classify(item)


def classify(
    item: IngestedRecord, ontology: Ontology, emit_countermodels: bool = False
) -> Verdict:
    return Verifier(ontology, emit_countermodels).classify(item)


def filter_verified(item: IngestedRecord, ontology: Ontology) -> frozenset[str]:
    """Claimed diagnoses that are also entailed; empty when the evidence is
    inconsistent with the KB (check :func:`check_consistency` to tell apart)."""
    return frozenset(classify(item, ontology).verified)
