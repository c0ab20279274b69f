"""Seeded synthetic report corpora with bookkept hallucinations and omissions."""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass

from entail_audit.evidence import EvidenceAssignment
from entail_audit.kb import REACHABILITY_CAP, Ontology
from entail_audit.logic import dpll_sat, tseitin_compile
from entail_audit.verifier import Verifier


class SynthError(ValueError):
    pass


@dataclass
class Injection:
    id: str
    entailed: list[str]
    claimed: list[str]
    hallucinations: list[str]
    omissions: list[str]
    rejections: int

    def to_dict(self) -> dict:
        return asdict(self)


def synthesize(
    ontology: Ontology,
    n: int,
    halluc_rate: float,
    omit_rate: float,
    seed: int,
    verifier: Verifier | None = None,
) -> tuple[list[dict], list[Injection]]:
    """Generate ``n`` structured reports and their injection log.

    Evidence vectors are drawn uniformly from the vectors consistent with
    the KB by rejection sampling.  Each entailed diagnosis is withheld with
    probability ``omit_rate`` and each non-entailed one is claimed with
    probability ``halluc_rate``; one uniform draw per diagnosis, in
    declaration order.  Labels are the entailed set.
    """
    if n < 0:
        raise SynthError("n must be non-negative")
    for name, rate in (("halluc_rate", halluc_rate), ("omit_rate", omit_rate)):
        if not 0.0 <= rate <= 1.0:
            raise SynthError(f"{name} must lie in [0, 1]")
    if not 0 <= seed < 2**64:
        raise SynthError("seed must be an unsigned 64-bit integer")
    findings = ontology.findings
    if len(findings) > REACHABILITY_CAP:
        raise SynthError(f"synthesis needs at most {REACHABILITY_CAP} findings")
    if not dpll_sat(tseitin_compile(ontology.knowledge, len(ontology.atoms))):
        raise SynthError("knowledge base is inconsistent; no evidence vector is consistent")

    verifier = verifier or Verifier(ontology)
    rng = random.Random(seed)
    width = len(str(max(n - 1, 0)))
    reports, log = [], []
    for i in range(n):
        rejections = 0
        while True:
            draw = rng.getrandbits(len(findings)) if findings else 0
            bits = tuple(bool(draw >> k & 1) for k in range(len(findings)))
            evidence = EvidenceAssignment(findings, bits)
            analysis = verifier.analyze(evidence)
            if analysis.consistent:
                break
            rejections += 1

        claimed, hallucinations, omissions = [], [], []
        for d in ontology.diagnoses:
            u = rng.random()
            if d.name in analysis.entailed:
                if u < omit_rate:
                    omissions.append(d.name)
                else:
                    claimed.append(d.name)
            elif u < halluc_rate:
                hallucinations.append(d.name)
                claimed.append(d.name)

        rid = f"synth-{i:0{width}d}"
        entailed = [d.name for d in ontology.diagnoses if d.name in analysis.entailed]
        reports.append(
            {
                "id": rid,
                "findings": evidence.as_dict(),
                "impression_diagnoses": claimed,
                "labels": {d.name: d.name in analysis.entailed for d in ontology.diagnoses},
            }
        )
        log.append(Injection(rid, entailed, claimed, hallucinations, omissions, rejections))
    return reports, log
