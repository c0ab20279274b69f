"""Reference-free entailment auditing of radiology report impressions."""

from entail_audit.evidence import (
    EvidenceAssignment,
    Lexicon,
    ReportRecord,
    extract_diagnoses,
    extract_findings,
    ingest_record,
    load_lexicon,
    phi,
)
from entail_audit.kb import Ontology, lint_kb, load_kb, parse_kb
from entail_audit.logic import dpll_sat, evaluate, truth_table_sat, tseitin_compile
from entail_audit.verifier import (
    Status,
    TaxonomyClass,
    Verdict,
    Verifier,
    check_consistency,
    classify,
    countermodel,
    entailed_set,
    entails,
    filter_verified,
)

__version__ = "0.1.0"

__all__ = [
    "EvidenceAssignment",
    "Lexicon",
    "Ontology",
    "ReportRecord",
    "Status",
    "TaxonomyClass",
    "Verdict",
    "Verifier",
    "check_consistency",
    "classify",
    "countermodel",
    "dpll_sat",
    "entailed_set",
    "entails",
    "evaluate",
    "extract_diagnoses",
    "extract_findings",
    "filter_verified",
    "ingest_record",
    "lint_kb",
    "load_kb",
    "load_lexicon",
    "parse_kb",
    "phi",
    "truth_table_sat",
    "tseitin_compile",
]
