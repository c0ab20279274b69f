"""Soundness/completeness of verdicts, label confusion metrics and deltas.

Ratios with a zero denominator are ``None`` rather than 0 or 1.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Sequence

from entail_audit.verifier import Status, Verdict

SOUNDNESS_TARGET = 0.99


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def _mean(values: Iterable[float | None]) -> float | None:
    defined = [v for v in values if v is not None]
    return sum(defined) / len(defined) if defined else None


@dataclass(frozen=True)
class ReportScore:
    soundness: float | None
    completeness: float | None
    n_claimed: int
    n_entailed: int
    n_supported: int


def score(verdict: Verdict, use_verified: bool = False) -> ReportScore:
    claimed = set(verdict.verified if use_verified else verdict.claimed)
    entailed = set(verdict.entailed)
    both = len(claimed & entailed)
    return ReportScore(
        _ratio(both, len(claimed)),
        _ratio(both, len(entailed)),
        len(claimed),
        len(entailed),
        both,
    )


def report_soundness(verdict: Verdict) -> float | None:
    """|E_V & claimed| / |claimed|."""
    return score(verdict).soundness


def report_completeness(verdict: Verdict) -> float | None:
    """|E_V & claimed| / |E_V|."""
    return score(verdict).completeness


# ------------------------------------------------------------- confusion


@dataclass
class Confusion:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0
    precision: float | None = None
    recall: float | None = None
    f1: float | None = None
    specificity: float | None = None

    def finalize(self) -> "Confusion":
        self.precision = _ratio(self.tp, self.tp + self.fp)
        self.recall = _ratio(self.tp, self.tp + self.fn)
        self.specificity = _ratio(self.tn, self.tn + self.fp)
        if self.precision is None or self.recall is None:
            self.f1 = None
        elif self.precision + self.recall == 0:
            self.f1 = 0.0
        else:
            self.f1 = 2 * self.precision * self.recall / (self.precision + self.recall)
        return self


@dataclass
class ConfusionSummary:
    n_reports: int
    pooled: Confusion
    per_diagnosis: dict[str, Confusion]
    # unweighted means over diagnoses whose ratio is defined
    macro: dict[str, float | None]


def confusion_vs_labels(
    predicted: Sequence[Iterable[str]],
    labels: Sequence[Mapping[str, bool]],
    diagnoses: Sequence[str],
) -> ConfusionSummary:
    """Per-diagnosis and pooled confusion counts of predictions against labels.

    A diagnosis missing from a report's label map counts as a negative label.
    """
    if len(predicted) != len(labels):
        raise ValueError("one label map per prediction required")
    per = {d: Confusion() for d in diagnoses}
    for pred, lab in zip(predicted, labels):
        pred = set(pred)
        for d in diagnoses:
            c = per[d]
            hit, truth = d in pred, bool(lab.get(d, False))
            if hit and truth:
                c.tp += 1
            elif hit:
                c.fp += 1
            elif truth:
                c.fn += 1
            else:
                c.tn += 1
    pooled = Confusion(
        tp=sum(c.tp for c in per.values()),
        fp=sum(c.fp for c in per.values()),
        fn=sum(c.fn for c in per.values()),
        tn=sum(c.tn for c in per.values()),
    ).finalize()
    for c in per.values():
        c.finalize()
    macro = {
        key: _mean(getattr(c, key) for c in per.values())
        for key in ("precision", "recall", "f1", "specificity")
    }
    return ConfusionSummary(len(predicted), pooled, per, macro)


# ------------------------------------------------------------ aggregation


@dataclass
class MetricsSummary:
    variant: str
    n_total: int = 0
    n_consistent: int = 0
    n_inconsistent: int = 0
    n_malformed: int = 0
    n_soundness_defined: int = 0
    n_completeness_defined: int = 0
    macro_soundness: float | None = None
    macro_completeness: float | None = None
    micro_soundness: float | None = None
    micro_completeness: float | None = None
    claimed_total: int = 0
    entailed_total: int = 0
    supported_total: int = 0
    soundness_target_met: bool = False
    confusion: ConfusionSummary | None = field(default=None)

    def to_dict(self) -> dict:
        out = asdict(self)
        if out["confusion"] is None:
            del out["confusion"]
        return out


def aggregate(
    verdicts: Iterable[Verdict],
    *,
    use_verified: bool = False,
    labels: Mapping[str, Mapping[str, bool]] | None = None,
    diagnoses: Sequence[str] | None = None,
) -> MetricsSummary:
    """Fold verdicts into corpus metrics.

    ``use_verified`` scores the filtered prediction (claimed & entailed)
    instead of the raw claims.  S/C use consistent reports only; the label
    confusion, when ``labels`` (report id -> label map) is given, covers
    every non-malformed report that has labels.
    """
    summary = MetricsSummary("ours" if use_verified else "vlm")
    scores = []
    predicted, truth = [], []
    for v in verdicts:
        summary.n_total += 1
        if v.status is Status.MALFORMED:
            summary.n_malformed += 1
            continue
        if labels is not None and v.id in labels:
            predicted.append(v.verified if use_verified else v.claimed)
            truth.append(labels[v.id])
        if v.status is Status.INCONSISTENT:
            summary.n_inconsistent += 1
            continue
        summary.n_consistent += 1
        scores.append(score(v, use_verified))

    summary.n_soundness_defined = sum(s.soundness is not None for s in scores)
    summary.n_completeness_defined = sum(s.completeness is not None for s in scores)
    summary.macro_soundness = _mean(s.soundness for s in scores)
    summary.macro_completeness = _mean(s.completeness for s in scores)
    summary.claimed_total = sum(s.n_claimed for s in scores)
    summary.entailed_total = sum(s.n_entailed for s in scores)
    summary.supported_total = sum(s.n_supported for s in scores)
    summary.micro_soundness = _ratio(summary.supported_total, summary.claimed_total)
    summary.micro_completeness = _ratio(summary.supported_total, summary.entailed_total)
    summary.soundness_target_met = (
        summary.micro_soundness is not None and summary.micro_soundness >= SOUNDNESS_TARGET
    )

    if labels is not None:
        if diagnoses is None:
            raise ValueError("diagnoses are required to score against labels")
        summary.confusion = confusion_vs_labels(predicted, truth, diagnoses)
    return summary


# ----------------------------------------------------------------- deltas

_DELTA_FIELDS = ("macro_soundness", "macro_completeness", "micro_soundness", "micro_completeness")
_CONFUSION_FIELDS = ("precision", "recall", "f1", "specificity", "tp", "fp", "fn", "tn")


@dataclass(frozen=True)
class DeltaEntry:
    vlm: float | None
    ours: float | None
    delta: float | None


def _delta(ours: float | None, vlm: float | None) -> DeltaEntry:
    d = None if ours is None or vlm is None else ours - vlm
    return DeltaEntry(vlm, ours, d)


def delta(ours: MetricsSummary, vlm: MetricsSummary) -> dict[str, DeltaEntry]:
    """Ours minus VLM for every shared metric; undefined on either side stays undefined."""
    out = {name: _delta(getattr(ours, name), getattr(vlm, name)) for name in _DELTA_FIELDS}
    if ours.confusion is not None and vlm.confusion is not None:
        for name in _CONFUSION_FIELDS:
            out[name] = _delta(getattr(ours.confusion.pooled, name), getattr(vlm.confusion.pooled, name))
    return out


# -------------------------------------------------------------------- CSV

CSV_COLUMNS = (
    "dataset",
    "variant",
    "n",
    "precision",
    "recall",
    "f1",
    "soundness",
    "completeness",
    "specificity",
    "macro_soundness",
    "macro_completeness",
    "n_inconsistent",
    "n_malformed",
)


def _cell(value) -> str:
    return "" if value is None else str(value)


def summaries_to_csv(dataset: str, summaries: Sequence[MetricsSummary]) -> str:
    """One row per variant, columns ordered like the usual results table;
    soundness/completeness are the micro (pooled) values."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for s in summaries:
        pooled = s.confusion.pooled if s.confusion else None
        writer.writerow(
            _cell(x)
            for x in (
                dataset,
                s.variant,
                s.n_total,
                pooled and pooled.precision,
                pooled and pooled.recall,
                pooled and pooled.f1,
                s.micro_soundness,
                s.micro_completeness,
                pooled and pooled.specificity,
                s.macro_soundness,
                s.macro_completeness,
                s.n_inconsistent,
                s.n_malformed,
            )
        )
    return buf.getvalue()
