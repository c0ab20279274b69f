"""``entail-audit`` command line.

Exit codes: 0 clean, 1 fatal error, 2 some records were malformed (outputs
for the remaining records are still written).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from entail_audit import batch, lexical
from entail_audit.batch import dumps, read_jsonl_lines
from entail_audit.evidence import (
    RecordError,
    extract_diagnoses,
    extract_findings,
    load_lexicon,
)
from entail_audit.kb import KBError, lint_kb, load_kb
from entail_audit.metrics import aggregate, delta, summaries_to_csv
from entail_audit.synth import SynthError, synthesize
from entail_audit.verifier import Status, Verdict

logger = logging.getLogger("entail_audit")

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2


class FatalError(Exception):
    pass


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _rate(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError("rate must lie in [0, 1]")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entail-audit",
        description="Audit radiology report impressions for logical entailment by their findings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help: str, kb: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        p.add_argument("--kb", required=kb, type=Path, help="knowledge base (.kbl)")
        p.add_argument("--out", default="-", help="output path (default: stdout)")
        p.add_argument("-v", "--verbose", action="store_true")
        return p

    p = command("audit", "classify every diagnosis of every report")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--lexicon", type=Path)
    p.add_argument("--jobs", type=_positive, default=1)
    p.add_argument("--emit-countermodels", action="store_true")

    p = command("filter", "keep only entailed impression diagnoses")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--lexicon", type=Path)
    p.add_argument("--jobs", type=_positive, default=1)

    p = command("metrics", "soundness/completeness and label metrics from verdicts")
    p.add_argument("--in", dest="input", required=True, help="verdict JSONL")
    p.add_argument("--labels", help="JSONL with 'id' and 'labels' per report")
    p.add_argument("--compare-filtered", action="store_true")
    p.add_argument("--csv", type=Path)
    p.add_argument("--dataset", help="dataset name for the CSV (default: input file stem)")

    p = command("synth", "generate a synthetic corpus with bookkept injections")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--halluc-rate", type=_rate, default=0.0)
    p.add_argument("--omit-rate", type=_rate, default=0.0)
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--log", type=Path, help="injection log path (default: <out>.injections.jsonl)")

    command("lint", "check a knowledge base for contradictions and unreachable diagnoses")

    p = command("extract", "extract structured findings/diagnoses from report text")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--lexicon", type=Path, required=True)

    p = command("lexical", "BLEU and ROUGE-L against reference reports", kb=False)
    p.add_argument("--in", dest="input", required=True)
    return parser


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _jsonl(objs) -> str:
    return "".join(dumps(o) + "\n" for o in objs)


def _status_counts(verdicts: list[Verdict]) -> dict[str, int]:
    return {s.value: sum(v.status is s for v in verdicts) for s in Status}


def cmd_audit(args) -> int:
    ontology = load_kb(args.kb)
    lexicon = _lexicon(args, ontology)
    lines = read_jsonl_lines(args.input)
    verdicts = batch.audit_lines(
        ontology, lines, lexicon, jobs=args.jobs, emit_countermodels=args.emit_countermodels
    )
    _write(args.out, _jsonl(v.to_dict() for v in verdicts))
    counts = _status_counts(verdicts)
    print(
        "audited {n} reports: {consistent} consistent, {inconsistent} inconsistent, "
        "{malformed} malformed".format(n=len(verdicts), **counts),
        file=sys.stderr,
    )
    for i, v in enumerate(verdicts, start=1):
        if v.status is Status.MALFORMED:
            logger.warning("record %d (%s): %s", i, v.id, v.error)
    return EXIT_PARTIAL if counts["malformed"] else EXIT_OK


def cmd_filter(args) -> int:
    ontology = load_kb(args.kb)
    lexicon = _lexicon(args, ontology)
    lines = read_jsonl_lines(args.input)
    verdicts = batch.audit_lines(ontology, lines, lexicon, jobs=args.jobs)
    _write(args.out, "".join(line + "\n" for line in batch.filter_lines(lines, verdicts)))
    counts = _status_counts(verdicts)
    removed = sum(len(v.claimed) - len(v.verified) for v in verdicts)
    print(
        f"filtered {len(verdicts)} reports, removed {removed} unsupported claims "
        f"({counts['inconsistent']} inconsistent, {counts['malformed']} malformed)",
        file=sys.stderr,
    )
    return EXIT_PARTIAL if counts["malformed"] else EXIT_OK


def _load_labels(path: str) -> dict[str, dict[str, bool]]:
    labels = {}
    for line in read_jsonl_lines(path):
        obj = json.loads(line)
        if isinstance(obj, dict) and isinstance(obj.get("id"), str) and obj.get("labels") is not None:
            labels[obj["id"]] = obj["labels"]
    return labels


def cmd_metrics(args) -> int:
    ontology = load_kb(args.kb)
    verdicts = [Verdict.from_dict(json.loads(line)) for line in read_jsonl_lines(args.input)]
    labels = _load_labels(args.labels) if args.labels else None
    diagnoses = [d.name for d in ontology.diagnoses]
    vlm = aggregate(verdicts, labels=labels, diagnoses=diagnoses)
    summaries = [vlm]
    payload = {"vlm": vlm.to_dict()}
    if args.compare_filtered:
        ours = aggregate(verdicts, use_verified=True, labels=labels, diagnoses=diagnoses)
        summaries.append(ours)
        payload["ours"] = ours.to_dict()
        payload["delta"] = {k: vars(v) for k, v in delta(ours, vlm).items()}
    _write(args.out, json.dumps(payload, indent=2) + "\n")
    if args.csv:
        dataset = args.dataset or Path(args.input).stem
        _write(str(args.csv), summaries_to_csv(dataset, summaries))
    return EXIT_OK


def cmd_synth(args) -> int:
    ontology = load_kb(args.kb)
    try:
        reports, log = synthesize(ontology, args.n, args.halluc_rate, args.omit_rate, args.seed)
    except SynthError as exc:
        raise FatalError(str(exc)) from exc
    _write(args.out, _jsonl(reports))
    log_path = args.log
    if log_path is None and args.out != "-":
        log_path = Path(args.out + ".injections.jsonl")
    if log_path is not None:
        _write(str(log_path), _jsonl(entry.to_dict() for entry in log))
    return EXIT_OK


def cmd_lint(args) -> int:
    report = lint_kb(load_kb(args.kb))
    _write(args.out, json.dumps(report.to_dict(), indent=2) + "\n")
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return EXIT_OK if report.global_consistent else EXIT_FATAL


def cmd_extract(args) -> int:
    ontology = load_kb(args.kb)
    lexicon = _lexicon(args, ontology)
    out, bad = [], 0
    for i, line in enumerate(read_jsonl_lines(args.input), start=1):
        try:
            raw = json.loads(line)
            if not isinstance(raw, dict) or not isinstance(raw.get("findings_text", ""), str):
                raise ValueError("expected an object with text fields")
        except ValueError as exc:
            logger.warning("record %d: %s", i, exc)
            bad += 1
            continue
        obj = {"id": raw.get("id")}
        obj["findings"] = extract_findings(raw.get("findings_text") or "", lexicon, ontology).as_dict()
        if isinstance(raw.get("impression_text"), str):
            claimed = extract_diagnoses(raw["impression_text"], lexicon, ontology)
            obj["impression_diagnoses"] = [d.name for d in ontology.diagnoses if d.name in claimed]
        out.append(obj)
    _write(args.out, _jsonl(out))
    return EXIT_PARTIAL if bad else EXIT_OK


def cmd_lexical(args) -> int:
    sections = {"findings": ([], []), "impression": ([], []), "full_report": ([], [])}
    for line in read_jsonl_lines(args.input):
        raw = json.loads(line)
        pairs = {
            "findings": (raw.get("findings_text"), raw.get("reference_findings_text")),
            "impression": (raw.get("impression_text"), raw.get("reference_impression_text")),
        }
        for name, (cand, ref) in pairs.items():
            if cand is not None and ref is not None:
                sections[name][0].append(cand)
                sections[name][1].append(ref)
        if all(c is not None and r is not None for c, r in pairs.values()):
            (fc, fr), (ic, ir) = pairs["findings"], pairs["impression"]
            sections["full_report"][0].append(f"{fc}\n{ic}")
            sections["full_report"][1].append(f"{fr}\n{ir}")
    result = {
        name: {
            "n": len(cands),
            "bleu": lexical.bleu(cands, refs),
            "rouge_l": lexical.rouge_l_corpus(cands, refs),
        }
        for name, (cands, refs) in sections.items()
    }
    _write(args.out, json.dumps(result, indent=2) + "\n")
    return EXIT_OK


def _lexicon(args, ontology):
    if getattr(args, "lexicon", None) is None:
        return None
    lexicon = load_lexicon(args.lexicon)
    lexicon.check(ontology)
    return lexicon


COMMANDS = {
    "audit": cmd_audit,
    "filter": cmd_filter,
    "metrics": cmd_metrics,
    "synth": cmd_synth,
    "lint": cmd_lint,
    "extract": cmd_extract,
    "lexical": cmd_lexical,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (FatalError, KBError, RecordError, OSError, ValueError) as exc:
        print(f"entail-audit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
