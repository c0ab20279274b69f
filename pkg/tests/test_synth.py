import pytest

from entail_audit.evidence import ingest_record
from entail_audit.kb import parse_kb
from entail_audit.synth import SynthError, synthesize
from entail_audit.verifier import Status, Verifier


def test_no_noise_claims_exactly_entailed(cxr):
    reports, log = synthesize(cxr, 200, 0.0, 0.0, seed=1)
    for r, entry in zip(reports, log):
        assert r["impression_diagnoses"] == entry.entailed
        assert not entry.hallucinations and not entry.omissions
        assert [d for d, v in r["labels"].items() if v] == entry.entailed


def test_full_noise_claims_the_complement(cxr):
    names = [d.name for d in cxr.diagnoses]
    reports, log = synthesize(cxr, 200, 1.0, 1.0, seed=2)
    for r, entry in zip(reports, log):
        assert r["impression_diagnoses"] == [d for d in names if d not in entry.entailed]
        assert entry.omissions == entry.entailed


def test_seed_determinism(cxr):
    a = synthesize(cxr, 100, 0.2, 0.1, seed=42)
    b = synthesize(cxr, 100, 0.2, 0.1, seed=42)
    c = synthesize(cxr, 100, 0.2, 0.1, seed=43)
    assert a == b
    assert a[0] != c[0]


def test_ids_are_zero_padded(cxr):
    reports, _ = synthesize(cxr, 12, 0.0, 0.0, seed=0)
    assert reports[0]["id"] == "synth-00" and reports[-1]["id"] == "synth-11"


def test_findings_vectors_are_full_and_consistent(cxr):
    verifier = Verifier(cxr)
    reports, _ = synthesize(cxr, 100, 0.1, 0.1, seed=5)
    for r in reports:
        assert set(r["findings"]) == {f.name for f in cxr.findings}
        assert verifier.classify(ingest_record(r, cxr)).status is Status.CONSISTENT


def test_inconsistent_kb_raises():
    onto = parse_kb("finding a\ndiagnosis d\nrule r1: a\nrule r2: !a\n")
    with pytest.raises(SynthError):
        synthesize(onto, 5, 0.0, 0.0, seed=0)


@pytest.mark.parametrize("kwargs", [dict(n=-1), dict(halluc_rate=1.5), dict(omit_rate=-0.1), dict(seed=2**64)])
def test_bad_arguments(toy, kwargs):
    args = dict(n=1, halluc_rate=0.0, omit_rate=0.0, seed=0) | kwargs
    with pytest.raises(SynthError):
        synthesize(toy, **args)


def test_empty_corpus(toy):
    assert synthesize(toy, 0, 0.5, 0.5, seed=0) == ([], [])
