import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entail_audit.lexical import bleu, lcs_length, rouge_l, rouge_l_corpus

CANDS = ["The cat sat on the mat.", "There is a small effusion."]
REFS = ["The cat is on the mat.", "There is a small pleural effusion."]


def test_bleu_identical():
    corpus = ["blunted costophrenic angle with meniscus sign", "right lower lobe consolidation seen"]
    assert bleu(corpus, corpus) == pytest.approx(1.0, abs=1e-12)


def test_bleu_empty_candidate():
    assert bleu([""], ["some reference text here"]) == 0.0


def test_bleu_worksheet_fixture():
    # see fixtures/bleu_worksheet.md
    expected = math.exp(-1 / 11) * (180 / 3465) ** 0.25
    assert bleu(CANDS, REFS) == pytest.approx(expected, abs=1e-9)


def test_bleu_no_fourgram_match_is_zero():
    assert bleu(["a b c d e"], ["a b c x d e"]) == 0.0


def test_bleu_length_mismatch():
    with pytest.raises(ValueError):
        bleu(["a"], [])


def test_rouge_l_examples():
    assert rouge_l("a b c d", "a c d e") == pytest.approx(0.75, abs=1e-9)
    assert rouge_l("pleural effusion", "pleural effusion") == 1.0
    assert rouge_l("a b", "c d") == 0.0
    assert rouge_l("", "a") == 0.0


def test_rouge_corpus_is_mean():
    assert rouge_l_corpus(["a b c d", "x"], ["a c d e", "x"]) == pytest.approx(0.875)


def test_lcs_length():
    assert lcs_length("abcbdab", "bdcaba") == 4


words = st.lists(st.sampled_from(["the", "lungs", "are", "clear", "no", "effusion", "left"]), min_size=1, max_size=12)


@settings(max_examples=200, deadline=None)
@given(words)
def test_rouge_self_is_one(tokens):
    text = " ".join(tokens)
    assert rouge_l(text, text) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(words, words), min_size=1, max_size=4), words)
def test_bleu_appending_matched_identical_sentence_never_hurts(pairs, extra):
    cands = [" ".join(c) for c, _ in pairs]
    refs = [" ".join(r) for _, r in pairs]
    s = " ".join(extra)
    before = bleu(cands, refs)
    after = bleu(cands + [s], refs + [s])
    assert after >= before - 1e-12
    if before == 1.0:
        assert after == pytest.approx(1.0, abs=1e-12)
