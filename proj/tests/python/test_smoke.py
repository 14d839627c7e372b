"""Smoke tests for the Python bindings."""

import math

import pytest

import _incdisf as incdisf


def test_codec_round_trip():
    # Substitution with reparandum "to Boston", interregnum "uh I mean",
    # repair "to Denver", plus an isolated filler at position 1.
    repairs = [(3, 4, 7, 9, "sub")]
    edits = [(1, 1)]
    tags, clipped = incdisf.encode_disfluency(repairs, edits, 14)
    assert not clipped
    assert tags == ["f", "e", "f", "f", "f", "e", "e", "e", "rpS-5", "rpnSub",
                    "f", "f", "f", "f"]
    back_repairs, back_edits = incdisf.decode_disfluency(tags)
    assert back_repairs == repairs
    assert back_edits == edits


def test_codec_rejects_malformed_tags():
    with pytest.raises(ValueError):
        incdisf.decode_disfluency(["f", "rpS-3", "rpnRep"])
    with pytest.raises(ValueError):
        incdisf.decode_disfluency(["f", "not-a-tag"])


def test_alphabets():
    disf = incdisf.full_disf_alphabet()
    assert len(disf) == 45
    assert "f" in disf and "e" in disf and "rpS-1" in disf and "rpSnDel-10" in disf
    assert incdisf.full_utt_alphabet() == [".w.", ".w-", "-w.", "-w-"]


def test_generate_train_evaluate_tag(tmp_path):
    corpus = str(tmp_path / "corpus.txt")
    n = incdisf.generate_corpus(corpus, seed=42, num_dialogues=6, repeat_rate=0.15)
    assert n == 6

    # Determinism: same seed, same bytes.
    corpus2 = str(tmp_path / "corpus2.txt")
    incdisf.generate_corpus(corpus2, seed=42, num_dialogues=6, repeat_rate=0.15)
    assert open(corpus, "rb").read() == open(corpus2, "rb").read()

    ckpt = str(tmp_path / "model.ckpt")
    best = incdisf.train_model(
        corpus, ckpt, tasks="disf,uttseg,lm", loss="uncertainty",
        dev_path=corpus, seed=7, epochs=3, hidden=16, embed_dim=10,
        ff_dim=10, lm_dim=10,
    )
    assert best >= 1

    report = incdisf.evaluate(ckpt, corpus, incremental=True)
    for key in ("f1_rps", "f1_uttseg", "ppl", "eo", "tokens"):
        assert key in report
    assert 0.0 <= report["eo"] < 1.0
    assert report["ppl"] > 1.0
    assert math.isfinite(report["ppl"])

    model = incdisf.Model.load(ckpt)
    assert model.tasks == "disf,uttseg,lm"
    assert model.vocab_size > 10

    tagger = incdisf.IncrementalTagger(model)
    out1 = tagger.consume_word("the")
    assert set(out1) == {"disf", "uttseg"}
    assert len(out1["disf"]) == 1
    out2 = tagger.consume_word("market")
    assert len(out2["disf"]) == 2
    assert tagger.consumed == 2
    tagger.end_stream()
    with pytest.raises(ValueError):
        tagger.consume_word("more")
