import numpy as np
import pytest

from eigennoise.datasets import (
    SequenceDataset,
    TokenDataset,
    apply_label_set,
    discover_splits,
    parse_conll,
    parse_tsv,
    synth_task,
    write_conll,
    write_tsv,
)

CONLL_SAMPLE = """-DOCSTART- -X- -X- O

EU NNP B-NP B-ORG
rejects VBZ B-VP O

German JJ B-NP B-MISC
call NN I-NP O
"""


def test_parse_conll_columns(tmp_path):
    path = tmp_path / "sample.conll"
    path.write_text(CONLL_SAMPLE, encoding="utf-8")
    ner = parse_conll(path, token_column=0, label_column=3)
    assert ner.sentences == (("EU", "rejects"), ("German", "call"))
    assert ner.labels[0] == ("B-ORG", "O")
    assert ner.label_set == ("B-ORG", "O", "B-MISC")
    pos = parse_conll(path, token_column=0, label_column=1)
    assert pos.labels[0] == ("NNP", "VBZ")


def test_parse_conll_single_line(tmp_path):
    path = tmp_path / "one.conll"
    path.write_text("EU NNP B-NP B-ORG\n\n", encoding="utf-8")
    ds = parse_conll(path, label_column=3)
    assert ds.sentences == (("EU",),)
    assert ds.labels == (("B-ORG",),)


def test_parse_conll_ragged_line(tmp_path):
    path = tmp_path / "bad.conll"
    path.write_text("EU NNP\n", encoding="utf-8")
    with pytest.raises(ValueError, match=":1:"):
        parse_conll(path, label_column=3)


def test_parse_conll_empty(tmp_path):
    path = tmp_path / "empty.conll"
    path.write_text("\n\n", encoding="utf-8")
    with pytest.raises(ValueError, match="no sentences"):
        parse_conll(path)


def test_conll_round_trip(tmp_path):
    src = tmp_path / "sample.conll"
    src.write_text(CONLL_SAMPLE, encoding="utf-8")
    ds = parse_conll(src, label_column=3)
    out = tmp_path / "rewritten.conll"
    write_conll(ds, out)
    back = parse_conll(out, token_column=0, label_column=1)
    assert back.sentences == ds.sentences
    assert back.labels == ds.labels
    assert back.label_set == ds.label_set


def test_parse_tsv_basic(tmp_path):
    path = tmp_path / "task.tsv"
    path.write_text("1\tgreat game\n0\tawful ref\n1\tso good\n", encoding="utf-8")
    ds = parse_tsv(path)
    assert ds.texts == ("great game", "awful ref", "so good")
    assert ds.labels == (0, 1, 0)
    assert ds.label_set == ("1", "0")


def test_parse_tsv_three_labels(tmp_path):
    path = tmp_path / "task.tsv"
    path.write_text("a\tx\nb\ty\nc\tz\n", encoding="utf-8")
    assert parse_tsv(path).num_classes == 3


def test_parse_tsv_missing_tab(tmp_path):
    path = tmp_path / "task.tsv"
    path.write_text("1\tok\nbroken line\n", encoding="utf-8")
    with pytest.raises(ValueError, match=":2:"):
        parse_tsv(path)


def test_parse_tsv_empty(tmp_path):
    path = tmp_path / "task.tsv"
    path.write_text("", encoding="utf-8")
    with pytest.raises(ValueError, match="empty"):
        parse_tsv(path)


def test_tsv_round_trip(tmp_path):
    path = tmp_path / "task.tsv"
    path.write_text("pos\tnice one\nneg\tmeh day\n", encoding="utf-8")
    ds = parse_tsv(path)
    out = tmp_path / "rewritten.tsv"
    write_tsv(ds, out)
    back = parse_tsv(out)
    assert back == ds


def test_apply_label_set_remaps_ids(tmp_path):
    train = SequenceDataset(texts=("a", "b"), labels=(0, 1),
                            label_set=("pos", "neg"))
    dev = SequenceDataset(texts=("c",), labels=(0,), label_set=("neg",),
                          split="dev")
    remapped = apply_label_set(dev, train.label_set)
    assert remapped.labels == (1,)
    assert remapped.label_set == ("pos", "neg")


def test_apply_label_set_rejects_unknown():
    train_labels = ("pos", "neg")
    dev = SequenceDataset(texts=("c",), labels=(0,), label_set=("other",),
                          split="dev")
    with pytest.raises(ValueError, match="unknown"):
        apply_label_set(dev, train_labels)
    tok = TokenDataset(sentences=(("x",),), labels=(("B-LOC",),),
                       label_set=("B-LOC",), split="test")
    with pytest.raises(ValueError, match="unknown"):
        apply_label_set(tok, ("O",))


def test_discover_splits(tmp_path):
    for suffix in ("train", "dev"):
        (tmp_path / f"task.{suffix}").write_text("1\tx\n", encoding="utf-8")
    found = discover_splits(tmp_path / "task")
    assert set(found) == {"train", "dev"}
    with pytest.raises(FileNotFoundError):
        discover_splits(tmp_path / "missing")


def _linear_classifier_accuracy(features, labels, k):
    """Least-squares one-vs-all oracle: closed form, no iterative training."""
    x = np.hstack([features, np.ones((len(features), 1))])
    onehot = np.eye(k)[labels]
    weights, *_ = np.linalg.lstsq(x, onehot, rcond=None)
    pred = (x @ weights).argmax(axis=1)
    return float((pred == labels).mean())


def test_synth_separable_is_linearly_separable():
    ds = synth_task("separable", 200, 4, k=2, seed=0)
    acc = _linear_classifier_accuracy(ds.features, ds.labels, 2)
    assert acc >= 0.95


def test_synth_cluster_separation_scales():
    sep = synth_task("separable", 2000, 6, k=2, seed=1)
    noisy = synth_task("noisy", 2000, 6, k=2, seed=1)

    def mean_gap(ds):
        mu0 = ds.features[ds.labels == 0].mean(axis=0)
        mu1 = ds.features[ds.labels == 1].mean(axis=0)
        return np.linalg.norm(mu0 - mu1)

    assert mean_gap(sep) == pytest.approx(6.0, abs=0.5)
    assert mean_gap(noisy) == pytest.approx(1.0, abs=0.5)


def test_synth_determinism_and_splits():
    a = synth_task("separable", 100, 4, k=2, seed=3)
    b = synth_task("separable", 100, 4, k=2, seed=3)
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_array_equal(a.labels, b.labels)
    assert a.tokens == b.tokens
    dev = synth_task("separable", 100, 4, k=2, seed=3, split="dev")
    assert (dev.features != a.features).any()


def test_synth_labels_balanced_and_named():
    ds = synth_task("separable", 120, 5, k=3, seed=0)
    assert ds.label_set == ("class_0", "class_1", "class_2")
    counts = np.bincount(ds.labels)
    assert counts.tolist() == [40, 40, 40]


def test_synth_token_lexicons_follow_classes():
    ds = synth_task("separable", 60, 4, k=2, seed=5)
    for toks, lab in zip(ds.tokens, ds.labels):
        ids = [int(t[1:]) for t in toks]
        assert all(lab * 30 <= i < (lab + 1) * 30 for i in ids)


def test_synth_noisy_tokens_leak_across_lexicons():
    ds = synth_task("noisy", 200, 4, k=2, seed=5)
    leaks = 0
    for toks, lab in zip(ds.tokens, ds.labels):
        ids = [int(t[1:]) for t in toks]
        leaks += sum(1 for i in ids if not lab * 30 <= i < (lab + 1) * 30)
    assert leaks > 0


def test_synth_validation():
    with pytest.raises(ValueError):
        synth_task("weird", 100, 4)
    with pytest.raises(ValueError):
        synth_task("separable", 15, 4, k=2)
    with pytest.raises(ValueError):
        synth_task("separable", 100, 1, k=2)
    with pytest.raises(ValueError):
        synth_task("separable", 100, 4, split="validation")
