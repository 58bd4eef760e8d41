import json

import pytest

from chatlens import corpus, synthgen
from chatlens.synthgen import SynthConfig, generate, load_ground_truth


@pytest.fixture(scope="module")
def generated(tmp_path_factory):
    outdir = tmp_path_factory.mktemp("synth")
    cfg = SynthConfig(n_broadcasts=120, seed=5)
    truth = generate(cfg, outdir)
    return outdir, cfg, truth


def test_outputs_parse_cleanly(generated):
    outdir, cfg, _ = generated
    report = corpus.IngestReport()
    broadcasts = list(corpus.load_broadcasts(outdir / "broadcasts.jsonl", report))
    assert len(broadcasts) == cfg.n_broadcasts
    assert report.skipped == 0
    report = corpus.IngestReport()
    messages = list(corpus.load_messages(outdir / "messages.jsonl", report))
    assert report.skipped == 0
    assert len(messages) >= cfg.n_broadcasts * cfg.min_messages


def test_ground_truth_consistency(generated):
    outdir, cfg, truth = generated
    loaded = load_ground_truth(outdir / "ground_truth.json")
    assert loaded.grooming_family == 0
    assert len(loaded.broadcasts) == cfg.n_broadcasts
    assert set(loaded.seeds_clothing) <= set(loaded.families[0])
    assert set(loaded.seeds_sex) <= set(loaded.families[0])
    # family word lists are pairwise disjoint
    fams = list(loaded.families.values())
    for i in range(len(fams)):
        for j in range(i + 1, len(fams)):
            assert not set(fams[i]) & set(fams[j])


def test_grooming_share_within_3_sigma(generated):
    _, cfg, truth = generated
    n = cfg.n_broadcasts
    p = cfg.grooming_share
    got = sum(1 for b in truth.broadcasts.values() if b["grooming"])
    sigma = (n * p * (1 - p)) ** 0.5
    assert abs(got - n * p) <= 3 * sigma


def test_zero_gibberish_rate(tmp_path):
    cfg = SynthConfig(n_broadcasts=30, gibberish_rate=0.0, seed=2)
    truth = generate(cfg, tmp_path)
    assert truth.gibberish_message_ids == []


def test_same_seed_byte_identical(tmp_path):
    cfg = SynthConfig(n_broadcasts=40, seed=9)
    generate(cfg, tmp_path / "a")
    generate(cfg, tmp_path / "b")
    for name in ("broadcasts.jsonl", "messages.jsonl", "ground_truth.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_misspellings_within_edit_distance(generated):
    *_, truth = generated

    def levenshtein(a, b):
        prev = list(range(len(b) + 1))
        for i, ca in enumerate(a, 1):
            cur = [i]
            for j, cb in enumerate(b, 1):
                cur.append(min(prev[j] + 1, cur[-1] + 1, prev[j - 1] + (ca != cb)))
            prev = cur
        return prev[-1]

    for seed_word, variants in truth.misspellings.items():
        for v in variants:
            assert 1 <= levenshtein(seed_word, v) <= 2 + 1  # swap counts as 2 here


def test_config_validation():
    with pytest.raises(ValueError):
        SynthConfig(grooming_share=1.5).validate()
    with pytest.raises(ValueError):
        SynthConfig(n_topics=1).validate()
