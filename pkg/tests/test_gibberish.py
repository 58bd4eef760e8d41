import math
import random

import pytest

from chatlens import gibberish
from chatlens.resources import load_wordlist


@pytest.fixture(scope="module")
def model():
    words = load_wordlist()
    rng = random.Random(11)
    reference = " ".join(rng.choice(words) for _ in range(40000))
    good = [" ".join(rng.choice(words) for _ in range(6)) for _ in range(100)]
    bad = [
        "".join(rng.choice("bcdfghjklmnpqrstvwxz") for _ in range(25))
        for _ in range(100)
    ]
    return gibberish.train(reference, good, bad)


def test_project():
    assert gibberish.project("Hello, World! 123") == "hello world"
    assert gibberish.project("🙂🙂🙂") == ""


def test_separable_model(model):
    assert model.min_good > model.max_bad
    assert model.threshold == (model.min_good + model.max_bad) / 2


def test_english_not_gibberish(model):
    score, is_gib = gibberish.score(model, "the quick brown fox")
    assert is_gib is False
    assert score > model.threshold


def test_consonant_noise_is_gibberish(model):
    _, is_gib = gibberish.score(model, "zxqwv kjqzx")
    assert is_gib is True


def test_emoji_only_not_gibberish(model):
    assert gibberish.score(model, "🙂🙂🙂") == (0.0, False)


def test_not_separable():
    reference = "the cat sat on the mat " * 5000
    lines = ["the cat sat", "on the mat"]
    with pytest.raises(gibberish.NotSeparableError):
        gibberish.train(reference, lines, lines)


def test_short_reference_rejected():
    with pytest.raises(ValueError, match="reference"):
        gibberish.train("too short", ["good line"], ["zxqwv"])


def test_symmetric_alphabet_transitions():
    reference = "ab" * 60000
    # smoothed: count(a->b) = 59999+1... dominated transitions a->b and b->a
    model = gibberish.train(reference, ["ababab ababab"], ["zzzzzz qqqqqq"])
    a, b = ord("a") - ord("a"), ord("b") - ord("a")
    assert math.exp(model.log_transitions[a][b]) > 0.99
    assert math.exp(model.log_transitions[b][a]) > 0.99


def test_save_load_roundtrip(tmp_path, model):
    p = tmp_path / "g.tsv"
    gibberish.save(model, p)
    loaded = gibberish.load(p)
    assert loaded.threshold == model.threshold
    for text in ("the quick brown fox", "zxqwv kjqzx", "hello there friend"):
        assert gibberish.score(loaded, text) == gibberish.score(model, text)


def test_f1_on_held_out(model):
    words = load_wordlist()
    rng = random.Random(99)
    good = [" ".join(rng.choice(words) for _ in range(5)) for _ in range(200)]
    bad = [
        "".join(rng.choice("bcdfghjklmnpqrstvwxz") for _ in range(20))
        for _ in range(200)
    ]
    tp = sum(gibberish.score(model, t)[1] for t in bad)
    fp = sum(gibberish.score(model, t)[1] for t in good)
    fn = len(bad) - tp
    f1 = 2 * tp / (2 * tp + fp + fn)
    assert f1 >= 0.85
