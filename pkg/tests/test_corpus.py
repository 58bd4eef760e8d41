import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chatlens import corpus

VALID_BROADCAST = {
    "id": "b1",
    "owner_id": "o1",
    "country": "US",
    "duration_s": 60,
    "total_viewers": 5,
    "likes": 3,
    "likers": 2,
    "new_followers": 1,
    "gifts": [],
    "shares": 0,
    "blocks": 0,
}


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write((r if isinstance(r, str) else json.dumps(r)) + "\n")


def test_broadcast_schema_identity(tmp_path):
    p = tmp_path / "b.jsonl"
    write_jsonl(p, [VALID_BROADCAST])
    (b,) = corpus.load_broadcasts(p)
    assert b.id == "b1"
    assert b.country == "US"
    assert b.total_viewers == 5
    assert b.gifts == ()


def test_negative_duration_rejected(tmp_path):
    p = tmp_path / "b.jsonl"
    write_jsonl(p, [dict(VALID_BROADCAST, duration_s=-1)])
    report = corpus.IngestReport()
    assert list(corpus.load_broadcasts(p, report)) == []
    assert report.skipped == 1
    assert report.reasons[0] == (1, "invariant: duration_s ≥ 0")


def test_malformed_lines_skipped_not_fatal(tmp_path):
    p = tmp_path / "b.jsonl"
    records = [dict(VALID_BROADCAST, id=f"b{i}") for i in range(10)]
    records.insert(3, "{not json")
    records.insert(7, json.dumps(dict(VALID_BROADCAST, id="bad", likers=99)))
    write_jsonl(p, records)
    report = corpus.IngestReport()
    out = list(corpus.load_broadcasts(p, report))
    assert len(out) == 10
    assert report.accepted == 10
    assert report.skipped == 2


def test_message_parsing(tmp_path):
    p = tmp_path / "m.jsonl"
    msgs = [
        {"broadcast_id": "b1", "user_id": f"u{i}", "ts": 100 + i, "text": "hi"}
        for i in range(5)
    ]
    write_jsonl(p, msgs)
    out = list(corpus.load_messages(p))
    assert len(out) == 5
    assert out[0].timestamp == 100


def test_empty_text_rejected(tmp_path):
    p = tmp_path / "m.jsonl"
    write_jsonl(p, [{"broadcast_id": "b1", "user_id": "u", "ts": 1, "text": "  "}])
    report = corpus.IngestReport()
    assert list(corpus.load_messages(p, report)) == []
    assert report.skipped == 1


def make_broadcast(**kw):
    fields = dict(
        id="b1",
        owner_id="o1",
        country="US",
        duration_s=60,
        total_viewers=5,
        likes=3,
        likers=2,
        new_followers=1,
        gifts=(),
        shares=0,
        blocks=0,
    )
    fields.update(kw)
    return corpus.Broadcast(**fields)


def make_message(i, user):
    return corpus.ChatMessage(broadcast_id="b1", user_id=user, timestamp=i, text="x")


def test_interaction_features_hand_arithmetic():
    b = make_broadcast(total_viewers=10, new_followers=5, likers=2)
    msgs = [make_message(i, f"u{i % 4}") for i in range(20)]
    f = corpus.interaction_features(b, msgs)
    assert f.followers_to_viewers == 0.5
    assert f.likers_to_viewers == 0.2
    assert f.chat_messages_per_user == 5.0
    assert f.total_chat_messages == 20


def test_zero_viewers_all_ratios_zero():
    b = make_broadcast(total_viewers=0, likes=0, likers=0, new_followers=0)
    f = corpus.interaction_features(b, [])
    assert f.followers_to_viewers == 0.0
    assert f.likers_to_viewers == 0.0
    assert f.chat_messages_per_user == 0.0
    vec = corpus.feature_vector(f)
    assert len(vec) == len(corpus.FEATURE_NAMES)
    assert all(v == 0.0 for name, v in zip(corpus.FEATURE_NAMES, vec) if "to_viewers" in name)


def test_no_messages():
    f = corpus.interaction_features(make_broadcast(), [])
    assert f.total_chat_messages == 0
    assert f.chat_messages_per_user == 0.0


def test_foreign_message_rejected():
    msg = corpus.ChatMessage(broadcast_id="b2", user_id="u", timestamp=1, text="x")
    with pytest.raises(corpus.CorpusError):
        corpus.interaction_features(make_broadcast(), [msg])


def test_cdf_single_point():
    assert corpus.empirical_cdf([7]).points() == [(7, 1.0)]


def test_cdf_hand_count():
    assert corpus.empirical_cdf([1, 1, 2, 4]).points() == [(1, 0.5), (2, 0.75), (4, 1.0)]


def test_cdf_permutation_invariance():
    assert corpus.empirical_cdf([3, 2, 1]) == corpus.empirical_cdf([1, 2, 3])


def test_cdf_empty_rejected():
    with pytest.raises(corpus.CorpusError, match="empty sample"):
        corpus.empirical_cdf([])


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=32), min_size=1))
def test_cdf_properties(values):
    cdf = corpus.empirical_cdf(values)
    fracs = cdf.fractions
    assert list(cdf.values) == sorted(set(values))
    assert all(a < b for a, b in zip(fracs, fracs[1:])) or len(fracs) == 1
    assert fracs[-1] == 1.0
    assert all(0 < f <= 1 for f in fracs)


def test_country_histogram_hand_count():
    bs = [make_broadcast(id=f"b{i}", owner_id=f"o{i}") for i in range(3)]
    bs.append(make_broadcast(id="b9", owner_id="o9", country="GB"))
    assert corpus.country_histogram(bs, top_n=2) == [("US", 3), ("GB", 1)]


def test_country_histogram_distinct_owners():
    bs = [make_broadcast(id=f"b{i}", owner_id="same") for i in range(5)]
    assert corpus.country_histogram(bs) == [("US", 1)]


def test_country_histogram_top_n_overshoot():
    bs = [make_broadcast()]
    assert corpus.country_histogram(bs, top_n=10) == [("US", 1)]


def test_zero_share():
    zero, nonzero = corpus.zero_share([0, 0, 0, 1])
    assert zero == 0.75
    assert nonzero == 0.25
