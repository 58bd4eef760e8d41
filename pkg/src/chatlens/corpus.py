"""Corpus ingestion: broadcasts, chat messages, interaction features,
distribution summaries.

Input files are JSONL, one record per line.  Ingestion is forgiving:
malformed or invariant-violating lines are skipped and counted, never fatal.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator


class CorpusError(Exception):
    pass


@dataclass(frozen=True)
class Gift:
    viewer_id: str
    value: int


@dataclass(frozen=True)
class Broadcast:
    id: str
    owner_id: str
    country: str
    duration_s: int
    total_viewers: int
    likes: int
    likers: int
    new_followers: int
    gifts: tuple[Gift, ...]
    shares: int
    blocks: int


@dataclass(frozen=True)
class ChatMessage:
    broadcast_id: str
    user_id: str
    timestamp: int
    text: str


@dataclass(frozen=True)
class InteractionFeatures:
    total_viewers: int
    duration_s: int
    likes: int
    new_followers: int
    gift_count: int
    gift_value: int
    shares: int
    blocks: int
    total_chat_messages: int
    chat_messages_per_user: float
    followers_to_viewers: float
    likers_to_viewers: float


#: Order of the numeric columns in feature-matrix exports.  The ratio block
#: normalizes interaction counts by the number of viewers.
FEATURE_NAMES = (
    "total_viewers",
    "duration_s",
    "likes",
    "new_followers",
    "gift_count",
    "gift_value",
    "shares",
    "blocks",
    "total_chat_messages",
    "chat_messages_per_user",
    "followers_to_viewers",
    "likers_to_viewers",
    "likes_to_viewers",
    "gifts_to_viewers",
    "gift_value_to_viewers",
    "messages_to_viewers",
    "shares_to_viewers",
    "blocks_to_viewers",
)


@dataclass
class IngestReport:
    accepted: int = 0
    skipped: int = 0
    reasons: list[tuple[int, str]] = field(default_factory=list)

    def reject(self, lineno: int, reason: str) -> None:
        self.skipped += 1
        self.reasons.append((lineno, reason))


def _require_int(obj: dict, key: str, minimum: int | None = None) -> int:
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"field {key} must be an integer")
    if minimum is not None and value < minimum:
        raise ValueError(f"invariant: {key} ≥ {minimum}")
    return value


def _parse_broadcast(obj: dict) -> Broadcast:
    bid = obj["id"]
    if not isinstance(bid, str) or not bid:
        raise ValueError("invariant: id non-empty")
    owner = obj["owner_id"]
    country = obj["country"]
    if not (isinstance(country, str) and len(country) == 2 and country.isalpha()):
        raise ValueError("invariant: country must be ISO-3166 alpha-2")
    duration = _require_int(obj, "duration_s", 0)
    viewers = _require_int(obj, "total_viewers", 0)
    likes = _require_int(obj, "likes", 0)
    likers = _require_int(obj, "likers", 0)
    if likers > viewers:
        raise ValueError("invariant: likers ≤ total_viewers")
    followers = _require_int(obj, "new_followers", 0)
    gifts = []
    for g in obj["gifts"]:
        value = g["value"]
        if not isinstance(value, int) or value < 0:
            raise ValueError("invariant: gift value ≥ 0")
        gifts.append(Gift(viewer_id=str(g["viewer_id"]), value=value))
    shares = _require_int(obj, "shares", 0)
    blocks = _require_int(obj, "blocks", 0)
    return Broadcast(
        id=bid,
        owner_id=str(owner),
        country=country.upper(),
        duration_s=duration,
        total_viewers=viewers,
        likes=likes,
        likers=likers,
        new_followers=followers,
        gifts=tuple(gifts),
        shares=shares,
        blocks=blocks,
    )


def _parse_message(obj: dict) -> ChatMessage:
    bid = obj["broadcast_id"]
    if not isinstance(bid, str) or not bid:
        raise ValueError("invariant: broadcast_id non-empty")
    text = obj["text"]
    if not isinstance(text, str) or not text.strip():
        raise ValueError("invariant: text non-empty after trimming")
    return ChatMessage(
        broadcast_id=bid,
        user_id=str(obj["user_id"]),
        timestamp=_require_int(obj, "ts"),
        text=text,
    )


def _load_jsonl(path, parse, report: IngestReport | None) -> Iterator:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = parse(json.loads(line))
            except (ValueError, KeyError, TypeError) as exc:
                if report is not None:
                    report.reject(lineno, str(exc))
                continue
            if report is not None:
                report.accepted += 1
            yield record


def load_broadcasts(path, report: IngestReport | None = None) -> Iterator[Broadcast]:
    """Stream broadcasts from a JSONL file, skipping invalid lines."""
    return _load_jsonl(path, _parse_broadcast, report)


def load_messages(path, report: IngestReport | None = None) -> Iterator[ChatMessage]:
    """Stream chat messages from a JSONL file, skipping invalid lines."""
    return _load_jsonl(path, _parse_message, report)


def interaction_features(
    broadcast: Broadcast, messages: Iterable[ChatMessage]
) -> InteractionFeatures:
    """Per-broadcast interaction features.

    Ratios with a zero denominator are defined as 0 so that downstream
    feature matrices stay total over degenerate broadcasts.
    """
    total = 0
    chatters: set[str] = set()
    for msg in messages:
        if msg.broadcast_id != broadcast.id:
            raise CorpusError(
                f"message for broadcast {msg.broadcast_id!r} passed to {broadcast.id!r}"
            )
        total += 1
        chatters.add(msg.user_id)
    viewers = broadcast.total_viewers
    return InteractionFeatures(
        total_viewers=viewers,
        duration_s=broadcast.duration_s,
        likes=broadcast.likes,
        new_followers=broadcast.new_followers,
        gift_count=len(broadcast.gifts),
        gift_value=sum(g.value for g in broadcast.gifts),
        shares=broadcast.shares,
        blocks=broadcast.blocks,
        total_chat_messages=total,
        chat_messages_per_user=total / len(chatters) if chatters else 0.0,
        followers_to_viewers=broadcast.new_followers / viewers if viewers else 0.0,
        likers_to_viewers=broadcast.likers / viewers if viewers else 0.0,
    )


def feature_vector(feats: InteractionFeatures) -> list[float]:
    """Numeric row in ``FEATURE_NAMES`` order, including per-viewer ratios."""
    v = feats.total_viewers
    return [
        float(feats.total_viewers),
        float(feats.duration_s),
        float(feats.likes),
        float(feats.new_followers),
        float(feats.gift_count),
        float(feats.gift_value),
        float(feats.shares),
        float(feats.blocks),
        float(feats.total_chat_messages),
        feats.chat_messages_per_user,
        feats.followers_to_viewers,
        feats.likers_to_viewers,
        feats.likes / v if v else 0.0,
        feats.gift_count / v if v else 0.0,
        feats.gift_value / v if v else 0.0,
        feats.total_chat_messages / v if v else 0.0,
        feats.shares / v if v else 0.0,
        feats.blocks / v if v else 0.0,
    ]


@dataclass(frozen=True)
class Cdf:
    values: tuple[float, ...]
    fractions: tuple[float, ...]

    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.values, self.fractions))


def empirical_cdf(values: Iterable[float]) -> Cdf:
    """Empirical CDF over distinct values: F(v) = #{x <= v} / n."""
    data = sorted(values)
    if not data:
        raise CorpusError("empty sample")
    n = len(data)
    out_values: list[float] = []
    out_fracs: list[float] = []
    seen = 0
    for i, v in enumerate(data):
        seen = i + 1
        if i + 1 < n and data[i + 1] == v:
            continue
        out_values.append(v)
        out_fracs.append(seen / n)
    return Cdf(values=tuple(out_values), fractions=tuple(out_fracs))


def country_histogram(
    broadcasts: Iterable[Broadcast], top_n: int | None = None
) -> list[tuple[str, int]]:
    """Distinct broadcasters per country, descending, ties by country code."""
    if top_n is not None and top_n < 1:
        raise CorpusError("top_n must be >= 1")
    owners: dict[str, set[str]] = defaultdict(set)
    for b in broadcasts:
        owners[b.country].add(b.owner_id)
    counts = Counter({country: len(ids) for country, ids in owners.items()})
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:top_n] if top_n is not None else ranked


def zero_share(values: Iterable[float]) -> tuple[float, float]:
    """Fractions of (zero, non-zero) entries; both reported because the
    distinction matters for rare interactions like shares and blocks."""
    data = list(values)
    if not data:
        raise CorpusError("empty sample")
    zeros = sum(1 for v in data if v == 0)
    return zeros / len(data), 1.0 - zeros / len(data)
