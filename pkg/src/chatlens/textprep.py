"""Message preprocessing: tokenization, placeholder substitution, and
assembly of per-broadcast chat-log documents.

Per-message pipeline (see :func:`build_documents`):
tokenize -> whole-message gibberish drop -> stopword removal -> placeholder
substitution -> lemmatization.  Substitution and stopword removal are
re-applied after lemmatization so that no raw lexicon term or stopword can
re-enter through a lemma.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import emoji as emo
from . import gibberish
from .corpus import Broadcast, ChatMessage
from .lemmatizer import Lemmatizer

WORD = "word"
EMOJI = "emoji"
PLACEHOLDER = "placeholder"

MIN_WORD_LEN = 2
MAX_WORD_LEN = 15

_WORD_RE = re.compile(r"[a-z0-9]+(?:'[a-z]+)?")


@dataclass(frozen=True)
class Token:
    surface: str
    kind: str = WORD

    def __str__(self) -> str:  # pragma: no cover - debug convenience
        return self.surface


def tokenize(text: str) -> list[Token]:
    """Split on whitespace/punctuation, lowercase, keep word tokens of length
    2..15, and emit emoji grapheme clusters as individual emoji tokens
    (exempt from the length rule)."""
    tokens: list[Token] = []
    pos = 0
    for m in emo.EMOJI_CLUSTER_RE.finditer(text):
        tokens.extend(_word_tokens(text[pos : m.start()]))
        tokens.append(Token(m.group(), EMOJI))
        pos = m.end()
    tokens.extend(_word_tokens(text[pos:]))
    return tokens


def _word_tokens(segment: str) -> Iterable[Token]:
    for m in _WORD_RE.finditer(segment.lower()):
        word = m.group().replace("'", "")
        if MIN_WORD_LEN <= len(word) <= MAX_WORD_LEN:
            yield Token(word, WORD)


def emoji_sequences(text: str) -> tuple[list[Token], bool]:
    """All emoji tokens of ``text`` in order, plus an emoji-only flag.

    A message is emoji-only when stripping its emoji leaves no word
    characters at all."""
    emojis = [Token(e, EMOJI) for e in emo.extract_emoji(text)]
    rest = emo.strip_emoji(text)
    emoji_only = bool(emojis) and not re.search(r"[\w]", rest)
    return emojis, emoji_only


class SubstitutionPlan:
    """Mapping of placeholder name -> set of surfaces it replaces.

    Placeholders are uppercase names like SEX_TERM; on overlapping term sets
    the first-listed placeholder wins."""

    def __init__(self, groups: Sequence[tuple[str, Iterable[str]]]):
        self.groups: dict[str, set[str]] = {}
        self._surface_to_name: dict[str, str] = {}
        for name, terms in groups:
            if name != name.upper():
                raise ValueError(f"placeholder name must be uppercase: {name!r}")
            owned = set()
            for term in terms:
                if term not in self._surface_to_name:
                    self._surface_to_name[term] = name
                    owned.add(term)
            self.groups[name] = owned

    def placeholder_for(self, surface: str) -> str | None:
        return self._surface_to_name.get(surface)

    @property
    def names(self) -> list[str]:
        return list(self.groups)


def substitute(tokens: Sequence[Token], plan: SubstitutionPlan) -> list[Token]:
    """Replace every token whose surface belongs to a plan set by its
    placeholder token; order and length preserved; idempotent."""
    out = []
    for tok in tokens:
        name = plan.placeholder_for(tok.surface)
        out.append(Token(name, PLACEHOLDER) if name else tok)
    return out


@dataclass(frozen=True)
class ChatLogDocument:
    broadcast_id: str
    tokens: tuple[str, ...]
    n_users: int


#: English-speaking countries included by default.
DEFAULT_COUNTRIES = ("US", "GB", "AU", "CA", "NZ")


@dataclass
class PrepConfig:
    countries: tuple[str, ...] = DEFAULT_COUNTRIES
    stopwords: set[str] = field(default_factory=set)
    plan: SubstitutionPlan = field(default_factory=lambda: SubstitutionPlan([]))
    gibberish_model: gibberish.GibberishModel | None = None
    lemmatizer: Lemmatizer | None = None
    min_messages: int = 10


def preprocess_message(text: str, cfg: PrepConfig) -> list[Token] | None:
    """Tokens of one message after the full pipeline, or None when the whole
    message is dropped as gibberish."""
    if cfg.gibberish_model is not None:
        _, is_gib = gibberish.score(cfg.gibberish_model, text)
        if is_gib:
            return None
    tokens = tokenize(text)
    tokens = [t for t in tokens if not (t.kind == WORD and t.surface in cfg.stopwords)]
    tokens = substitute(tokens, cfg.plan)
    if cfg.lemmatizer is not None:
        tokens = [
            Token(cfg.lemmatizer.lemmatize(t.surface), WORD) if t.kind == WORD else t
            for t in tokens
        ]
        tokens = [
            t for t in tokens if not (t.kind == WORD and t.surface in cfg.stopwords)
        ]
        tokens = substitute(tokens, cfg.plan)
    return tokens


def build_documents(
    broadcasts: Iterable[Broadcast],
    messages: Iterable[ChatMessage],
    cfg: PrepConfig,
) -> list[ChatLogDocument]:
    """One document per included broadcast: all preprocessed tokens of its
    messages in order.  Broadcasts outside the country include-list or with
    fewer than ``cfg.min_messages`` raw messages are excluded, as are
    broadcasts whose documents come out empty."""
    included = {b.id for b in broadcasts if b.country in cfg.countries}
    by_broadcast: dict[str, list[ChatMessage]] = defaultdict(list)
    for msg in messages:
        if msg.broadcast_id in included:
            by_broadcast[msg.broadcast_id].append(msg)

    docs = []
    for bid in sorted(by_broadcast):
        msgs = by_broadcast[bid]
        if len(msgs) < cfg.min_messages:
            continue
        tokens: list[str] = []
        users = set()
        for msg in msgs:
            out = preprocess_message(msg.text, cfg)
            if out is None:
                continue
            tokens.extend(t.surface for t in out)
            users.add(msg.user_id)
        if tokens:
            docs.append(
                ChatLogDocument(broadcast_id=bid, tokens=tuple(tokens), n_users=len(users))
            )
    return docs
