"""Emoji-aware grapheme extraction.

Emoji are matched as extended grapheme clusters built with a regex over the
emoji code-point blocks: a base pictograph optionally followed by skin-tone
modifiers or a variation selector, optionally chained with zero-width
joiners, plus regional-indicator pairs (flags).
"""

from __future__ import annotations

import re

# Base emoji code-point ranges.  Intentionally excludes generic symbols and
# dingbat arrows that show up in ordinary punctuation-heavy chat.
_BASE = (
    "["
    "\U0001F300-\U0001F5FF"  # misc symbols and pictographs
    "\U0001F600-\U0001F64F"  # emoticons
    "\U0001F680-\U0001F6FF"  # transport and map
    "\U0001F900-\U0001F9FF"  # supplemental symbols and pictographs
    "\U0001FA70-\U0001FAFF"  # symbols and pictographs extended-A
    "☀-➿"          # misc symbols + dingbats
    "⬀-⯿"          # misc symbols and arrows (stars, hearts)
    "❤"
    "]"
)
_MOD = "[\U0001F3FB-\U0001F3FF️⃣]*"
_FLAG = "[\U0001F1E6-\U0001F1FF]{2}"
_ZWJ = "‍"

EMOJI_CLUSTER_RE = re.compile(
    f"(?:{_FLAG})|(?:{_BASE}{_MOD}(?:{_ZWJ}{_BASE}{_MOD})*)"
)


def extract_emoji(text: str) -> list[str]:
    """All emoji grapheme clusters in ``text``, in order of appearance."""
    return EMOJI_CLUSTER_RE.findall(text)


def is_emoji(token: str) -> bool:
    """True if ``token`` is exactly one emoji grapheme cluster."""
    m = EMOJI_CLUSTER_RE.fullmatch(token)
    return m is not None


def strip_emoji(text: str) -> str:
    """``text`` with all emoji clusters replaced by spaces."""
    return EMOJI_CLUSTER_RE.sub(" ", text)
