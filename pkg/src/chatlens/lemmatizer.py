"""Rule-based lemmatizer: bundled exception table first, then longest-match
suffix stripping, iterated to a fixed point so the mapping is idempotent.

Accuracy targets the chat verb/clothing vocabulary covered by the bundled
tables; unknown words get a best-effort suffix strip.
"""

from __future__ import annotations

from .resources import data_path

_VOWELS = set("aeiou")
_MIN_STEM = 3


def load_exceptions(path=None) -> dict[str, str]:
    path = path or data_path("lemma_exceptions.tsv")
    table: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            form, base = line.split("\t")
            table[form] = base
    return table


class Lemmatizer:
    def __init__(
        self,
        exceptions: dict[str, str] | None = None,
        known_words: set[str] | None = None,
    ):
        self.exceptions = load_exceptions() if exceptions is None else exceptions
        self.known = known_words or set()

    def _resolve_stem(self, stem: str) -> str:
        """Undo spelling changes from -ing/-ed attachment when the lexicon
        supports it: putt -> put, tak -> take."""
        if stem in self.known:
            return stem
        if stem + "e" in self.known:
            return stem + "e"
        if (
            len(stem) >= 2
            and stem[-1] == stem[-2]
            and stem[-1] not in _VOWELS
            and stem[:-1] in self.known
        ):
            return stem[:-1]
        return stem

    def _step(self, word: str) -> str:
        if word in self.exceptions:
            return self.exceptions[word]
        if word in self.known:
            return word
        if word.endswith("ies") and len(word) - 3 >= _MIN_STEM - 1:
            return word[:-3] + "y"
        for suffix in ("ing", "ed"):
            if word.endswith(suffix) and len(word) - len(suffix) >= _MIN_STEM:
                return self._resolve_stem(word[: -len(suffix)])
        for suffix in ("er", "est"):
            stem = word[: -len(suffix)]
            if word.endswith(suffix) and self._resolve_stem(stem) in self.known:
                return self._resolve_stem(stem)
        if word.endswith("es") and len(word) - 2 >= _MIN_STEM:
            stem = word[:-2]
            if stem.endswith(("s", "x", "z", "ch", "sh")):
                return stem
            return word[:-1]  # plain plural in -e words: makes -> make
        if (
            word.endswith("s")
            and not word.endswith(("ss", "us", "is"))
            and len(word) - 1 >= _MIN_STEM - 1
        ):
            return word[:-1]
        return word

    def lemmatize(self, word: str) -> str:
        """Base form of ``word``; idempotent by fixed-point iteration."""
        current = word
        for _ in range(10):
            step = self._step(current)
            if step == current:
                return current
            current = step
        return current
