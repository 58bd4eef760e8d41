"""Access to bundled data files (stopwords, lexicons, word lists)."""

from __future__ import annotations

from importlib import resources


def data_path(name: str):
    return resources.files("chatlens").joinpath("data").joinpath(name)


def load_wordlist(path=None, name: str = "english_words.txt") -> list[str]:
    """One token per line, ``#`` comments and blank lines ignored."""
    path = path if path is not None else data_path(name)
    words = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                words.append(line)
    return words


def load_stopwords(path=None) -> set[str]:
    return set(load_wordlist(path, "stopwords.txt"))


def load_verb_lexicon(path=None) -> set[str]:
    return set(load_wordlist(path, "verb_lexicon.txt"))


def load_particles(path=None) -> list[str]:
    return load_wordlist(path, "particles.txt")


def load_stop_verbs(path=None) -> set[str]:
    return set(load_wordlist(path, "stop_verbs.txt"))


def load_clothing_emojis(path=None) -> list[str]:
    return load_wordlist(path, "clothing_emojis.txt")
