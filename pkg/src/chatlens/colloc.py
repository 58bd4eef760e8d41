"""Collocate mining, lexicon-based verb extraction, and emoji co-occurrence.

All counting is message-local: chat messages are short, so collocations are
never tracked across message boundaries.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .lemmatizer import Lemmatizer
from .textprep import EMOJI, WORD, Token


@dataclass
class CollocationTable:
    targets: tuple[str, ...]
    rows: list[tuple[str, int, float]]  # (collocate, count, pmi)
    target_occurrences: int  # total occurrences of the targets themselves


def collocates(
    messages: Iterable[Sequence[Token]],
    targets: Iterable[str],
    window: int = 5,
    top_n: int | None = None,
    stopwords: set[str] | None = None,
) -> CollocationTable:
    """Count (target, other) pairs within ±window positions inside single
    messages, excluding stopwords and the targets themselves.

    PMI is add-one smoothed over message-windows:
    pmi(w) = log((cooc(w)+1) · W / ((occ_target+1) · (occ(w)+1))) where W is
    the total number of token positions scanned.  The ranking follows raw
    co-occurrence counts (ties lexicographic); PMI is reported alongside.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    stopwords = stopwords or set()
    target_set = set(targets)
    cooc: Counter[str] = Counter()
    occ: Counter[str] = Counter()
    target_occ = 0
    positions = 0
    for msg in messages:
        surfaces = [t.surface for t in msg]
        positions += len(surfaces)
        occ.update(surfaces)
        for i, s in enumerate(surfaces):
            if s not in target_set:
                continue
            target_occ += 1
            lo = max(0, i - window)
            hi = min(len(surfaces), i + window + 1)
            for j in range(lo, hi):
                if j == i:
                    continue
                other = surfaces[j]
                if other in target_set or other in stopwords:
                    continue
                cooc[other] += 1
    rows = []
    for term, count in cooc.items():
        pmi = math.log(
            (count + 1) * max(positions, 1) / ((target_occ + 1) * (occ[term] + 1))
        )
        rows.append((term, count, pmi))
    rows.sort(key=lambda r: (-r[1], r[0]))
    if top_n is not None:
        rows = rows[:top_n]
    return CollocationTable(
        targets=tuple(sorted(target_set)), rows=rows, target_occurrences=target_occ
    )


@dataclass
class VerbReport:
    simple: list[tuple[str, int]]  # lemmatized base forms, stop-verbs removed
    phrasal: list[tuple[str, int]]  # verb_particle


def extract_verbs(
    messages: Iterable[Sequence[Token]],
    verb_lexicon: set[str],
    particles: Sequence[str],
    lemmatizer: Lemmatizer,
    stop_verbs: set[str] | None = None,
    max_gap: int = 2,
) -> VerbReport:
    """Approximate verb extraction: a token is a verb when its lemma is in
    the lexicon; a phrasal verb is a verb followed within ``max_gap`` tokens
    by a particle, counted as verb_particle."""
    stop_verbs = stop_verbs or set()
    particle_set = set(particles)
    simple: Counter[str] = Counter()
    phrasal: Counter[str] = Counter()
    for msg in messages:
        words = [t.surface for t in msg if t.kind == WORD]
        lemmas = [lemmatizer.lemmatize(w) for w in words]
        for i, lemma in enumerate(lemmas):
            if lemma not in verb_lexicon:
                continue
            if lemma not in stop_verbs:
                simple[lemma] += 1
            for j in range(i + 1, min(i + 1 + max_gap, len(words))):
                if words[j] in particle_set:
                    phrasal[f"{lemma}_{words[j]}"] += 1
                    break
    ranked_simple = sorted(simple.items(), key=lambda kv: (-kv[1], kv[0]))
    ranked_phrasal = sorted(phrasal.items(), key=lambda kv: (-kv[1], kv[0]))
    return VerbReport(simple=ranked_simple, phrasal=ranked_phrasal)


def emoji_cooccurrence(
    messages: Iterable[Sequence[Token]],
    anchors: Iterable[str],
    top_n: int | None = None,
) -> list[tuple[str, int]]:
    """Emojis co-occurring with anchor emojis, counted once per message
    (repetition collapsed), ranked descending with lexicographic ties."""
    anchor_set = set(anchors)
    if not anchor_set:
        raise ValueError("anchor set must be non-empty")
    counts: Counter[str] = Counter()
    for msg in messages:
        emojis = {t.surface for t in msg if t.kind == EMOJI}
        if emojis & anchor_set:
            counts.update(emojis - anchor_set)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:top_n] if top_n is not None else ranked
