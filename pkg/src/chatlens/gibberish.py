"""Character-bigram Markov chain gibberish detector.

A transition matrix over a 27-symbol alphabet (a-z plus space) is estimated
from a large English reference text with add-one smoothing.  A string is
scored by the mean transition log-probability of its projection onto the
alphabet; scores below a learned threshold are flagged as gibberish.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

ALPHABET = "abcdefghijklmnopqrstuvwxyz "
_INDEX = {c: i for i, c in enumerate(ALPHABET)}
_NON_ALPHA = re.compile(r"[^a-z]+")


class NotSeparableError(Exception):
    """Good and bad training lines overlap in score; no threshold exists."""

    def __init__(self, min_good: float, max_bad: float):
        super().__init__(
            "classes not separable: "
            f"min good score {min_good:.6f} <= max bad score {max_bad:.6f}"
        )
        self.min_good = min_good
        self.max_bad = max_bad


@dataclass(frozen=True)
class GibberishModel:
    log_transitions: tuple[tuple[float, ...], ...]  # 27 x 27, rows normalized
    threshold: float
    min_good: float
    max_bad: float


def project(text: str) -> str:
    """Lowercase and map everything outside a-z to single spaces."""
    return _NON_ALPHA.sub(" ", text.lower()).strip()


def _transitions(text: str) -> Iterable[tuple[int, int]]:
    projected = project(text)
    for a, b in zip(projected, projected[1:]):
        yield _INDEX[a], _INDEX[b]


def mean_log_prob(model_rows: Sequence[Sequence[float]], text: str) -> float | None:
    """Mean transition log-probability; None when no transitions exist."""
    total = 0.0
    count = 0
    for i, j in _transitions(text):
        total += model_rows[i][j]
        count += 1
    return total / count if count else None


def train(
    reference_text: str,
    good_lines: Sequence[str],
    bad_lines: Sequence[str],
) -> GibberishModel:
    """Fit the transition matrix on ``reference_text`` and place the decision
    threshold at the midpoint between the worst good line and the best bad
    line.  Raises :class:`NotSeparableError` when the classes overlap."""
    if len(reference_text) < 10**5:
        raise ValueError("reference text too small (need >= 1e5 characters)")
    if not good_lines or not bad_lines:
        raise ValueError("good_lines and bad_lines must be non-empty")

    n = len(ALPHABET)
    counts = [[1] * n for _ in range(n)]  # add-one smoothing
    for i, j in _transitions(reference_text):
        counts[i][j] += 1
    rows = []
    for row in counts:
        total = sum(row)
        rows.append(tuple(math.log(c / total) for c in row))

    good_scores = [s for s in (mean_log_prob(rows, t) for t in good_lines) if s is not None]
    bad_scores = [s for s in (mean_log_prob(rows, t) for t in bad_lines) if s is not None]
    if not good_scores or not bad_scores:
        raise ValueError("training lines produced no scorable transitions")
    min_good = min(good_scores)
    max_bad = max(bad_scores)
    if min_good <= max_bad:
        raise NotSeparableError(min_good, max_bad)
    return GibberishModel(
        log_transitions=tuple(rows),
        threshold=(min_good + max_bad) / 2.0,
        min_good=min_good,
        max_bad=max_bad,
    )


def score(model: GibberishModel, text: str) -> tuple[float, bool]:
    """(mean transition log-prob, is_gibberish).  Texts whose projection has
    no transitions (e.g. emoji-only messages) are never gibberish."""
    s = mean_log_prob(model.log_transitions, text)
    if s is None:
        return 0.0, False
    return s, s < model.threshold


def save(model: GibberishModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("chatlens-gibberish\t1\n")
        fh.write(
            f"{model.threshold!r}\t{model.min_good!r}\t{model.max_bad!r}\n"
        )
        for row in model.log_transitions:
            fh.write("\t".join(repr(x) for x in row) + "\n")


def load(path) -> GibberishModel:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header[:1] != ["chatlens-gibberish"]:
            raise ValueError(f"not a gibberish model file: {path}")
        threshold, min_good, max_bad = (
            float(x) for x in fh.readline().rstrip("\n").split("\t")
        )
        rows = []
        for _ in range(len(ALPHABET)):
            rows.append(tuple(float(x) for x in fh.readline().rstrip("\n").split("\t")))
    return GibberishModel(
        log_transitions=tuple(rows),
        threshold=threshold,
        min_good=min_good,
        max_bad=max_bad,
    )
