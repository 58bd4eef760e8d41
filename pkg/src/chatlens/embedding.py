"""Subword-informed skip-gram embeddings with negative sampling.

Each vocabulary word owns a vector and additionally a set of hashed
character n-gram vectors (with ``<`` ``>`` boundary markers); the word
representation is the mean of the word vector and its n-gram vectors, which
also yields vectors for out-of-vocabulary misspellings.  Training is plain
SGD over (center, context) pairs with negative sampling; the single-threaded
kernel is deterministic for a fixed seed.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, asdict
from typing import Iterable, Sequence

import numpy as np
from numba import njit

NEG_TABLE_SIZE = 1 << 20


class EmbeddingError(Exception):
    pass


@dataclass
class EmbeddingConfig:
    dim: int = 100
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    min_count: int = 5
    ngram_min: int = 3
    ngram_max: int = 6
    buckets: int = 2_000_000
    lr: float = 0.05
    subsample: float = 0.0  # 0 disables frequent-token subsampling
    seed: int = 1

    def validate(self) -> None:
        if self.dim < 8:
            raise EmbeddingError("dimension must be >= 8")
        if self.ngram_min > self.ngram_max:
            raise EmbeddingError("ngram_min must be <= ngram_max")
        for name in ("window", "negatives", "epochs", "min_count", "buckets"):
            if getattr(self, name) < 1:
                raise EmbeddingError(f"{name} must be positive")


def _fnv1a(data: bytes) -> int:
    h = 2166136261
    for byte in data:
        h = ((h ^ byte) * 16777619) & 0xFFFFFFFF
    return h


def ngrams(word: str, nmin: int, nmax: int) -> list[str]:
    """Character n-grams of ``<word>`` with boundary markers."""
    marked = f"<{word}>"
    out = []
    for n in range(nmin, nmax + 1):
        for i in range(len(marked) - n + 1):
            out.append(marked[i : i + n])
    return out


@dataclass
class NeighborList:
    query: str
    neighbors: list[tuple[str, float]]  # cosine distance, ascending


class EmbeddingModel:
    def __init__(
        self,
        cfg: EmbeddingConfig,
        vocab: list[str],
        counts: np.ndarray,
        w_in: np.ndarray,
        w_out: np.ndarray,
    ):
        self.cfg = cfg
        self.vocab = vocab
        self.counts = counts
        self.word2id = {w: i for i, w in enumerate(vocab)}
        self.w_in = w_in  # (V + buckets, dim)
        self.w_out = w_out
        self._composed: np.ndarray | None = None

    # -- representation ----------------------------------------------------

    def _unit_rows(self, word: str, word_id: int | None) -> list[int]:
        V = len(self.vocab)
        rows = [] if word_id is None else [word_id]
        for g in ngrams(word, self.cfg.ngram_min, self.cfg.ngram_max):
            rows.append(V + _fnv1a(g.encode("utf-8")) % self.cfg.buckets)
        return rows

    def vector(self, term: str) -> tuple[np.ndarray, bool]:
        """(vector, has_representation).  In-vocabulary terms compose their
        word vector with their n-gram vectors; OOV terms use n-grams only and
        are flagged with a zero vector when no n-gram fits the range."""
        if not term:
            raise EmbeddingError("empty term")
        rows = self._unit_rows(term, self.word2id.get(term))
        if not rows:
            return np.zeros(self.cfg.dim, dtype=np.float32), False
        return self.w_in[rows].mean(axis=0), True

    def composed_matrix(self) -> np.ndarray:
        """Composed vectors for the whole vocabulary, row-aligned with it."""
        if self._composed is None:
            mat = np.empty((len(self.vocab), self.cfg.dim), dtype=np.float32)
            for i, w in enumerate(self.vocab):
                mat[i], _ = self.vector(w)
            self._composed = mat
        return self._composed

    def nearest_neighbors(self, term: str, n: int) -> NeighborList:
        """Top-n vocabulary terms by cosine distance, ascending, query
        excluded; ties broken lexicographically."""
        if n < 1:
            raise EmbeddingError("n must be >= 1")
        query, ok = self.vector(term)
        norm = float(np.linalg.norm(query))
        if not ok or norm == 0.0:
            raise EmbeddingError(f"no representation for term {term!r}")
        mat = self.composed_matrix()
        norms = np.linalg.norm(mat, axis=1)
        norms[norms == 0.0] = 1e-30
        sims = (mat @ (query / norm)) / norms
        dists = 1.0 - sims
        order = sorted(
            (i for i in range(len(self.vocab)) if self.vocab[i] != term),
            key=lambda i: (float(dists[i]), self.vocab[i]),
        )
        return NeighborList(
            query=term,
            neighbors=[(self.vocab[i], float(dists[i])) for i in order[:n]],
        )

    # -- persistence ---------------------------------------------------------

    def save(self, path) -> None:
        header = dict(asdict(self.cfg), version=1, vocab_size=len(self.vocab))
        np.savez_compressed(
            path,
            header=np.frombuffer(json.dumps(header, sort_keys=True).encode(), dtype=np.uint8),
            vocab=np.array(self.vocab, dtype=object),
            counts=self.counts,
            w_in=self.w_in,
            w_out=self.w_out,
        )

    @classmethod
    def load(cls, path) -> "EmbeddingModel":
        with np.load(path, allow_pickle=True) as data:
            header = json.loads(bytes(data["header"]).decode())
            header.pop("version")
            header.pop("vocab_size")
            cfg = EmbeddingConfig(**header)
            return cls(
                cfg,
                list(data["vocab"]),
                data["counts"],
                data["w_in"],
                data["w_out"],
            )

    def export_tsv(self, path) -> None:
        mat = self.composed_matrix()
        with open(path, "w", encoding="utf-8") as fh:
            for i, word in enumerate(self.vocab):
                fh.write(word + "\t" + "\t".join(repr(float(x)) for x in mat[i]) + "\n")


@njit(cache=True, inline="always")
def _xorshift(state):
    s1 = state[0]
    s0 = state[1]
    state[0] = s0
    s1 ^= s1 << np.uint64(23)
    s1 ^= s1 >> np.uint64(17)
    s1 ^= s0 ^ (s0 >> np.uint64(26))
    state[1] = s1
    return s0 + s1


@njit(cache=True, inline="always")
def _rand_uniform(state):
    return (_xorshift(state) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True, inline="always")
def _rand_below(state, n):
    return np.int64(_rand_uniform(state) * n) % n


@njit(cache=True)
def _train_kernel(
    tokens,
    offsets,
    sub_idx,
    sub_off,
    keep_prob,
    w_in,
    w_out,
    neg_table,
    window,
    negatives,
    epochs,
    lr0,
    seed,
):
    state = np.empty(2, dtype=np.uint64)
    state[0] = np.uint64(seed) * np.uint64(2654435761) + np.uint64(1)
    state[1] = np.uint64(seed) + np.uint64(88172645463325252)
    for _ in range(16):
        _xorshift(state)

    dim = w_in.shape[1]
    h = np.empty(dim, dtype=np.float32)
    grad = np.empty(dim, dtype=np.float32)
    total = float(epochs) * tokens.shape[0] + 1.0
    processed = 0

    for _ in range(epochs):
        for s in range(offsets.shape[0] - 1):
            start = offsets[s]
            end = offsets[s + 1]
            for i in range(start, end):
                processed += 1
                center = tokens[i]
                if keep_prob[center] < 1.0 and _rand_uniform(state) > keep_prob[center]:
                    continue
                alpha = lr0 * (1.0 - processed / total)
                if alpha < lr0 * 1e-4:
                    alpha = lr0 * 1e-4
                reach = window - _rand_below(state, window)
                lo = max(i - reach, start)
                hi = min(i + reach, end - 1)
                us = sub_off[center]
                ue = sub_off[center + 1]
                inv = np.float32(1.0 / (ue - us))
                for d in range(dim):
                    h[d] = 0.0
                for u in range(us, ue):
                    row = sub_idx[u]
                    for d in range(dim):
                        h[d] += w_in[row, d]
                for d in range(dim):
                    h[d] *= inv
                for j in range(lo, hi + 1):
                    if j == i:
                        continue
                    target = tokens[j]
                    for d in range(dim):
                        grad[d] = 0.0
                    for k in range(negatives + 1):
                        if k == 0:
                            t = target
                            label = np.float32(1.0)
                        else:
                            t = neg_table[_rand_below(state, neg_table.shape[0])]
                            if t == target:
                                continue
                            label = np.float32(0.0)
                        dot = np.float32(0.0)
                        for d in range(dim):
                            dot += h[d] * w_out[t, d]
                        if dot > 8.0:
                            sig = np.float32(1.0)
                        elif dot < -8.0:
                            sig = np.float32(0.0)
                        else:
                            sig = np.float32(1.0 / (1.0 + np.exp(-dot)))
                        g = np.float32(alpha) * (label - sig)
                        for d in range(dim):
                            grad[d] += g * w_out[t, d]
                        for d in range(dim):
                            w_out[t, d] += g * h[d]
                    for u in range(us, ue):
                        row = sub_idx[u]
                        for d in range(dim):
                            w_in[row, d] += grad[d] * inv


def train_embeddings(
    docs: Iterable[Sequence[str]], cfg: EmbeddingConfig | None = None
) -> EmbeddingModel:
    """Train skip-gram-with-negative-sampling subword embeddings on token
    lists.  Deterministic for a fixed ``cfg.seed`` (single worker)."""
    cfg = cfg or EmbeddingConfig()
    cfg.validate()
    sentences = [list(d) for d in docs]
    freq = Counter(tok for sent in sentences for tok in sent)
    if not freq:
        raise EmbeddingError("empty corpus")
    total_tokens = sum(freq.values())
    if total_tokens < 10**4:
        import warnings

        warnings.warn(
            f"corpus has only {total_tokens} tokens; embeddings may be weak",
            stacklevel=2,
        )
    vocab = sorted(
        (w for w, c in freq.items() if c >= cfg.min_count),
        key=lambda w: (-freq[w], w),
    )
    if not vocab:
        raise EmbeddingError("no token meets min_count")
    word2id = {w: i for i, w in enumerate(vocab)}
    counts = np.array([freq[w] for w in vocab], dtype=np.int64)
    V = len(vocab)

    # flattened subword-unit table: word id itself plus hashed n-gram rows
    sub_off = np.zeros(V + 1, dtype=np.int64)
    sub_rows: list[int] = []
    for i, w in enumerate(vocab):
        sub_rows.append(i)
        for g in ngrams(w, cfg.ngram_min, cfg.ngram_max):
            sub_rows.append(V + _fnv1a(g.encode("utf-8")) % cfg.buckets)
        sub_off[i + 1] = len(sub_rows)
    sub_idx = np.array(sub_rows, dtype=np.int64)

    ids = [
        np.array([word2id[t] for t in sent if t in word2id], dtype=np.int32)
        for sent in sentences
    ]
    ids = [a for a in ids if a.shape[0] > 1]
    if not ids:
        raise EmbeddingError("no trainable sentence after vocabulary pruning")
    offsets = np.zeros(len(ids) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([a.shape[0] for a in ids])
    tokens = np.concatenate(ids)

    pow_freq = counts.astype(np.float64) ** 0.75
    cum = np.cumsum(pow_freq / pow_freq.sum())
    neg_table = np.searchsorted(cum, (np.arange(NEG_TABLE_SIZE) + 0.5) / NEG_TABLE_SIZE)
    neg_table = neg_table.astype(np.int32)

    if cfg.subsample > 0:
        f = counts / counts.sum()
        keep = np.minimum(1.0, np.sqrt(cfg.subsample / f) + cfg.subsample / f)
    else:
        keep = np.ones(V)
    keep_prob = keep.astype(np.float64)

    rng = np.random.RandomState(cfg.seed)
    w_in = rng.uniform(-0.5 / cfg.dim, 0.5 / cfg.dim, size=(V + cfg.buckets, cfg.dim))
    w_in = w_in.astype(np.float32)
    w_out = np.zeros((V, cfg.dim), dtype=np.float32)

    _train_kernel(
        tokens,
        offsets,
        sub_idx,
        sub_off,
        keep_prob,
        w_in,
        w_out,
        neg_table,
        cfg.window,
        cfg.negatives,
        cfg.epochs,
        cfg.lr,
        cfg.seed,
    )
    if not np.isfinite(w_in).all() or not np.isfinite(w_out).all():
        raise EmbeddingError("training produced non-finite vectors")
    return EmbeddingModel(cfg, vocab, counts, w_in, w_out)


@dataclass
class TermStats:
    count: int
    broadcasts: int
    users: int


def corpus_term_stats(messages, tokenizer) -> dict[str, TermStats]:
    """Occurrence count, distinct broadcast count and distinct user count per
    surface term, computed with the supplied tokenizer."""
    count: Counter[str] = Counter()
    bcast: dict[str, set[str]] = {}
    users: dict[str, set[str]] = {}
    for msg in messages:
        for tok in tokenizer(msg.text):
            term = tok.surface
            count[term] += 1
            bcast.setdefault(term, set()).add(msg.broadcast_id)
            users.setdefault(term, set()).add(msg.user_id)
    return {
        term: TermStats(count[term], len(bcast[term]), len(users[term]))
        for term in count
    }


@dataclass
class ExpansionRow:
    term: str
    count: int
    broadcasts: int
    users: int
    seed: str
    distance: float


def expand_lexicon(
    model: EmbeddingModel,
    seeds: Iterable[str],
    n_per_seed: int,
    stats: dict[str, TermStats] | None = None,
) -> tuple[list[ExpansionRow], list[str]]:
    """Union of seeds and each seed's top-n nearest neighbors, annotated with
    corpus occurrence statistics.  Returns (rows, skipped_seeds)."""
    seeds = sorted(set(seeds))
    stats = stats or {}
    rows: dict[str, ExpansionRow] = {}
    skipped: list[str] = []

    def stat(term: str) -> TermStats:
        return stats.get(term, TermStats(0, 0, 0))

    for seed in seeds:
        try:
            vec, ok = model.vector(seed)
            if not ok or float(np.linalg.norm(vec)) == 0.0:
                raise EmbeddingError("no representation")
            neighbors = (
                model.nearest_neighbors(seed, n_per_seed).neighbors
                if n_per_seed > 0
                else []
            )
        except EmbeddingError:
            skipped.append(seed)
            continue
        st = stat(seed)
        rows.setdefault(
            seed, ExpansionRow(seed, st.count, st.broadcasts, st.users, seed, 0.0)
        )
        for term, dist in neighbors:
            if term in rows and rows[term].distance <= dist:
                continue
            st = stat(term)
            rows[term] = ExpansionRow(term, st.count, st.broadcasts, st.users, seed, dist)
    ordered = sorted(rows.values(), key=lambda r: (r.seed, r.distance, r.term))
    return ordered, skipped
