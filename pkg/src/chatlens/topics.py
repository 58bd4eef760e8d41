"""LDA by collapsed Gibbs sampling, term ranking, C_v coherence, and
coherence-driven selection of the topic count.

The sampler resamples every token's topic from the standard collapsed
conditional p(z=t) ∝ (n_dt+α)(n_tw+β)/(n_t+Vβ) with the current token's
counts decremented.  One chain is strictly sequential; chains for different
k are independent and may run in parallel.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, asdict
from typing import Iterable, Sequence

import numpy as np
from numba import njit

from .embedding import _rand_below, _rand_uniform  # shared xorshift RNG


class TopicsError(Exception):
    pass


@dataclass
class LdaConfig:
    k: int
    alpha: float | None = None  # defaults to 5/k
    beta: float = 0.01
    iterations: int = 1000
    seed: int = 1

    def validate(self) -> None:
        if self.k < 1:
            raise TopicsError("k must be >= 1")
        if self.alpha is not None and self.alpha <= 0:
            raise TopicsError("alpha must be positive")
        if self.beta <= 0:
            raise TopicsError("beta must be positive")
        if self.iterations < 1:
            raise TopicsError("iterations must be >= 1")

    @property
    def effective_alpha(self) -> float:
        return 5.0 / self.k if self.alpha is None else self.alpha


@njit(cache=True)
def _init_assignments(tokens, doc_of, z, n_tw, n_dt, n_t, k, seed):
    state = np.empty(2, dtype=np.uint64)
    state[0] = np.uint64(seed) * np.uint64(0x9E3779B97F4A7C15) + np.uint64(1)
    state[1] = np.uint64(seed) ^ np.uint64(0xD1B54A32D192ED03)
    for _ in range(16):
        _rand_uniform(state)
    for i in range(tokens.shape[0]):
        t = _rand_below(state, k)
        z[i] = t
        n_tw[t, tokens[i]] += 1
        n_dt[doc_of[i], t] += 1
        n_t[t] += 1
    return state


@njit(cache=True)
def _gibbs_sweep(tokens, doc_of, z, n_tw, n_dt, n_t, alpha, beta, state, cum):
    k, V = n_tw.shape
    vbeta = V * beta
    for i in range(tokens.shape[0]):
        w = tokens[i]
        d = doc_of[i]
        old = z[i]
        n_tw[old, w] -= 1
        n_dt[d, old] -= 1
        n_t[old] -= 1
        total = 0.0
        for t in range(k):
            total += (n_dt[d, t] + alpha) * (n_tw[t, w] + beta) / (n_t[t] + vbeta)
            cum[t] = total
        u = _rand_uniform(state) * total
        new = 0
        while new < k - 1 and cum[new] < u:
            new += 1
        z[i] = new
        n_tw[new, w] += 1
        n_dt[d, new] += 1
        n_t[new] += 1


class TopicModel:
    """Gibbs count tables plus smoothed φ/θ estimates."""

    def __init__(
        self,
        cfg: LdaConfig,
        vocab: list[str],
        n_tw: np.ndarray,
        n_dt: np.ndarray,
        n_t: np.ndarray,
        z: np.ndarray,
        doc_lengths: np.ndarray,
        corpus_word_counts: np.ndarray,
    ):
        self.cfg = cfg
        self.vocab = vocab
        self.word2id = {w: i for i, w in enumerate(vocab)}
        self.n_tw = n_tw
        self.n_dt = n_dt
        self.n_t = n_t
        self.z = z
        self.doc_lengths = doc_lengths
        self.corpus_word_counts = corpus_word_counts

    @property
    def k(self) -> int:
        return self.cfg.k

    def phi(self) -> np.ndarray:
        beta = self.cfg.beta
        V = len(self.vocab)
        return (self.n_tw + beta) / (self.n_t[:, None] + V * beta)

    def theta(self) -> np.ndarray:
        alpha = self.cfg.effective_alpha
        return (self.n_dt + alpha) / (
            self.doc_lengths[:, None] + self.k * alpha
        )

    def word_probabilities(self) -> np.ndarray:
        return self.corpus_word_counts / self.corpus_word_counts.sum()

    def check_counts(self) -> None:
        """Exact integer consistency of the count tables."""
        if not np.array_equal(self.n_tw.sum(axis=1), self.n_t):
            raise TopicsError("count tables inconsistent: n_tw rows != n_t")
        if not np.array_equal(self.n_dt.sum(axis=1), self.doc_lengths):
            raise TopicsError("count tables inconsistent: n_dt rows != doc lengths")
        if self.n_t.sum() != self.doc_lengths.sum():
            raise TopicsError("count tables inconsistent: totals differ")
        if (self.n_tw < 0).any() or (self.n_dt < 0).any():
            raise TopicsError("negative count")

    def save(self, path) -> None:
        header = dict(asdict(self.cfg), version=1)
        with open(path, "wb") as fh:  # keep the exact filename (no .npz suffix)
            self._savez(fh, header)

    def _savez(self, fh, header) -> None:
        np.savez_compressed(
            fh,
            header=np.frombuffer(json.dumps(header, sort_keys=True).encode(), dtype=np.uint8),
            vocab=np.array(self.vocab, dtype=object),
            n_tw=self.n_tw,
            n_dt=self.n_dt,
            n_t=self.n_t,
            z=self.z,
            doc_lengths=self.doc_lengths,
            corpus_word_counts=self.corpus_word_counts,
        )

    @classmethod
    def load(cls, path) -> "TopicModel":
        with np.load(path, allow_pickle=True) as data:
            header = json.loads(bytes(data["header"]).decode())
            header.pop("version")
            cfg = LdaConfig(**header)
            return cls(
                cfg,
                list(data["vocab"]),
                data["n_tw"],
                data["n_dt"],
                data["n_t"],
                data["z"],
                data["doc_lengths"],
                data["corpus_word_counts"],
            )


def _encode_docs(docs: Sequence[Sequence[str]]):
    freq: Counter[str] = Counter()
    for doc in docs:
        freq.update(doc)
    vocab = sorted(freq)
    word2id = {w: i for i, w in enumerate(vocab)}
    ids = [np.array([word2id[t] for t in doc], dtype=np.int32) for doc in docs]
    counts = np.array([freq[w] for w in vocab], dtype=np.int64)
    return vocab, ids, counts


def train_lda(
    docs: Sequence[Sequence[str]],
    cfg: LdaConfig,
    check_invariants: bool = False,
) -> TopicModel:
    """Collapsed Gibbs sampling for ``cfg.iterations`` full sweeps.
    Deterministic for a fixed seed.  With ``check_invariants`` the count
    tables are verified after every sweep (debug runs)."""
    cfg.validate()
    if not docs:
        raise TopicsError("empty corpus")
    for i, doc in enumerate(docs):
        if len(doc) == 0:
            raise TopicsError(f"document {i} is empty")
    vocab, ids, corpus_counts = _encode_docs(docs)
    V = len(vocab)
    if cfg.k >= V:
        import warnings

        warnings.warn(f"k={cfg.k} >= vocabulary size {V}", stacklevel=2)

    doc_lengths = np.array([a.shape[0] for a in ids], dtype=np.int64)
    tokens = np.concatenate(ids)
    doc_of = np.repeat(np.arange(len(ids), dtype=np.int32), doc_lengths)
    k = cfg.k
    n_tw = np.zeros((k, V), dtype=np.int64)
    n_dt = np.zeros((len(ids), k), dtype=np.int64)
    n_t = np.zeros(k, dtype=np.int64)
    z = np.zeros(tokens.shape[0], dtype=np.int32)

    state = _init_assignments(tokens, doc_of, z, n_tw, n_dt, n_t, k, cfg.seed)
    model = TopicModel(cfg, vocab, n_tw, n_dt, n_t, z, doc_lengths, corpus_counts)
    alpha = cfg.effective_alpha
    cum = np.empty(k, dtype=np.float64)
    for _ in range(cfg.iterations):
        _gibbs_sweep(tokens, doc_of, z, n_tw, n_dt, n_t, alpha, cfg.beta, state, cum)
        if check_invariants:
            model.check_counts()
    return model


def doc_topics(
    model: TopicModel, doc: Sequence[str], sweeps: int = 50, seed: int = 1
) -> tuple[np.ndarray, bool]:
    """θ for a held-out document via fixed-φ Gibbs inference.

    Returns (theta, all_oov_flag); entirely-OOV documents get uniform θ."""
    ids = [model.word2id[t] for t in doc if t in model.word2id]
    k = model.k
    alpha = model.cfg.effective_alpha
    if not ids:
        return np.full(k, 1.0 / k), True
    phi = model.phi()
    rng = np.random.RandomState(seed)
    z = rng.randint(0, k, size=len(ids))
    counts = np.bincount(z, minlength=k).astype(np.float64)
    for _ in range(sweeps):
        for i, w in enumerate(ids):
            counts[z[i]] -= 1
            p = (counts + alpha) * phi[:, w]
            p /= p.sum()
            z[i] = rng.choice(k, p=p)
            counts[z[i]] += 1
    theta = (counts + alpha) / (len(ids) + k * alpha)
    return theta, False


def top_terms(
    model: TopicModel, topic: int, n: int, lam: float = 1.0
) -> list[tuple[str, float]]:
    """Relevance-ranked terms: λ·log φ + (1−λ)·log(φ/p(w)); λ=1 is pure
    probability ordering.  Ties broken lexicographically."""
    if not 0.0 <= lam <= 1.0:
        raise TopicsError("lambda must lie in [0, 1]")
    phi_row = model.phi()[topic]
    pw = model.word_probabilities()
    scores = lam * np.log(phi_row) + (1.0 - lam) * np.log(phi_row / pw)
    order = sorted(range(len(model.vocab)), key=lambda i: (-scores[i], model.vocab[i]))
    return [(model.vocab[i], float(scores[i])) for i in order[:n]]


def dominant_topic(theta: Sequence[float]) -> int:
    """argmax of θ; ties resolved to the lowest topic index."""
    best = 0
    for t in range(1, len(theta)):
        if theta[t] > theta[best]:
            best = t
    return best


def top3_topics(theta: Sequence[float]) -> tuple[int, ...]:
    """The three most probable topics (all of them when k < 3), ordered by
    probability descending, ties to the lowest index."""
    order = sorted(range(len(theta)), key=lambda t: (-theta[t], t))
    return tuple(order[: min(3, len(order))])


def identify_grooming_topic(
    model: TopicModel, placeholders: Iterable[str]
) -> tuple[int, float]:
    """Topic with the largest total φ mass on the placeholder tokens, plus
    the score margin to the runner-up."""
    ids = [model.word2id[p] for p in placeholders if p in model.word2id]
    if not ids:
        raise TopicsError("no placeholder token found in vocabulary")
    scores = model.phi()[:, ids].sum(axis=1)
    order = np.argsort(-scores, kind="stable")
    margin = float(scores[order[0]] - scores[order[1]]) if model.k > 1 else float("inf")
    return int(order[0]), margin


# -- C_v coherence -----------------------------------------------------------


@dataclass
class CoherenceConfig:
    top_n: int = 10
    window: int = 110
    epsilon: float = 1e-12

    def validate(self) -> None:
        if self.top_n < 2:
            raise TopicsError("top_n must be >= 2")
        if self.window < 1:
            raise TopicsError("window must be >= 1")


def _window_counts(docs: Iterable[Sequence[str]], tracked: dict[str, int], width: int):
    """Boolean sliding-window counts: per tracked word, the number of windows
    containing it; per pair, the number containing both.  Documents shorter
    than the window form a single window."""
    n = len(tracked)
    single = np.zeros(n, dtype=np.int64)
    pair = np.zeros((n, n), dtype=np.int64)
    total = 0
    mask_counter: Counter[int] = Counter()
    for doc in docs:
        length = len(doc)
        if length == 0:
            continue
        width_eff = min(width, length)
        n_windows = length - width_eff + 1
        total += n_windows
        hits = [(i, tracked[t]) for i, t in enumerate(doc) if t in tracked]
        if not hits:
            continue
        counts = [0] * n
        mask = 0
        for pos, idx in hits:
            if pos >= width_eff:
                break
            if counts[idx] == 0:
                mask |= 1 << idx
            counts[idx] += 1
        mask_counter[mask] += 1
        hit_at: dict[int, list[int]] = {}
        for pos, idx in hits:
            hit_at.setdefault(pos, []).append(idx)
        for start in range(1, n_windows):
            for idx in hit_at.get(start - 1, ()):  # token leaving the window
                counts[idx] -= 1
                if counts[idx] == 0:
                    mask &= ~(1 << idx)
            for idx in hit_at.get(start + width_eff - 1, ()):  # token entering
                if counts[idx] == 0:
                    mask |= 1 << idx
                counts[idx] += 1
            mask_counter[mask] += 1
    for mask, c in mask_counter.items():
        members = []
        m = mask
        while m:
            low = m & -m
            members.append(low.bit_length() - 1)
            m ^= low
        for a in members:
            single[a] += c
            for b in members:
                if b > a:
                    pair[a, b] += c
                    pair[b, a] += c
    return single, pair, total


def _npmi(p_ij: float, p_i: float, p_j: float, eps: float) -> float:
    if p_ij >= 1.0:
        return 1.0
    if p_i == 0.0 or p_j == 0.0:
        return -1.0
    value = math.log((p_ij + eps) / (p_i * p_j)) / (-math.log(p_ij + eps))
    return min(1.0, max(-1.0, value))  # epsilon can overshoot the bounds


@dataclass
class CoherenceResult:
    per_topic: list[float]
    mean: float
    skipped_terms: dict[int, list[str]]


def coherence_cv(
    top_words_per_topic: Sequence[Sequence[str]],
    docs: Iterable[Sequence[str]],
    cc: CoherenceConfig | None = None,
) -> CoherenceResult:
    """C_v over boolean sliding windows.

    Every top word of a topic gets the vector of its NPMI values against all
    of that topic's top words (one-set segmentation); the topic score is the
    mean cosine similarity between each word vector and the sum of all the
    topic's word vectors.  Top words absent from every window are skipped
    (flagged); a topic whose top words are all absent is an error."""
    cc = cc or CoherenceConfig()
    cc.validate()
    tracked: dict[str, int] = {}
    for words in top_words_per_topic:
        for w in words:
            tracked.setdefault(w, len(tracked))
    single, pair, total = _window_counts(docs, tracked, cc.window)
    if total == 0:
        raise TopicsError("no windows: corpus is empty")
    p_single = single / total
    p_pair = pair / total

    per_topic: list[float] = []
    skipped: dict[int, list[str]] = {}
    for t, words in enumerate(top_words_per_topic):
        idx = [tracked[w] for w in words]
        present = [i for i in idx if single[i] > 0]
        absent = [w for w, i in zip(words, idx) if single[i] == 0]
        if absent:
            skipped[t] = absent
        if not present:
            raise TopicsError(f"all top terms of topic {t} absent from every window")
        vectors = np.empty((len(present), len(present)))
        for a, i in enumerate(present):
            for b, j in enumerate(present):
                p_ij = p_pair[i, j] if i != j else p_single[i]
                vectors[a, b] = _npmi(p_ij, p_single[i], p_single[j], cc.epsilon)
        reference = vectors.sum(axis=0)
        ref_norm = float(np.linalg.norm(reference))
        sims = []
        for a in range(len(present)):
            v_norm = float(np.linalg.norm(vectors[a]))
            if v_norm == 0.0 or ref_norm == 0.0:
                sims.append(0.0)
            else:
                sims.append(float(vectors[a] @ reference) / (v_norm * ref_norm))
        per_topic.append(float(np.mean(sims)))
    return CoherenceResult(
        per_topic=per_topic, mean=float(np.mean(per_topic)), skipped_terms=skipped
    )


def model_coherence(
    model: TopicModel, docs: Iterable[Sequence[str]], cc: CoherenceConfig | None = None
) -> CoherenceResult:
    cc = cc or CoherenceConfig()
    tops = [
        [w for w, _ in top_terms(model, t, cc.top_n, lam=1.0)] for t in range(model.k)
    ]
    return coherence_cv(tops, docs, cc)


def _train_and_score(args):
    docs, k, base, cc = args
    cfg = LdaConfig(
        k=k,
        alpha=None,  # recomputed as 5/k per model
        beta=base.beta,
        iterations=base.iterations,
        seed=base.seed,
    )
    model = train_lda(docs, cfg)
    score = model_coherence(model, docs, cc).mean
    return k, model, score


def sweep_k(
    docs: Sequence[Sequence[str]],
    ks: Sequence[int],
    base: LdaConfig,
    cc: CoherenceConfig | None = None,
    threads: int = 1,
) -> tuple[int, TopicModel, list[tuple[int, float]]]:
    """Train one model per k, score each with C_v, return the argmax along
    with the full (k, C_v) table.  Ties go to the smaller k."""
    if not ks:
        raise TopicsError("ks must be non-empty")
    cc = cc or CoherenceConfig()
    jobs = [(docs, k, base, cc) for k in ks]
    if threads > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_train_and_score, jobs))
    else:
        results = [_train_and_score(job) for job in jobs]
    table = [(k, score) for k, _, score in results]
    best_k, best_model, _ = max(results, key=lambda r: (r[2], -r[0]))
    return best_k, best_model, table
