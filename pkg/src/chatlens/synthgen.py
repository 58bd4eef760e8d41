"""Synthetic labeled corpora for exercising the whole pipeline.

The generator plants: disjoint topic word families (family 0 emulating the
grooming topic, with seed terms and adversarial misspellings), gibberish
spam messages, emoji-only messages, and interaction-feature shifts for
grooming-labeled broadcasts (higher follower and liker ratios).  Output is
byte-identical for a fixed seed and always passes corpus validation.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .resources import load_stopwords, load_wordlist

CLOTHING_SEEDS = (
    "shirt",
    "pants",
    "dress",
    "skirt",
    "jacket",
    "sock",
    "shoe",
    "scarf",
    "glove",
    "bikini",
)
INCLUDED_COUNTRIES = ("US", "GB", "AU", "CA", "NZ")
OTHER_COUNTRIES = ("DE", "FR", "MX", "BR", "JP")

GROOMING_EMOJIS = ("👗", "👙", "👇", "👅", "😈", "🙈")
GENERIC_EMOJIS = ("🙂", "😂", "🎉", "🔥", "👍", "💯", "🎵", "🐶")


@dataclass
class SynthConfig:
    n_broadcasts: int = 2000
    n_topics: int = 4
    grooming_share: float = 0.19
    misspell_rate: float = 0.3
    edit_distance: int = 2
    gibberish_rate: float = 0.03
    emoji_only_rate: float = 0.08
    followers_effect: float = 0.3  # mean shift of followers/viewers for grooming
    likers_effect: float = 0.15  # mean shift of likers/viewers for grooming
    n_seeds: int = 20
    variants_per_seed: int = 3
    words_per_family: int = 25
    filler_words: int = 30
    filler_rate: float = 0.2
    min_messages: int = 12
    max_messages: int = 32
    foreign_rate: float = 0.05
    seed: int = 7

    def validate(self) -> None:
        for name in (
            "grooming_share",
            "misspell_rate",
            "gibberish_rate",
            "emoji_only_rate",
            "filler_rate",
            "foreign_rate",
        ):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.n_topics < 2:
            raise ValueError("n_topics must be >= 2")


def _misspell(word: str, rng: random.Random, max_edits: int) -> str:
    """A misspelled variant within ``max_edits`` single-character edits."""
    edits = rng.randint(1, max_edits)
    out = word
    for _ in range(edits):
        op = rng.choice(("double", "swap", "dropvowel", "replace"))
        i = rng.randrange(len(out))
        if op == "double":
            out = out[: i + 1] + out[i] + out[i + 1 :]
        elif op == "swap" and len(out) >= 2:
            i = rng.randrange(len(out) - 1)
            out = out[:i] + out[i + 1] + out[i] + out[i + 2 :]
        elif op == "dropvowel":
            vowels = [j for j, c in enumerate(out) if c in "aeiou"]
            if len(vowels) > 1 and len(out) > 3:
                j = rng.choice(vowels)
                out = out[:j] + out[j + 1 :]
        else:
            out = out[:i] + rng.choice("qwxzjk") + out[i + 1 :]
    return out


@dataclass
class GroundTruth:
    grooming_family: int
    families: dict[int, list[str]]
    seeds_sex: list[str]
    seeds_clothing: list[str]
    misspellings: dict[str, list[str]]
    companions: dict[str, list[str]]
    broadcasts: dict[str, dict]
    gibberish_message_ids: list[str]
    emoji_only_message_ids: list[str]
    config: dict = field(default_factory=dict)


def _build_vocabulary(cfg: SynthConfig, rng: random.Random):
    stop = load_stopwords()
    words = [
        w
        for w in load_wordlist()
        if w not in stop and len(w) >= 3 and w not in CLOTHING_SEEDS
    ]
    rng.shuffle(words)
    n_other_seeds = max(cfg.n_seeds - len(CLOTHING_SEEDS), 0)
    # seed words need >= 5 characters so misspelled variants still share
    # character n-grams with them
    candidates = [w for w in words if len(w) >= 5]
    sex_seeds = sorted(candidates[:n_other_seeds])
    words = [w for w in words if w not in set(sex_seeds)]
    clothing_seeds = list(CLOTHING_SEEDS)[: min(cfg.n_seeds, len(CLOTHING_SEEDS))]

    misspellings: dict[str, list[str]] = {}
    taken = set(words) | set(sex_seeds) | set(clothing_seeds)
    for seed_word in sorted(sex_seeds + clothing_seeds):
        variants = []
        guard = 0
        while len(variants) < cfg.variants_per_seed and guard < 100:
            guard += 1
            v = _misspell(seed_word, rng, cfg.edit_distance)
            if v not in taken and len(v) >= 2:
                taken.add(v)
                variants.append(v)
        misspellings[seed_word] = variants

    # every seed gets private companion words that only ever appear next to
    # that seed (or its variants), giving seed and variant a shared local
    # context on top of the family-wide one
    companions: dict[str, list[str]] = {}
    for seed_word in sorted(sex_seeds + clothing_seeds):
        companions[seed_word] = sorted(words[:2])
        words = words[2:]

    grooming_extra = ["show", "open"] + words[:8]
    words = words[8:]
    families: dict[int, list[str]] = {
        0: sorted(
            set(sex_seeds + clothing_seeds + grooming_extra)
            | {c for cs in companions.values() for c in cs}
        )
    }
    for f in range(1, cfg.n_topics):
        families[f] = sorted(words[: cfg.words_per_family])
        words = words[cfg.words_per_family :]
    filler = sorted(words[: cfg.filler_words])
    return families, filler, sex_seeds, clothing_seeds, misspellings, companions


def _beta(rng: random.Random, mean: float, concentration: float = 12.0) -> float:
    a = mean * concentration
    b = (1.0 - mean) * concentration
    return rng.betavariate(a, b)


def generate(cfg: SynthConfig, outdir) -> GroundTruth:
    """Write broadcasts.jsonl, messages.jsonl, ground_truth.json and seed
    files into ``outdir``; returns the ground truth."""
    cfg.validate()
    rng = random.Random(cfg.seed)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    families, filler, sex_seeds, clothing_seeds, misspellings, companions = (
        _build_vocabulary(cfg, rng)
    )
    seed_words = set(misspellings)
    companion_words = {c for cs in companions.values() for c in cs}
    # companions are only ever emitted next to their seed, never sampled
    # directly; seeds appear more often than the rest of their family so that
    # their misspelled variants accumulate enough occurrences
    grooming_pool = [w for w in families[0] if w not in companion_words]
    grooming_weights = [3.0 if w in seed_words else 1.0 for w in grooming_pool]

    broadcasts_path = outdir / "broadcasts.jsonl"
    messages_path = outdir / "messages.jsonl"
    truth_broadcasts: dict[str, dict] = {}
    gibberish_ids: list[str] = []
    emoji_only_ids: list[str] = []

    def family_tokens(fam: int) -> list[str]:
        if rng.random() < cfg.filler_rate and filler:
            return [rng.choice(filler)]
        if fam == 0:
            word = rng.choices(grooming_pool, weights=grooming_weights, k=1)[0]
            out = [word]
            if word in seed_words:
                if rng.random() < cfg.misspell_rate:
                    variants = misspellings[word]
                    if variants:
                        out = [rng.choice(variants)]
                if rng.random() < 0.7:  # seed-specific collocate
                    out.append(rng.choice(companions[word]))
            return out
        return [rng.choice(families[fam])]

    with open(broadcasts_path, "w", encoding="utf-8") as bfh, open(
        messages_path, "w", encoding="utf-8"
    ) as mfh:
        for b in range(cfg.n_broadcasts):
            bid = f"b{b:05d}"
            owner = f"owner{rng.randrange(max(cfg.n_broadcasts // 3, 1)):05d}"
            grooming = rng.random() < cfg.grooming_share
            fam = 0 if grooming else rng.randint(1, cfg.n_topics - 1)
            mixture = [0.25 / (cfg.n_topics - 1)] * cfg.n_topics
            mixture[fam] = 0.75
            country = (
                rng.choice(OTHER_COUNTRIES)
                if rng.random() < cfg.foreign_rate
                else rng.choice(INCLUDED_COUNTRIES)
            )

            viewers = int(math.exp(rng.gauss(4.2, 0.8))) + 5
            followers_mean = 0.12 + (cfg.followers_effect if grooming else 0.0)
            likers_mean = 0.18 + (cfg.likers_effect if grooming else 0.0)
            followers_ratio = _beta(rng, followers_mean)
            likers_ratio = _beta(rng, likers_mean)
            likers = min(viewers, int(round(viewers * likers_ratio)))
            likes = likers + int(viewers * rng.random() * 0.5)
            gifts = [
                {"viewer_id": f"{bid}_v{g}", "value": rng.randint(1, 200)}
                for g in range(rng.choices((0, 1, 2, 5), weights=(55, 25, 15, 5))[0])
            ]
            record = {
                "id": bid,
                "owner_id": owner,
                "country": country,
                "duration_s": rng.randint(120, 7200),
                "total_viewers": viewers,
                "likes": likes,
                "likers": likers,
                "new_followers": int(round(viewers * followers_ratio)),
                "gifts": gifts,
                "shares": rng.choices((0, 1, 2), weights=(90, 7, 3))[0],
                "blocks": rng.choices((0, 1, 3), weights=(92, 6, 2))[0],
            }
            bfh.write(json.dumps(record, sort_keys=True) + "\n")

            n_msgs = rng.randint(cfg.min_messages, cfg.max_messages)
            chatters = [f"{bid}_u{u}" for u in range(max(2, n_msgs // 3))]
            ts = rng.randint(1_500_000_000, 1_600_000_000)
            for m in range(n_msgs):
                ts += rng.randint(1, 30)
                mid = f"{bid}:{m}"
                draw = rng.random()
                if draw < cfg.gibberish_rate:
                    text = "".join(
                        rng.choice("bcdfghjklmnpqrstvwxz")
                        for _ in range(rng.randint(15, 40))
                    )
                    gibberish_ids.append(mid)
                elif draw < cfg.gibberish_rate + cfg.emoji_only_rate:
                    pool = GROOMING_EMOJIS if fam == 0 else GENERIC_EMOJIS
                    text = "".join(
                        rng.choice(pool) for _ in range(rng.randint(1, 4))
                    )
                    emoji_only_ids.append(mid)
                else:
                    topic = rng.choices(range(cfg.n_topics), weights=mixture, k=1)[0]
                    length = rng.randint(3, 12)
                    words = []
                    while len(words) < length:
                        words.extend(family_tokens(topic))
                    if fam == 0 and rng.random() < 0.15:
                        words.append(rng.choice(GROOMING_EMOJIS))
                    text = " ".join(words)
                mfh.write(
                    json.dumps(
                        {
                            "broadcast_id": bid,
                            "user_id": rng.choice(chatters),
                            "ts": ts,
                            "text": text,
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )
            truth_broadcasts[bid] = {
                "family": fam,
                "grooming": grooming,
                "country": country,
            }

    truth = GroundTruth(
        grooming_family=0,
        families=families,
        seeds_sex=sorted(sex_seeds),
        seeds_clothing=sorted(clothing_seeds),
        misspellings=misspellings,
        companions=companions,
        broadcasts=truth_broadcasts,
        gibberish_message_ids=gibberish_ids,
        emoji_only_message_ids=emoji_only_ids,
        config=asdict(cfg),
    )
    with open(outdir / "ground_truth.json", "w", encoding="utf-8") as fh:
        json.dump(asdict(truth), fh, sort_keys=True, indent=1)
        fh.write("\n")
    for name, seeds in (
        ("seeds_sex.txt", truth.seeds_sex),
        ("seeds_clothing.txt", truth.seeds_clothing),
    ):
        with open(outdir / name, "w", encoding="utf-8") as fh:
            fh.write("\n".join(seeds) + "\n")
    return truth


def load_ground_truth(path) -> GroundTruth:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    raw["families"] = {int(k): v for k, v in raw["families"].items()}
    return GroundTruth(**raw)
