"""Pipeline orchestration over a run directory.

Each subcommand reads the artifacts earlier stages left in the run
directory, writes its own outputs, and appends a manifest line
(subcommand, config hash, seed, artifacts).  Wall times go to a separate
timings file so that manifests stay byte-identical across reruns.

Exit codes: 0 success, 1 validation error, 2 missing prerequisite,
3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from pathlib import Path

import numpy as np

from . import colloc as colloc_mod
from . import corpus as corpus_mod
from . import gibberish as gibberish_mod
from . import reports
from . import synthgen
from . import textprep
from . import topics as topics_mod
from .config import ConfigError, RunConfig, load_config
from .embedding import (
    EmbeddingConfig,
    EmbeddingModel,
    corpus_term_stats,
    expand_lexicon,
    train_embeddings,
)
from .lemmatizer import Lemmatizer
from .mining import ForestConfig, fpgrowth, frequent_pairs, mdi, train_forest
from .resources import (
    load_clothing_emojis,
    load_particles,
    load_stop_verbs,
    load_stopwords,
    load_verb_lexicon,
    load_wordlist,
)

CDF_FEATURES = (
    "duration_s",
    "total_viewers",
    "likes",
    "new_followers",
    "gift_value",
    "shares",
    "blocks",
    "total_chat_messages",
    "chat_messages_per_user",
    "followers_to_viewers",
    "likers_to_viewers",
)

#: artifact file -> subcommand that produces it
PRODUCERS = {
    "broadcasts.jsonl": "synth",
    "messages.jsonl": "synth",
    "seeds_sex.txt": "synth",
    "seeds_clothing.txt": "synth",
    "features.csv": "ingest",
    "embeddings.npz": "embed",
    "expansion.csv": "expand",
    "plan.json": "expand",
    "documents.jsonl": "prep",
    "gibberish_model.tsv": "prep",
    "topics.model": "lda-sweep",
    "coherence.csv": "lda-sweep",
    "assignments.csv": "assign",
    "mdi.csv": "mdi",
}


class MissingArtifact(Exception):
    def __init__(self, name: str):
        producer = PRODUCERS.get(name, "?")
        super().__init__(f"requires artifact {name} (run {producer})")


class Runner:
    def __init__(self, run_dir: Path, cfg: RunConfig):
        self.run_dir = run_dir
        self.cfg = cfg
        self.seed = cfg.get_int("run", "seed")
        self.threads = cfg.get_int("run", "threads")

    # -- artifact helpers ---------------------------------------------------

    def path(self, name: str) -> Path:
        return self.run_dir / name

    def require(self, name: str) -> Path:
        p = self.path(name)
        if not p.exists():
            raise MissingArtifact(name)
        return p

    def _configured(self, key: str, default_name: str) -> Path:
        configured = self.cfg.get("paths", key)
        return Path(configured) if configured else self.path(default_name)

    def broadcasts_path(self) -> Path:
        p = self._configured("broadcasts", "broadcasts.jsonl")
        if not p.exists():
            raise MissingArtifact("broadcasts.jsonl")
        return p

    def messages_path(self) -> Path:
        p = self._configured("messages", "messages.jsonl")
        if not p.exists():
            raise MissingArtifact("messages.jsonl")
        return p

    def stopwords(self) -> set[str]:
        configured = self.cfg.get("paths", "stopwords")
        return load_stopwords(configured or None)

    def seed_terms(self, key: str, default_name: str) -> list[str]:
        p = self._configured(key, default_name)
        if not p.exists():
            raise MissingArtifact(default_name)
        return load_wordlist(p, p.name)

    def log(self, subcommand: str, artifacts: list[str], elapsed: float) -> None:
        with open(self.path("manifest.tsv"), "a", encoding="utf-8") as fh:
            fh.write(
                f"{subcommand}\t{self.cfg.digest()}\t{self.seed}\t{';'.join(artifacts)}\n"
            )
        with open(self.path("timings.tsv"), "a", encoding="utf-8") as fh:
            fh.write(f"{subcommand}\t{elapsed:.3f}\n")

    # -- shared loaders -----------------------------------------------------

    def load_corpus(self):
        broadcasts = list(corpus_mod.load_broadcasts(self.broadcasts_path()))
        messages = list(corpus_mod.load_messages(self.messages_path()))
        return broadcasts, messages

    def tokenized_messages(self, messages):
        return [textprep.tokenize(m.text) for m in messages]

    def load_documents(self) -> list[textprep.ChatLogDocument]:
        docs = []
        with open(self.require("documents.jsonl"), encoding="utf-8") as fh:
            for line in fh:
                obj = json.loads(line)
                docs.append(
                    textprep.ChatLogDocument(
                        broadcast_id=obj["broadcast_id"],
                        tokens=tuple(obj["tokens"]),
                        n_users=obj["n_users"],
                    )
                )
        return docs

    def load_plan(self) -> textprep.SubstitutionPlan:
        with open(self.require("plan.json"), encoding="utf-8") as fh:
            raw = json.load(fh)
        return textprep.SubstitutionPlan([(g["name"], g["terms"]) for g in raw["groups"]])

    # -- stages -------------------------------------------------------------

    def stage_synth(self) -> list[str]:
        cfg = synthgen.SynthConfig(
            n_broadcasts=self.cfg.get_int("synth", "n_broadcasts"),
            n_topics=self.cfg.get_int("synth", "n_topics"),
            grooming_share=self.cfg.get_float("synth", "grooming_share"),
            misspell_rate=self.cfg.get_float("synth", "misspell_rate"),
            gibberish_rate=self.cfg.get_float("synth", "gibberish_rate"),
            emoji_only_rate=self.cfg.get_float("synth", "emoji_only_rate"),
            seed=self.seed,
        )
        synthgen.generate(cfg, self.run_dir)
        return [
            "broadcasts.jsonl",
            "messages.jsonl",
            "ground_truth.json",
            "seeds_sex.txt",
            "seeds_clothing.txt",
        ]

    def stage_ingest(self) -> list[str]:
        broadcasts, messages = self.load_corpus()
        by_broadcast: dict[str, list] = {}
        for m in messages:
            by_broadcast.setdefault(m.broadcast_id, []).append(m)
        rows = []
        for b in broadcasts:
            feats = corpus_mod.interaction_features(b, by_broadcast.get(b.id, []))
            rows.append((b.id, corpus_mod.feature_vector(feats)))
        reports.write_feature_matrix(
            self.path("features.csv"), corpus_mod.FEATURE_NAMES, rows
        )
        artifacts = ["features.csv"]
        index = {name: i for i, name in enumerate(corpus_mod.FEATURE_NAMES)}
        for feature in CDF_FEATURES:
            cdf = corpus_mod.empirical_cdf([vec[index[feature]] for _, vec in rows])
            name = f"cdfs_{feature}.csv"
            reports.write_cdf(self.path(name), cdf)
            artifacts.append(name)
        reports.write_countries(
            self.path("countries.csv"), corpus_mod.country_histogram(broadcasts)
        )
        artifacts.append("countries.csv")
        shares_zero, shares_nonzero = corpus_mod.zero_share(
            [vec[index["shares"]] for _, vec in rows]
        )
        blocks_zero, blocks_nonzero = corpus_mod.zero_share(
            [vec[index["blocks"]] for _, vec in rows]
        )
        with open(self.path("ingest.json"), "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "broadcasts": len(broadcasts),
                    "messages": len(messages),
                    "shares_zero_fraction": shares_zero,
                    "shares_nonzero_fraction": shares_nonzero,
                    "blocks_zero_fraction": blocks_zero,
                    "blocks_nonzero_fraction": blocks_nonzero,
                },
                fh,
                sort_keys=True,
                indent=1,
            )
            fh.write("\n")
        artifacts.append("ingest.json")
        return artifacts

    def _embedding_config(self) -> EmbeddingConfig:
        get = self.cfg.get_int
        return EmbeddingConfig(
            dim=get("embed", "dim"),
            window=get("embed", "window"),
            negatives=get("embed", "negatives"),
            epochs=get("embed", "epochs"),
            min_count=get("embed", "min_count"),
            ngram_min=get("embed", "ngram_min"),
            ngram_max=get("embed", "ngram_max"),
            buckets=get("embed", "buckets"),
            lr=self.cfg.get_float("embed", "lr"),
            subsample=self.cfg.get_float("embed", "subsample"),
            seed=self.seed,
        )

    def stage_embed(self) -> list[str]:
        _, messages = self.load_corpus()
        token_lists = [
            [t.surface for t in toks] for toks in self.tokenized_messages(messages)
        ]
        model = train_embeddings(token_lists, self._embedding_config())
        model.save(self.path("embeddings.npz"))
        return ["embeddings.npz"]

    def stage_expand(self) -> list[str]:
        model = EmbeddingModel.load(self.require("embeddings.npz"))
        _, messages = self.load_corpus()
        stats = corpus_term_stats(messages, textprep.tokenize)
        n = self.cfg.get_int("expand", "neighbors")
        sex_seeds = self.seed_terms("sex_seeds", "seeds_sex.txt")
        clothing_seeds = self.seed_terms("clothing_seeds", "seeds_clothing.txt")

        groups = []
        all_rows = []
        skipped_all = []
        for name, seeds, extra in (
            ("SEX_TERM", sex_seeds, []),
            ("CLOTHING_TERM", clothing_seeds, load_clothing_emojis()),
            ("SHOW_TERM", ["show"], []),
            ("OPEN_TERM", ["open"], []),
        ):
            rows, skipped = expand_lexicon(model, seeds, n, stats)
            skipped_all.extend(skipped)
            terms = [r.term for r in rows] + list(extra)
            groups.append({"name": name, "terms": terms})
            all_rows.extend(rows)
        reports.write_expansion(self.path("expansion.csv"), all_rows)
        with open(self.path("plan.json"), "w", encoding="utf-8") as fh:
            json.dump(
                {"groups": groups, "skipped_seeds": sorted(skipped_all)},
                fh,
                sort_keys=True,
                indent=1,
            )
            fh.write("\n")
        return ["expansion.csv", "plan.json"]

    def _train_gibberish(self) -> gibberish_mod.GibberishModel:
        words = [w for w in load_wordlist() if w.isascii()]
        rng = random.Random(self.seed ^ 0x5F5E5F)
        shuffled = list(words)
        text_parts = []
        while sum(len(p) + 1 for p in text_parts) < 1.2e5:
            rng.shuffle(shuffled)
            text_parts.extend(shuffled)
        reference = " ".join(text_parts)
        good = [
            " ".join(rng.choice(words) for _ in range(rng.randint(4, 9)))
            for _ in range(200)
        ]
        bad = [
            "".join(rng.choice("abcdefghijklmnopqrstuvwxyz") for _ in range(rng.randint(12, 40)))
            for _ in range(200)
        ]
        return gibberish_mod.train(reference, good, bad)

    def stage_prep(self) -> list[str]:
        plan = self.load_plan()
        model = self._train_gibberish()
        gibberish_mod.save(model, self.path("gibberish_model.tsv"))
        broadcasts, messages = self.load_corpus()
        prep_cfg = textprep.PrepConfig(
            countries=tuple(self.cfg.get_list("prep", "countries")),
            stopwords=self.stopwords(),
            plan=plan,
            gibberish_model=model,
            lemmatizer=Lemmatizer(known_words=load_verb_lexicon() | set(load_wordlist())),
            min_messages=self.cfg.get_int("prep", "min_messages"),
        )
        docs = textprep.build_documents(broadcasts, messages, prep_cfg)
        with open(self.path("documents.jsonl"), "w", encoding="utf-8") as fh:
            for doc in docs:
                fh.write(
                    json.dumps(
                        {
                            "broadcast_id": doc.broadcast_id,
                            "tokens": list(doc.tokens),
                            "n_users": doc.n_users,
                        },
                        sort_keys=True,
                        ensure_ascii=False,
                    )
                    + "\n"
                )
        return ["gibberish_model.tsv", "documents.jsonl"]

    def stage_colloc(self) -> list[str]:
        plan = self.load_plan()
        _, messages = self.load_corpus()
        tokenized = self.tokenized_messages(messages)
        stop = self.stopwords()
        window = self.cfg.get_int("colloc", "window")
        top_n = self.cfg.get_int("colloc", "top_n")

        sex_terms = plan.groups.get("SEX_TERM", set())
        table = colloc_mod.collocates(tokenized, sex_terms, window, top_n, stop)
        reports.write_collocations(self.path("colloc_sex.csv"), table)
        show_table = colloc_mod.collocates(tokenized, {"show"}, window, top_n, stop)
        reports.write_collocations(self.path("colloc_show.csv"), show_table)

        clothing = plan.groups.get("CLOTHING_TERM", set())
        clothing_msgs = [
            toks for toks in tokenized if any(t.surface in clothing for t in toks)
        ]
        verbs = colloc_mod.extract_verbs(
            clothing_msgs,
            load_verb_lexicon(),
            load_particles(),
            Lemmatizer(known_words=load_verb_lexicon() | set(load_wordlist())),
            load_stop_verbs(),
        )
        reports.write_verbs(self.path("verbs.csv"), verbs)

        anchors = load_clothing_emojis()
        cooc = colloc_mod.emoji_cooccurrence(tokenized, anchors, top_n)
        reports.write_emoji_cooc(self.path("emoji_cooc.csv"), cooc)
        return ["colloc_sex.csv", "colloc_show.csv", "verbs.csv", "emoji_cooc.csv"]

    def _coherence_config(self) -> topics_mod.CoherenceConfig:
        return topics_mod.CoherenceConfig(
            top_n=self.cfg.get_int("coherence", "top_n"),
            window=self.cfg.get_int("coherence", "window"),
            epsilon=self.cfg.get_float("coherence", "epsilon"),
        )

    def stage_lda_sweep(self) -> list[str]:
        docs = self.load_documents()
        token_lists = [list(d.tokens) for d in docs]
        ks = [int(k) for k in self.cfg.get_list("lda", "ks")]
        base = topics_mod.LdaConfig(
            k=max(ks),
            beta=self.cfg.get_float("lda", "beta"),
            iterations=self.cfg.get_int("lda", "iterations"),
            seed=self.seed,
        )
        cc = self._coherence_config()
        best_k, model, table = topics_mod.sweep_k(
            token_lists, ks, base, cc, threads=self.threads
        )
        model.save(self.path("topics.model"))
        reports.write_coherence(self.path("coherence.csv"), table)
        coherence = topics_mod.model_coherence(model, token_lists, cc)
        reports.write_topics(self.path("topics.csv"), model, coherence, cc.top_n)
        with open(self.path("lda.json"), "w", encoding="utf-8") as fh:
            json.dump({"best_k": best_k, "table": table}, fh, sort_keys=True)
            fh.write("\n")
        return ["topics.model", "coherence.csv", "topics.csv", "lda.json"]

    def stage_assign(self) -> list[str]:
        model = topics_mod.TopicModel.load(self.require("topics.model"))
        docs = self.load_documents()
        if len(docs) != model.n_dt.shape[0]:
            raise RuntimeError(
                "documents.jsonl does not match the trained model (rerun lda-sweep)"
            )
        theta = model.theta()
        assignments = []
        for i, doc in enumerate(docs):
            tops = topics_mod.top3_topics(theta[i])
            assignments.append(
                (doc.broadcast_id, [(t, float(theta[i][t])) for t in tops])
            )
        reports.write_assignments(self.path("assignments.csv"), assignments)
        return ["assignments.csv"]

    def stage_mdi(self) -> list[str]:
        model = topics_mod.TopicModel.load(self.require("topics.model"))
        plan = self.load_plan()
        grooming_topic, margin = topics_mod.identify_grooming_topic(model, plan.names)
        _, rows = reports.read_csv(self.require("assignments.csv"))
        dominant = {r[0]: int(r[1]) for r in rows}

        header, feature_rows = reports.read_csv(self.require("features.csv"))
        names = header[1:]
        X, y, ids = [], [], []
        for row in feature_rows:
            bid = row[0]
            if bid not in dominant:
                continue
            ids.append(bid)
            X.append([float(v) for v in row[1:]])
            y.append(1 if dominant[bid] == grooming_topic else 0)
        forest = train_forest(
            np.array(X),
            y,
            ForestConfig(
                trees=self.cfg.get_int("forest", "trees"),
                seed=self.seed,
                threads=self.threads,
            ),
            names,
        )
        report = mdi(forest)
        reports.write_mdi(self.path("mdi.csv"), report)
        reports.write_feature_matrix(
            self.path("features_labeled.csv"),
            names,
            list(zip(ids, X)),
            labels=y,
        )
        with open(self.path("grooming_topic.json"), "w", encoding="utf-8") as fh:
            json.dump(
                {"topic": grooming_topic, "margin": margin},
                fh,
                sort_keys=True,
            )
            fh.write("\n")
        return ["mdi.csv", "features_labeled.csv", "grooming_topic.json"]

    def stage_patterns(self) -> list[str]:
        _, rows = reports.read_csv(self.require("assignments.csv"))
        transactions = []
        for r in rows:
            items = {int(r[i]) for i in (1, 3, 5) if r[i] != ""}
            transactions.append(items)
        min_support = self.cfg.get_int("fpgrowth", "min_support")
        top_n = self.cfg.get_int("fpgrowth", "top_n")
        result = fpgrowth(transactions, min_support)
        pairs = frequent_pairs(transactions, top_n, min_support)
        reports.write_patterns(self.path("patterns.csv"), result.patterns, min_support)
        reports.write_patterns(self.path("patterns_pairs.csv"), pairs, min_support)
        return ["patterns.csv", "patterns_pairs.csv"]

    def stage_report(self) -> list[str]:
        # regenerate the distribution reports from the stored corpus, then
        # render figures for every report present
        artifacts = self.stage_ingest()
        figures = reports.render_all(self.run_dir, self.path("figures"))
        return artifacts + [f"figures/{name}" for name in figures]

    def stage_all(self) -> list[str]:
        artifacts = []
        configured = self.cfg.get("paths", "broadcasts")
        if not configured and not self.path("broadcasts.jsonl").exists():
            artifacts += self.run("synth")
        for sub in (
            "ingest",
            "embed",
            "expand",
            "prep",
            "colloc",
            "lda-sweep",
            "assign",
            "mdi",
            "patterns",
            "report",
        ):
            artifacts += self.run(sub)
        return artifacts

    def run(self, subcommand: str) -> list[str]:
        stages = {
            "synth": self.stage_synth,
            "ingest": self.stage_ingest,
            "embed": self.stage_embed,
            "expand": self.stage_expand,
            "prep": self.stage_prep,
            "colloc": self.stage_colloc,
            "lda-sweep": self.stage_lda_sweep,
            "assign": self.stage_assign,
            "mdi": self.stage_mdi,
            "patterns": self.stage_patterns,
            "report": self.stage_report,
        }
        if subcommand == "all":
            return self.stage_all()
        start = time.monotonic()
        artifacts = stages[subcommand]()
        self.log(subcommand, artifacts, time.monotonic() - start)
        return artifacts


SUBCOMMANDS = (
    "ingest",
    "prep",
    "embed",
    "expand",
    "colloc",
    "lda-sweep",
    "assign",
    "mdi",
    "patterns",
    "report",
    "synth",
    "all",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chatlens",
        description="Batch analytics pipeline for live-stream chat corpora.",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument(
        "--run-dir", required=True, help="directory holding all run artifacts"
    )
    parser.add_argument("--config", default=None, help="INI config file")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        dest="overrides",
        help="override a config value (repeatable)",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 1
    run_dir = Path(args.run_dir)
    try:
        run_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"cannot create run directory: {exc}", file=sys.stderr)
        return 1
    runner = Runner(run_dir, cfg)
    try:
        artifacts = runner.run(args.subcommand)
    except MissingArtifact as exc:
        print(exc, file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure, reported with its stage
        print(f"{args.subcommand} failed: {exc}", file=sys.stderr)
        return 3
    print(f"{args.subcommand}: wrote {len(artifacts)} artifact(s) in {run_dir}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
