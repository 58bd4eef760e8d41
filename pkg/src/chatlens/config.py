"""Run configuration: INI-style `key = value` files with section headers,
overridable via `--set section.key=value` flags."""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(Exception):
    """Raised with every validation problem listed at once."""

    def __init__(self, problems: list[str]):
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {p}" for p in problems))
        self.problems = problems


DEFAULTS: dict[str, dict[str, str]] = {
    "run": {
        "seed": "7",
        "threads": "1",
    },
    "paths": {
        "broadcasts": "",  # empty -> <run dir>/broadcasts.jsonl
        "messages": "",
        "stopwords": "",  # empty -> bundled list
        "sex_seeds": "",  # empty -> <run dir>/seeds_sex.txt
        "clothing_seeds": "",
    },
    "prep": {
        "countries": "US,GB,AU,CA,NZ",
        "min_messages": "10",
    },
    "embed": {
        "dim": "100",
        "window": "5",
        "negatives": "5",
        "epochs": "5",
        "min_count": "5",
        "ngram_min": "3",
        "ngram_max": "6",
        "buckets": "2000000",
        "lr": "0.05",
        "subsample": "0.0",
    },
    "expand": {
        "neighbors": "100",
    },
    "colloc": {
        "window": "5",
        "top_n": "50",
    },
    "lda": {
        "ks": "5,10,15,20,25,30,35,40,45,50",
        "iterations": "1000",
        "beta": "0.01",
    },
    "coherence": {
        "top_n": "10",
        "window": "110",
        "epsilon": "1e-12",
    },
    "forest": {
        "trees": "100",
    },
    "fpgrowth": {
        "min_support": "2",
        "top_n": "10",
    },
    "synth": {
        "n_broadcasts": "2000",
        "n_topics": "4",
        "grooming_share": "0.19",
        "misspell_rate": "0.3",
        "gibberish_rate": "0.03",
        "emoji_only_rate": "0.08",
    },
}


@dataclass
class RunConfig:
    values: dict[str, dict[str, str]] = field(default_factory=dict)

    def get(self, section: str, key: str) -> str:
        return self.values[section][key]

    def get_int(self, section: str, key: str) -> int:
        return int(self.get(section, key))

    def get_float(self, section: str, key: str) -> float:
        return float(self.get(section, key))

    def get_list(self, section: str, key: str) -> list[str]:
        raw = self.get(section, key)
        return [x.strip() for x in raw.split(",") if x.strip()]

    def dump(self) -> str:
        out = io.StringIO()
        for section in sorted(self.values):
            out.write(f"[{section}]\n")
            for key in sorted(self.values[section]):
                out.write(f"{key} = {self.values[section][key]}\n")
        return out.getvalue()

    def digest(self) -> str:
        return hashlib.sha256(self.dump().encode()).hexdigest()[:16]


def load_config(path=None, overrides: list[str] | None = None) -> RunConfig:
    """Merge defaults, an optional INI file, and --set overrides; validate
    and report all problems at once."""
    values = {section: dict(keys) for section, keys in DEFAULTS.items()}
    problems: list[str] = []
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError([f"cannot read config file: {exc}"]) from exc
        except configparser.Error as exc:
            raise ConfigError([f"cannot parse config file: {exc}"]) from exc
        for section in parser.sections():
            for key, value in parser.items(section):
                if section not in values or key not in values[section]:
                    problems.append(f"unknown option [{section}] {key}")
                else:
                    values[section][key] = value
    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            problems.append(f"--set expects section.key=value, got {item!r}")
            continue
        target, value = item.split("=", 1)
        section, key = target.split(".", 1)
        section, key = section.strip(), key.strip()
        if section not in values or key not in values[section]:
            problems.append(f"unknown option [{section}] {key}")
        else:
            values[section][key] = value.strip()

    cfg = RunConfig(values=values)
    problems.extend(_validate(cfg))
    if problems:
        raise ConfigError(problems)
    return cfg


def _validate(cfg: RunConfig) -> list[str]:
    problems = []
    checks = [
        ("run", "seed", int),
        ("run", "threads", int),
        ("prep", "min_messages", int),
        ("embed", "dim", int),
        ("embed", "epochs", int),
        ("embed", "lr", float),
        ("lda", "iterations", int),
        ("lda", "beta", float),
        ("coherence", "window", int),
        ("forest", "trees", int),
        ("fpgrowth", "min_support", int),
        ("synth", "n_broadcasts", int),
        ("synth", "grooming_share", float),
    ]
    for section, key, kind in checks:
        try:
            kind(cfg.get(section, key))
        except ValueError:
            problems.append(f"[{section}] {key} must be a {kind.__name__}")
    try:
        ks = [int(k) for k in cfg.get_list("lda", "ks")]
        if not ks:
            problems.append("[lda] ks must name at least one topic count")
    except ValueError:
        problems.append("[lda] ks must be a comma-separated list of integers")
    for section, key in (
        ("paths", "broadcasts"),
        ("paths", "messages"),
        ("paths", "stopwords"),
        ("paths", "sex_seeds"),
        ("paths", "clothing_seeds"),
    ):
        value = cfg.get(section, key)
        if value and not Path(value).exists():
            problems.append(f"[{section}] {key}: file not found: {value}")
    return problems
