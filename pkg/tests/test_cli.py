import json

import pytest

from chatlens.cli import main

FAST = [
    "--set", "synth.n_broadcasts=150",
    "--set", "embed.dim=32",
    "--set", "embed.epochs=3",
    "--set", "embed.min_count=3",
    "--set", "embed.buckets=50000",
    "--set", "expand.neighbors=5",
    "--set", "lda.ks=2,4",
    "--set", "lda.iterations=150",
]


def run(sub, run_dir, *extra):
    return main([sub, "--run-dir", str(run_dir), *FAST, *extra])


@pytest.fixture(scope="module")
def full_run(tmp_path_factory):
    run_dir = tmp_path_factory.mktemp("run")
    assert run("all", run_dir) == 0
    return run_dir


REPORT_FILES = [
    "countries.csv",
    "expansion.csv",
    "colloc_sex.csv",
    "colloc_show.csv",
    "verbs.csv",
    "emoji_cooc.csv",
    "coherence.csv",
    "topics.csv",
    "assignments.csv",
    "mdi.csv",
    "patterns.csv",
    "manifest.tsv",
]


def test_all_produces_every_report_file(full_run):
    for name in REPORT_FILES:
        assert (full_run / name).exists(), name
    assert list(full_run.glob("cdfs_*.csv"))
    assert list((full_run / "figures").glob("*.png"))


def test_manifest_lines(full_run):
    lines = (full_run / "manifest.tsv").read_text().splitlines()
    stages = [l.split("\t")[0] for l in lines]
    assert stages[0] == "synth"
    assert stages[-1] == "report"
    digests = {l.split("\t")[1] for l in lines}
    assert len(digests) == 1  # one config for the whole run
    for line in lines:
        sub, digest, seed, artifacts = line.split("\t")
        assert seed == "7"
        assert artifacts


def test_missing_prerequisite_exit_2(tmp_path, capsys):
    assert main(["assign", "--run-dir", str(tmp_path / "empty")]) == 2
    assert (
        "requires artifact topics.model (run lda-sweep)" in capsys.readouterr().err
    )


def test_missing_corpus_exit_2(tmp_path, capsys):
    assert main(["ingest", "--run-dir", str(tmp_path / "empty")]) == 2
    assert "requires artifact broadcasts.jsonl (run synth)" in capsys.readouterr().err


def test_config_error_exit_1(tmp_path, capsys):
    assert main(["synth", "--run-dir", str(tmp_path), "--set", "run.seed=x"]) == 1
    assert "invalid configuration" in capsys.readouterr().err


def test_unknown_option_exit_1(tmp_path):
    assert main(["synth", "--run-dir", str(tmp_path), "--set", "nope.key=1"]) == 1


def test_report_regenerates_byte_identically(full_run):
    before = {
        p.name: p.read_bytes() for p in full_run.glob("cdfs_*.csv")
    }
    before["countries.csv"] = (full_run / "countries.csv").read_bytes()
    assert run("report", full_run) == 0
    for name, data in before.items():
        assert (full_run / name).read_bytes() == data, name


def test_assignments_reference_documents(full_run):
    import csv

    with open(full_run / "assignments.csv", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")][1:]
    doc_ids = set()
    with open(full_run / "documents.jsonl") as fh:
        for line in fh:
            doc_ids.add(json.loads(line)["broadcast_id"])
    assert {r[0] for r in rows} == doc_ids
    for r in rows:
        probs = [float(r[i]) for i in (2, 4, 6) if r[i] != ""]
        assert probs == sorted(probs, reverse=True)


def test_grooming_topic_json(full_run):
    obj = json.loads((full_run / "grooming_topic.json").read_text())
    assert obj["topic"] >= 0
    assert obj["margin"] >= 0


def test_expansion_plan(full_run):
    plan = json.loads((full_run / "plan.json").read_text())
    names = [g["name"] for g in plan["groups"]]
    assert names == ["SEX_TERM", "CLOTHING_TERM", "SHOW_TERM", "OPEN_TERM"]
    clothing = next(g for g in plan["groups"] if g["name"] == "CLOTHING_TERM")
    assert any(not t.isascii() for t in clothing["terms"])  # clothing emojis added
