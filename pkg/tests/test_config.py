import pytest

from chatlens.config import ConfigError, load_config


def test_defaults():
    cfg = load_config()
    assert cfg.get_int("run", "seed") == 7
    assert cfg.get_int("run", "threads") == 1
    assert cfg.get_int("embed", "dim") == 100
    assert cfg.get_float("lda", "beta") == 0.01
    assert cfg.get_int("lda", "iterations") == 1000
    assert cfg.get_list("lda", "ks") == [str(k) for k in range(5, 51, 5)]
    assert cfg.get_int("coherence", "top_n") == 10
    assert cfg.get_int("coherence", "window") == 110
    assert cfg.get_int("expand", "neighbors") == 100
    assert cfg.get_int("forest", "trees") == 100
    assert cfg.get_int("fpgrowth", "min_support") == 2
    assert cfg.get_list("prep", "countries") == ["US", "GB", "AU", "CA", "NZ"]


def test_ini_file_merge(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text("[run]\nseed = 42\n\n[embed]\ndim = 16\n")
    cfg = load_config(p)
    assert cfg.get_int("run", "seed") == 42
    assert cfg.get_int("embed", "dim") == 16
    assert cfg.get_int("embed", "window") == 5  # untouched default


def test_set_overrides(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text("[run]\nseed = 42\n")
    cfg = load_config(p, ["run.seed=43", "lda.ks = 2,4"])
    assert cfg.get_int("run", "seed") == 43
    assert cfg.get_list("lda", "ks") == ["2", "4"]


def test_unknown_option_rejected():
    with pytest.raises(ConfigError, match=r"unknown option \[run\] bogus"):
        load_config(None, ["run.bogus=1"])


def test_all_problems_listed_at_once():
    with pytest.raises(ConfigError) as exc:
        load_config(None, ["run.seed=abc", "lda.ks=x,y", "nosect.key=1"])
    assert len(exc.value.problems) == 3


def test_missing_referenced_file():
    with pytest.raises(ConfigError, match="file not found"):
        load_config(None, ["paths.broadcasts=/no/such/file.jsonl"])


def test_digest_deterministic_and_sensitive():
    a = load_config()
    b = load_config()
    c = load_config(None, ["run.seed=8"])
    assert a.digest() == b.digest()
    assert a.digest() != c.digest()
    assert len(a.digest()) == 16


def test_dump_sorted():
    dump = load_config().dump()
    sections = [l[1:-1] for l in dump.splitlines() if l.startswith("[")]
    assert sections == sorted(sections)
