"""Delimited report files and the matplotlib figures rendered from them.

All writers are deterministic: fixed column orders, fixed sort orders, and
repr-based float formatting, so reruns on unchanged artifacts are
byte-identical.
"""

from __future__ import annotations

import csv
import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def write_csv(path, header: list[str], rows, comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    return rows[0], rows[1:]


def write_cdf(path, cdf) -> None:
    write_csv(path, ["value", "cum_fraction"], cdf.points())


def write_countries(path, histogram) -> None:
    write_csv(path, ["country", "count"], histogram)


def write_expansion(path, rows) -> None:
    write_csv(
        path,
        ["term", "count", "broadcasts", "users", "seed", "distance"],
        [(r.term, r.count, r.broadcasts, r.users, r.seed, r.distance) for r in rows],
    )


def write_collocations(path, table) -> None:
    write_csv(
        path,
        ["term", "count", "pmi"],
        table.rows,
        comment=f"targets={';'.join(table.targets)} target_occurrences={table.target_occurrences}",
    )


def write_verbs(path, report) -> None:
    rows = [(v, c, "simple") for v, c in report.simple]
    rows += [(v, c, "phrasal") for v, c in report.phrasal]
    write_csv(path, ["verb", "count", "kind"], rows)


def write_emoji_cooc(path, ranked) -> None:
    write_csv(path, ["emoji", "count"], ranked)


def write_coherence(path, table) -> None:
    write_csv(path, ["k", "cv"], table)


def write_topics(path, model, coherence_result, top_n: int = 10) -> None:
    from .topics import dominant_topic, top_terms

    theta = model.theta()
    doc_counts = [0] * model.k
    for d in range(theta.shape[0]):
        doc_counts[dominant_topic(theta[d])] += 1
    rows = []
    for t in range(model.k):
        for rank, (term, rel) in enumerate(top_terms(model, t, top_n), start=1):
            rows.append((t, rank, term, rel, doc_counts[t]))
    write_csv(path, ["topic", "rank", "term", "relevance", "doc_count"], rows)


def write_assignments(path, assignments) -> None:
    """assignments: list of (broadcast_id, [(topic, prob) x3])."""
    rows = []
    for bid, tops in assignments:
        row = [bid]
        for t, p in tops:
            row.extend([t, p])
        while len(row) < 7:
            row.extend(["", ""])
        rows.append(row)
    write_csv(path, ["broadcast_id", "t1", "p1", "t2", "p2", "t3", "p3"], rows)


def write_mdi(path, report) -> None:
    rows = [
        (rank, feature, value)
        for rank, (feature, value) in enumerate(report.ranking, start=1)
    ]
    write_csv(path, ["rank", "feature", "mdi"], rows)


def write_patterns(path, patterns, min_support: int) -> None:
    rows = [(";".join(str(i) for i in items), support) for items, support in patterns]
    write_csv(path, ["items", "support"], rows, comment=f"min_support={min_support}")


def write_feature_matrix(path, names, rows, labels=None) -> None:
    header = ["broadcast_id", *names] + (["label"] if labels is not None else [])
    out = []
    for i, (bid, vec) in enumerate(rows):
        row = [bid, *vec]
        if labels is not None:
            row.append(labels[i])
        out.append(row)
    write_csv(path, header, out)


# -- figures -------------------------------------------------------------------


def _save(fig, path) -> None:
    with warnings.catch_warnings():
        # emoji tick labels have no glyphs in the bundled fonts
        warnings.filterwarnings("ignore", message=".*missing from font.*")
        fig.tight_layout()
        fig.savefig(path, dpi=120)
    plt.close(fig)


def render_cdf(csv_path, out_path, title: str) -> None:
    _, rows = read_csv(csv_path)
    xs = [float(r[0]) for r in rows]
    ys = [float(r[1]) for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.step(xs, ys, where="post")
    ax.set_xlabel(title)
    ax.set_ylabel("cumulative fraction")
    ax.set_ylim(0, 1.02)
    ax.grid(alpha=0.3)
    _save(fig, out_path)


def render_bar(csv_path, out_path, label_col: int, value_col: int, title: str, top: int = 20) -> None:
    _, rows = read_csv(csv_path)
    rows = rows[:top]
    labels = [r[label_col] for r in rows]
    values = [float(r[value_col]) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.bar(range(len(values)), values)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
    ax.set_title(title)
    _save(fig, out_path)


def render_coherence(csv_path, out_path) -> None:
    _, rows = read_csv(csv_path)
    ks = [int(r[0]) for r in rows]
    cvs = [float(r[1]) for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(ks, cvs, marker="o")
    best = ks[max(range(len(cvs)), key=lambda i: cvs[i])]
    ax.axvline(best, color="gray", linestyle="--", alpha=0.6)
    ax.set_xlabel("number of topics k")
    ax.set_ylabel("mean C_v")
    ax.grid(alpha=0.3)
    _save(fig, out_path)


def render_mdi(csv_path, out_path) -> None:
    _, rows = read_csv(csv_path)
    names = [r[1] for r in rows][::-1]
    values = [float(r[2]) for r in rows][::-1]
    fig, ax = plt.subplots(figsize=(6, 4.2))
    ax.barh(range(len(values)), values)
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names, fontsize=7)
    ax.set_xlabel("normalized MDI")
    _save(fig, out_path)


def render_all(run_dir, fig_dir) -> list[str]:
    """Render figures for every report CSV present in ``run_dir``; returns
    the list of files written."""
    run_dir = Path(run_dir)
    fig_dir = Path(fig_dir)
    fig_dir.mkdir(parents=True, exist_ok=True)
    written: list[str] = []

    for csv_path in sorted(run_dir.glob("cdfs_*.csv")):
        name = csv_path.stem.removeprefix("cdfs_")
        out = fig_dir / f"cdf_{name}.png"
        render_cdf(csv_path, out, name)
        written.append(out.name)
    simple_bars = [
        ("countries.csv", "countries.png", 0, 1, "broadcasters per country"),
        ("emoji_cooc.csv", "emoji_cooc.png", 0, 1, "emoji co-occurrence"),
        ("patterns.csv", "patterns.png", 0, 1, "frequent topic patterns"),
        ("verbs.csv", "verbs.png", 0, 1, "verbs in clothing messages"),
    ]
    for src, dst, lc, vc, title in simple_bars:
        if (run_dir / src).exists():
            render_bar(run_dir / src, fig_dir / dst, lc, vc, title)
            written.append(dst)
    if (run_dir / "coherence.csv").exists():
        render_coherence(run_dir / "coherence.csv", fig_dir / "coherence.png")
        written.append("coherence.png")
    if (run_dir / "mdi.csv").exists():
        render_mdi(run_dir / "mdi.csv", fig_dir / "mdi.png")
        written.append("mdi.png")
    return written
