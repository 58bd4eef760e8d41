"""Frequent-itemset mining over per-document topic sets and random-forest
feature importance (normalized mean decrease in impurity).

FP-growth is implemented directly (FP-tree plus recursive conditional
trees); supports are exact.  The forest is scikit-learn's CART ensemble with
Gini splits; MDI is recomputed from the raw per-tree impurity decreases so
that importances are averaged over trees first and normalized once.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np
from sklearn.ensemble import RandomForestClassifier


class MiningError(Exception):
    pass


# -- FP-growth ----------------------------------------------------------------


@dataclass
class Transaction:
    doc_id: str
    items: frozenset


@dataclass
class PatternSet:
    min_support: int
    patterns: list[tuple[tuple, int]]  # (sorted itemset, support), support desc


class _FPNode:
    __slots__ = ("item", "count", "parent", "children")

    def __init__(self, item, parent):
        self.item = item
        self.count = 0
        self.parent = parent
        self.children: dict = {}


def _build_tree(itemlists: Iterable[tuple[Sequence, int]]):
    """FP-tree from (ordered item list, count) pairs; returns (root, node
    lists per item)."""
    root = _FPNode(None, None)
    nodes: dict[Hashable, list[_FPNode]] = {}
    for items, count in itemlists:
        node = root
        for item in items:
            child = node.children.get(item)
            if child is None:
                child = _FPNode(item, node)
                node.children[item] = child
                nodes.setdefault(item, []).append(child)
            child.count += count
            node = child
    return root, nodes


def _mine(nodes: dict, min_support: int, suffix: tuple, out: list) -> None:
    for item in sorted(nodes, key=str):
        item_nodes = nodes[item]
        support = sum(n.count for n in item_nodes)
        if support < min_support:
            continue
        itemset = tuple(sorted((item,) + suffix, key=str))
        out.append((itemset, support))
        # conditional pattern base: prefix paths with this item's counts
        prefix_counts: Counter = Counter()
        paths = []
        for node in item_nodes:
            path = []
            cursor = node.parent
            while cursor is not None and cursor.item is not None:
                path.append(cursor.item)
                cursor = cursor.parent
            path.reverse()
            if path:
                paths.append((path, node.count))
                for p in path:
                    prefix_counts[p] += node.count
        frequent = {p for p, c in prefix_counts.items() if c >= min_support}
        if not frequent:
            continue
        conditional = [
            (
                sorted(
                    (p for p in path if p in frequent),
                    key=lambda p: (-prefix_counts[p], str(p)),
                ),
                count,
            )
            for path, count in paths
        ]
        _, cond_nodes = _build_tree((items, c) for items, c in conditional if items)
        _mine(cond_nodes, min_support, itemset, out)


def fpgrowth(transactions: Iterable[Transaction | Iterable], min_support: int) -> PatternSet:
    """All itemsets (size >= 1) with exact support >= ``min_support``.

    Output is sorted by support descending, ties by the itemset itself."""
    if min_support < 1:
        raise MiningError("min_support must be >= 1")
    itemsets = [
        frozenset(t.items if isinstance(t, Transaction) else t) for t in transactions
    ]
    counts: Counter = Counter()
    for items in itemsets:
        counts.update(items)
    frequent = {item for item, c in counts.items() if c >= min_support}
    ordered = [
        (
            sorted(
                (i for i in items if i in frequent),
                key=lambda i: (-counts[i], str(i)),
            ),
            1,
        )
        for items in itemsets
    ]
    _, nodes = _build_tree((items, c) for items, c in ordered if items)
    found: list[tuple[tuple, int]] = []
    _mine(nodes, min_support, (), found)
    found.sort(key=lambda p: (-p[1], [str(i) for i in p[0]], len(p[0])))
    return PatternSet(min_support=min_support, patterns=found)


def frequent_pairs(
    transactions: Iterable[Transaction | Iterable],
    top_n: int,
    min_support: int = 1,
) -> list[tuple[tuple, int]]:
    """The ``top_n`` most frequent itemsets of size two."""
    if top_n < 1:
        raise MiningError("top_n must be >= 1")
    result = fpgrowth(transactions, min_support)
    pairs = [(items, s) for items, s in result.patterns if len(items) == 2]
    return pairs[:top_n]


# -- random forest + MDI -------------------------------------------------------


@dataclass
class ForestConfig:
    trees: int = 100
    seed: int = 1
    threads: int = 1

    def validate(self) -> None:
        if self.trees < 1:
            raise MiningError("tree count must be >= 1")


@dataclass
class Forest:
    classifier: RandomForestClassifier
    feature_names: tuple[str, ...]


@dataclass
class ImportanceReport:
    ranking: list[tuple[str, float]] = field(default_factory=list)  # mdi desc

    def importance(self, feature: str) -> float:
        for name, value in self.ranking:
            if name == feature:
                return value
        raise KeyError(feature)


def train_forest(
    features: np.ndarray,
    labels: Sequence[int],
    cfg: ForestConfig | None = None,
    feature_names: Sequence[str] | None = None,
) -> Forest:
    """Bootstrap ensemble of unlimited-depth CART trees with Gini splits and
    ceil(sqrt(F)) candidate features per node; deterministic for a fixed
    seed."""
    cfg = cfg or ForestConfig()
    cfg.validate()
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    if not np.isfinite(X).all():
        raise MiningError("features must be finite")
    classes, class_counts = np.unique(y, return_counts=True)
    if len(classes) < 2:
        raise MiningError("labels contain a single class")
    if class_counts.min() < 2:
        raise MiningError("need at least 2 samples per class")
    names = tuple(feature_names or (f"f{i}" for i in range(X.shape[1])))
    clf = RandomForestClassifier(
        n_estimators=cfg.trees,
        criterion="gini",
        max_features="sqrt",
        bootstrap=True,
        max_depth=None,
        min_samples_leaf=1,
        random_state=cfg.seed,
        n_jobs=cfg.threads,
    )
    clf.fit(X, y)
    return Forest(classifier=clf, feature_names=names)


def mdi(forest: Forest) -> ImportanceReport:
    """Normalized mean-decrease-impurity importances.

    Each split contributes (node sample fraction) x (impurity decrease) to
    its feature; contributions are averaged over trees and normalized to sum
    to 1 at the end (never per tree)."""
    trees = forest.classifier.estimators_
    totals = np.zeros(len(forest.feature_names))
    for est in trees:
        totals += est.tree_.compute_feature_importances(normalize=False)
    mean = totals / len(trees)
    total = mean.sum()
    if total > 0:
        mean = mean / total
    ranking = sorted(
        zip(forest.feature_names, mean.tolist()), key=lambda kv: (-kv[1], kv[0])
    )
    return ImportanceReport(ranking=ranking)
