"""Random forest over pre-test behavior, predicting a student's
metacognitive group: bootstrap-sampled trees with Gini-impurity splits over
random sqrt(d) feature subsets."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .domain import MetacognitiveGroup
from .tutor_sim import SessionLog, SwitchClass, classify_switch

PRETEST_FEATURE_NAMES = tuple(
    f"pre{i}_{name}"
    for i in range(2)
    for name in ("score", "time_s", "action_count", "switched_early", "switched_late")
)


def pretest_features(log: SessionLog) -> np.ndarray:
    """Observable pre-test behavior of one session, in the fixed schema."""
    feats = []
    for o in log.pretest_outcomes[:2]:
        sw = classify_switch(o.switch_action_index)
        feats.extend([
            o.score,
            o.time_s,
            float(o.action_count),
            1.0 if sw is SwitchClass.EARLY else 0.0,
            1.0 if sw is SwitchClass.LATE else 0.0,
        ])
    return np.asarray(feats, dtype=np.float64)


# Trees are stored as parallel arrays: internal nodes hold (feature,
# threshold, left, right); leaves hold a group label and -1 children.
@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: int = -1
    right: int = -1
    label: int = -1


@dataclass
class Forest:
    trees: list  # list of list[TreeNode]
    n_trees: int
    max_depth: int
    seed: int
    n_features: int


def _gini(counts) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return 1.0 - float((p * p).sum())


def _best_split(X, y, feature_ids, n_classes):
    best = None  # (weighted_gini, feature, threshold)
    for f in feature_ids:
        values = np.unique(X[:, f])
        if len(values) < 2:
            continue
        thresholds = (values[:-1] + values[1:]) / 2.0
        for thr in thresholds:
            mask = X[:, f] <= thr
            left = np.bincount(y[mask], minlength=n_classes)
            right = np.bincount(y[~mask], minlength=n_classes)
            nl, nr = left.sum(), right.sum()
            w = (nl * _gini(left) + nr * _gini(right)) / (nl + nr)
            if best is None or w < best[0] - 1e-12:
                best = (w, f, float(thr))
    return best


def _majority(y, n_classes) -> int:
    counts = np.bincount(y, minlength=n_classes)
    return int(np.argmax(counts))  # lowest label wins ties


def _grow(X, y, depth, max_depth, rng, n_classes, nodes) -> int:
    idx = len(nodes)
    nodes.append(TreeNode())
    if depth >= max_depth or len(np.unique(y)) == 1:
        nodes[idx].label = _majority(y, n_classes)
        return idx
    d = X.shape[1]
    k = max(1, math.ceil(math.sqrt(d)))
    feature_ids = rng.choice(d, size=k, replace=False)
    split = _best_split(X, y, sorted(feature_ids), n_classes)
    if split is None:
        nodes[idx].label = _majority(y, n_classes)
        return idx
    _, f, thr = split
    mask = X[:, f] <= thr
    nodes[idx].feature = f
    nodes[idx].threshold = thr
    nodes[idx].left = _grow(X[mask], y[mask], depth + 1, max_depth, rng, n_classes, nodes)
    nodes[idx].right = _grow(X[~mask], y[~mask], depth + 1, max_depth, rng, n_classes, nodes)
    return idx


def train_forest(data, n_trees: int = 50, max_depth: int = 8, seed: int = 0) -> Forest:
    """Fit bootstrap-resampled Gini trees; deterministic for a fixed seed."""
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    X = np.stack([x for x, _ in data])
    y = np.array([g.value for _, g in data], dtype=np.intp)
    if len(np.unique(y)) < 2:
        raise ValueError("need at least two classes in the training data")
    n_classes = len(MetacognitiveGroup)
    ss = np.random.SeedSequence(seed)
    trees = []
    for child in ss.spawn(n_trees):
        rng = np.random.default_rng(child)
        boot = rng.integers(0, len(X), size=len(X))
        nodes: list = []
        _grow(X[boot], y[boot], 0, max_depth, rng, n_classes, nodes)
        trees.append(nodes)
    return Forest(trees, n_trees, max_depth, seed, X.shape[1])


def _tree_predict(nodes, x) -> int:
    i = 0
    while nodes[i].label == -1:
        i = nodes[i].left if x[nodes[i].feature] <= nodes[i].threshold else nodes[i].right
    return nodes[i].label


def predict(forest: Forest, x) -> MetacognitiveGroup:
    """Majority vote over trees, ties to the lowest group in the fixed order
    Declarative < Procedural < Conditional."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (forest.n_features,):
        raise ValueError(f"feature length {x.shape} != {forest.n_features}")
    votes = np.zeros(len(MetacognitiveGroup), dtype=int)
    for nodes in forest.trees:
        votes[_tree_predict(nodes, x)] += 1
    return MetacognitiveGroup(int(np.argmax(votes)))


def accuracy(forest: Forest, test) -> float:
    if not test:
        raise ValueError("empty test set")
    hits = sum(predict(forest, x) is g for x, g in test)
    return hits / len(test)


def save_forest(forest: Forest, path) -> None:
    doc = {
        "n_trees": forest.n_trees,
        "max_depth": forest.max_depth,
        "seed": forest.seed,
        "n_features": forest.n_features,
        "trees": [
            [{"feature": int(n.feature), "threshold": n.threshold,
              "left": n.left, "right": n.right, "label": n.label} for n in nodes]
            for nodes in forest.trees
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_forest(path) -> Forest:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    trees = [
        [TreeNode(n["feature"], n["threshold"], n["left"], n["right"], n["label"])
         for n in nodes]
        for nodes in doc["trees"]
    ]
    return Forest(trees, doc["n_trees"], doc["max_depth"], doc["seed"], doc["n_features"])
