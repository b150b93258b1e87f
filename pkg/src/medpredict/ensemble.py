"""Classical classifiers over tabular records: CART decision trees and the
ensembles built on them (random forest, bagging, AdaBoost), plus logistic
regression. All of them share one train/predict contract and are
deterministic given (data, config, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

# alpha assigned to a stump with zero weighted error
ALPHA_CAP = math.log(1e6)


# ------------------------------------------------------------------- trees


@dataclass(eq=False)
class Leaf:
    """Terminal node holding per-class sample counts (weight sums when the
    tree was fit on weighted data)."""

    class_counts: np.ndarray

    def __post_init__(self):
        self.class_counts = np.asarray(self.class_counts, dtype=np.float64)
        if self.class_counts.ndim != 1:
            raise ValueError("class_counts must be 1-D")
        if np.any(self.class_counts < 0):
            raise ValueError("class counts must be non-negative")
        if self.class_counts.sum() <= 0:
            raise ValueError("class counts must not be all zero")

    @property
    def majority(self) -> int:
        return int(np.argmax(self.class_counts))


@dataclass(eq=False)
class Internal:
    """Binary split: x[feature_index] <= threshold goes left."""

    feature_index: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"

    def __post_init__(self):
        if self.feature_index < 0:
            raise ValueError("feature_index must be non-negative")
        if self.left is None or self.right is None:
            raise ValueError("internal nodes need both children")
        if not math.isfinite(self.threshold):
            raise ValueError("threshold must be finite")


TreeNode = Leaf | Internal


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int = 16
    min_samples_split: int = 2
    criterion: str = "gini"
    feature_subsample: str = "all"

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.criterion != "gini":
            raise ValueError(f"unsupported criterion {self.criterion!r}")
        if self.feature_subsample not in ("all", "sqrt"):
            raise ValueError(f"feature_subsample must be 'all' or 'sqrt', got {self.feature_subsample!r}")


def predict_tree(node: TreeNode, x: np.ndarray) -> int:
    """Walk a tree to its leaf and return the leaf's majority class."""
    while isinstance(node, Internal):
        if node.feature_index >= len(x):
            raise ValueError(
                f"input has {len(x)} features but the tree splits on feature {node.feature_index}"
            )
        node = node.left if x[node.feature_index] <= node.threshold else node.right
    return node.majority


def tree_to_dict(node: TreeNode) -> dict:
    """JSON-safe structural form, also handy for comparing trees."""
    if isinstance(node, Leaf):
        return {"counts": node.class_counts.tolist()}
    return {
        "feature": node.feature_index,
        "threshold": node.threshold,
        "left": tree_to_dict(node.left),
        "right": tree_to_dict(node.right),
    }


def tree_from_dict(d: dict) -> TreeNode:
    if "counts" in d:
        return Leaf(np.asarray(d["counts"], dtype=np.float64))
    return Internal(int(d["feature"]), float(d["threshold"]), tree_from_dict(d["left"]), tree_from_dict(d["right"]))


def tree_depth(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(tree_depth(node.left), tree_depth(node.right))


# ------------------------------------------------------------------ models


@dataclass
class RandomForestModel:
    trees: list
    n_trees: int
    seed: int
    class_names: list[str]
    tree_configs: list[TreeConfig]
    n_features: int

    def __post_init__(self):
        if self.n_trees < 1 or self.n_trees != len(self.trees):
            raise ValueError("n_trees must equal the number of trees and be >= 1")
        if len(self.tree_configs) != self.n_trees:
            raise ValueError("one config per tree required")


@dataclass
class BaggingModel(RandomForestModel):
    """Same voting machinery as the forest; trees see every feature."""


@dataclass
class AdaBoostModel:
    stumps: list
    alphas: list[float]
    class_names: list[str]
    n_features: int
    # post-training sample weight distribution, kept as a diagnostic
    sample_weights: np.ndarray | None = None

    def __post_init__(self):
        if len(self.stumps) != len(self.alphas):
            raise ValueError("one alpha per stump required")
        if not self.stumps:
            raise ValueError("model must hold at least one stump")
        if not all(math.isfinite(a) for a in self.alphas):
            raise ValueError("alphas must be finite")


@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: float
    learning_rate: float
    epochs: int
    class_names: list[str]

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if not np.all(np.isfinite(self.weights)) or not math.isfinite(self.bias):
            raise ValueError("weights must be finite")


@dataclass
class PredictionResult:
    class_index: int
    probabilities: np.ndarray


@dataclass(frozen=True)
class SplitCandidate:
    feature: int
    threshold: float
    impurity_decrease: float


# -------------------------------------------------------------- splitting


def gini_impurity(labels) -> float:
    """1 - sum_k (n_k / n)^2 over the class distribution of `labels`."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise ValueError("gini impurity of an empty label set is undefined")
    counts = np.bincount(labels)
    frac = counts / labels.size
    return float(1.0 - np.sum(frac * frac))


def _gini_from_counts(counts: np.ndarray, total: float) -> float:
    frac = counts / total
    return float(1.0 - np.sum(frac * frac))


def best_split(X, y, candidate_features, sample_weight=None, n_classes=None):
    """Exhaustive search over midpoints between consecutive distinct values
    of each candidate feature.

    Returns the SplitCandidate with the largest weighted Gini decrease,
    ties going to (lower feature index, lower threshold), or None when no
    split strictly decreases impurity.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = X.shape[0]
    if n < 2:
        return None
    k = n_classes if n_classes is not None else int(y.max()) + 1
    w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
    total = w.sum()
    parent_counts = np.bincount(y, weights=w, minlength=k)
    parent_gini = _gini_from_counts(parent_counts, total)

    best: SplitCandidate | None = None
    for j in sorted(int(f) for f in candidate_features):
        order = np.argsort(X[:, j], kind="stable")
        xv = X[order, j]
        one_hot = np.zeros((n, k))
        one_hot[np.arange(n), y[order]] = w[order]
        prefix = np.cumsum(one_hot, axis=0)
        for i in range(n - 1):
            if xv[i] == xv[i + 1]:
                continue
            mid = (xv[i] + xv[i + 1]) / 2.0
            if not (xv[i] < mid < xv[i + 1]):
                continue  # adjacent floats, midpoint collapsed onto an endpoint
            left_counts = prefix[i]
            left_total = left_counts.sum()
            right_counts = parent_counts - left_counts
            right_total = total - left_total
            child = (
                left_total / total * _gini_from_counts(left_counts, left_total)
                + right_total / total * _gini_from_counts(right_counts, right_total)
            )
            decrease = parent_gini - child
            if decrease > 1e-12 and (best is None or decrease > best.impurity_decrease):
                best = SplitCandidate(j, mid, decrease)
    return best


# ----------------------------------------------------------------- fitting


def fit_tree(X, y, cfg: TreeConfig, rng: np.random.Generator, *, n_classes=None, sample_weight=None) -> TreeNode:
    """Recursive CART. Stops on max_depth, min_samples_split, purity, or
    when no split helps. With feature_subsample='sqrt' each node draws
    ceil(sqrt(p)) distinct features from `rng`."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("cannot fit a tree on empty data")
    n, p = X.shape
    k = n_classes if n_classes is not None else int(y.max()) + 1
    w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
    m = p if cfg.feature_subsample == "all" else math.ceil(math.sqrt(p))

    def build(idx: np.ndarray, depth: int) -> TreeNode:
        counts = np.bincount(y[idx], weights=w[idx], minlength=k)
        pure = np.count_nonzero(counts > 0) <= 1
        if depth >= cfg.max_depth or idx.size < cfg.min_samples_split or pure:
            return Leaf(counts)
        if cfg.feature_subsample == "all":
            feats = np.arange(p)
        else:
            feats = rng.choice(p, size=m, replace=False)
        split = best_split(X[idx], y[idx], feats, sample_weight=w[idx], n_classes=k)
        if split is None:
            return Leaf(counts)
        mask = X[idx, split.feature] <= split.threshold
        return Internal(
            split.feature,
            split.threshold,
            build(idx[mask], depth + 1),
            build(idx[~mask], depth + 1),
        )

    return build(np.arange(n), 0)


def _default_names(k: int, class_names) -> list[str]:
    return list(class_names) if class_names is not None else [str(c) for c in range(k)]


def _fit_tree_ensemble(X, y, cfg, n_trees, seed, subsample, bootstrap, class_names):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    n = X.shape[0]
    k = len(class_names) if class_names is not None else int(y.max()) + 1
    cfg_eff = replace(cfg, feature_subsample=subsample)
    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng([seed, t])
        if bootstrap:
            idx = rng.integers(0, n, size=n)
            trees.append(fit_tree(X[idx], y[idx], cfg_eff, rng, n_classes=k))
        else:
            trees.append(fit_tree(X, y, cfg_eff, rng, n_classes=k))
    return trees, cfg_eff, k


def fit_forest(X, y, cfg: TreeConfig, n_trees: int, seed: int, *, bootstrap: bool = True, class_names=None) -> RandomForestModel:
    """Random forest: per-tree bootstrap resample plus sqrt feature
    subsampling, each tree on its own RNG stream derived from (seed, tree
    index) so the result is independent of training order."""
    trees, cfg_eff, k = _fit_tree_ensemble(X, y, cfg, n_trees, seed, "sqrt", bootstrap, class_names)
    return RandomForestModel(
        trees=trees,
        n_trees=n_trees,
        seed=seed,
        class_names=_default_names(k, class_names),
        tree_configs=[cfg_eff] * n_trees,
        n_features=np.asarray(X).shape[1],
    )


def fit_bagging(X, y, cfg: TreeConfig, n_estimators: int, seed: int, *, bootstrap: bool = True, class_names=None) -> BaggingModel:
    """Bagging: as fit_forest but every tree sees every feature."""
    trees, cfg_eff, k = _fit_tree_ensemble(X, y, cfg, n_estimators, seed, "all", bootstrap, class_names)
    return BaggingModel(
        trees=trees,
        n_trees=n_estimators,
        seed=seed,
        class_names=_default_names(k, class_names),
        tree_configs=[cfg_eff] * n_estimators,
        n_features=np.asarray(X).shape[1],
    )


def _require_binary(y: np.ndarray, who: str):
    values = set(np.unique(y).tolist())
    if not values <= {0, 1}:
        raise ValueError(f"{who} requires binary labels in {{0, 1}}, got values {sorted(values)}")
    return values


def fit_adaboost(X, y, n_rounds: int, seed: int, *, class_names=None) -> AdaBoostModel:
    """Discrete AdaBoost over depth-1 stumps.

    Each round fits a stump on the current weights, computes weighted error
    eps and alpha = ln((1-eps)/eps)/2, then scales misclassified points by
    e^alpha and the rest by e^-alpha before renormalizing. eps = 0 keeps
    the stump with alpha capped; eps >= 0.5 discards the round and stops.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if _require_binary(y, "fit_adaboost") != {0, 1}:
        raise ValueError("fit_adaboost requires both classes present")
    if n_rounds < 1:
        raise ValueError("n_rounds must be >= 1")
    n = X.shape[0]
    w = np.full(n, 1.0 / n)
    stump_cfg = TreeConfig(max_depth=1, min_samples_split=2, feature_subsample="all")
    stumps, alphas = [], []
    for t in range(n_rounds):
        rng = np.random.default_rng([seed, t])
        stump = fit_tree(X, y, stump_cfg, rng, n_classes=2, sample_weight=w)
        preds = np.array([predict_tree(stump, row) for row in X])
        miss = preds != y
        eps = float(w[miss].sum())
        if eps == 0.0:
            stumps.append(stump)
            alphas.append(ALPHA_CAP)
            break
        if eps >= 0.5:
            break  # this round's stump is no better than chance; drop it
        alpha = 0.5 * math.log((1.0 - eps) / eps)
        stumps.append(stump)
        alphas.append(alpha)
        w = w * np.exp(np.where(miss, alpha, -alpha))
        w = w / w.sum()
    if not stumps:
        raise ValueError("no stump beat chance on round 1; cannot build a boosted model")
    return AdaBoostModel(
        stumps=stumps,
        alphas=alphas,
        class_names=_default_names(2, class_names),
        n_features=X.shape[1],
        sample_weights=w,
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def fit_logistic(X, y, learning_rate: float, epochs: int, seed: int = 0, *, class_names=None) -> LogisticModel:
    """Full-batch gradient descent on mean cross-entropy from a zero start.

    The seed is accepted for interface uniformity; the optimization itself
    is deterministic.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    _require_binary(y, "fit_logistic")
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    n, p = X.shape
    w = np.zeros(p)
    b = 0.0
    yf = y.astype(np.float64)
    for _ in range(epochs):
        residual = _sigmoid(X @ w + b) - yf
        w = w - learning_rate * (X.T @ residual) / n
        b = b - learning_rate * residual.mean()
    return LogisticModel(
        weights=w,
        bias=b,
        learning_rate=learning_rate,
        epochs=epochs,
        class_names=_default_names(2, class_names),
    )


# -------------------------------------------------------------- prediction


def predict(model, x) -> PredictionResult:
    """One prediction: class index plus per-class probabilities summing to 1.

    Forest and bagging report vote fractions; AdaBoost reports normalized
    per-class alpha mass; logistic reports [1-sigma, sigma] and picks class
    1 at exactly 0.5. Ties elsewhere go to the lowest class index.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("predict expects a single 1-D feature vector")
    if isinstance(model, RandomForestModel):
        if x.shape[0] != model.n_features:
            raise ValueError(f"expected {model.n_features} features, got {x.shape[0]}")
        k = len(model.class_names)
        votes = np.zeros(k)
        for tree in model.trees:
            votes[predict_tree(tree, x)] += 1
        probs = votes / model.n_trees
        return PredictionResult(int(np.argmax(probs)), probs)
    if isinstance(model, AdaBoostModel):
        if x.shape[0] != model.n_features:
            raise ValueError(f"expected {model.n_features} features, got {x.shape[0]}")
        scores = np.zeros(len(model.class_names))
        for stump, alpha in zip(model.stumps, model.alphas):
            scores[predict_tree(stump, x)] += alpha
        probs = scores / scores.sum()
        return PredictionResult(int(np.argmax(probs)), probs)
    if isinstance(model, LogisticModel):
        if x.shape[0] != model.weights.shape[0]:
            raise ValueError(f"expected {model.weights.shape[0]} features, got {x.shape[0]}")
        p1 = float(_sigmoid(np.array([model.weights @ x + model.bias]))[0])
        return PredictionResult(1 if p1 >= 0.5 else 0, np.array([1.0 - p1, p1]))
    raise TypeError(f"unsupported model type {type(model).__name__}")


def predict_batch(model, X) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise predict; returns (classes, probability matrix)."""
    X = np.asarray(X, dtype=np.float64)
    results = [predict(model, row) for row in X]
    classes = np.array([r.class_index for r in results], dtype=np.int64)
    probs = np.vstack([r.probabilities for r in results])
    return classes, probs
