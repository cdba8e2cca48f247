"""From-scratch classifiers used as wrapper models: CART, logistic regression,
and a bagged random forest built on the same tree grower.

All trainers take a float matrix of feature values and a 0/1 label vector.
Trees presort each column once and carry the sorted index lists through the
recursion, so a node costs O(rows x features) with no further sorting.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, MofsError
from .genotype import derive_rng

CLASSIFIER_KINDS = ("cart", "logreg", "forest")


@dataclass
class TrainConfig:
    """Hyperparameters for all classifier kinds; unused fields are ignored."""

    kind: str = "cart"
    max_depth: int = 20
    min_samples_split: int = 2
    learning_rate: float = 0.1
    epochs: int = 200
    l2_penalty: float = 0.0
    tree_count: int = 100
    features_per_split: int | None = None  # None: ceil(sqrt(column count))
    bootstrap: bool = True
    seed: int = 0

    def validate(self) -> None:
        if self.kind not in CLASSIFIER_KINDS:
            raise ConfigurationError(f"unknown classifier kind: {self.kind!r}")
        if self.max_depth < 0:
            # depth 0 is a legal budget: the tree is a majority stump
            raise ConfigurationError("max_depth must be >= 0")
        if self.min_samples_split < 2:
            raise ConfigurationError("min_samples_split must be >= 2")
        if self.learning_rate <= 0:
            raise ConfigurationError("learning_rate must be positive")
        if self.epochs < 1:
            raise ConfigurationError("epochs must be >= 1")
        if self.l2_penalty < 0:
            raise ConfigurationError("l2_penalty must be >= 0")
        if self.tree_count < 1:
            raise ConfigurationError("tree_count must be >= 1")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ConfigurationError("features_per_split must be >= 1")
        if self.seed < 0:
            raise ConfigurationError("seed must be non-negative")


class TreeNode:
    """Either a split (feature, threshold, children) or a leaf (prediction)."""

    __slots__ = ("feature", "threshold", "left", "right", "prediction", "class_counts")

    def __init__(self, *, feature=None, threshold=None, left=None, right=None,
                 prediction=None, class_counts=None):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.prediction = prediction
        self.class_counts = class_counts

    @property
    def is_leaf(self) -> bool:
        return self.prediction is not None


@dataclass
class CartModel:
    root: TreeNode
    feature_count: int


@dataclass
class LogRegModel:
    weights: np.ndarray
    bias: float
    feature_count: int
    loss_history: list[float] | None = None


@dataclass
class ForestModel:
    trees: list[CartModel] = field(default_factory=list)
    feature_count: int = 0


def gini_impurity(counts) -> float:
    """1 - sum of squared class shares; 0.0 for an empty node."""
    total = sum(counts)
    if total == 0:
        return 0.0
    return 1.0 - sum((c / total) ** 2 for c in counts)


def _check_training_table(values: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels)
    if values.ndim != 2 or values.shape[1] < 1:
        raise ValueError("feature matrix must be 2-d with at least one column")
    if labels.ndim != 1 or labels.shape[0] != values.shape[0]:
        raise ValueError("label vector must match the feature matrix row count")
    if values.shape[0] < 1:
        raise ValueError("training table must have at least one row")
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    return values, labels.astype(np.int64)


def _split_scores(sorted_values: np.ndarray, sorted_labels: np.ndarray) -> np.ndarray:
    """Weighted Gini for every cut position of every column; +inf where the
    consecutive sorted values are equal (no threshold exists there)."""
    rows = sorted_values.shape[0]
    ones = np.cumsum(sorted_labels, axis=0, dtype=np.int64)
    left_n = np.arange(1, rows, dtype=np.float64)[:, None]
    left_ones = ones[:-1].astype(np.float64)
    right_n = rows - left_n
    right_ones = ones[-1].astype(np.float64) - left_ones
    left_zeros = left_n - left_ones
    right_zeros = right_n - right_ones
    # one exact-integer quotient per cut: mathematically tied cuts then score
    # bit-identically, so argmin's first-minimum tie rule is trustworthy
    left_sq = left_ones ** 2 + left_zeros ** 2
    right_sq = right_ones ** 2 + right_zeros ** 2
    weighted = 1.0 - (left_sq * right_n + right_sq * left_n) / (left_n * right_n * rows)
    no_boundary = sorted_values[:-1] == sorted_values[1:]
    weighted[no_boundary] = np.inf
    return weighted


def best_split(values: np.ndarray, labels: np.ndarray,
               candidates: np.ndarray | None = None) -> tuple[int, float, float] | None:
    """Best (feature, threshold, weighted_gini) over candidate columns.

    Thresholds are midpoints of consecutive distinct sorted values.  Ties go
    to the lowest feature index, then the lowest threshold.  Returns None when
    no split strictly reduces the parent impurity.
    """
    values, labels = _check_training_table(values, labels)
    rows = values.shape[0]
    if rows < 2:
        return None
    cand = np.arange(values.shape[1]) if candidates is None else np.sort(np.asarray(candidates))
    sub = values[:, cand]
    order = np.argsort(sub, axis=0)
    sorted_values = np.take_along_axis(sub, order, axis=0)
    sorted_labels = labels[order]
    weighted = _split_scores(sorted_values, sorted_labels)
    per_col_pos = np.argmin(weighted, axis=0)  # first minimum = lowest threshold
    per_col_best = weighted[per_col_pos, np.arange(len(cand))]
    col = int(np.argmin(per_col_best))  # first minimum = lowest feature index
    parent = gini_impurity((int((labels == 0).sum()), int((labels == 1).sum())))
    if not per_col_best[col] < parent:
        return None
    pos = int(per_col_pos[col])
    threshold = (sorted_values[pos, col] + sorted_values[pos + 1, col]) / 2.0
    return int(cand[col]), float(threshold), float(per_col_best[col])


class _TreeGrower:
    """Grows one tree from presorted per-column index lists."""

    def __init__(self, values, labels, cfg, feature_sampler):
        self.values = values
        self.labels = labels
        self.cfg = cfg
        self.feature_sampler = feature_sampler
        self.scratch = np.zeros(values.shape[0], dtype=bool)

    def grow(self) -> TreeNode:
        sorted_idx = np.argsort(self.values, axis=0, kind="stable")
        return self._node(sorted_idx, depth=0)

    def _leaf(self, ones: int, total: int) -> TreeNode:
        zeros = total - ones
        return TreeNode(prediction=1 if ones >= zeros else 0, class_counts=(zeros, ones))

    def _node(self, sorted_idx: np.ndarray, depth: int) -> TreeNode:
        rows = sorted_idx.shape[0]
        node_labels = self.labels[sorted_idx[:, 0]]
        ones = int(node_labels.sum())
        if (
            depth >= self.cfg.max_depth
            or rows < self.cfg.min_samples_split
            or ones == 0
            or ones == rows
        ):
            return self._leaf(ones, rows)
        m = self.values.shape[1]
        cand = np.arange(m) if self.feature_sampler is None else self.feature_sampler(m)
        sorted_values = self.values[sorted_idx[:, cand], cand[None, :]]
        sorted_labels = self.labels[sorted_idx[:, cand]]
        weighted = _split_scores(sorted_values, sorted_labels)
        per_col_pos = np.argmin(weighted, axis=0)
        per_col_best = weighted[per_col_pos, np.arange(len(cand))]
        col = int(np.argmin(per_col_best))
        parent = gini_impurity((rows - ones, ones))
        if not per_col_best[col] < parent:
            return self._leaf(ones, rows)
        pos = int(per_col_pos[col])
        threshold = (sorted_values[pos, col] + sorted_values[pos + 1, col]) / 2.0
        feature = int(cand[col])

        node_rows = sorted_idx[:, 0]
        left_rows = node_rows[self.values[node_rows, feature] <= threshold]
        self.scratch[left_rows] = True
        goes_left = self.scratch[sorted_idx]  # per column, in each column's sort order
        left_n = left_rows.shape[0]
        columns = sorted_idx.T
        left_sorted = columns[goes_left.T].reshape(m, left_n).T
        right_sorted = columns[~goes_left.T].reshape(m, rows - left_n).T
        self.scratch[left_rows] = False

        node = TreeNode(feature=feature, threshold=float(threshold))
        node.left = self._node(left_sorted, depth + 1)
        node.right = self._node(right_sorted, depth + 1)
        return node


def train_cart(values, labels, cfg: TrainConfig | None = None,
               feature_sampler=None) -> CartModel:
    """Grow a Gini CART to cfg.max_depth / cfg.min_samples_split.

    feature_sampler, when given, is called with the column count at every node
    and must return a sorted array of candidate column indices (used by the
    random forest).  Leaf ties predict class 1.
    """
    cfg = cfg or TrainConfig(kind="cart")
    cfg.validate()
    values, labels = _check_training_table(values, labels)
    grower = _TreeGrower(values, labels, cfg, feature_sampler)
    return CartModel(root=grower.grow(), feature_count=values.shape[1])


def _predict_tree(root: TreeNode, values: np.ndarray) -> np.ndarray:
    out = np.empty(values.shape[0], dtype=np.int64)
    stack = [(root, np.arange(values.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        if node.is_leaf:
            out[idx] = node.prediction
            continue
        mask = values[idx, node.feature] <= node.threshold
        stack.append((node.left, idx[mask]))
        stack.append((node.right, idx[~mask]))
    return out


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def logreg_loss_grad(weights, bias, values, labels, l2_penalty=0.0):
    """Mean cross-entropy loss (plus 0.5*l2*||w||^2) and its gradients."""
    z = values @ weights + bias
    p = _sigmoid(z)
    # identity: -y*log(p) - (1-y)*log(1-p) == logaddexp(0, z) - y*z
    loss = float(np.mean(np.logaddexp(0.0, z) - labels * z))
    loss += 0.5 * l2_penalty * float(weights @ weights)
    residual = p - labels
    grad_w = values.T @ residual / values.shape[0] + l2_penalty * weights
    grad_b = float(np.mean(residual))
    return loss, grad_w, grad_b


def train_logreg(values, labels, cfg: TrainConfig | None = None,
                 track_loss: bool = False) -> LogRegModel:
    """Full-batch gradient descent from zero weights.

    The optional L2 penalty applies to the weights only, never the bias.
    Raises on non-finite loss.
    """
    cfg = cfg or TrainConfig(kind="logreg")
    cfg.validate()
    values, labels = _check_training_table(values, labels)
    y = labels.astype(np.float64)
    weights = np.zeros(values.shape[1])
    bias = 0.0
    history: list[float] | None = [] if track_loss else None
    for _ in range(cfg.epochs):
        loss, grad_w, grad_b = logreg_loss_grad(weights, bias, values, y, cfg.l2_penalty)
        if not math.isfinite(loss):
            raise MofsError("non-finite loss during logistic regression training")
        if history is not None:
            history.append(loss)
        weights = weights - cfg.learning_rate * grad_w
        bias = bias - cfg.learning_rate * grad_b
    if history is not None:
        loss, _, _ = logreg_loss_grad(weights, bias, values, y, cfg.l2_penalty)
        history.append(loss)
    return LogRegModel(weights=weights, bias=bias, feature_count=values.shape[1],
                       loss_history=history)


def train_forest(values, labels, cfg: TrainConfig | None = None) -> ForestModel:
    """Bagged forest of CARTs.

    Each tree's RNG stream derives from (cfg.seed, tree_index): bootstrap rows
    first, then per-node candidate features in depth-first left-first order.
    """
    cfg = cfg or TrainConfig(kind="forest")
    cfg.validate()
    values, labels = _check_training_table(values, labels)
    rows, m = values.shape
    k = cfg.features_per_split if cfg.features_per_split is not None else math.ceil(math.sqrt(m))
    k = min(k, m)
    trees: list[CartModel] = []
    for t in range(cfg.tree_count):
        rng = derive_rng(cfg.seed, t)
        if cfg.bootstrap:
            idx = rng.integers(0, rows, size=rows)
            tree_values, tree_labels = values[idx], labels[idx]
        else:
            tree_values, tree_labels = values, labels
        sampler = None
        if k < m:
            def sampler(total, rng=rng, k=k):
                return np.sort(rng.choice(total, size=k, replace=False))
        trees.append(train_cart(tree_values, tree_labels, cfg, feature_sampler=sampler))
    return ForestModel(trees=trees, feature_count=m)


def train(values, labels, cfg: TrainConfig):
    """Dispatch on cfg.kind."""
    cfg.validate()
    if cfg.kind == "cart":
        return train_cart(values, labels, cfg)
    if cfg.kind == "logreg":
        return train_logreg(values, labels, cfg)
    return train_forest(values, labels, cfg)


def predict(model, values) -> np.ndarray:
    """Predict 0/1 labels; the column count must match training."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] != model.feature_count:
        raise ValueError(
            f"expected {model.feature_count} feature columns, got "
            f"{values.shape[1] if values.ndim == 2 else 'non-2d input'}"
        )
    if isinstance(model, CartModel):
        return _predict_tree(model.root, values)
    if isinstance(model, LogRegModel):
        return (values @ model.weights + model.bias >= 0.0).astype(np.int64)
    if isinstance(model, ForestModel):
        votes = np.zeros(values.shape[0], dtype=np.int64)
        for tree in model.trees:
            votes += _predict_tree(tree.root, values)
        return (2 * votes >= len(model.trees)).astype(np.int64)  # ties vote 1
    raise TypeError(f"unknown model type: {type(model).__name__}")


def _entropy(ones: np.ndarray, total: np.ndarray) -> np.ndarray:
    """Binary entropy in bits; vectorized, 0*log(0) treated as 0."""
    ones = np.asarray(ones, dtype=np.float64)
    total = np.asarray(total, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        p1 = np.where(total > 0, ones / total, 0.0)
        p0 = 1.0 - p1
        h = -np.where(p1 > 0, p1 * np.log2(p1), 0.0) - np.where(p0 > 0, p0 * np.log2(p0), 0.0)
    return h


def information_gain(column, labels) -> float:
    """Best entropy reduction of any midpoint threshold on one column.

    A column with no distinct consecutive values (constant) has gain 0.
    """
    column = np.asarray(column, dtype=np.float64)
    labels = np.asarray(labels)
    if column.ndim != 1 or column.shape != labels.shape or column.size == 0:
        raise ValueError("column and labels must be equal-length 1-d arrays")
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    order = np.argsort(column)
    sorted_values = column[order]
    sorted_labels = labels[order].astype(np.int64)
    rows = column.size
    if rows < 2:
        return 0.0
    boundaries = sorted_values[:-1] < sorted_values[1:]
    if not boundaries.any():
        return 0.0
    ones = np.cumsum(sorted_labels)
    total_ones = ones[-1]
    left_n = np.arange(1, rows, dtype=np.float64)
    left_ones = ones[:-1]
    right_n = rows - left_n
    right_ones = total_ones - left_ones
    child = (left_n * _entropy(left_ones, left_n)
             + right_n * _entropy(right_ones, right_n)) / rows
    parent = float(_entropy(np.array(total_ones), np.array(rows)))
    return max(0.0, parent - float(child[boundaries].min()))
