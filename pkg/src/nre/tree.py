"""Binary decision trees grown with a margin-maximizing split criterion.

The gain of a split is the children's summed (n+ - n-)^2 / n minus the same
quantity at the parent, so a split is only worth taking when it increases the
squared class-count margin per sample.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import DataError


@dataclass
class TreeNode:
    n_pos: int
    n_neg: int
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    @property
    def kind(self) -> str:
        return "leaf" if self.is_leaf else "internal"

    @property
    def n_samples(self) -> int:
        return self.n_pos + self.n_neg

    @property
    def vote(self) -> int:
        """Majority label at the node; ties go to +1."""
        return 1 if self.n_pos >= self.n_neg else -1

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"kind": "leaf", "n_pos": self.n_pos, "n_neg": self.n_neg}
        return {
            "kind": "internal",
            "feature": self.feature,
            "threshold": self.threshold,
            "n_pos": self.n_pos,
            "n_neg": self.n_neg,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "TreeNode":
        if d["kind"] == "leaf":
            return TreeNode(n_pos=d["n_pos"], n_neg=d["n_neg"])
        return TreeNode(
            n_pos=d["n_pos"],
            n_neg=d["n_neg"],
            feature=d["feature"],
            threshold=d["threshold"],
            left=TreeNode.from_dict(d["left"]),
            right=TreeNode.from_dict(d["right"]),
        )


@dataclass
class DecisionTree:
    root: TreeNode
    max_depth: int
    feature_set: tuple[int, ...] = field(default=())

    def __post_init__(self):
        used = set()

        def walk(node):
            if not node.is_leaf:
                used.add(node.feature)
                walk(node.left)
                walk(node.right)

        walk(self.root)
        self.feature_set = tuple(sorted(used))

    def depth(self) -> int:
        def d(node):
            return 0 if node.is_leaf else 1 + max(d(node.left), d(node.right))

        return d(self.root)

    def n_leaves(self) -> int:
        def c(node):
            return 1 if node.is_leaf else c(node.left) + c(node.right)

        return c(self.root)

    def leaves(self) -> list[TreeNode]:
        """Leaves in left-to-right order."""
        out = []

        def walk(node):
            if node.is_leaf:
                out.append(node)
            else:
                walk(node.left)
                walk(node.right)

        walk(self.root)
        return out

    def route(self, x) -> TreeNode:
        """Leaf reached by a point under the x <= threshold goes left convention."""
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node

    def predict(self, features: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(features, dtype=np.float64))
        return np.array([self.route(x).vote for x in X], dtype=np.int64)

    def pretty(self, feature_names=None) -> str:
        """One node per line, children indented under their parent."""

        def name(j):
            return feature_names[j] if feature_names else f"x{j}"

        lines = []

        def walk(node, indent):
            pad = "  " * indent
            if node.is_leaf:
                lines.append(f"{pad}leaf (n+={node.n_pos}, n-={node.n_neg})")
            else:
                lines.append(
                    f"{pad}{name(node.feature)} <= {node.threshold:.6g}"
                    f" (n+={node.n_pos}, n-={node.n_neg})"
                )
                walk(node.left, indent + 1)
                walk(node.right, indent + 1)

        walk(self.root, 0)
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"max_depth": self.max_depth, "root": self.root.to_dict()}

    @staticmethod
    def from_dict(d: dict) -> "DecisionTree":
        return DecisionTree(root=TreeNode.from_dict(d["root"]), max_depth=d["max_depth"])


def margin_split_gain(nl_pos: int, nl_neg: int, nr_pos: int, nr_neg: int) -> float:
    """Squared class-count margin gained by splitting a parent into two children."""
    n_l = nl_pos + nl_neg
    n_r = nr_pos + nr_neg
    if n_l < 1 or n_r < 1:
        raise ValueError("both children must receive at least one sample")
    np_pos = nl_pos + nr_pos
    np_neg = nl_neg + nr_neg
    n_p = n_l + n_r
    return (nl_pos - nl_neg) ** 2 / n_l + (nr_pos - nr_neg) ** 2 / n_r - (np_pos - np_neg) ** 2 / n_p


def best_split(
    features: np.ndarray, labels: np.ndarray, min_leaf: int = 1
) -> tuple[int, float, float] | None:
    """Exhaustive scan for the margin-gain-maximizing (feature, threshold).

    Candidate thresholds are midpoints of consecutive distinct sorted values.
    Ties break to the lowest feature index, then the lowest threshold. Returns
    None when no candidate has strictly positive gain (in particular for pure
    nodes and constant features).
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    n = X.shape[0]
    if n < 2:
        return None
    pos = (y == 1).astype(np.int64)
    total_pos = int(pos.sum())
    total_neg = n - total_pos
    parent_term = (total_pos - total_neg) ** 2 / n

    best: tuple[int, float, float] | None = None
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        cum_pos = np.cumsum(pos[order])
        # boundary after index i means a left child of size i+1
        boundary = np.flatnonzero(xs[:-1] != xs[1:])
        if min_leaf > 1:
            sizes = boundary + 1
            boundary = boundary[(sizes >= min_leaf) & (n - sizes >= min_leaf)]
        if boundary.size == 0:
            continue
        nl = boundary + 1
        nl_pos = cum_pos[boundary]
        nl_neg = nl - nl_pos
        nr_pos = total_pos - nl_pos
        nr_neg = total_neg - nl_neg
        gains = (nl_pos - nl_neg) ** 2 / nl + (nr_pos - nr_neg) ** 2 / (n - nl) - parent_term
        k = int(np.argmax(gains))  # first max = lowest threshold
        gain = float(gains[k])
        if gain > 0.0 and (best is None or gain > best[2]):
            threshold = float((xs[boundary[k]] + xs[boundary[k] + 1]) / 2)
            best = (f, threshold, gain)
    return best


def build_tree(d: Dataset, max_depth: int, min_leaf: int = 1) -> DecisionTree:
    """Greedy recursive partitioning under the margin-gain criterion.

    Recursion stops at ``max_depth``, on pure nodes, when no candidate split
    has positive gain, or when a split would starve a child below ``min_leaf``.
    """
    if max_depth < 1:
        raise DataError("max_depth must be >= 1")
    if min_leaf < 1:
        raise DataError("min_leaf must be >= 1")
    X, y = d.features, d.labels
    if X.shape[0] == 0:
        raise DataError("cannot build a tree from an empty dataset")

    def grow(idx: np.ndarray, depth: int) -> TreeNode:
        ys = y[idx]
        n_pos = int(np.sum(ys == 1))
        n_neg = idx.size - n_pos
        node = TreeNode(n_pos=n_pos, n_neg=n_neg)
        if depth >= max_depth or n_pos == 0 or n_neg == 0:
            return node
        found = best_split(X[idx], ys, min_leaf=min_leaf)
        if found is None:
            return node
        f, t, _ = found
        mask = X[idx, f] <= t
        node.feature = f
        node.threshold = t
        node.left = grow(idx[mask], depth + 1)
        node.right = grow(idx[~mask], depth + 1)
        return node

    root = grow(np.arange(X.shape[0]), 0)
    return DecisionTree(root=root, max_depth=max_depth)
