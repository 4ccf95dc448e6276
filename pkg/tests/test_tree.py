import numpy as np
import pytest

from conftest import random_dataset
from nre.data import Dataset
from nre.errors import DataError
from nre.tree import DecisionTree, TreeNode, best_split, build_tree, margin_split_gain


def brute_force_best_split(X, y, min_leaf=1):
    """Independent scan: every (feature, midpoint) pair through margin_split_gain."""
    n, p = X.shape
    best = None
    for f in range(p):
        values = sorted(set(X[:, f].tolist()))
        for lo, hi in zip(values[:-1], values[1:]):
            t = (lo + hi) / 2
            left = X[:, f] <= t
            nl = int(left.sum())
            if nl < min_leaf or n - nl < min_leaf:
                continue
            nl_pos = int((y[left] == 1).sum())
            nr_pos = int((y[~left] == 1).sum())
            gain = margin_split_gain(nl_pos, nl - nl_pos, nr_pos, (n - nl) - nr_pos)
            if gain > 0 and (best is None or gain > best[2]):
                best = (f, t, gain)
    return best


class TestMarginSplitGain:
    def test_perfect_split_of_balanced_parent(self):
        assert margin_split_gain(5, 0, 0, 5) == 10.0

    def test_pure_parent_always_zero(self):
        for k in range(1, 10):
            assert margin_split_gain(k, 0, 10 - k, 0) == 0.0

    def test_hand_evaluated_case(self):
        assert margin_split_gain(3, 1, 1, 3) == 2.0

    def test_empty_child_rejected(self):
        with pytest.raises(ValueError):
            margin_split_gain(0, 0, 3, 2)


class TestBestSplit:
    def test_one_dimensional_separable(self):
        X = np.array([[1.0], [2.0], [3.0], [4.0]])
        y = np.array([-1, -1, 1, 1])
        f, t, gain = best_split(X, y)
        assert (f, t, gain) == (0, 2.5, 4.0)

    def test_identical_features_gives_none(self):
        X = np.ones((6, 2))
        y = np.array([1, -1, 1, -1, 1, -1])
        assert best_split(X, y) is None

    def test_pure_node_gives_none(self):
        X = np.arange(8, dtype=float).reshape(4, 2)
        y = np.ones(4, dtype=int)
        assert best_split(X, y) is None

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            n = int(rng.integers(2, 13))
            p = int(rng.integers(1, 4))
            # small integer grids force duplicate values and tied gains
            X = rng.integers(0, 4, size=(n, p)).astype(float)
            y = np.where(rng.random(n) > 0.5, 1, -1)
            assert best_split(X, y) == brute_force_best_split(X, y)

    def test_tie_breaks_to_lowest_feature_then_threshold(self):
        # both features split identically: feature 0 must win
        X = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        y = np.array([-1, -1, 1, 1])
        f, t, _ = best_split(X, y)
        assert f == 0 and t == 1.5

    def test_duplicating_samples_keeps_argmax(self):
        rng = np.random.default_rng(33)
        for _ in range(20):
            X = rng.normal(size=(10, 2))
            y = np.where(rng.random(10) > 0.5, 1, -1)
            base = best_split(X, y)
            doubled = best_split(np.vstack([X, X]), np.concatenate([y, y]))
            if base is None:
                assert doubled is None
            else:
                assert doubled[0] == base[0] and doubled[1] == base[1]
                assert doubled[2] == pytest.approx(2 * base[2])

    def test_min_leaf_filters_candidates(self):
        X = np.array([[0.0], [1.0], [2.0], [3.0], [4.0], [5.0]])
        y = np.array([-1, 1, 1, 1, 1, 1])
        unrestricted = best_split(X, y)
        assert unrestricted[1] == 0.5
        restricted = best_split(X, y, min_leaf=2)
        assert restricted is None or restricted[1] != 0.5


def xor9_dataset():
    """Imbalanced two-feature XOR where greedy splitting succeeds."""
    pts, labs = [], []
    for (cx, cy), lab, count in [
        ((0.0, 0.0), -1, 3),
        ((0.0, 1.0), 1, 2),
        ((1.0, 0.0), 1, 2),
        ((1.0, 1.0), -1, 2),
    ]:
        for _ in range(count):
            pts.append((cx, cy))
            labs.append(lab)
    return Dataset(np.array(pts), np.array(labs), ("x0", "x1"))


def enumerate_depth2_min_error(d):
    """Minimum training error over all depth-2 trees with midpoint thresholds."""

    def midpoints(col):
        vals = sorted(set(col.tolist()))
        return [(a + b) / 2 for a, b in zip(vals[:-1], vals[1:])]

    X, y = d.features, d.labels
    n = len(y)

    def leaf_errors(mask):
        ys = y[mask]
        if ys.size == 0:
            return 0
        pos = int((ys == 1).sum())
        return min(pos, ys.size - pos)

    best = min(leaf_errors(np.ones(n, dtype=bool)), n)  # depth-0 tree
    splits = [(f, t) for f in range(X.shape[1]) for t in midpoints(X[:, f])]
    for f0, t0 in splits:
        left = X[:, f0] <= t0
        err_left = min(
            [leaf_errors(left)]
            + [
                leaf_errors(left & (X[:, f] <= t)) + leaf_errors(left & (X[:, f] > t))
                for f, t in splits
            ]
        )
        err_right = min(
            [leaf_errors(~left)]
            + [
                leaf_errors(~left & (X[:, f] <= t)) + leaf_errors(~left & (X[:, f] > t))
                for f, t in splits
            ]
        )
        best = min(best, err_left + err_right)
    return best / n


class TestBuildTree:
    def test_imbalanced_xor_reaches_four_leaves_zero_error(self):
        d = xor9_dataset()
        tree = build_tree(d, max_depth=2)
        assert tree.n_leaves() == 4
        assert np.mean(tree.predict(d.features) != d.labels) == 0.0
        # greedy matches the enumerated optimum over all depth-2 trees
        assert enumerate_depth2_min_error(d) == 0.0

    def test_balanced_xor_has_no_positive_gain_split(self):
        # perfectly balanced XOR: every axis split has zero margin gain, so the
        # greedy tree stops at the root (see decisions ledger)
        X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = np.array([-1, 1, 1, -1])
        d = Dataset(X, y, ("x0", "x1"))
        assert best_split(X, y) is None
        tree = build_tree(d, max_depth=2)
        assert tree.n_leaves() == 1

    def test_linearly_separable_1d_gives_depth_one(self):
        d = Dataset(
            np.array([[0.1], [0.4], [2.0], [3.0]]), np.array([-1, -1, 1, 1]), ("f",)
        )
        tree = build_tree(d, max_depth=5)
        assert tree.depth() == 1
        leaves = tree.leaves()
        assert len(leaves) == 2
        assert all(l.n_pos == 0 or l.n_neg == 0 for l in leaves)

    def test_max_depth_bounds_every_path(self):
        rng = np.random.default_rng(2)
        for depth in (1, 2, 3):
            d = random_dataset(rng, 60, 3)
            tree = build_tree(d, max_depth=depth)
            assert tree.depth() <= depth

    def test_count_conservation(self):
        rng = np.random.default_rng(3)
        d = random_dataset(rng, 100, 4)
        tree = build_tree(d, max_depth=4)

        def check(node):
            if node.is_leaf:
                return
            assert node.n_pos == node.left.n_pos + node.right.n_pos
            assert node.n_neg == node.left.n_neg + node.right.n_neg
            check(node.left)
            check(node.right)

        check(tree.root)
        assert tree.root.n_samples == d.n_samples

    def test_chosen_splits_have_positive_gain(self):
        rng = np.random.default_rng(4)
        d = random_dataset(rng, 80, 3)
        tree = build_tree(d, max_depth=4)

        def check(node):
            if node.is_leaf:
                return
            gain = margin_split_gain(
                node.left.n_pos, node.left.n_neg, node.right.n_pos, node.right.n_neg
            )
            assert gain > 0
            check(node.left)
            check(node.right)

        check(tree.root)

    def test_deterministic_structure(self):
        rng = np.random.default_rng(5)
        d = random_dataset(rng, 70, 3)
        t1 = build_tree(d, max_depth=3)
        t2 = build_tree(d, max_depth=3)
        assert t1.pretty() == t2.pretty()

    def test_min_leaf_respected(self):
        rng = np.random.default_rng(6)
        d = random_dataset(rng, 50, 2)
        tree = build_tree(d, max_depth=6, min_leaf=5)
        assert all(l.n_samples >= 5 for l in tree.leaves())

    def test_feature_set_sorted_distinct(self):
        rng = np.random.default_rng(7)
        d = random_dataset(rng, 120, 5)
        tree = build_tree(d, max_depth=4)
        used = set()

        def walk(node):
            if not node.is_leaf:
                used.add(node.feature)
                walk(node.left)
                walk(node.right)

        walk(tree.root)
        assert tree.feature_set == tuple(sorted(used))

    def test_empty_dataset_unrepresentable(self):
        d = Dataset(np.ones((1, 1)), np.array([1]), ("f",))
        with pytest.raises(DataError):
            d.subset(np.array([], dtype=int))

    def test_bad_hyperparameters_rejected(self):
        d = xor9_dataset()
        with pytest.raises(DataError):
            build_tree(d, max_depth=0)
        with pytest.raises(DataError):
            build_tree(d, max_depth=2, min_leaf=0)

    def test_pretty_one_line_per_node(self):
        d = xor9_dataset()
        tree = build_tree(d, max_depth=2)
        lines = tree.pretty().splitlines()
        assert len(lines) == 7  # 3 internal + 4 leaves
        assert lines[0].startswith("x")
        assert sum("leaf" in ln for ln in lines) == 4

    def test_round_trip_dict(self):
        d = xor9_dataset()
        tree = build_tree(d, max_depth=2)
        again = DecisionTree.from_dict(tree.to_dict())
        assert again.pretty() == tree.pretty()
        assert again.feature_set == tree.feature_set
