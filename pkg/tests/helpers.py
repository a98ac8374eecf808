"""Shared test fixtures: oracle implementations and hand-built reference objects.

The split oracle re-derives the best split by brute force (explicit partition
per pivot, scalar impurity formulas) so the trainer's vectorized search can be
checked against an independent computation.
"""

from __future__ import annotations

import math

import numpy as np

from dtclust.dataset import Column, ColumnKind, Dataset
from dtclust.tree import DecisionTree, TrainParams, TreeNode


# ---------------------------------------------------------------------------
# Independent split-search oracle
# ---------------------------------------------------------------------------

def oracle_impurity(counts, metric):
    n = sum(counts)
    if metric == "gini":
        return 1.0 - sum((c / n) ** 2 for c in counts)
    return -sum((c / n) * math.log2(c / n) for c in counts if c > 0)


def oracle_gain(y_parent, y_left, y_right, n_classes, metric):
    parent = np.bincount(y_parent, minlength=n_classes)
    left = np.bincount(y_left, minlength=n_classes)
    right = np.bincount(y_right, minlength=n_classes)
    n, nl, nr = len(y_parent), len(y_left), len(y_right)
    # the weighted child term is summed before dividing so that mirrored
    # splits (left/right swapped) are exact float ties, as in the trainer;
    # the shared lowest-column, lowest-pivot tie-break then decides both
    children = nl * oracle_impurity(left, metric) + nr * oracle_impurity(right, metric)
    return oracle_impurity(parent, metric) - children / n


def oracle_best_split(rows, ds, params):
    """Exhaustive (attribute, pivot) scan; first strict improvement wins ties."""
    y = ds.labels[rows]
    best = None  # (gain, column index, pivot)
    for ci, col in enumerate(ds.columns):
        codes = col.codes[rows]
        for pivot in sorted(set(int(c) for c in codes)):
            if col.kind.is_ordered:
                left_mask = codes <= pivot
            else:
                left_mask = codes == pivot
            nl = int(left_mask.sum())
            nr = len(rows) - nl
            if nl < params.min_samples_leaf or nr < params.min_samples_leaf or nl == 0 or nr == 0:
                continue
            gain = oracle_gain(y, y[left_mask], y[~left_mask], ds.n_classes, params.impurity_metric)
            if gain > params.min_gain and (best is None or gain > best[0]):
                best = (gain, ci, pivot)
    return best


def assert_tree_matches_oracle(tree, ds, params, tol=1e-12):
    """Every internal node's chosen split must equal the oracle's."""
    for node in tree.nodes:
        if node.split is None:
            continue
        expected = oracle_best_split(node.rows, ds, params)
        assert expected is not None, f"node {node.id}: trainer split where oracle found none"
        gain, ci, pivot = expected
        assert node.split.column_index == ci, (
            f"node {node.id}: attribute {node.split.attribute} != oracle column {ci}"
        )
        assert node.split.pivot == pivot, f"node {node.id}: pivot {node.split.pivot} != {pivot}"
        assert abs(node.split.gain - gain) <= tol, (
            f"node {node.id}: gain {node.split.gain} vs oracle {gain}"
        )
    for node in tree.nodes:
        if node.split is None and node.depth < params.max_depth \
                and node.samples >= 2 * params.min_samples_leaf:
            assert oracle_best_split(node.rows, ds, params) is None, (
                f"leaf {node.id}: oracle found a split the trainer missed"
            )


# ---------------------------------------------------------------------------
# Random dataset generation
# ---------------------------------------------------------------------------

def random_dataset(rng, max_rows=200, max_cols=6) -> Dataset:
    """A small mixed-kind dataset (all five column kinds) with occasional missing codes."""
    n = int(rng.integers(20, max_rows + 1))
    n_cols = int(rng.integers(2, max_cols + 1))
    n_classes = int(rng.integers(2, 4))
    columns = []
    for j in range(n_cols):
        u = int(rng.integers(2, 13))
        codes = rng.integers(1, u + 1, size=n).astype(np.int32)
        if rng.random() < 0.3:
            codes[rng.random(n) < 0.1] = 0
        roll = rng.random()
        if roll < 0.4:
            values = np.sort(rng.uniform(-100, 100, size=u))
            dictionary = tuple(repr(float(v)) for v in values)
            columns.append(Column(f"col{j}", ColumnKind.NUMERIC, codes, dictionary, values=values))
        elif roll < 0.55:
            values = np.sort(rng.choice(86_400, size=u, replace=False)).astype(np.float64)
            dictionary = tuple(
                f"{int(v) // 3600:02d}:{int(v) // 60 % 60:02d}:{int(v) % 60:02d}"
                for v in values
            )
            columns.append(Column(f"col{j}", ColumnKind.DATETIME, codes, dictionary,
                                  values=values, pattern="%H:%M:%S"))
        elif roll < 0.65:
            codes = np.minimum(codes, 2)
            columns.append(Column(f"col{j}", ColumnKind.BOOLEAN, codes, ("false", "true")))
        else:
            kind = ColumnKind.SYMBOLIC_NOMINAL if rng.random() < 0.7 else ColumnKind.SYMBOLIC_ORDINAL
            dictionary = tuple(f"v{j}_{i}" for i in range(u))
            columns.append(Column(f"col{j}", kind, codes, dictionary))
    # labels loosely track the first column so trees have something to find
    base = columns[0].codes.astype(float)
    noisy = base + rng.normal(0, base.std() + 0.5, size=n)
    edges = np.quantile(noisy, np.linspace(0, 1, n_classes + 1)[1:-1])
    labels = np.searchsorted(edges, noisy).astype(np.int32)
    if len(np.unique(labels)) < 2:
        labels[: n // 2] = 0
        labels[n // 2:] = 1
    names = tuple(f"class{k}" for k in range(int(labels.max()) + 1))
    return Dataset(tuple(columns), labels, names)


# ---------------------------------------------------------------------------
# Hand-built trees
# ---------------------------------------------------------------------------

def _node(nodes, counts, depth, parent):
    counts = np.array(counts)
    node = TreeNode(
        id=len(nodes),
        depth=depth,
        rows=np.arange(int(counts.sum())),
        class_counts=counts,
        impurity=1.0 - float(((counts / counts.sum()) ** 2).sum()),
        decision=int(np.argmax(counts)),
        parent=parent,
    )
    nodes.append(node)
    return node


def _link(parent, left, right):
    parent.children = (left.id, right.id)


# class order is [other, target]; the six reference nodes carry the published
# metric-table counts (sizes 314/168/170/23/117/41, 342 target rows in total)
REFERENCE_COUNTS = {
    "c1": (81, 233), "c2": (8, 160), "c3": (9, 161),
    "c4": (1, 22), "c5": (48, 69), "c6": (18, 23),
}


def reference_metric_tree() -> tuple[DecisionTree, dict[str, int]]:
    """A consistent tree embedding the six reference clusters; returns (tree, name->id)."""
    nodes: list[TreeNode] = []
    root = _node(nodes, (545, 342), 0, None)           # 0
    c1 = _node(nodes, REFERENCE_COUNTS["c1"], 1, 0)    # 1
    b = _node(nodes, (464, 109), 1, 0)                 # 2
    _link(root, c1, b)
    c3 = _node(nodes, REFERENCE_COUNTS["c3"], 2, 1)    # 3
    y = _node(nodes, (72, 72), 2, 1)                   # 4
    _link(c1, c3, y)
    c6 = _node(nodes, REFERENCE_COUNTS["c6"], 2, 2)    # 5
    z = _node(nodes, (446, 86), 2, 2)                  # 6
    _link(b, c6, z)
    c2 = _node(nodes, REFERENCE_COUNTS["c2"], 3, 3)    # 7
    pad1 = _node(nodes, (1, 1), 3, 3)                  # 8
    _link(c3, c2, pad1)
    c5 = _node(nodes, REFERENCE_COUNTS["c5"], 3, 4)    # 9
    pad2 = _node(nodes, (24, 3), 3, 4)                 # 10
    _link(y, c5, pad2)
    c4 = _node(nodes, REFERENCE_COUNTS["c4"], 3, 5)    # 11
    pad3 = _node(nodes, (17, 1), 3, 5)                 # 12
    _link(c6, c4, pad3)
    ids = {"c1": 1, "c2": 7, "c3": 3, "c4": 11, "c5": 9, "c6": 5}
    return DecisionTree(nodes, TrainParams()), ids


def selection_scenario_tree() -> tuple[DecisionTree, dict[str, int]]:
    """A tree where greedy unrelated-node selection must pick a then d.

    a's descendants (b, c, e) rank just below it; d is a small pure node in the
    other branch whose ancestor f ranks below d itself.
    """
    nodes: list[TreeNode] = []
    root = _node(nodes, (298, 255), 0, None)  # 0
    mid = _node(nodes, (281, 233), 1, 0)      # 1
    f = _node(nodes, (17, 22), 1, 0)          # 2
    _link(root, mid, f)
    a = _node(nodes, (81, 233), 2, 1)         # 3
    junk = _node(nodes, (200, 0), 2, 1)       # 4
    _link(mid, a, junk)
    d = _node(nodes, (1, 22), 2, 2)           # 5
    pad = _node(nodes, (16, 0), 2, 2)         # 6
    _link(f, d, pad)
    b = _node(nodes, (8, 160), 3, 3)          # 7
    e = _node(nodes, (73, 73), 3, 3)          # 8
    _link(a, b, e)
    c = _node(nodes, (3, 150), 4, 7)          # 9
    pad2 = _node(nodes, (5, 10), 4, 7)        # 10
    _link(b, c, pad2)
    ids = {"a": 3, "b": 7, "c": 9, "d": 5, "e": 8, "f": 2, "junk": 4, "mid": 1}
    return DecisionTree(nodes, TrainParams()), ids


def single_split_tree(ds: Dataset, column: str, pivot: int) -> DecisionTree:
    """A root with one ordered split on the given column, for linearization tests."""
    from dtclust.tree import Split, impurity

    rows = np.arange(ds.row_count)
    codes = ds.column(column).codes
    mask = codes <= pivot
    split = Split(0.1, pivot, column, ds.column_index(column), True, rows[mask], rows[~mask])
    nodes: list[TreeNode] = []

    def node(node_rows, depth, parent):
        counts = np.bincount(ds.labels[node_rows], minlength=ds.n_classes)
        n = TreeNode(len(nodes), depth, node_rows, counts, impurity(counts), int(np.argmax(counts)), parent)
        nodes.append(n)
        return n

    root = node(rows, 0, None)
    root.split = split
    left = node(split.left_rows, 1, 0)
    right = node(split.right_rows, 1, 0)
    root.children = (left.id, right.id)
    return DecisionTree(nodes, TrainParams())


def ordinal_symbolic_dataset(name: str, dictionary: tuple[str, ...]) -> Dataset:
    """One symbolic-ordinal column with every dictionary value appearing once."""
    m = len(dictionary)
    codes = np.arange(1, m + 1, dtype=np.int32)
    col = Column(name, ColumnKind.SYMBOLIC_ORDINAL, codes, dictionary)
    labels = (codes > m // 2).astype(np.int32)
    return Dataset((col,), labels, ("0", "1"))


def identity_log(ds: Dataset):
    """A TransformLog with an identity entry per column."""
    from dtclust.preprocess import ColumnLog, TransformLog

    log = TransformLog()
    for col in ds.columns:
        log.entries[col.name] = ColumnLog(
            name=col.name,
            original_kind=col.kind,
            original_dictionary=col.dictionary,
            original_values=col.values,
            original_pattern=col.pattern,
            had_missing=col.has_missing,
            steps=[],
            final_kind=col.kind,
        )
    return log


# ---------------------------------------------------------------------------
# The four-city worked example
# ---------------------------------------------------------------------------

def city_dataset() -> Dataset:
    """Eight rows over one city column; target class is 0."""
    dictionary = ("Amsterdam", "London", "New York", "Shanghai")
    codes = np.array([1, 2, 3, 4, 4, 3, 2, 1], dtype=np.int32)
    labels = np.array([1, 0, 1, 1, 0, 1, 0, 1], dtype=np.int32)
    col = Column("city", ColumnKind.SYMBOLIC_NOMINAL, codes, dictionary)
    return Dataset((col,), labels, ("0", "1"))
