"""Decision trees: CART (Gini, binary splits) and C4.5 (gain ratio,
multiway categorical splits, pessimistic subtree-replacement pruning).

Class counts everywhere are (positive, negative) pairs ordered by the
matrix's positive class. Ties in leaf prediction and voting go to the
positive class: a missed case costs more than a false alarm in screening.

CART treats every matrix column, one-hot members included, as a numeric
threshold candidate. C4.5 instead treats each one-hot group as a single
unordered attribute and splits it multiway, while thresholding the
remaining columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .betadist import binom_upper_limit
from .features import FeatureMatrix, FeatureSchema, ONEHOT
from .records import ValidationError

GINI = "gini"
GAIN_RATIO = "gain_ratio"

# Gains at or below this are treated as no improvement; true gains from
# integer class counts at feasible node sizes sit far above it.
GAIN_EPS = 1e-12


def gini(class_counts) -> float:
    """Gini impurity 1 - sum(p_i^2)."""
    total = sum(class_counts)
    if total <= 0:
        raise ValidationError("gini of an empty node is undefined")
    return 1.0 - sum((c / total) ** 2 for c in class_counts)


def entropy(class_counts) -> float:
    """Shannon entropy in bits, with 0*log(0) taken as 0."""
    total = sum(class_counts)
    if total <= 0:
        raise ValidationError("entropy of an empty node is undefined")
    return -sum((c / total) * math.log2(c / total) for c in class_counts if c > 0)


def gain_ratio(parent_counts, child_count_lists) -> float:
    """Information gain over split information; 0 when the split
    information vanishes."""
    parent_total = sum(parent_counts)
    child_totals = [sum(c) for c in child_count_lists]
    if sum(child_totals) != parent_total:
        raise ValidationError("children must partition the parent")
    weighted = sum(
        (t / parent_total) * entropy(c)
        for t, c in zip(child_totals, child_count_lists) if t > 0
    )
    gain = entropy(parent_counts) - weighted
    split_info = entropy(child_totals)
    if split_info == 0.0:
        return 0.0
    return gain / split_info


@dataclass(frozen=True)
class SplitRule:
    """Either a threshold test (left child: x[column] <= threshold) or a
    multiway test on a one-hot group (one child per category seen at the
    node, plus a default child for anything else)."""

    column: int
    kind: str  # "threshold" | "categorical"
    threshold: float | None = None
    group: str | None = None
    member_columns: tuple[int, ...] = ()
    categories: tuple[str, ...] = ()
    default_child: int = 0

    def route(self, row) -> int:
        if self.kind == "threshold":
            return 0 if row[self.column] <= self.threshold else 1
        for child_index, col in enumerate(self.member_columns):
            if row[col] == 1.0:
                return child_index
        return self.default_child

    @property
    def n_children(self) -> int:
        return 2 if self.kind == "threshold" else len(self.member_columns)


@dataclass
class TreeNode:
    counts: tuple[int, int]  # (positive, negative) training rows at the node
    rule: SplitRule | None = None
    children: tuple = ()

    @property
    def is_leaf(self) -> bool:
        return self.rule is None

    @property
    def total(self) -> int:
        return self.counts[0] + self.counts[1]

    @property
    def predicted_positive(self) -> bool:
        return self.counts[0] >= self.counts[1]  # tie goes to the positive class


@dataclass(frozen=True)
class TreeParams:
    criterion: str = GINI
    min_leaf: int = 2
    max_depth: int | None = None
    prune: bool = False
    prune_confidence: float = 0.25

    def __post_init__(self):
        if self.criterion not in (GINI, GAIN_RATIO):
            raise ValidationError(f"unknown criterion {self.criterion!r}")
        if self.min_leaf < 1:
            raise ValidationError("min_leaf must be at least 1")
        if not 0.0 < self.prune_confidence < 1.0:
            raise ValidationError("prune_confidence must be in (0, 1)")


@dataclass
class TreeModel:
    root: TreeNode
    params: TreeParams
    schema: FeatureSchema
    positive_class: str
    negative_class: str

    def node_count(self) -> int:
        def walk(node):
            return 1 + sum(walk(c) for c in node.children)
        return walk(self.root)

    def depth(self) -> int:
        def walk(node):
            if node.is_leaf:
                return 0
            return 1 + max(walk(c) for c in node.children)
        return walk(self.root)


def _class_counts(y_slice) -> tuple[int, int]:
    pos = int(y_slice.sum())
    return pos, int(y_slice.size - pos)


def _weighted_gini(left_counts, right_counts) -> float:
    nl = left_counts[0] + left_counts[1]
    nr = right_counts[0] + right_counts[1]
    n = nl + nr
    return (nl / n) * gini(left_counts) + (nr / n) * gini(right_counts)


def _threshold_candidates(values, y, min_leaf):
    """Yield (threshold, left_counts, right_counts) at midpoints between
    consecutive distinct sorted values, honoring min_leaf on both sides."""
    order = np.argsort(values, kind="stable")
    sv = values[order]
    sy = y[order]
    n = sv.size
    pos_prefix = np.cumsum(sy)
    total_pos = int(pos_prefix[-1])
    boundaries = np.nonzero(sv[:-1] != sv[1:])[0]
    for b in boundaries:
        nl = int(b) + 1
        nr = n - nl
        if nl < min_leaf or nr < min_leaf:
            continue
        pos_l = int(pos_prefix[b])
        left = (pos_l, nl - pos_l)
        right = (total_pos - pos_l, nr - (total_pos - pos_l))
        yield 0.5 * (float(sv[b]) + float(sv[b + 1])), left, right


def _categorical_partition(rows, y, indices, schema, group, min_leaf):
    """Partition the node by a one-hot group. Returns (member_columns,
    categories, per-child index arrays, per-child counts) or None when the
    group cannot split the node admissibly."""
    members = schema.group_members(group)
    categories = schema.categories(group)
    child_cols, child_cats, child_idx, child_counts = [], [], [], []
    claimed = np.zeros(indices.size, dtype=bool)
    for col, cat in zip(members, categories):
        mask = rows[indices, col] == 1.0
        if not mask.any():
            continue
        child_cols.append(col)
        child_cats.append(cat)
        child_idx.append(indices[mask])
        child_counts.append(_class_counts(y[indices[mask]]))
        claimed |= mask
    if len(child_idx) < 2 or not claimed.all():
        return None
    if any(idx.size < min_leaf for idx in child_idx):
        return None
    return child_cols, child_cats, child_idx, child_counts


def best_split(rows: np.ndarray, y: np.ndarray, indices: np.ndarray,
               schema: FeatureSchema, params: TreeParams,
               columns=None):
    """Best admissible split of the rows at `indices`, or None.

    Candidates are scanned in ascending (column, threshold) order and a new
    candidate must be strictly better, so ties resolve to the lowest column
    index and then the lowest threshold. `columns` restricts the threshold
    candidates (used for per-node feature subsampling).
    """
    parent_counts = _class_counts(y[indices])
    if parent_counts[0] == 0 or parent_counts[1] == 0:
        return None
    onehot_cols = {j for j, c in enumerate(schema.columns) if c.kind == ONEHOT}
    if columns is None:
        columns = range(schema.n_columns)
    best = None  # (score, rule, child_index_arrays)
    if params.criterion == GINI:
        parent_gini = gini(parent_counts)
        for j in columns:
            values = rows[indices, j]
            for threshold, left, right in _threshold_candidates(values, y[indices], params.min_leaf):
                gain = parent_gini - _weighted_gini(left, right)
                if gain <= GAIN_EPS:
                    continue
                if best is None or gain > best[0]:
                    rule = SplitRule(column=j, kind="threshold", threshold=threshold)
                    best = (gain, rule)
    else:
        threshold_cols = [j for j in columns if j not in onehot_cols]
        group_first_col = {g: schema.group_members(g)[0] for g in schema.groups}
        # interleave group candidates at their first member column position
        plan = [("col", j, j) for j in threshold_cols]
        plan += [("group", g, group_first_col[g]) for g in schema.groups]
        plan.sort(key=lambda item: item[2])
        for kind, key, _pos in plan:
            if kind == "col":
                values = rows[indices, key]
                for threshold, left, right in _threshold_candidates(values, y[indices], params.min_leaf):
                    ratio = gain_ratio(parent_counts, [left, right])
                    if ratio <= GAIN_EPS:
                        continue
                    if best is None or ratio > best[0]:
                        rule = SplitRule(column=key, kind="threshold", threshold=threshold)
                        best = (ratio, rule)
            else:
                part = _categorical_partition(rows, y, indices, schema, key, params.min_leaf)
                if part is None:
                    continue
                child_cols, child_cats, child_idx, child_counts = part
                ratio = gain_ratio(parent_counts, child_counts)
                if ratio <= GAIN_EPS:
                    continue
                if best is None or ratio > best[0]:
                    sizes = [idx.size for idx in child_idx]
                    rule = SplitRule(
                        column=child_cols[0],
                        kind="categorical",
                        group=key,
                        member_columns=tuple(child_cols),
                        categories=tuple(child_cats),
                        default_child=int(np.argmax(sizes)),
                    )
                    best = (ratio, rule)
    return best[1] if best else None


def _partition_by_rule(rows, indices, rule: SplitRule):
    if rule.kind == "threshold":
        mask = rows[indices, rule.column] <= rule.threshold
        return [indices[mask], indices[~mask]]
    parts = []
    for col in rule.member_columns:
        parts.append(indices[rows[indices, col] == 1.0])
    return parts


def fit_tree(train: FeatureMatrix, params: TreeParams,
             mtry: int | None = None, rng: np.random.Generator | None = None) -> TreeModel:
    """Grow (and optionally prune) a tree on the training matrix.

    `mtry` restricts each node's split search to that many randomly drawn
    columns (forest convention); it requires `rng` and applies to the gini
    criterion's column candidates.
    """
    if train.n == 0:
        raise ValidationError("cannot fit a tree on an empty training set")
    if mtry is not None:
        if rng is None:
            raise ValidationError("mtry requires an rng")
        if not 1 <= mtry <= train.p:
            raise ValidationError(f"mtry must be in 1..{train.p}, got {mtry}")
    rows = train.rows
    y = train.y()
    negative = next((lab for lab in train.labels if lab != train.positive_class),
                    "No" if train.positive_class == "Yes" else "Yes")

    def grow(indices: np.ndarray, depth: int) -> TreeNode:
        counts = _class_counts(y[indices])
        node = TreeNode(counts=counts)
        if counts[0] == 0 or counts[1] == 0:
            return node
        if params.max_depth is not None and depth >= params.max_depth:
            return node
        if indices.size < 2 * params.min_leaf:
            return node
        columns = None
        if mtry is not None and mtry < train.p:
            columns = sorted(int(c) for c in rng.choice(train.p, size=mtry, replace=False))
        rule = best_split(rows, y, indices, train.schema, params, columns=columns)
        if rule is None:
            return node
        parts = _partition_by_rule(rows, indices, rule)
        node.rule = rule
        node.children = tuple(grow(part, depth + 1) for part in parts)
        return node

    root = grow(np.arange(train.n), 0)
    if params.prune:
        root = prune_tree(root, params.prune_confidence)
    return TreeModel(
        root=root,
        params=params,
        schema=train.schema,
        positive_class=train.positive_class,
        negative_class=negative,
    )


def pessimistic_errors(node: TreeNode, confidence: float) -> float:
    """Upper-bound error count of a node taken as a subtree: summed over
    its leaves, each leaf contributing n * upper confidence limit of its
    observed error rate."""
    if node.is_leaf:
        e = node.total - max(node.counts)
        return node.total * binom_upper_limit(e, node.total, confidence)
    return sum(pessimistic_errors(c, confidence) for c in node.children)


def prune_tree(node: TreeNode, confidence: float) -> TreeNode:
    """Bottom-up subtree replacement: collapse an internal node to a leaf
    whenever the leaf's pessimistic error does not exceed the subtree's."""
    if node.is_leaf:
        return node
    pruned_children = tuple(prune_tree(c, confidence) for c in node.children)
    node = replace_children(node, pruned_children)
    e = node.total - max(node.counts)
    as_leaf = node.total * binom_upper_limit(e, node.total, confidence)
    as_subtree = pessimistic_errors(node, confidence)
    if as_leaf <= as_subtree:
        return TreeNode(counts=node.counts)
    return node


def replace_children(node: TreeNode, children) -> TreeNode:
    return TreeNode(counts=node.counts, rule=node.rule, children=tuple(children))


def predict_tree(model: TreeModel, row) -> tuple[str, float]:
    """Route a row to a leaf; returns (class, Laplace-smoothed positive
    probability (pos+1)/(total+2))."""
    row = np.asarray(row, dtype=float)
    if row.shape != (model.schema.n_columns,):
        raise ValidationError(
            f"row has shape {row.shape}, schema expects ({model.schema.n_columns},)"
        )
    node = model.root
    while not node.is_leaf:
        node = node.children[node.rule.route(row)]
    prob = (node.counts[0] + 1) / (node.total + 2)
    label = model.positive_class if node.predicted_positive else model.negative_class
    return label, prob


def predict_tree_many(model: TreeModel, rows) -> list[tuple[str, float]]:
    return [predict_tree(model, r) for r in np.asarray(rows, dtype=float)]
