import math

import numpy as np
import pytest

from screenlab import (
    SplitRule,
    TreeParams,
    ValidationError,
    best_split,
    build_schema,
    encode,
    entropy,
    fit_tree,
    gain_ratio,
    gini,
    predict_tree,
    prune_tree,
)
from screenlab.features import Column, FeatureMatrix, FeatureSchema
from screenlab.tree import GAIN_RATIO, GINI, TreeNode, pessimistic_errors

from helpers import make_record
from oracles import brute_force_best_split


def test_gini_values():
    assert gini((1, 1)) == pytest.approx(0.5)
    assert gini((2, 0)) == 0.0
    assert gini((3, 1)) == pytest.approx(0.375)


def test_entropy_values():
    assert entropy((1, 1)) == pytest.approx(1.0)
    assert entropy((2, 0)) == 0.0
    assert entropy((75, 25)) == pytest.approx(0.8113, abs=5e-5)


def test_impurity_rejects_empty():
    with pytest.raises(ValidationError):
        gini((0, 0))
    with pytest.raises(ValidationError):
        entropy(())


def test_gain_ratio_worked_example():
    # parent 8/4 split into (6,1) and (2,3):
    # gain = H(8,4) - (7/12)H(6,1) - (5/12)H(2,3) = 0.16859
    # split info = H(7,5) = 0.97987, ratio = 0.17205
    assert gain_ratio((8, 4), [(6, 1), (2, 3)]) == pytest.approx(0.1721, abs=5e-5)


def test_gain_ratio_zero_for_uninformative_split():
    assert gain_ratio((4, 4), [(2, 2), (2, 2)]) == pytest.approx(0.0, abs=1e-12)


def test_gain_ratio_children_must_partition():
    with pytest.raises(ValidationError):
        gain_ratio((4, 4), [(2, 2), (1, 1)])


def tiny_schema(with_group=True):
    columns = [
        Column(name="x0", kind="numeric", group=None, category=None),
        Column(name="x1", kind="binary", group=None, category=None),
    ]
    if with_group:
        for cat in ("a", "b", "c"):
            columns.append(Column(name=f"g={cat}", kind="onehot", group="g", category=cat))
    return FeatureSchema(columns=tuple(columns))


def random_table(rng, with_group=True):
    schema = tiny_schema(with_group)
    n = int(rng.integers(4, 21))
    cols = [rng.integers(0, 4, size=n).astype(float),
            rng.integers(0, 2, size=n).astype(float)]
    if with_group:
        choice = rng.integers(0, 3, size=n)
        for k in range(3):
            cols.append((choice == k).astype(float))
    rows = np.column_stack(cols)
    y = rng.integers(0, 2, size=n)
    if y.min() == y.max():  # force both classes
        y[0] = 1 - y[0]
    return schema, rows, y.astype(float)


@pytest.mark.parametrize("criterion", [GINI, GAIN_RATIO])
def test_best_split_matches_brute_force(criterion):
    rng = np.random.default_rng(20201054)
    mismatches = 0
    for trial in range(100):
        schema, rows, y = random_table(rng, with_group=bool(trial % 2))
        min_leaf = int(rng.integers(1, 3))
        params = TreeParams(criterion=criterion, min_leaf=min_leaf)
        rule = best_split(rows, y, np.arange(y.size), schema, params)
        expected = brute_force_best_split(rows, y, schema, criterion, min_leaf)
        if expected is None:
            if rule is not None:
                mismatches += 1
            continue
        score, (kind, key, threshold) = expected
        if rule is None or rule.kind != kind:
            mismatches += 1
            continue
        if kind == "threshold":
            if rule.column != key or rule.threshold != pytest.approx(threshold, abs=1e-12):
                mismatches += 1
        else:
            if rule.group != key:
                mismatches += 1
    assert mismatches == 0


def test_best_split_prefers_lowest_column_on_ties():
    # two identical columns: the tie must resolve to the first
    schema = FeatureSchema(columns=(
        Column(name="x0", kind="binary", group=None, category=None),
        Column(name="x1", kind="binary", group=None, category=None),
    ))
    rows = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [1.0, 1.0]])
    y = np.array([0.0, 0.0, 1.0, 1.0])
    rule = best_split(rows, y, np.arange(4), schema, TreeParams(criterion=GINI, min_leaf=1))
    assert rule.column == 0
    assert rule.threshold == pytest.approx(0.5)


def test_best_split_none_on_pure_node():
    schema = tiny_schema(False)
    rows = np.array([[0.0, 0.0], [1.0, 1.0]])
    y = np.array([1.0, 1.0])
    assert best_split(rows, y, np.arange(2), schema, TreeParams(criterion=GINI)) is None


def test_best_split_respects_min_leaf():
    schema = FeatureSchema(columns=(
        Column(name="x0", kind="numeric", group=None, category=None),
    ))
    rows = np.array([[0.0], [1.0], [1.0], [1.0]])
    y = np.array([0.0, 1.0, 1.0, 1.0])
    # the only admissible cut isolates one row; min_leaf 2 forbids it
    assert best_split(rows, y, np.arange(4), schema,
                      TreeParams(criterion=GINI, min_leaf=2)) is None


def binary_item_dataset(n, seed):
    rng = np.random.default_rng(seed)
    records = []
    for _ in range(n):
        items = [int(v) for v in rng.integers(0, 2, size=10)]
        records.append(make_record(items))
    return records


def test_fit_tree_memorizes_training_data():
    records = binary_item_dataset(150, seed=5)
    matrix = encode(records, build_schema(records))
    model = fit_tree(matrix, TreeParams(criterion=GINI, min_leaf=1))
    for row, label in zip(matrix.rows, matrix.labels):
        assert predict_tree(model, row)[0] == label


def test_fit_tree_deterministic():
    records = binary_item_dataset(80, seed=6)
    matrix = encode(records, build_schema(records))
    a = fit_tree(matrix, TreeParams(criterion=GAIN_RATIO, prune=True))
    b = fit_tree(matrix, TreeParams(criterion=GAIN_RATIO, prune=True))
    assert a.root == b.root


def test_max_depth_limits_tree():
    records = binary_item_dataset(100, seed=7)
    matrix = encode(records, build_schema(records))
    model = fit_tree(matrix, TreeParams(criterion=GINI, max_depth=2, min_leaf=1))
    assert model.depth() <= 2


def test_leaf_probability_is_laplace_smoothed():
    node = TreeNode(counts=(5, 0))
    schema = tiny_schema(False)
    from screenlab.tree import TreeModel

    model = TreeModel(root=node, params=TreeParams(), schema=schema,
                      positive_class="Yes", negative_class="No")
    label, prob = predict_tree(model, np.zeros(2))
    assert label == "Yes"
    assert prob == pytest.approx(6 / 7)


def test_leaf_tie_goes_to_positive_class():
    node = TreeNode(counts=(3, 3))
    schema = tiny_schema(False)
    from screenlab.tree import TreeModel

    model = TreeModel(root=node, params=TreeParams(), schema=schema,
                      positive_class="Yes", negative_class="No")
    assert predict_tree(model, np.zeros(2))[0] == "Yes"


def test_predict_rejects_wrong_width():
    records = binary_item_dataset(30, seed=8)
    matrix = encode(records, build_schema(records))
    model = fit_tree(matrix, TreeParams())
    with pytest.raises(ValidationError):
        predict_tree(model, np.zeros(matrix.p + 1))


def test_categorical_route_unknown_to_default_child():
    rule = SplitRule(
        column=2, kind="categorical", group="g",
        member_columns=(2, 3, 4), categories=("a", "b", "c"), default_child=1,
    )
    row = np.zeros(5)
    assert rule.route(row) == 1  # no member set -> majority child
    row[3] = 1.0
    assert rule.route(row) == 1
    row[3] = 0.0
    row[4] = 1.0
    assert rule.route(row) == 2


def test_c45_splits_categorical_groups_multiway():
    rng = np.random.default_rng(3)
    records = []
    for _ in range(120):
        eth = ("Asian", "Black", "Mixed")[int(rng.integers(0, 3))]
        # ethnicity drives items so the group is informative
        rate = {"Asian": 0.9, "Black": 0.1, "Mixed": 0.5}[eth]
        items = [int(v) for v in rng.random(10) < rate]
        records.append(make_record(items, ethnicity=eth))
    matrix = encode(records, build_schema(records))
    model = fit_tree(matrix, TreeParams(criterion=GAIN_RATIO, min_leaf=1))

    def find_categorical(node):
        if node.is_leaf:
            return None
        if node.rule.kind == "categorical":
            return node.rule
        for child in node.children:
            found = find_categorical(child)
            if found:
                return found
        return None

    rule = find_categorical(model.root)
    assert rule is not None
    assert rule.group == "ethnicity"
    assert len(rule.member_columns) == 3


def test_pruning_collapses_noise_splits():
    # labels nearly constant; any split is noise and should be pruned away
    rng = np.random.default_rng(9)
    records = []
    for _ in range(60):
        items = [1] * 5 + [int(v) for v in rng.integers(0, 2, size=5)]
        records.append(make_record(items, age_months=int(rng.integers(12, 37))))
    matrix = encode(records, build_schema(records))
    grown = fit_tree(matrix, TreeParams(criterion=GAIN_RATIO, prune=False, min_leaf=1))
    pruned = fit_tree(matrix, TreeParams(criterion=GAIN_RATIO, prune=True, min_leaf=1))
    assert pruned.node_count() <= grown.node_count()


def test_pruning_never_increases_pessimistic_error():
    rng = np.random.default_rng(10)
    records = binary_item_dataset(100, seed=11)
    matrix = encode(records, build_schema(records))
    grown = fit_tree(matrix, TreeParams(criterion=GAIN_RATIO, prune=False, min_leaf=1))
    cf = 0.25
    before = pessimistic_errors(grown.root, cf)
    after = pessimistic_errors(prune_tree(grown.root, cf), cf)
    assert after <= before + 1e-12


def test_pure_node_becomes_leaf_even_with_depth_budget():
    records = [make_record([1] * 10) for _ in range(5)]
    matrix = encode(records, build_schema(records))
    model = fit_tree(matrix, TreeParams(criterion=GINI))
    assert model.root.is_leaf
    assert model.root.counts == (5, 0)


def test_order_preserving_category_rename_keeps_predictions():
    rng = np.random.default_rng(12)
    base, renamed = [], []
    rename = {"Asian": "AA-Asian", "Black": "BB-Black", "Mixed": "CC-Mixed"}
    for _ in range(80):
        eth = ("Asian", "Black", "Mixed")[int(rng.integers(0, 3))]
        items = [int(v) for v in rng.integers(0, 2, size=10)]
        age = int(rng.integers(12, 37))
        base.append(make_record(items, ethnicity=eth, age_months=age))
        renamed.append(make_record(items, ethnicity=rename[eth], age_months=age))
    m1 = encode(base, build_schema(base))
    m2 = encode(renamed, build_schema(renamed))
    t1 = fit_tree(m1, TreeParams(criterion=GAIN_RATIO, min_leaf=1))
    t2 = fit_tree(m2, TreeParams(criterion=GAIN_RATIO, min_leaf=1))
    for r1, r2 in zip(m1.rows, m2.rows):
        assert predict_tree(t1, r1) == predict_tree(t2, r2)


def test_mtry_requires_rng_and_bounds():
    records = binary_item_dataset(30, seed=13)
    matrix = encode(records, build_schema(records))
    with pytest.raises(ValidationError):
        fit_tree(matrix, TreeParams(), mtry=3)
    with pytest.raises(ValidationError):
        fit_tree(matrix, TreeParams(), mtry=0, rng=np.random.default_rng(0))
    model = fit_tree(matrix, TreeParams(min_leaf=1), mtry=3,
                     rng=np.random.default_rng(0))
    assert model.node_count() >= 1
