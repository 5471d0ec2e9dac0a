import numpy as np
import pytest

from screenlab import (
    EnsembleModel,
    EnsembleParams,
    TreeParams,
    ValidationError,
    bootstrap_sample,
    build_schema,
    default_mtry,
    encode,
    fit_ensemble,
    fit_tree,
    oob_accuracy,
    predict_ensemble,
    predict_tree,
)
from screenlab.tree import GINI

from helpers import make_record


def test_bootstrap_sample_deterministic():
    a = bootstrap_sample(50, 7)
    b = bootstrap_sample(50, 7)
    assert np.array_equal(a, b)
    assert len(a) == 50
    assert a.min() >= 0 and a.max() < 50


def test_bootstrap_sample_single_row():
    assert list(bootstrap_sample(1, 0)) == [0]


def test_bootstrap_sample_rejects_empty():
    with pytest.raises(ValidationError):
        bootstrap_sample(0, 0)


def test_bootstrap_unique_fraction_near_one_minus_inv_e():
    # E[fraction of distinct rows] -> 1 - 1/e for large n
    n = 10000
    fractions = [len(set(bootstrap_sample(n, seed).tolist())) / n for seed in range(20)]
    assert abs(np.mean(fractions) - (1 - 1 / np.e)) < 0.02


def test_default_mtry():
    assert default_mtry(19) == 4
    assert default_mtry(16) == 4
    assert default_mtry(1) == 1


def test_params_validation():
    with pytest.raises(ValidationError):
        EnsembleParams(n_trees=0)
    with pytest.raises(ValidationError):
        EnsembleParams(mtry=0)


def test_mtry_cannot_exceed_column_count(synth_matrix):
    with pytest.raises(ValidationError):
        fit_ensemble(synth_matrix, EnsembleParams(n_trees=2, mtry=synth_matrix.p + 1))


def identity_sampler(n, rng):
    return np.arange(n)


def test_single_tree_identity_sampler_equals_plain_cart(synth_matrix):
    ens = fit_ensemble(synth_matrix, EnsembleParams(n_trees=1, seed=3),
                       sampler=identity_sampler)
    solo = fit_tree(synth_matrix, TreeParams(criterion=GINI, min_leaf=1, prune=False))
    assert ens.trees[0].root == solo.root
    for row in synth_matrix.rows[:50]:
        assert predict_ensemble(ens, row)[0] == predict_tree(solo, row)[0]


def test_fit_deterministic(synth_matrix):
    a = fit_ensemble(synth_matrix, EnsembleParams(n_trees=9, seed=11))
    b = fit_ensemble(synth_matrix, EnsembleParams(n_trees=9, seed=11))
    assert [t.root for t in a.trees] == [t.root for t in b.trees]
    assert a.oob_indices == b.oob_indices


def test_seed_changes_trees(synth_matrix):
    a = fit_ensemble(synth_matrix, EnsembleParams(n_trees=5, seed=1))
    b = fit_ensemble(synth_matrix, EnsembleParams(n_trees=5, seed=2))
    assert [t.root for t in a.trees] != [t.root for t in b.trees]


def test_trees_are_order_independent(synth_matrix):
    """Each tree depends only on its own spawned seed, so fitting the
    ensemble and fitting tree k in isolation give identical trees."""
    params = EnsembleParams(n_trees=6, seed=42, mtry=4)
    ens = fit_ensemble(synth_matrix, params)
    children = np.random.SeedSequence(params.seed).spawn(params.n_trees)
    for k in (5, 2, 0):  # deliberately out of order
        rng = np.random.Generator(np.random.PCG64(children[k]))
        sample = bootstrap_sample(synth_matrix.n, rng)
        boot = synth_matrix.select(sample)
        solo = fit_tree(boot, params.base, mtry=params.mtry, rng=rng)
        assert solo.root == ens.trees[k].root


def test_vote_fraction_and_tie_break():
    schema_records = [make_record([1] * 10), make_record([0] * 10)]
    matrix = encode(schema_records, build_schema(schema_records))

    def leaf(counts):
        from screenlab.tree import TreeModel, TreeNode

        return TreeModel(root=TreeNode(counts=counts), params=TreeParams(),
                         schema=matrix.schema, positive_class="Yes",
                         negative_class="No")

    yes, no = leaf((5, 0)), leaf((0, 5))
    model = EnsembleModel(
        trees=(yes, yes, yes, no), params=EnsembleParams(n_trees=4),
        schema=matrix.schema, positive_class="Yes", negative_class="No",
        oob_indices=((), (), (), ()),
    )
    label, fraction = predict_ensemble(model, matrix.rows[0])
    assert label == "Yes"
    assert fraction == pytest.approx(0.75)

    tied = EnsembleModel(
        trees=(yes, no), params=EnsembleParams(n_trees=2),
        schema=matrix.schema, positive_class="Yes", negative_class="No",
        oob_indices=((), ()),
    )
    label, fraction = predict_ensemble(tied, matrix.rows[0])
    assert label == "Yes"
    assert fraction == pytest.approx(0.5)


def test_oob_indices_complement_bootstrap(synth_matrix):
    params = EnsembleParams(n_trees=3, seed=5)
    model = fit_ensemble(synth_matrix, params)
    children = np.random.SeedSequence(5).spawn(3)
    for k, child in enumerate(children):
        rng = np.random.Generator(np.random.PCG64(child))
        sample = set(bootstrap_sample(synth_matrix.n, rng).tolist())
        expected = tuple(i for i in range(synth_matrix.n) if i not in sample)
        assert model.oob_indices[k] == expected


def test_oob_accuracy_high_on_learnable_data(synth_matrix):
    model = fit_ensemble(synth_matrix, EnsembleParams(n_trees=100, seed=0, mtry=4))
    assert oob_accuracy(model, synth_matrix) >= 0.98


def test_oob_accuracy_rejects_when_nothing_left_out(synth_matrix):
    model = fit_ensemble(synth_matrix, EnsembleParams(n_trees=1, seed=0),
                         sampler=identity_sampler)
    with pytest.raises(ValidationError):
        oob_accuracy(model, synth_matrix)


def test_forest_differs_from_bagging(synth_matrix):
    bag = fit_ensemble(synth_matrix, EnsembleParams(n_trees=5, seed=9))
    forest = fit_ensemble(synth_matrix, EnsembleParams(n_trees=5, seed=9, mtry=2))
    assert [t.root for t in bag.trees] != [t.root for t in forest.trees]
