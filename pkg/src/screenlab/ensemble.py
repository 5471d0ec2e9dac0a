"""Bagged CART and Random Forest.

Both are collections of CART trees fit on bootstrap resamples; a forest
additionally redraws a random column subset at every split search (mtry).
Per-tree randomness comes from seed sequences spawned off the master seed,
so results do not depend on the order trees are built in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .features import FeatureMatrix, FeatureSchema
from .records import ValidationError
from .tree import GINI, TreeModel, TreeParams, fit_tree, predict_tree

BAGGING_TREES = 50
FOREST_TREES = 500


def default_mtry(p: int) -> int:
    """Forest convention: floor(sqrt(p)) columns per split search."""
    return max(1, int(np.sqrt(p)))


@dataclass(frozen=True)
class EnsembleParams:
    n_trees: int = BAGGING_TREES
    mtry: int | None = None  # None = bagging, set = random forest
    seed: int = 0
    base: TreeParams = field(default_factory=lambda: TreeParams(criterion=GINI, min_leaf=1, prune=False))

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValidationError("n_trees must be at least 1")
        if self.mtry is not None and self.mtry < 1:
            raise ValidationError("mtry must be at least 1 when given")


@dataclass
class EnsembleModel:
    trees: tuple[TreeModel, ...]
    params: EnsembleParams
    schema: FeatureSchema
    positive_class: str
    negative_class: str
    oob_indices: tuple[tuple[int, ...], ...]  # per tree, rows left out of its bootstrap

    @property
    def n_trees(self) -> int:
        return len(self.trees)


def bootstrap_sample(n: int, seed) -> np.ndarray:
    """n draws with replacement from 0..n-1, deterministic given the seed
    (an integer or an already-seeded generator)."""
    if n < 1:
        raise ValidationError("bootstrap_sample needs n >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.Generator(np.random.PCG64(seed))
    return rng.integers(0, n, size=n)


def fit_ensemble(train: FeatureMatrix, params: EnsembleParams,
                 sampler=bootstrap_sample) -> EnsembleModel:
    """Fit n_trees CART trees, each on its own bootstrap resample.

    `sampler(n, rng) -> indices` exists as a seam for tests (identity
    sampling reduces a 1-tree ensemble to a plain CART fit).
    """
    if train.n == 0:
        raise ValidationError("cannot fit an ensemble on an empty training set")
    if params.mtry is not None and params.mtry > train.p:
        raise ValidationError(f"mtry {params.mtry} exceeds the {train.p} available columns")
    children = np.random.SeedSequence(params.seed).spawn(params.n_trees)
    trees = []
    oob = []
    all_rows = np.arange(train.n)
    for child in children:
        rng = np.random.Generator(np.random.PCG64(child))
        sample = np.asarray(sampler(train.n, rng))
        in_bag = np.zeros(train.n, dtype=bool)
        in_bag[sample] = True
        oob.append(tuple(int(i) for i in all_rows[~in_bag]))
        boot = train.select(sample)
        trees.append(fit_tree(boot, params.base, mtry=params.mtry, rng=rng))
    first = trees[0]
    return EnsembleModel(
        trees=tuple(trees),
        params=params,
        schema=train.schema,
        positive_class=first.positive_class,
        negative_class=first.negative_class,
        oob_indices=tuple(oob),
    )


def predict_ensemble(model: EnsembleModel, row) -> tuple[str, float]:
    """Majority vote over the trees; probability is the fraction voting
    positive; a tie goes to the positive class (screening favors
    sensitivity over specificity)."""
    votes = sum(
        1 for tree in model.trees
        if predict_tree(tree, row)[0] == model.positive_class
    )
    fraction = votes / model.n_trees
    label = model.positive_class if 2 * votes >= model.n_trees else model.negative_class
    return label, fraction


def predict_ensemble_many(model: EnsembleModel, rows) -> list[tuple[str, float]]:
    return [predict_ensemble(model, r) for r in np.asarray(rows, dtype=float)]


def oob_accuracy(model: EnsembleModel, train: FeatureMatrix) -> float:
    """Out-of-bag accuracy: each row is voted on only by trees whose
    bootstrap left it out; rows seen by every tree are skipped."""
    if train.n == 0:
        raise ValidationError("empty training matrix")
    pos_votes = np.zeros(train.n, dtype=int)
    total_votes = np.zeros(train.n, dtype=int)
    for tree, left_out in zip(model.trees, model.oob_indices):
        for i in left_out:
            label, _ = predict_tree(tree, train.rows[i])
            total_votes[i] += 1
            if label == model.positive_class:
                pos_votes[i] += 1
    usable = total_votes > 0
    if not usable.any():
        raise ValidationError("no out-of-bag rows; cannot estimate accuracy")
    predicted_pos = 2 * pos_votes[usable] >= total_votes[usable]
    actual_pos = np.array(
        [lab == model.positive_class for lab in train.labels], dtype=bool
    )[usable]
    return float(np.mean(predicted_pos == actual_pos))
