"""Model serialization: a versioned, human-readable JSON document that
carries the model kind, the feature schema it was trained against, and
every weight/threshold at full round-trip precision (floats are written
with Python's shortest exact representation, so load restores bits).

Out-of-bag bookkeeping is deliberately not persisted: it indexes into the
training data, which a shipped model file should not describe.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .ensemble import EnsembleModel, EnsembleParams
from .features import Column, FeatureSchema
from .mlp import MlpModel, Normalization
from .tree import GAIN_RATIO, GINI, SplitRule, TreeModel, TreeNode, TreeParams

FORMAT = "screenlab-model/1"

KIND_CART = "cart"
KIND_C45 = "c45"
KIND_BAGCART = "bagcart"
KIND_RF = "rf"
KIND_MLP = "mlp"


class PersistError(ValueError):
    pass


def model_kind(model) -> str:
    if isinstance(model, TreeModel):
        return KIND_C45 if model.params.criterion == GAIN_RATIO else KIND_CART
    if isinstance(model, EnsembleModel):
        return KIND_RF if model.params.mtry is not None else KIND_BAGCART
    if isinstance(model, MlpModel):
        return KIND_MLP
    raise PersistError(f"cannot persist a {type(model).__name__}")


def _schema_to_obj(schema: FeatureSchema) -> list[dict]:
    return [
        {"name": c.name, "kind": c.kind, "group": c.group, "category": c.category}
        for c in schema.columns
    ]


def _schema_from_obj(obj) -> FeatureSchema:
    columns = []
    for entry in obj:
        columns.append(Column(
            name=entry["name"], kind=entry["kind"],
            group=entry.get("group"), category=entry.get("category"),
        ))
    return FeatureSchema(columns=tuple(columns))


def _tree_params_to_obj(params: TreeParams) -> dict:
    return {
        "criterion": params.criterion,
        "min_leaf": params.min_leaf,
        "max_depth": params.max_depth,
        "prune": params.prune,
        "prune_confidence": params.prune_confidence,
    }


def _tree_params_from_obj(obj) -> TreeParams:
    return TreeParams(
        criterion=obj["criterion"], min_leaf=obj["min_leaf"],
        max_depth=obj["max_depth"], prune=obj["prune"],
        prune_confidence=obj["prune_confidence"],
    )


def _node_to_obj(node: TreeNode) -> dict:
    obj = {"counts": list(node.counts)}
    if node.rule is not None:
        rule = {"column": node.rule.column, "kind": node.rule.kind}
        if node.rule.kind == "threshold":
            rule["threshold"] = node.rule.threshold
        else:
            rule["group"] = node.rule.group
            rule["member_columns"] = list(node.rule.member_columns)
            rule["categories"] = list(node.rule.categories)
            rule["default_child"] = node.rule.default_child
        obj["rule"] = rule
        obj["children"] = [_node_to_obj(c) for c in node.children]
    return obj


def _node_from_obj(obj) -> TreeNode:
    counts = (int(obj["counts"][0]), int(obj["counts"][1]))
    if "rule" not in obj:
        return TreeNode(counts=counts)
    r = obj["rule"]
    if r["kind"] == "threshold":
        rule = SplitRule(column=r["column"], kind="threshold", threshold=r["threshold"])
    elif r["kind"] == "categorical":
        rule = SplitRule(
            column=r["column"], kind="categorical", group=r["group"],
            member_columns=tuple(r["member_columns"]),
            categories=tuple(r["categories"]),
            default_child=r["default_child"],
        )
    else:
        raise PersistError(f"unknown split kind {r['kind']!r}")
    children = tuple(_node_from_obj(c) for c in obj["children"])
    return TreeNode(counts=counts, rule=rule, children=children)


def _model_to_obj(model) -> dict:
    kind = model_kind(model)
    if isinstance(model, TreeModel):
        body = {
            "params": _tree_params_to_obj(model.params),
            "root": _node_to_obj(model.root),
        }
    elif isinstance(model, EnsembleModel):
        body = {
            "params": {
                "n_trees": model.params.n_trees,
                "mtry": model.params.mtry,
                "seed": model.params.seed,
                "base": _tree_params_to_obj(model.params.base),
            },
            "trees": [_node_to_obj(t.root) for t in model.trees],
        }
    else:
        body = {
            "layer_sizes": list(model.layer_sizes),
            "weights": [w.tolist() for w in model.weights],
            "biases": [b.tolist() for b in model.biases],
            "normalization": {
                "mins": list(model.normalization.mins),
                "maxs": list(model.normalization.maxs),
            },
            "converged": model.converged,
            "final_error": model.final_error,
            "epochs_run": model.epochs_run,
        }
    return {
        "format": FORMAT,
        "kind": kind,
        "positive_class": model.positive_class,
        "negative_class": model.negative_class,
        "schema": _schema_to_obj(model.schema),
        "model": body,
    }


def save(model, path) -> None:
    """Write the model (with its embedded schema) as versioned JSON."""
    document = json.dumps(_model_to_obj(model), indent=2) + "\n"
    Path(path).write_text(document, encoding="utf-8")


def _build_tree(obj, schema, positive, negative) -> TreeModel:
    return TreeModel(
        root=_node_from_obj(obj["root"]),
        params=_tree_params_from_obj(obj["params"]),
        schema=schema,
        positive_class=positive,
        negative_class=negative,
    )


def load(path, expected_schema: FeatureSchema | None = None):
    """Read a model document; returns (model, schema).

    When `expected_schema` is given, the stored schema must match it
    column for column; the first differing column is named in the error.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as err:
        raise PersistError(
            f"{path}: not a valid model document "
            f"(line {err.lineno}, column {err.colno}: {err.msg})"
        ) from err
    found = obj.get("format")
    if found != FORMAT:
        raise PersistError(f"{path}: format {found!r} not supported (expected {FORMAT!r})")
    kind = obj.get("kind")
    schema = _schema_from_obj(obj["schema"])
    if expected_schema is not None:
        check_schema(schema, expected_schema)
    positive = obj["positive_class"]
    negative = obj["negative_class"]
    body = obj["model"]
    if kind in (KIND_CART, KIND_C45):
        model = _build_tree(body, schema, positive, negative)
    elif kind in (KIND_BAGCART, KIND_RF):
        base = _tree_params_from_obj(body["params"]["base"])
        params = EnsembleParams(
            n_trees=body["params"]["n_trees"],
            mtry=body["params"]["mtry"],
            seed=body["params"]["seed"],
            base=base,
        )
        trees = tuple(
            TreeModel(root=_node_from_obj(t), params=base, schema=schema,
                      positive_class=positive, negative_class=negative)
            for t in body["trees"]
        )
        model = EnsembleModel(
            trees=trees, params=params, schema=schema,
            positive_class=positive, negative_class=negative,
            oob_indices=tuple(() for _ in trees),
        )
    elif kind == KIND_MLP:
        model = MlpModel(
            weights=tuple(np.array(w, dtype=float) for w in body["weights"]),
            biases=tuple(np.array(b, dtype=float) for b in body["biases"]),
            normalization=Normalization(
                mins=tuple(body["normalization"]["mins"]),
                maxs=tuple(body["normalization"]["maxs"]),
            ),
            schema=schema,
            positive_class=positive,
            negative_class=negative,
            converged=body["converged"],
            final_error=body["final_error"],
            epochs_run=body["epochs_run"],
        )
    else:
        raise PersistError(f"{path}: unknown model kind {kind!r}")
    return model, schema


def check_schema(stored: FeatureSchema, expected: FeatureSchema) -> None:
    for i, (s, e) in enumerate(zip(stored.columns, expected.columns)):
        if s != e:
            raise PersistError(
                f"schema mismatch at column {i}: stored {s.name!r} "
                f"({s.kind}), expected {e.name!r} ({e.kind})"
            )
    if stored.n_columns != expected.n_columns:
        raise PersistError(
            f"schema mismatch: stored {stored.n_columns} columns, "
            f"expected {expected.n_columns}"
        )


def model_digest(path) -> str:
    """Content hash of a model file, used as a stable model identifier."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]
