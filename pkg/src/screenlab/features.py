"""Feature encoding and train/test splitting.

Records are encoded into a fixed-order numeric matrix: the ten item scores,
then sex/jaundice/family-ASD as binaries, age in months as a numeric column,
then full one-hot groups for ethnicity and respondent (categories sorted).
The questionnaire total score is never encoded: the label is derived from it,
so including it would leak the answer into the predictors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .records import POSITIVE_LABEL, ScreeningRecord, ValidationError

BINARY = "binary"
NUMERIC = "numeric"
ONEHOT = "onehot"

ONEHOT_GROUPS = ("ethnicity", "respondent")


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # binary | numeric | onehot
    group: str | None = None  # one-hot group this column belongs to
    category: str | None = None  # category the one-hot column encodes


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered column layout plus the category pools it was fitted on."""

    columns: tuple[Column, ...]

    @property
    def n_columns(self) -> int:
        return len(self.columns)

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def group_members(self, group: str) -> list[int]:
        """Column indices of one one-hot group, in schema order."""
        return [i for i, c in enumerate(self.columns) if c.group == group]

    @property
    def groups(self) -> tuple[str, ...]:
        seen = []
        for c in self.columns:
            if c.group is not None and c.group not in seen:
                seen.append(c.group)
        return tuple(seen)

    def categories(self, group: str) -> list[str]:
        return [c.category for c in self.columns if c.group == group]


@dataclass(frozen=True)
class FeatureMatrix:
    """Encoded predictors with labels; the shared trainer input."""

    schema: FeatureSchema
    rows: np.ndarray  # (n, p) float64
    labels: tuple[str, ...]
    positive_class: str = POSITIVE_LABEL

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", tuple(self.labels))
        if rows.ndim != 2:
            raise ValidationError(f"rows must be 2-d, got shape {rows.shape}")
        if rows.shape[0] != len(self.labels):
            raise ValidationError(
                f"{rows.shape[0]} rows but {len(self.labels)} labels"
            )
        if rows.shape[1] != self.schema.n_columns:
            raise ValidationError(
                f"{rows.shape[1]} columns but schema has {self.schema.n_columns}"
            )
        if not np.all(np.isfinite(rows)):
            raise ValidationError("feature matrix contains non-finite entries")

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def p(self) -> int:
        return self.rows.shape[1]

    def y(self) -> np.ndarray:
        """Labels as 1 (positive class) / 0."""
        return np.fromiter(
            (1 if l == self.positive_class else 0 for l in self.labels),
            dtype=np.int64, count=self.n,
        )

    def select(self, indices) -> "FeatureMatrix":
        indices = np.asarray(indices, dtype=int)
        return FeatureMatrix(
            schema=self.schema,
            rows=self.rows[indices],
            labels=tuple(self.labels[i] for i in indices),
            positive_class=self.positive_class,
        )


def build_schema(records: list[ScreeningRecord]) -> FeatureSchema:
    """Schema over the categories observed in the records, in the fixed
    column order used everywhere."""
    if not records:
        raise ValidationError("cannot build a schema from no records")
    cols = [Column(f"a{i}", BINARY) for i in range(1, 11)]
    cols.append(Column("sex", BINARY))
    cols.append(Column("jaundice", BINARY))
    cols.append(Column("family_asd", BINARY))
    cols.append(Column("age_months", NUMERIC))
    pools = {
        "ethnicity": sorted({r.ethnicity for r in records}),
        "respondent": sorted({r.respondent for r in records}),
    }
    for group in ONEHOT_GROUPS:
        for category in pools[group]:
            cols.append(Column(f"{group}={category}", ONEHOT, group=group, category=category))
    return FeatureSchema(columns=tuple(cols))


def encode_record(record: ScreeningRecord, schema: FeatureSchema):
    """Encode one record against a fitted schema.

    Returns (row, warnings). A category the schema has never seen encodes as
    an all-zero one-hot group and produces a warning instead of an error, so
    a screening service keeps answering on new ethnicity strings.
    """
    row = np.zeros(schema.n_columns)
    warnings = []
    values = {
        "sex": 1.0 if record.sex == "Male" else 0.0,
        "jaundice": 1.0 if record.jaundice else 0.0,
        "family_asd": 1.0 if record.family_asd else 0.0,
        "age_months": float(record.age_months),
    }
    group_values = {"ethnicity": record.ethnicity, "respondent": record.respondent}
    matched = dict.fromkeys(ONEHOT_GROUPS, False)
    for j, col in enumerate(schema.columns):
        if col.kind == ONEHOT:
            if group_values[col.group] == col.category:
                row[j] = 1.0
                matched[col.group] = True
        elif col.name.startswith("a") and col.name[1:].isdigit():
            row[j] = float(record.items[int(col.name[1:]) - 1])
        else:
            row[j] = values[col.name]
    for group, hit in matched.items():
        if not hit:
            warnings.append(
                f"unknown {group} category {group_values[group]!r}; "
                "encoded as none of the known categories"
            )
    return row, warnings


def encode(records: list[ScreeningRecord], schema: FeatureSchema | None = None) -> FeatureMatrix:
    """Encode records into a FeatureMatrix, fitting the schema from the
    records when none is given."""
    if not records:
        raise ValidationError("cannot encode an empty record list")
    if schema is None:
        schema = build_schema(records)
    rows = np.empty((len(records), schema.n_columns))
    for i, rec in enumerate(records):
        rows[i], _ = encode_record(rec, schema)
    return FeatureMatrix(
        schema=schema,
        rows=rows,
        labels=tuple(r.label for r in records),
    )


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class SplitSpec:
    """Train/test split parameters. Stratified by default so the held-out
    class mix tracks the dataset's."""

    train_fraction: float = 0.7
    seed: int = 20201054
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError(
                f"train_fraction must be in (0, 1), got {self.train_fraction}"
            )


def split_indices(labels, spec: SplitSpec):
    """Disjoint (train, test) row indices.

    Unstratified: train size is round-half-up of fraction * n. Stratified:
    each class contributes ceil(fraction * class size) rows to train, which
    keeps per-class proportions within one row of the overall proportion
    and reproduces a 739/315 split on the 1054-row reference file.
    """
    labels = tuple(labels)
    n = len(labels)
    if n < 2:
        raise ValidationError("need at least two rows to split")
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    if not spec.stratified:
        order = rng.permutation(n)
        k = round_half_up(spec.train_fraction * n)
        k = min(max(k, 1), n - 1)
        return np.sort(order[:k]), np.sort(order[k:])
    classes = sorted(set(labels))
    per_class = {c: [i for i, l in enumerate(labels) if l == c] for c in classes}
    if any(len(v) == 0 for v in per_class.values()):
        raise ValidationError("stratified split requires every class non-empty")
    train, test = [], []
    for c in classes:
        idx = np.array(per_class[c], dtype=int)
        idx = idx[rng.permutation(len(idx))]
        k = math.ceil(spec.train_fraction * len(idx))
        k = min(k, len(idx))
        train.extend(idx[:k])
        test.extend(idx[k:])
    if not test:  # tiny inputs can round every row into train
        test.append(train.pop())
    return np.sort(np.array(train, dtype=int)), np.sort(np.array(test, dtype=int))


def split(matrix: FeatureMatrix, spec: SplitSpec):
    """Split a FeatureMatrix into (train, test) matrices per the SplitSpec."""
    train_idx, test_idx = split_indices(matrix.labels, spec)
    return matrix.select(train_idx), matrix.select(test_idx)
