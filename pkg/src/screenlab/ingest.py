"""CSV ingestion for the toddler screening dataset.

Public copies of the dataset disagree on header spelling (some even carry a
trailing space in the class column), so the logical-field-to-column mapping
is configuration, not code. The defaults below match the widely mirrored
Kaggle toddler file; override them with a key=value config file when a copy
differs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

from .records import (
    FieldError,
    ScreeningRecord,
    ValidationError,
    derive_label,
    parse_bool,
    parse_sex,
    validate_record,
)

LOGICAL_FIELDS = tuple(
    [f"a{i}" for i in range(1, 11)]
    + ["age_months", "qchat_score", "sex", "ethnicity",
       "jaundice", "family_asd", "respondent", "label"]
)

DEFAULT_HEADERS = {
    **{f"a{i}": f"A{i}" for i in range(1, 11)},
    "age_months": "Age_Mons",
    "qchat_score": "Qchat-10-Score",
    "sex": "Sex",
    "ethnicity": "Ethnicity",
    "jaundice": "Jaundice",
    "family_asd": "Family_mem_with_ASD",
    "respondent": "Who completed the test",
    "label": "Class/ASD Traits",
}


class IngestError(ValidationError):
    """A file-level problem: missing column, unreadable row in strict mode."""


@dataclass(frozen=True)
class HeaderMap:
    """Mapping from logical record fields to CSV column names."""

    columns: dict = field(default_factory=lambda: dict(DEFAULT_HEADERS))

    def __post_init__(self):
        missing = [f for f in LOGICAL_FIELDS if f not in self.columns]
        if missing:
            raise IngestError(f"header map missing logical fields: {', '.join(missing)}")
        names = [self.columns[f] for f in LOGICAL_FIELDS]
        if len(set(names)) != len(names):
            raise IngestError("header map must map logical fields to distinct column names")

    @classmethod
    def from_config(cls, path) -> "HeaderMap":
        """Read `logical_field=Column Name` lines; '#' starts a comment.
        Unlisted fields keep their defaults."""
        columns = dict(DEFAULT_HEADERS)
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise IngestError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, value = line.split("=", 1)
                key = key.strip()
                if key not in LOGICAL_FIELDS:
                    raise IngestError(f"{path}:{lineno}: unknown logical field {key!r}")
                columns[key] = value.strip()
        return cls(columns=columns)


@dataclass
class RowIssue:
    row: int  # 1-based data-row index (header not counted)
    column: str
    message: str

    def __str__(self):
        return f"row {self.row}, column {self.column!r}: {self.message}"


@dataclass
class IngestResult:
    records: list
    issues: list

    @property
    def n_quarantined(self) -> int:
        return len({issue.row for issue in self.issues})


def _parse_binary(field_name, text):
    value = text.strip()
    if value in ("0", "1"):
        return int(value)
    raise FieldError(field_name, f"expected 0 or 1, got {text!r}")


def _parse_int(field_name, text):
    value = text.strip()
    if value.lstrip("+-").isdigit():
        return int(value)
    raise FieldError(field_name, f"expected an integer, got {text!r}")


def _parse_label(text):
    value = text.strip().lower()
    if value in ("yes", "asd traits"):
        return "Yes"
    if value in ("no", "no asd traits"):
        return "No"
    raise FieldError("label", f"expected Yes or No, got {text!r}")


def _record_from_row(row: dict, header_map: HeaderMap) -> ScreeningRecord:
    cols = header_map.columns

    def cell(logical):
        return row[cols[logical]]

    items = tuple(_parse_binary(f"a{i}", cell(f"a{i}")) for i in range(1, 11))
    text = cell("ethnicity").strip()
    if not text:
        raise FieldError("ethnicity", "empty cell")
    respondent = cell("respondent").strip()
    if not respondent:
        raise FieldError("respondent", "empty cell")
    return ScreeningRecord(
        items=items,
        age_months=_parse_int("age_months", cell("age_months")),
        sex=parse_sex(cell("sex")),
        ethnicity=text,
        jaundice=parse_bool("jaundice", cell("jaundice")),
        family_asd=parse_bool("family_asd", cell("family_asd")),
        respondent=respondent,
        qchat_score=_parse_int("qchat_score", cell("qchat_score")),
        label=_parse_label(cell("label")),
    )


def read_csv(path, header_map: HeaderMap | None = None, strict: bool = False) -> IngestResult:
    """Read a screening CSV into validated records.

    Every malformed or inconsistent row yields a located RowIssue and is
    quarantined (dropped from the record list); in strict mode the first
    issue aborts instead. Columns beyond the header map are ignored.
    """
    header_map = header_map or HeaderMap()
    cols = header_map.columns
    records, issues = [], []
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        positions = {}
        for logical in LOGICAL_FIELDS:
            wanted = cols[logical].strip()
            if wanted not in header:
                raise IngestError(
                    f"{path}: column {cols[logical]!r} (for field {logical!r}) not in header"
                )
            positions[cols[logical]] = header.index(wanted)
        for row_index, cells in enumerate(reader, start=1):
            if not any(c.strip() for c in cells):
                continue
            try:
                row = {name: cells[pos] for name, pos in positions.items()}
            except IndexError:
                issue = RowIssue(row_index, "<row>", f"expected {len(header)} cells, got {len(cells)}")
                if strict:
                    raise IngestError(f"{path}: {issue}") from None
                issues.append(issue)
                continue
            try:
                record = _record_from_row(row, header_map)
            except FieldError as exc:
                issue = RowIssue(row_index, cols.get(exc.field, exc.field), exc.message)
                if strict:
                    raise IngestError(f"{path}: {issue}") from None
                issues.append(issue)
                continue
            problems = validate_record(record)
            if problems:
                issue = RowIssue(row_index, cols["qchat_score"], "; ".join(problems))
                if strict:
                    raise IngestError(f"{path}: {issue}")
                issues.append(issue)
                continue
            records.append(record)
    return IngestResult(records=records, issues=issues)


def write_csv(path, records, header_map: HeaderMap | None = None) -> None:
    """Write records in the same CSV dialect read_csv accepts, so a write
    followed by a read round-trips."""
    header_map = header_map or HeaderMap()
    cols = header_map.columns
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([cols[f] for f in LOGICAL_FIELDS])
        for rec in records:
            row = [str(v) for v in rec.items]
            row += [
                str(rec.age_months),
                str(rec.qchat_score),
                rec.sex,
                rec.ethnicity,
                "yes" if rec.jaundice else "no",
                "yes" if rec.family_asd else "no",
                rec.respondent,
                rec.label,
            ]
            writer.writerow(row)


@dataclass
class ConsistencyReport:
    n_records: int = 0
    score_sum_mismatches: int = 0
    label_rule_mismatches: int = 0
    age_out_of_range: int = 0
    score_out_of_range: int = 0

    @property
    def clean(self) -> bool:
        return (self.score_sum_mismatches == self.label_rule_mismatches
                == self.age_out_of_range == self.score_out_of_range == 0)

    def __str__(self):
        return (
            f"records: {self.n_records}\n"
            f"score/item-sum mismatches: {self.score_sum_mismatches}\n"
            f"label-rule mismatches: {self.label_rule_mismatches}\n"
            f"scores out of range: {self.score_out_of_range}\n"
            f"ages out of range: {self.age_out_of_range}"
        )


def validate_consistency(records) -> ConsistencyReport:
    """Count invariant violations across records without mutating them."""
    report = ConsistencyReport(n_records=len(records))
    for rec in records:
        if rec.qchat_score != sum(rec.items):
            report.score_sum_mismatches += 1
        if not 0 <= rec.qchat_score <= 10:
            report.score_out_of_range += 1
        elif rec.label != derive_label(rec.qchat_score):
            report.label_rule_mismatches += 1
        if rec.age_months < 1:
            report.age_out_of_range += 1
    return report
