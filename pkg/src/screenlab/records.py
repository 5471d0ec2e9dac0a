"""Screening records and Q-CHAT-10 scoring rules.

The ten questionnaire items are answered on a five-point scale and mapped
to binary concern scores. The total (0..10) determines the screening label:
more than 3 flags ASD traits.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

LIKERT_ANSWERS = ("Always", "Usually", "Sometimes", "Rarely", "Never")
SEXES = ("Male", "Female")
LABELS = ("Yes", "No")

POSITIVE_LABEL = "Yes"
NEGATIVE_LABEL = "No"
SCORE_THRESHOLD = 3  # label is Yes iff total score > 3

_LIKERT_BY_LOWER = {a.lower(): a for a in LIKERT_ANSWERS}

# Items 1-9 score 1 on the low-frequency answers; item 10 is reversed.
_CONCERN_ANSWERS_1_TO_9 = frozenset({"Sometimes", "Rarely", "Never"})
_CONCERN_ANSWERS_ITEM_10 = frozenset({"Always", "Usually", "Sometimes"})


class ValidationError(ValueError):
    """A value violates the screening-record domain rules."""


def parse_likert(text: str) -> str:
    """Canonicalize a Likert answer, case-insensitively. Rejects anything
    that is not one of the five admissible words."""
    try:
        return _LIKERT_BY_LOWER[text.strip().lower()]
    except (KeyError, AttributeError):
        raise ValidationError(
            f"not a Likert answer: {text!r} (expected one of {', '.join(LIKERT_ANSWERS)})"
        ) from None


def score_item(item_index: int, answer: str) -> int:
    """Binary concern score for one questionnaire item.

    Items 1-9 score 1 for Sometimes/Rarely/Never; item 10 scores 1 for
    Always/Usually/Sometimes.
    """
    if not 1 <= item_index <= 10:
        raise ValidationError(f"item index out of range: {item_index}")
    canonical = parse_likert(answer)
    concern = _CONCERN_ANSWERS_ITEM_10 if item_index == 10 else _CONCERN_ANSWERS_1_TO_9
    return 1 if canonical in concern else 0


def qchat_score(items) -> int:
    """Total score of the ten binary items."""
    items = tuple(items)
    if len(items) != 10 or any(v not in (0, 1) for v in items):
        raise ValidationError(f"expected ten binary items, got {items!r}")
    return int(sum(items))


def derive_label(score: int) -> str:
    """Screening label from the total score: Yes iff score > 3."""
    if not isinstance(score, int) or not 0 <= score <= 10:
        raise ValidationError(f"score out of range 0..10: {score!r}")
    return POSITIVE_LABEL if score > SCORE_THRESHOLD else NEGATIVE_LABEL


@dataclass(frozen=True)
class ScreeningRecord:
    """One toddler's questionnaire answers plus demographics and label.

    Field domains are enforced at construction. Cross-field consistency
    (score equals the item sum, label follows the score rule, age at least
    one month) is checked separately by :func:`validate_record` so that
    inconsistent rows read from a file can still be represented and
    reported.
    """

    items: tuple[int, ...]
    age_months: int
    sex: str
    ethnicity: str
    jaundice: bool
    family_asd: bool
    respondent: str
    qchat_score: int
    label: str

    def __post_init__(self):
        items = tuple(self.items)
        if len(items) != 10 or any(v not in (0, 1) for v in items):
            raise ValidationError(f"items must be ten binary scores, got {items!r}")
        object.__setattr__(self, "items", tuple(int(v) for v in items))
        if not isinstance(self.age_months, int) or isinstance(self.age_months, bool):
            raise ValidationError(f"age_months must be an integer, got {self.age_months!r}")
        if self.sex not in SEXES:
            raise ValidationError(f"sex must be one of {SEXES}, got {self.sex!r}")
        if not self.ethnicity:
            raise ValidationError("ethnicity must be non-empty")
        if not self.respondent:
            raise ValidationError("respondent must be non-empty")
        if not isinstance(self.qchat_score, int) or isinstance(self.qchat_score, bool):
            raise ValidationError(f"qchat_score must be an integer, got {self.qchat_score!r}")
        if self.label not in LABELS:
            raise ValidationError(f"label must be one of {LABELS}, got {self.label!r}")

    @classmethod
    def from_answers(cls, answers, *, age_months, sex, ethnicity, jaundice,
                     family_asd, respondent) -> "ScreeningRecord":
        """Build a record from ten Likert answers; the score and label are
        derived, never supplied."""
        answers = tuple(answers)
        if len(answers) != 10:
            raise ValidationError(f"expected ten answers, got {len(answers)}")
        items = tuple(score_item(i + 1, a) for i, a in enumerate(answers))
        score = qchat_score(items)
        return cls(
            items=items,
            age_months=age_months,
            sex=sex,
            ethnicity=ethnicity,
            jaundice=jaundice,
            family_asd=family_asd,
            respondent=respondent,
            qchat_score=score,
            label=derive_label(score),
        )

    @classmethod
    def from_items(cls, items, *, age_months, sex, ethnicity, jaundice,
                   family_asd, respondent) -> "ScreeningRecord":
        """Build a record from ten binary item scores; score and label derived."""
        score = qchat_score(items)
        return cls(
            items=tuple(items),
            age_months=age_months,
            sex=sex,
            ethnicity=ethnicity,
            jaundice=jaundice,
            family_asd=family_asd,
            respondent=respondent,
            qchat_score=score,
            label=derive_label(score),
        )


def validate_record(record: ScreeningRecord) -> list[str]:
    """Return the list of consistency violations for one record (empty when
    the record is internally consistent)."""
    problems = []
    if record.qchat_score != sum(record.items):
        problems.append(
            f"qchat_score {record.qchat_score} does not equal item sum {sum(record.items)}"
        )
    if not 0 <= record.qchat_score <= 10:
        problems.append(f"qchat_score out of range 0..10: {record.qchat_score}")
    elif record.label != derive_label(record.qchat_score):
        problems.append(
            f"label {record.label} contradicts score {record.qchat_score} "
            f"(rule: Yes iff score > {SCORE_THRESHOLD})"
        )
    if record.age_months < 1:
        problems.append(f"age_months must be at least 1, got {record.age_months}")
    return problems


class FieldError(ValidationError):
    """Validation failure attributable to a single named input field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


_ITEM_FIELDS = tuple(f"a{i}" for i in range(1, 11))
_BOOL_STRINGS = {"yes": True, "no": False, "true": True, "false": False, "y": True, "n": False}
_SEX_STRINGS = {"m": "Male", "male": "Male", "f": "Female", "female": "Female"}


def _parse_item(field: str, index: int, value) -> int:
    if isinstance(value, bool):
        raise FieldError(field, "expected a Likert answer or 0/1")
    if isinstance(value, int):
        if value in (0, 1):
            return value
        raise FieldError(field, f"binary item must be 0 or 1, got {value}")
    if isinstance(value, str):
        text = value.strip()
        if text in ("0", "1"):
            return int(text)
        try:
            return score_item(index, text)
        except ValidationError:
            raise FieldError(
                field, f"expected a Likert answer or 0/1, got {value!r}"
            ) from None
    raise FieldError(field, f"expected a Likert answer or 0/1, got {value!r}")


def parse_bool(field: str, value) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.strip().lower() in _BOOL_STRINGS:
        return _BOOL_STRINGS[value.strip().lower()]
    raise FieldError(field, f"expected yes/no, got {value!r}")


def parse_sex(value) -> str:
    if isinstance(value, str) and value.strip().lower() in _SEX_STRINGS:
        return _SEX_STRINGS[value.strip().lower()]
    raise FieldError("sex", f"expected Male or Female, got {value!r}")


def record_from_payload(payload: dict) -> ScreeningRecord:
    """Build a validated record from a questionnaire submission (JSON body
    or file). Items accept either Likert words or 0/1; demographics follow
    the record field names. Raises FieldError naming the offending field."""
    if not isinstance(payload, dict):
        raise ValidationError(f"expected a JSON object, got {type(payload).__name__}")
    known = set(_ITEM_FIELDS) | {
        "age_months", "sex", "ethnicity", "jaundice", "family_asd", "respondent"
    }
    for key in payload:
        if key not in known:
            raise FieldError(key, "unknown field")
    items = []
    for i, field in enumerate(_ITEM_FIELDS, start=1):
        if field not in payload:
            raise FieldError(field, "missing")
        items.append(_parse_item(field, i, payload[field]))
    for field in ("age_months", "sex", "ethnicity", "jaundice", "family_asd", "respondent"):
        if field not in payload:
            raise FieldError(field, "missing")
    age = payload["age_months"]
    if isinstance(age, str) and age.strip().lstrip("+-").isdigit():
        age = int(age.strip())
    if not isinstance(age, int) or isinstance(age, bool):
        raise FieldError("age_months", f"expected an integer, got {payload['age_months']!r}")
    if age < 1:
        raise FieldError("age_months", f"must be at least 1, got {age}")
    ethnicity = payload["ethnicity"]
    if not isinstance(ethnicity, str) or not ethnicity.strip():
        raise FieldError("ethnicity", "expected a non-empty string")
    respondent = payload["respondent"]
    if not isinstance(respondent, str) or not respondent.strip():
        raise FieldError("respondent", "expected a non-empty string")
    return ScreeningRecord.from_items(
        items,
        age_months=age,
        sex=parse_sex(payload["sex"]),
        ethnicity=ethnicity.strip(),
        jaundice=parse_bool("jaundice", payload["jaundice"]),
        family_asd=parse_bool("family_asd", payload["family_asd"]),
        respondent=respondent.strip(),
    )


RECORD_FIELDS = tuple(f.name for f in fields(ScreeningRecord))
