from screenlab import ScreeningRecord


def make_record(items, **overrides):
    defaults = dict(
        age_months=24,
        sex="Male",
        ethnicity="Asian",
        jaundice=False,
        family_asd=False,
        respondent="Parent",
    )
    defaults.update(overrides)
    return ScreeningRecord.from_items(items, **defaults)
