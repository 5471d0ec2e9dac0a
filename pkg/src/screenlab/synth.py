"""Deterministic synthetic screening datasets.

Lets the whole pipeline (and its tests) run without downloading the real
file. Items are Bernoulli draws whose per-record rate comes from a
two-component mixture tuned so the share of records scoring above the
label threshold approaches the requested prevalence. Scores and labels are
always derived through the scoring rules, never sampled.
"""

from __future__ import annotations

import math

import numpy as np

from .records import ScreeningRecord, ValidationError

ETHNICITY_POOL = (
    "White European", "Asian", "Middle Eastern", "South Asian", "Black",
    "Hispanic", "Latino", "Mixed", "Native Indian", "Pacifica", "Others",
)
RESPONDENT_POOL = (
    "Parent", "Self", "Caregiver", "Medical Staff", "Clinician",
)
AGE_RANGE_MONTHS = (12, 36)

# Component item rates are pulled well apart so most records sit far from
# the score-3 boundary: the label structure stays learnable instead of
# dissolving into per-item coin flips.
LOW_RATE = 0.03
HIGH_RATE = 0.97


def _prob_positive(rate: float) -> float:
    """P[sum of 10 Bernoulli(rate) items > 3]."""
    return sum(
        math.comb(10, k) * rate**k * (1.0 - rate) ** (10 - k) for k in range(4, 11)
    )


def _solve_rate(target: float) -> float:
    """Item rate whose positive probability equals target (monotone, bisect)."""
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _prob_positive(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def mixture_for_prevalence(target: float):
    """Two item rates and the weight of the high one, chosen so the mixture's
    positive probability equals the target exactly.

    Targets outside what the fixed component pair can reach fall back to a
    single solved rate (a degenerate mixture)."""
    if not 0.0 < target < 1.0:
        raise ValidationError(f"target prevalence must be in (0, 1), got {target}")
    p_lo, p_hi = _prob_positive(LOW_RATE), _prob_positive(HIGH_RATE)
    if not p_lo < target < p_hi:
        rate = _solve_rate(target)
        return rate, rate, 1.0
    weight_hi = (target - p_lo) / (p_hi - p_lo)
    return LOW_RATE, HIGH_RATE, weight_hi


def generate(n: int, seed: int, target_prevalence: float = 0.69) -> list[ScreeningRecord]:
    """Generate n internally consistent records, deterministic in the seed."""
    if n < 1:
        raise ValidationError(f"n must be at least 1, got {n}")
    lo_rate, hi_rate, weight_hi = mixture_for_prevalence(target_prevalence)
    rng = np.random.Generator(np.random.PCG64(seed))
    records = []
    for _ in range(n):
        rate = hi_rate if rng.random() < weight_hi else lo_rate
        items = tuple(int(v) for v in rng.random(10) < rate)
        records.append(
            ScreeningRecord.from_items(
                items,
                age_months=int(rng.integers(AGE_RANGE_MONTHS[0], AGE_RANGE_MONTHS[1] + 1)),
                sex="Male" if rng.random() < 0.5 else "Female",
                ethnicity=ETHNICITY_POOL[rng.integers(len(ETHNICITY_POOL))],
                jaundice=bool(rng.random() < 0.3),
                family_asd=bool(rng.random() < 0.2),
                respondent=RESPONDENT_POOL[rng.integers(len(RESPONDENT_POOL))],
            )
        )
    return records
