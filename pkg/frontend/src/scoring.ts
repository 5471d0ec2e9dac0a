/**
 * Client-side mirror of the questionnaire scoring rules.
 *
 * This must stay behaviorally identical to the service's scoring: the
 * page shows a live provisional score while the caregiver answers, and
 * the service recomputes the real one on submit. The consistency of the
 * two is covered by the randomized test in tests/service.test.ts.
 */

export const LIKERT_ANSWERS = [
  "Always",
  "Usually",
  "Sometimes",
  "Rarely",
  "Never",
] as const;

export type LikertAnswer = (typeof LIKERT_ANSWERS)[number];

export const N_ITEMS = 10;

/** Screening label is "Yes" only for totals strictly above this. */
export const SCORE_THRESHOLD = 3;

export const POSITIVE_LABEL = "Yes";
export const NEGATIVE_LABEL = "No";

const CANONICAL_BY_LOWER = new Map<string, LikertAnswer>(
  LIKERT_ANSWERS.map((a) => [a.toLowerCase(), a]),
);

/** Accepts any casing; returns the canonical answer or throws. */
export function parseLikert(answer: string): LikertAnswer {
  const canonical = CANONICAL_BY_LOWER.get(answer.trim().toLowerCase());
  if (canonical === undefined) {
    throw new RangeError(`not a Likert answer: ${JSON.stringify(answer)}`);
  }
  return canonical;
}

const CONCERN_ITEMS_1_TO_9: ReadonlySet<LikertAnswer> = new Set([
  "Sometimes",
  "Rarely",
  "Never",
]);

const CONCERN_ITEM_10: ReadonlySet<LikertAnswer> = new Set([
  "Always",
  "Usually",
  "Sometimes",
]);

/**
 * Binary concern score for one item. Items 1-9 score 1 for Sometimes,
 * Rarely, or Never; item 10 scores 1 for Always, Usually, or Sometimes.
 */
export function scoreItem(itemIndex: number, answer: string): 0 | 1 {
  if (!Number.isInteger(itemIndex) || itemIndex < 1 || itemIndex > N_ITEMS) {
    throw new RangeError(`item index out of range: ${itemIndex}`);
  }
  const canonical = parseLikert(answer);
  const concern = itemIndex === N_ITEMS ? CONCERN_ITEM_10 : CONCERN_ITEMS_1_TO_9;
  return concern.has(canonical) ? 1 : 0;
}

/** Total score of a complete set of ten answers. */
export function totalScore(answers: readonly string[]): number {
  if (answers.length !== N_ITEMS) {
    throw new RangeError(`expected ${N_ITEMS} answers, got ${answers.length}`);
  }
  let sum = 0;
  for (let i = 0; i < answers.length; i++) {
    sum += scoreItem(i + 1, answers[i] as string);
  }
  return sum;
}

/** Screening label from the total score: "Yes" iff score > 3. */
export function deriveLabel(score: number): "Yes" | "No" {
  if (!Number.isInteger(score) || score < 0 || score > N_ITEMS) {
    throw new RangeError(`score out of range 0..${N_ITEMS}: ${score}`);
  }
  return score > SCORE_THRESHOLD ? POSITIVE_LABEL : NEGATIVE_LABEL;
}
