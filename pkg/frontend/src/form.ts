/**
 * Form state and completeness rules, kept free of DOM concerns so the
 * submit-gating and live-score logic are directly testable.
 */

import type { PredictRequest } from "./api.js";
import { N_ITEMS, scoreItem, type LikertAnswer } from "./scoring.js";

export type YesNo = "yes" | "no";

export interface FormState {
  /** One slot per questionnaire item; null until answered. */
  items: (LikertAnswer | null)[];
  /** Raw text from the age input. */
  ageMonths: string;
  sex: "" | "Male" | "Female";
  ethnicity: string;
  jaundice: "" | YesNo;
  familyAsd: "" | YesNo;
  respondent: string;
}

export function emptyForm(): FormState {
  return {
    items: Array(N_ITEMS).fill(null),
    ageMonths: "",
    sex: "",
    ethnicity: "",
    jaundice: "",
    familyAsd: "",
    respondent: "",
  };
}

export function answeredCount(form: FormState): number {
  return form.items.filter((a) => a !== null).length;
}

/** All ten items answered; this alone gates nothing else. */
export function itemsComplete(form: FormState): boolean {
  return answeredCount(form) === N_ITEMS;
}

/** Age must be a whole positive number of months. */
export function parseAge(text: string): number | null {
  const trimmed = text.trim();
  if (!/^\+?\d+$/.test(trimmed)) return null;
  const age = Number(trimmed);
  return age >= 1 ? age : null;
}

export function demographicsComplete(form: FormState): boolean {
  return (
    parseAge(form.ageMonths) !== null &&
    form.sex !== "" &&
    form.ethnicity.trim() !== "" &&
    form.jaundice !== "" &&
    form.familyAsd !== "" &&
    form.respondent.trim() !== ""
  );
}

/**
 * Submit gate. Any unanswered item keeps the form incomplete; the
 * demographic fields the service requires must also be filled.
 */
export function isComplete(form: FormState): boolean {
  return itemsComplete(form) && demographicsComplete(form);
}

/**
 * Running score over the items answered so far: null (hidden) while the
 * form is untouched, and equal to the service's score once all ten items
 * are answered.
 */
export function provisionalScore(form: FormState): number | null {
  if (answeredCount(form) === 0) return null;
  let sum = 0;
  form.items.forEach((answer, i) => {
    if (answer !== null) sum += scoreItem(i + 1, answer);
  });
  return sum;
}

/** Request body for the prediction service. Requires a complete form. */
export function toPayload(form: FormState): PredictRequest {
  if (!isComplete(form)) {
    throw new Error("cannot build a payload from an incomplete form");
  }
  const payload: Record<string, string | number> = {};
  form.items.forEach((answer, i) => {
    payload[`a${i + 1}`] = answer as LikertAnswer;
  });
  payload["age_months"] = parseAge(form.ageMonths) as number;
  payload["sex"] = form.sex;
  payload["ethnicity"] = form.ethnicity.trim();
  payload["jaundice"] = form.jaundice;
  payload["family_asd"] = form.familyAsd;
  payload["respondent"] = form.respondent.trim();
  return payload as unknown as PredictRequest;
}
