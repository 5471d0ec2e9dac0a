/**
 * Typed client for the prediction service's three routes. All errors
 * surface as ApiError (HTTP-level, with per-field issues when the service
 * provides them) or the underlying network error from fetch.
 */

import { serviceBaseUrl } from "./config.js";

export interface PredictRequest {
  a1: string | number;
  a2: string | number;
  a3: string | number;
  a4: string | number;
  a5: string | number;
  a6: string | number;
  a7: string | number;
  a8: string | number;
  a9: string | number;
  a10: string | number;
  age_months: number;
  sex: string;
  ethnicity: string;
  jaundice: string | boolean;
  family_asd: string | boolean;
  respondent: string;
}

export interface PredictResponse {
  qchat_score: number;
  qchat_label: "Yes" | "No";
  label: string;
  score: number;
  model_kind: string;
  model_id: string;
  warnings: string[];
  rule_model_disagree: boolean;
}

export interface HealthResponse {
  status: string;
}

export interface ModelCard {
  model_kind: string;
  model_id: string;
  positive_class: string;
  schema: {
    n_columns: number;
    columns: string[];
    groups: Record<string, string[]>;
  };
  training: Record<string, unknown>;
}

export interface FieldIssue {
  field: string;
  message: string;
}

export class ApiError extends Error {
  readonly status: number;
  readonly issues: FieldIssue[];

  constructor(status: number, issues: FieldIssue[], message: string) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.issues = issues;
  }
}

function extractIssues(body: unknown): FieldIssue[] {
  if (typeof body !== "object" || body === null) return [];
  const errors = (body as Record<string, unknown>)["errors"];
  if (!Array.isArray(errors)) return [];
  const issues: FieldIssue[] = [];
  for (const entry of errors) {
    if (typeof entry === "object" && entry !== null) {
      const field = (entry as Record<string, unknown>)["field"];
      const message = (entry as Record<string, unknown>)["message"];
      if (typeof field === "string" && typeof message === "string") {
        issues.push({ field, message });
      }
    }
  }
  return issues;
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  let body: unknown = null;
  try {
    body = await response.json();
  } catch {
    body = null;
  }
  if (!response.ok) {
    const issues = extractIssues(body);
    const detail =
      issues.length > 0
        ? issues.map((i) => `${i.field}: ${i.message}`).join("; ")
        : `service returned HTTP ${response.status}`;
    throw new ApiError(response.status, issues, detail);
  }
  return body as T;
}

export function health(baseUrl: string = serviceBaseUrl()): Promise<HealthResponse> {
  return request<HealthResponse>(`${baseUrl}/health`);
}

export function modelCard(baseUrl: string = serviceBaseUrl()): Promise<ModelCard> {
  return request<ModelCard>(`${baseUrl}/api/v1/model`);
}

export function predict(
  payload: PredictRequest,
  baseUrl: string = serviceBaseUrl(),
): Promise<PredictResponse> {
  return request<PredictResponse>(`${baseUrl}/api/v1/predict`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
}
