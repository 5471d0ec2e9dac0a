/**
 * Where the prediction service lives. Edit the constant (or define
 * `SCREENLAB_BASE_URL` on `globalThis` before the app module loads) to
 * point the page at a different host.
 */

export const DEFAULT_BASE_URL = "http://127.0.0.1:8080";

export function serviceBaseUrl(): string {
  const override = (globalThis as Record<string, unknown>)["SCREENLAB_BASE_URL"];
  if (typeof override === "string" && override !== "") {
    return override.replace(/\/+$/, "");
  }
  return DEFAULT_BASE_URL;
}
