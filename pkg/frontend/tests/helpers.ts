import { LIKERT_ANSWERS, type LikertAnswer } from "../src/scoring.js";

/** Deterministic PRNG so randomized tests are reproducible. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function pick<T>(rand: () => number, pool: readonly T[]): T {
  return pool[Math.floor(rand() * pool.length)] as T;
}

/** A complete random set of ten Likert answers. */
export function randomAnswers(rand: () => number): LikertAnswer[] {
  return Array.from({ length: 10 }, () => pick(rand, LIKERT_ANSWERS));
}
