// Pure view-state logic: navigation clamping, the run counter, form
// validation, and appearance persistence. No DOM, no fetch.

import type { HumanEvaluation } from "./types.js";

export type Tab = "compare" | "source_nodes" | "parameter_set" | "evaluate";

export interface Appearance {
  theme: "light" | "dark";
  uiScale: number; // percent
}

export interface ViewState {
  currentIndex: number; // 1-based
  total: number;
  activeTab: Tab;
  dirty: boolean;
  appearance: Appearance;
}

export const DEFAULT_APPEARANCE: Appearance = { theme: "light", uiScale: 100 };

export const UI_SCALES = [80, 100, 115, 130, 150];

export function initialState(total: number, appearance?: Appearance): ViewState {
  return {
    currentIndex: total > 0 ? 1 : 0,
    total,
    activeTab: "compare",
    dirty: false,
    appearance: appearance ?? { ...DEFAULT_APPEARANCE },
  };
}

export function clampIndex(index: number, total: number): number {
  if (total < 1) return 0;
  return Math.min(Math.max(index, 1), total);
}

/** The run position indicator, e.g. "Run: 13 / 31". */
export function counterText(state: ViewState): string {
  return `Run: ${state.currentIndex} / ${state.total}`;
}

export function targetIndex(state: ViewState, direction: "prev" | "next"): number {
  const delta = direction === "next" ? 1 : -1;
  return clampIndex(state.currentIndex + delta, state.total);
}

// --- evaluation form ---------------------------------------------------------

export interface FormValues {
  evaluator: string;
  overallQuality: number;
  contentAccuracy: number;
  schemaConformance: boolean;
  notes: string;
  retrievalRelevance: { chunkId: string; score: number }[];
  hallucinationFlags: { jsonPointer: string; note: string }[];
}

export function emptyForm(): FormValues {
  return {
    evaluator: "",
    overallQuality: 0,
    contentAccuracy: 0,
    schemaConformance: false,
    notes: "",
    retrievalRelevance: [],
    hallucinationFlags: [],
  };
}

export function formFromEvaluation(saved: HumanEvaluation): FormValues {
  return {
    evaluator: saved.evaluator,
    overallQuality: saved.overall_quality,
    contentAccuracy: saved.content_accuracy,
    schemaConformance: saved.schema_conformance,
    notes: saved.notes ?? "",
    retrievalRelevance: (saved.retrieval_relevance ?? []).map((r) => ({
      chunkId: r.chunk_id,
      score: r.score,
    })),
    hallucinationFlags: (saved.hallucination_flags ?? []).map((f) => ({
      jsonPointer: f.json_pointer,
      note: f.note,
    })),
  };
}

/** Client-side mirror of the server's score bounds: out-of-range values are
 * blocked before any request is made. Returns human-readable problems. */
export function validateForm(values: FormValues): string[] {
  const problems: string[] = [];
  if (!values.evaluator.trim()) {
    problems.push("evaluator name is required");
  }
  if (!isIntInRange(values.overallQuality, 0, 4)) {
    problems.push("overall quality must be an integer from 0 to 4");
  }
  if (!isIntInRange(values.contentAccuracy, 0, 4)) {
    problems.push("content accuracy must be an integer from 0 to 4");
  }
  for (const entry of values.retrievalRelevance) {
    if (!isIntInRange(entry.score, 0, 2)) {
      problems.push(`retrieval relevance for ${entry.chunkId} must be 0, 1, or 2`);
    }
  }
  return problems;
}

function isIntInRange(value: number, lo: number, hi: number): boolean {
  return Number.isInteger(value) && value >= lo && value <= hi;
}

export function toEvaluationBody(values: FormValues): HumanEvaluation {
  return {
    evaluator: values.evaluator.trim(),
    overall_quality: values.overallQuality,
    content_accuracy: values.contentAccuracy,
    schema_conformance: values.schemaConformance,
    hallucination_flags: values.hallucinationFlags.map((f) => ({
      json_pointer: f.jsonPointer,
      note: f.note,
    })),
    retrieval_relevance: values.retrievalRelevance.map((r) => ({
      chunk_id: r.chunkId,
      score: r.score,
    })),
    notes: values.notes,
  };
}

// --- misc -------------------------------------------------------------------

/** Canonical pretty-printing for the JSON panes: sorted keys, 2-space
 * indent, so curated and generated documents line up visually. */
export function prettyJson(value: unknown): string {
  return JSON.stringify(sortKeys(value), null, 2) ?? "null";
}

function sortKeys(value: unknown): unknown {
  if (Array.isArray(value)) {
    return value.map(sortKeys);
  }
  if (value !== null && typeof value === "object") {
    const out: Record<string, unknown> = {};
    for (const key of Object.keys(value as Record<string, unknown>).sort()) {
      out[key] = sortKeys((value as Record<string, unknown>)[key]);
    }
    return out;
  }
  return value;
}

export function loadAppearance(storage: Pick<Storage, "getItem">): Appearance {
  try {
    const raw = storage.getItem("bcogen-appearance");
    if (!raw) return { ...DEFAULT_APPEARANCE };
    const parsed = JSON.parse(raw) as Partial<Appearance>;
    return {
      theme: parsed.theme === "dark" ? "dark" : "light",
      uiScale: UI_SCALES.includes(parsed.uiScale ?? -1) ? (parsed.uiScale as number) : 100,
    };
  } catch {
    return { ...DEFAULT_APPEARANCE };
  }
}

export function saveAppearance(
  storage: Pick<Storage, "setItem">,
  appearance: Appearance,
): void {
  storage.setItem("bcogen-appearance", JSON.stringify(appearance));
}
