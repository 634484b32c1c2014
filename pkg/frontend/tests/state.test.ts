import { describe, expect, it } from "vitest";

import {
  clampIndex,
  counterText,
  emptyForm,
  formFromEvaluation,
  initialState,
  loadAppearance,
  prettyJson,
  saveAppearance,
  targetIndex,
  toEvaluationBody,
  validateForm,
} from "../src/state.js";

describe("counter", () => {
  it("formats as Run: i / n", () => {
    const state = { ...initialState(31), currentIndex: 13 };
    expect(counterText(state)).toBe("Run: 13 / 31");
  });

  it("starts at run 1", () => {
    expect(counterText(initialState(2))).toBe("Run: 1 / 2");
  });
});

describe("navigation clamping", () => {
  it("clamps below 1 and above total", () => {
    expect(clampIndex(0, 5)).toBe(1);
    expect(clampIndex(9, 5)).toBe(5);
    expect(clampIndex(3, 5)).toBe(3);
  });

  it("prev at the first run stays at 1", () => {
    expect(targetIndex(initialState(2), "prev")).toBe(1);
  });

  it("next advances and clamps at total", () => {
    const state = initialState(2);
    expect(targetIndex(state, "next")).toBe(2);
    expect(targetIndex({ ...state, currentIndex: 2 }, "next")).toBe(2);
  });
});

describe("form validation mirrors server bounds", () => {
  const valid = () => ({
    ...emptyForm(),
    evaluator: "alice",
    overallQuality: 3,
    contentAccuracy: 2,
    retrievalRelevance: [{ chunkId: "c1", score: 2 }],
  });

  it("accepts an in-range form", () => {
    expect(validateForm(valid())).toEqual([]);
  });

  it("blocks out-of-range scores before any request", () => {
    expect(validateForm({ ...valid(), overallQuality: 9 })).not.toEqual([]);
    expect(validateForm({ ...valid(), contentAccuracy: -1 })).not.toEqual([]);
    expect(
      validateForm({ ...valid(), retrievalRelevance: [{ chunkId: "c1", score: 3 }] }),
    ).not.toEqual([]);
  });

  it("requires an evaluator name", () => {
    expect(validateForm({ ...valid(), evaluator: "  " })).not.toEqual([]);
  });

  it("round-trips through the wire shape", () => {
    const body = toEvaluationBody(valid());
    expect(body.retrieval_relevance).toEqual([{ chunk_id: "c1", score: 2 }]);
    const back = formFromEvaluation({ ...body, notes: body.notes ?? "" });
    expect(back.evaluator).toBe("alice");
    expect(back.retrievalRelevance).toEqual([{ chunkId: "c1", score: 2 }]);
  });
});

describe("prettyJson", () => {
  it("sorts keys and indents by two spaces", () => {
    expect(prettyJson({ b: 1, a: [1, 2] })).toBe('{\n  "a": [\n    1,\n    2\n  ],\n  "b": 1\n}');
  });

  it("prints null for null", () => {
    expect(prettyJson(null)).toBe("null");
  });
});

describe("appearance persistence", () => {
  function memoryStorage() {
    const map = new Map<string, string>();
    return {
      getItem: (k: string) => map.get(k) ?? null,
      setItem: (k: string, v: string) => void map.set(k, v),
    };
  }

  it("defaults to light at 100%", () => {
    expect(loadAppearance(memoryStorage())).toEqual({ theme: "light", uiScale: 100 });
  });

  it("round-trips saved settings", () => {
    const storage = memoryStorage();
    saveAppearance(storage, { theme: "dark", uiScale: 130 });
    expect(loadAppearance(storage)).toEqual({ theme: "dark", uiScale: 130 });
  });

  it("falls back on corrupted data", () => {
    const storage = memoryStorage();
    storage.setItem("bcogen-appearance", "{nope");
    expect(loadAppearance(storage)).toEqual({ theme: "light", uiScale: 100 });
  });
});
