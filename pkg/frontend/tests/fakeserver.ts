// In-memory double of the evaluation service, speaking the same wire
// contract as GET /api/runs, GET /api/runs/{id}, PUT /api/runs/{id}/evaluation.

import type { HumanEvaluation, RunDetail, RunSummary } from "../src/types.js";

export interface FakeRun {
  detail: Omit<RunDetail, "position" | "human_evaluation">;
  evaluation: HumanEvaluation | null;
}

export function makeRun(runId: string, overrides: Partial<FakeRun["detail"]> = {}): FakeRun {
  return {
    detail: {
      run_id: runId,
      domain: "usability",
      generated_json: ["generated summary sentence"],
      curated_json: null,
      source_nodes: [
        { chunk_id: "d:0001", chunk_text: "first chunk", first_pass_score: 0.91, rerank_score: 2 },
        { chunk_id: "d:0002", chunk_text: "second chunk", first_pass_score: 0.85, rerank_score: 1 },
      ],
      parameter_set: { llm_model: "mock", k_first: 6, k_final: 2 },
      metrics: null,
      validation: [],
      raw_response: '["generated summary sentence"]',
      attempts: 1,
      created_at: "2024-01-01T00:00:00+00:00",
      ...overrides,
    },
    evaluation: null,
  };
}

export class FakeServer {
  requests: { method: string; path: string; body?: unknown }[] = [];

  constructor(public runs: FakeRun[]) {}

  get putCount(): number {
    return this.requests.filter((r) => r.method === "PUT").length;
  }

  fetch = async (input: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    const url = new URL(input, "http://local.test");
    const path = url.pathname;
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    this.requests.push({ method, path, body });

    if (method === "GET" && path === "/api/runs") {
      const summaries: RunSummary[] = this.runs.map((run, i) => ({
        run_id: run.detail.run_id,
        domain: run.detail.domain,
        parameter_set_digest: "digest",
        created_at: run.detail.created_at,
        has_human_eval: run.evaluation !== null,
        position: { index: i + 1, total: this.runs.length },
      }));
      return json(200, summaries);
    }

    const detailMatch = path.match(/^\/api\/runs\/([^/]+)$/);
    if (method === "GET" && detailMatch) {
      const index = this.runs.findIndex((r) => r.detail.run_id === detailMatch[1]);
      if (index === -1) return json(404, { error: "no such run" });
      const run = this.runs[index]!;
      const detail: RunDetail = {
        ...run.detail,
        human_evaluation: run.evaluation,
        position: { index: index + 1, total: this.runs.length },
      };
      return json(200, detail);
    }

    const putMatch = path.match(/^\/api\/runs\/([^/]+)\/evaluation$/);
    if (method === "PUT" && putMatch) {
      const run = this.runs.find((r) => r.detail.run_id === putMatch[1]);
      if (!run) return json(404, { error: "no such run" });
      const evaluation = body as HumanEvaluation;
      if (
        evaluation.overall_quality < 0 || evaluation.overall_quality > 4 ||
        evaluation.content_accuracy < 0 || evaluation.content_accuracy > 4
      ) {
        return json(400, { error: "score out of range" });
      }
      run.evaluation = { ...evaluation, run_id: run.detail.run_id, saved_at: "now" };
      return new Response(null, { status: 204 });
    }

    return json(404, { error: `unhandled ${method} ${path}` });
  };
}

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
