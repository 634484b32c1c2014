import type { HumanEvaluation, RunDetail, RunSummary } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin client over the local evaluation service. The UI never mutates
 * anything except through putEvaluation. */
export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => globalThis.fetch(input, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`);
    if (!resp.ok) {
      throw new ApiError(resp.status, await errorText(resp));
    }
    return (await resp.json()) as T;
  }

  listRuns(): Promise<RunSummary[]> {
    return this.getJson<RunSummary[]>("/api/runs");
  }

  getRun(runId: string): Promise<RunDetail> {
    return this.getJson<RunDetail>(`/api/runs/${encodeURIComponent(runId)}`);
  }

  async putEvaluation(runId: string, body: HumanEvaluation): Promise<void> {
    const resp = await this.fetchFn(
      `${this.baseUrl}/api/runs/${encodeURIComponent(runId)}/evaluation`,
      {
        method: "PUT",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      },
    );
    if (resp.status !== 204) {
      throw new ApiError(resp.status, await errorText(resp));
    }
  }
}

async function errorText(resp: Response): Promise<string> {
  try {
    const body = (await resp.json()) as { error?: string };
    if (body && typeof body.error === "string") {
      return body.error;
    }
  } catch {
    // fall through to the status line
  }
  return `request failed with HTTP ${resp.status}`;
}
