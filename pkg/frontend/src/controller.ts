import { ApiClient, ApiError } from "./api.js";
import {
  FormValues,
  Tab,
  ViewState,
  counterText,
  emptyForm,
  formFromEvaluation,
  initialState,
  targetIndex,
  toEvaluationBody,
  validateForm,
} from "./state.js";
import type { RunDetail, RunSummary } from "./types.js";

/** Everything the controller needs from the presentation layer. The browser
 * implementation manipulates the DOM; tests substitute a recorder. */
export interface Renderer {
  renderShell(state: ViewState): void;
  renderRun(detail: RunDetail, state: ViewState): void;
  renderFormProblems(problems: string[]): void;
  showBanner(message: string, kind: "error" | "info"): void;
  clearBanner(): void;
  /** Dirty-navigation guard; resolves true when unsaved scores may be
   * discarded. */
  confirmDiscard(): Promise<boolean>;
}

/** Drives the single-page evaluator: one RunDetail fetch per run view (all
 * four tabs render from it), clamped navigation with a dirty guard, and at
 * most one in-flight save. */
export class Controller {
  state: ViewState = initialState(0);
  summaries: RunSummary[] = [];
  detail: RunDetail | null = null;
  form: FormValues = emptyForm();

  private saving = false;

  constructor(private api: ApiClient, private renderer: Renderer) {}

  async start(): Promise<void> {
    try {
      this.summaries = await this.api.listRuns();
    } catch (err) {
      this.renderer.showBanner(asMessage(err), "error");
      return;
    }
    this.state = initialState(this.summaries.length, this.state.appearance);
    if (this.summaries.length === 0) {
      this.renderer.renderShell(this.state);
      this.renderer.showBanner("store has no runs to evaluate", "info");
      return;
    }
    await this.loadIndex(1);
  }

  counter(): string {
    return counterText(this.state);
  }

  async loadIndex(index: number): Promise<void> {
    const summary = this.summaries[index - 1];
    if (!summary) {
      return;
    }
    let detail: RunDetail;
    try {
      detail = await this.api.getRun(summary.run_id);
    } catch (err) {
      this.renderer.showBanner(asMessage(err), "error");
      return;
    }
    this.detail = detail;
    // the counter always reflects the server-reported position
    this.state = {
      ...this.state,
      currentIndex: detail.position.index,
      total: detail.position.total,
      dirty: false,
    };
    this.form = detail.human_evaluation
      ? formFromEvaluation(detail.human_evaluation)
      : emptyForm();
    this.renderer.clearBanner();
    this.renderer.renderShell(this.state);
    this.renderer.renderRun(detail, this.state);
  }

  async navigate(direction: "prev" | "next"): Promise<void> {
    const target = targetIndex(this.state, direction);
    if (target === this.state.currentIndex) {
      return; // clamped at an edge; nothing to fetch
    }
    if (this.state.dirty && !(await this.renderer.confirmDiscard())) {
      return;
    }
    await this.loadIndex(target);
  }

  setTab(tab: Tab): void {
    // tabs re-render from the already-fetched detail; no per-tab refetch
    this.state = { ...this.state, activeTab: tab };
    this.renderer.renderShell(this.state);
    if (this.detail) {
      this.renderer.renderRun(this.detail, this.state);
    }
  }

  updateForm(values: FormValues): void {
    this.form = values;
    if (!this.state.dirty) {
      this.state = { ...this.state, dirty: true };
      this.renderer.renderShell(this.state);
    }
  }

  /** Validates client-side, PUTs once, clears dirty on 204. Server errors
   * surface inline and keep the form intact. */
  async save(): Promise<boolean> {
    if (!this.detail || this.saving) {
      return false;
    }
    const problems = validateForm(this.form);
    this.renderer.renderFormProblems(problems);
    if (problems.length > 0) {
      return false;
    }
    this.saving = true;
    try {
      await this.api.putEvaluation(this.detail.run_id, toEvaluationBody(this.form));
    } catch (err) {
      const message =
        err instanceof ApiError && err.status === 404
          ? `run no longer exists on the server: ${asMessage(err)}`
          : asMessage(err);
      this.renderer.showBanner(message, "error");
      return false;
    } finally {
      this.saving = false;
    }
    this.state = { ...this.state, dirty: false };
    const summary = this.summaries[this.state.currentIndex - 1];
    if (summary) {
      summary.has_human_eval = true;
    }
    this.renderer.clearBanner();
    this.renderer.renderShell(this.state);
    this.renderer.showBanner("evaluation saved", "info");
    return true;
  }
}

function asMessage(err: unknown): string {
  if (err instanceof ApiError) {
    return `${err.message} (HTTP ${err.status})`;
  }
  return err instanceof Error ? err.message : String(err);
}
