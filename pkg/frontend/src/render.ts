import type { Renderer } from "./controller.js";
import { FormValues, Tab, ViewState, counterText, prettyJson } from "./state.js";
import type { RunDetail } from "./types.js";

const TABS: { id: Tab; label: string }[] = [
  { id: "compare", label: "Compare" },
  { id: "source_nodes", label: "Source Nodes" },
  { id: "parameter_set", label: "Parameter Set" },
  { id: "evaluate", label: "Evaluate" },
];

export interface DomHooks {
  onTab(tab: Tab): void;
  onFormChange(values: FormValues): void;
  currentForm(): FormValues;
}

/** Browser renderer: owns the static page regions declared in index.html. */
export class DomRenderer implements Renderer {
  private hooks: DomHooks | null = null;

  constructor(private doc: Document) {}

  bind(hooks: DomHooks): void {
    this.hooks = hooks;
  }

  private el<T extends HTMLElement>(id: string): T {
    const node = this.doc.getElementById(id);
    if (!node) throw new Error(`missing page element #${id}`);
    return node as T;
  }

  renderShell(state: ViewState): void {
    this.el("run-counter").textContent = counterText(state);
    this.el("dirty-marker").textContent = state.dirty ? "unsaved changes" : "";
    this.doc.documentElement.dataset.theme = state.appearance.theme;
    this.doc.documentElement.style.fontSize = `${state.appearance.uiScale}%`;

    const bar = this.el("tab-bar");
    bar.innerHTML = "";
    for (const tab of TABS) {
      const button = this.doc.createElement("button");
      button.textContent = tab.label;
      button.className = tab.id === state.activeTab ? "tab active" : "tab";
      button.addEventListener("click", () => this.hooks?.onTab(tab.id));
      bar.appendChild(button);
    }
    for (const tab of TABS) {
      this.el(`pane-${tab.id}`).hidden = tab.id !== state.activeTab;
    }
  }

  renderRun(detail: RunDetail, state: ViewState): void {
    this.renderCompare(detail);
    this.renderSourceNodes(detail);
    this.renderParameterSet(detail);
    this.renderEvaluate(detail);
  }

  private renderCompare(detail: RunDetail): void {
    const curated = this.el("curated-pane");
    if (detail.curated_json === null || detail.curated_json === undefined) {
      curated.textContent = "no curated domain for this run";
      curated.classList.add("placeholder");
    } else {
      curated.textContent = prettyJson(detail.curated_json);
      curated.classList.remove("placeholder");
    }

    const generated = this.el("generated-pane");
    if (detail.validation.length > 0 && detail.generated_json === null) {
      // invalid runs are displayable by design: raw text plus the violations
      generated.textContent = detail.raw_response;
    } else {
      generated.textContent = prettyJson(detail.generated_json);
    }
    const violations = this.el("violation-list");
    violations.innerHTML = "";
    for (const violation of detail.validation) {
      const item = this.doc.createElement("li");
      item.textContent = `${violation.path || "<root>"}: ${violation.message}`;
      violations.appendChild(item);
    }
    this.el("violations-box").hidden = detail.validation.length === 0;
  }

  private renderSourceNodes(detail: RunDetail): void {
    const list = this.el("source-node-list");
    list.innerHTML = "";
    for (const node of detail.source_nodes) {
      const entry = this.doc.createElement("div");
      entry.className = "source-node";
      const header = this.doc.createElement("div");
      header.className = "node-header";
      const rerank = node.rerank_score === null ? "-" : node.rerank_score.toFixed(3);
      header.textContent =
        `${node.chunk_id}  cosine=${node.first_pass_score.toFixed(3)}  rerank=${rerank}`;
      const body = this.doc.createElement("pre");
      body.textContent = node.chunk_text;
      entry.append(header, body);
      list.appendChild(entry);
    }
  }

  private renderParameterSet(detail: RunDetail): void {
    this.el("parameter-pane").textContent = prettyJson(detail.parameter_set);
    const metrics = this.el("metrics-pane");
    metrics.textContent =
      detail.metrics === null ? "no automated metrics recorded" : prettyJson(detail.metrics);
  }

  private renderEvaluate(detail: RunDetail): void {
    const form = this.hooks?.currentForm();
    if (!form) return;
    (this.el("f-evaluator") as HTMLInputElement).value = form.evaluator;
    (this.el("f-overall") as HTMLSelectElement).value = String(form.overallQuality);
    (this.el("f-accuracy") as HTMLSelectElement).value = String(form.contentAccuracy);
    (this.el("f-schema") as HTMLInputElement).checked = form.schemaConformance;
    (this.el("f-notes") as HTMLTextAreaElement).value = form.notes;

    const relevance = this.el("f-relevance");
    relevance.innerHTML = "";
    for (const node of detail.source_nodes) {
      const existing = form.retrievalRelevance.find((r) => r.chunkId === node.chunk_id);
      const row = this.doc.createElement("label");
      row.className = "relevance-row";
      const select = this.doc.createElement("select");
      select.dataset.chunkId = node.chunk_id;
      select.className = "relevance-score";
      for (const score of [0, 1, 2]) {
        const option = this.doc.createElement("option");
        option.value = String(score);
        option.textContent = ["irrelevant", "partly relevant", "relevant"][score] ?? "";
        select.appendChild(option);
      }
      select.value = String(existing?.score ?? 0);
      select.addEventListener("change", () => this.emitFormChange());
      row.append(select, this.doc.createTextNode(` ${node.chunk_id}`));
      relevance.appendChild(row);
    }
    this.renderFormProblems([]);
  }

  emitFormChange(): void {
    if (!this.hooks) return;
    const relevance: { chunkId: string; score: number }[] = [];
    for (const select of this.doc.querySelectorAll<HTMLSelectElement>(".relevance-score")) {
      relevance.push({
        chunkId: select.dataset.chunkId ?? "",
        score: Number(select.value),
      });
    }
    this.hooks.onFormChange({
      evaluator: (this.el("f-evaluator") as HTMLInputElement).value,
      overallQuality: Number((this.el("f-overall") as HTMLSelectElement).value),
      contentAccuracy: Number((this.el("f-accuracy") as HTMLSelectElement).value),
      schemaConformance: (this.el("f-schema") as HTMLInputElement).checked,
      notes: (this.el("f-notes") as HTMLTextAreaElement).value,
      retrievalRelevance: relevance,
      hallucinationFlags: this.hooks.currentForm().hallucinationFlags,
    });
  }

  renderFormProblems(problems: string[]): void {
    const box = this.el("form-problems");
    box.innerHTML = "";
    for (const problem of problems) {
      const item = this.doc.createElement("li");
      item.textContent = problem;
      box.appendChild(item);
    }
    box.hidden = problems.length === 0;
  }

  showBanner(message: string, kind: "error" | "info"): void {
    const banner = this.el("banner");
    banner.textContent = message;
    banner.className = `banner ${kind}`;
    banner.hidden = false;
  }

  clearBanner(): void {
    this.el("banner").hidden = true;
  }

  confirmDiscard(): Promise<boolean> {
    return Promise.resolve(
      this.doc.defaultView?.confirm("Discard unsaved scores for this run?") ?? true,
    );
  }
}
