import { ApiClient } from "./api.js";
import { Controller } from "./controller.js";
import { DomRenderer } from "./render.js";
import { UI_SCALES, loadAppearance, saveAppearance } from "./state.js";

function bootstrap(): void {
  const renderer = new DomRenderer(document);
  const controller = new Controller(new ApiClient(""), renderer);
  controller.state.appearance = loadAppearance(window.localStorage);

  renderer.bind({
    onTab: (tab) => controller.setTab(tab),
    onFormChange: (values) => controller.updateForm(values),
    currentForm: () => controller.form,
  });

  document.getElementById("btn-prev")?.addEventListener("click", () => {
    void controller.navigate("prev");
  });
  document.getElementById("btn-next")?.addEventListener("click", () => {
    void controller.navigate("next");
  });
  document.getElementById("btn-save")?.addEventListener("click", () => {
    void controller.save();
  });
  document.getElementById("btn-exit")?.addEventListener("click", () => {
    window.close();
    // browsers ignore close() for user-opened tabs; fall back to a blank page
    window.location.href = "about:blank";
  });

  for (const id of ["f-evaluator", "f-overall", "f-accuracy", "f-schema", "f-notes"]) {
    document.getElementById(id)?.addEventListener("change", () => renderer.emitFormChange());
    document.getElementById(id)?.addEventListener("input", () => renderer.emitFormChange());
  }

  const themeSelect = document.getElementById("appearance-theme") as HTMLSelectElement | null;
  const scaleSelect = document.getElementById("appearance-scale") as HTMLSelectElement | null;
  if (scaleSelect) {
    for (const scale of UI_SCALES) {
      const option = document.createElement("option");
      option.value = String(scale);
      option.textContent = `${scale}%`;
      scaleSelect.appendChild(option);
    }
  }
  const applyAppearance = () => {
    controller.state = {
      ...controller.state,
      appearance: {
        theme: themeSelect?.value === "dark" ? "dark" : "light",
        uiScale: Number(scaleSelect?.value ?? 100),
      },
    };
    saveAppearance(window.localStorage, controller.state.appearance);
    renderer.renderShell(controller.state);
  };
  if (themeSelect) {
    themeSelect.value = controller.state.appearance.theme;
    themeSelect.addEventListener("change", applyAppearance);
  }
  if (scaleSelect) {
    scaleSelect.value = String(controller.state.appearance.uiScale);
    scaleSelect.addEventListener("change", applyAppearance);
  }

  window.addEventListener("beforeunload", (event) => {
    if (controller.state.dirty) {
      event.preventDefault();
    }
  });

  void controller.start();
}

document.addEventListener("DOMContentLoaded", bootstrap);
