/** DOM wiring. State and rendering rules live in the sibling modules;
 * this file only moves data between them and the page. */

import { fetchModels, postImage, postTabular, type ModelInfo, type PredictOutcome } from "./api.js";
import { buildBody, describeForm, type FormDescriptor } from "./form.js";
import { SequenceGate, WhatIfHistory } from "./history.js";
import { diseasePicker, errorBanner, formFields, historyTable, resultPanel } from "./render.js";

const pickerEl = document.getElementById("picker") as HTMLElement;
const formEl = document.getElementById("predict-form") as HTMLFormElement;
const fieldsEl = document.getElementById("fields") as HTMLElement;
const submitEl = document.getElementById("submit") as HTMLButtonElement;
const resultEl = document.getElementById("result") as HTMLElement;
const historyEl = document.getElementById("history") as HTMLElement;
const clearEl = document.getElementById("clear-history") as HTMLButtonElement;
const statusEl = document.getElementById("status") as HTMLElement;

let models: ModelInfo[] = [];
let descriptor: FormDescriptor | null = null;
const gate = new SequenceGate();
const history = new WhatIfHistory();
let inFlight = false;
let pendingResubmit = false;
let hasResult = false;

function setStatus(text: string): void {
  statusEl.textContent = text;
}

function clearFieldErrors(): void {
  for (const el of fieldsEl.querySelectorAll<HTMLElement>(".field-error")) {
    el.textContent = "";
  }
}

function showFieldError(name: string, message: string): boolean {
  const slot = fieldsEl.querySelector<HTMLElement>(`[data-error-for="${CSS.escape(name)}"]`);
  if (!slot) {
    return false;
  }
  slot.textContent = message;
  return true;
}

function historyColumns(d: FormDescriptor): string[] {
  return d.kind === "image-upload" ? ["image"] : d.fields.map((f) => f.name);
}

function renderHistory(): void {
  if (!descriptor) {
    historyEl.innerHTML = "";
    clearEl.hidden = true;
    return;
  }
  historyEl.innerHTML = historyTable(historyColumns(descriptor), history.list());
  clearEl.hidden = history.list().length === 0;
}

function selectDisease(disease: string): void {
  const model = models.find((m) => m.disease === disease);
  if (!model) {
    return;
  }
  descriptor = describeForm(model);
  history.clear();
  hasResult = false;
  pickerEl.innerHTML = diseasePicker(models.map((m) => m.disease), disease);
  fieldsEl.innerHTML = formFields(descriptor);
  formEl.hidden = false;
  resultEl.innerHTML = "";
  renderHistory();
  setStatus("");
}

function collectInputs(): Record<string, string> {
  const raw: Record<string, string> = {};
  for (const input of fieldsEl.querySelectorAll<HTMLInputElement>("input[type=number]")) {
    raw[input.name] = input.value;
  }
  return raw;
}

function selectedFile(): File | null {
  const input = fieldsEl.querySelector<HTMLInputElement>("input[type=file]");
  return input?.files?.[0] ?? null;
}

async function submit(): Promise<void> {
  if (!descriptor) {
    return;
  }
  if (inFlight) {
    // one request per form at a time; remember that the inputs changed
    pendingResubmit = true;
    return;
  }
  clearFieldErrors();
  setStatus("");

  let send: (() => Promise<PredictOutcome>) | null = null;
  let inputs: string[] = [];
  if (descriptor.kind === "image-upload") {
    const file = selectedFile();
    if (!file) {
      showFieldError("image", "choose an image first");
      return;
    }
    inputs = [file.name];
    const d = descriptor;
    send = () => postImage(d.disease, file);
  } else {
    const raw = collectInputs();
    const built = buildBody(descriptor, raw);
    if (!built.ok) {
      for (const problem of built.problems) {
        showFieldError(problem.field, problem.message);
      }
      return;
    }
    inputs = descriptor.fields.map((f) => raw[f.name] ?? "");
    const d = descriptor;
    send = () => postTabular(d.disease, built.body);
  }

  const seq = gate.begin();
  inFlight = true;
  submitEl.disabled = true;
  try {
    const outcome = await send();
    if (!gate.accept(seq)) {
      return; // a newer submission already landed
    }
    if (outcome.ok) {
      hasResult = true;
      resultEl.innerHTML = resultPanel(outcome.response);
      history.append({
        seq,
        inputs,
        label: outcome.response.label,
        probability: outcome.response.probability,
      });
      renderHistory();
    } else {
      const unplaced = (outcome.failure.fields ?? []).filter(
        (name) => !showFieldError(name, "the service rejected this value"),
      );
      const detail = unplaced.length ? ` (${unplaced.join(", ")})` : "";
      resultEl.innerHTML = errorBanner(outcome.failure.error + detail);
    }
  } catch (err) {
    if (gate.accept(seq)) {
      resultEl.innerHTML = errorBanner(`request failed: ${err instanceof Error ? err.message : err}`);
    }
  } finally {
    inFlight = false;
    submitEl.disabled = false;
    if (pendingResubmit) {
      pendingResubmit = false;
      void submit();
    }
  }
}

pickerEl.addEventListener("click", (event) => {
  const target = (event.target as HTMLElement).closest<HTMLElement>("[data-disease]");
  if (target?.dataset.disease) {
    selectDisease(target.dataset.disease);
  }
});

formEl.addEventListener("submit", (event) => {
  event.preventDefault();
  void submit();
});

fieldsEl.addEventListener("change", (event) => {
  const target = event.target as HTMLInputElement;
  if (target.type === "file") {
    const preview = fieldsEl.querySelector<HTMLImageElement>("img.preview");
    const file = selectedFile();
    if (preview && file) {
      preview.src = URL.createObjectURL(file);
      preview.hidden = false;
    }
  }
  // what-if flow: once a result is on screen, edits resubmit on their own
  if (hasResult) {
    void submit();
  }
});

clearEl.addEventListener("click", () => {
  history.clear();
  renderHistory();
});

async function start(): Promise<void> {
  try {
    models = await fetchModels();
  } catch (err) {
    pickerEl.innerHTML = errorBanner(
      `cannot reach the prediction service: ${err instanceof Error ? err.message : err}`,
    );
    return;
  }
  pickerEl.innerHTML = diseasePicker(models.map((m) => m.disease), null);
}

void start();
