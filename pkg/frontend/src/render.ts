/** HTML fragment builders. Pure string-in, string-out so the rendering
 * rules are testable without a browser; main.ts owns the DOM. */

import type { PredictResponse } from "./api.js";
import type { FormDescriptor } from "./form.js";
import type { HistoryRow } from "./history.js";
import { percent } from "./format.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function diseasePicker(diseases: string[], selected: string | null): string {
  if (diseases.length === 0) {
    return (
      '<p class="empty">No prediction models are registered. ' +
      "Train one with the command-line tool, place it in the models directory " +
      "and restart the service.</p>"
    );
  }
  return diseases
    .map((d) => {
      const cls = d === selected ? "disease selected" : "disease";
      return `<button type="button" class="${cls}" data-disease="${escapeHtml(d)}">${escapeHtml(d)}</button>`;
    })
    .join("");
}

export function formFields(descriptor: FormDescriptor): string {
  if (descriptor.kind === "image-upload") {
    const size = descriptor.imageSize ? `${descriptor.imageSize[0]}×${descriptor.imageSize[1]}` : "";
    return (
      '<label class="field file-field"><span>image (PNG or JPEG)</span>' +
      '<input type="file" name="image" accept="image/png,image/jpeg" required>' +
      `<em class="field-error" data-error-for="image"></em></label>` +
      `<img class="preview" alt="selected image preview" hidden>` +
      (size ? `<p class="hint">the service rescales uploads to ${size}</p>` : "")
    );
  }
  return descriptor.fields
    .map((field) => {
      const name = escapeHtml(field.name);
      return (
        `<label class="field"><span>${name}</span>` +
        `<input name="${name}" type="number" step="any" inputmode="decimal" required>` +
        `<em class="field-error" data-error-for="${name}"></em></label>`
      );
    })
    .join("");
}

/** The result panel shows exactly what the service returned; only the
 * probability is restyled, as a percentage with one decimal. */
export function resultPanel(r: PredictResponse): string {
  return (
    '<dl class="result">' +
    `<div><dt>prediction</dt><dd class="result-label">${escapeHtml(r.label)}</dd></div>` +
    `<div><dt>probability</dt><dd class="result-probability" title="${r.probability}">${percent(r.probability)}</dd></div>` +
    `<div><dt>advice</dt><dd class="result-advice">${escapeHtml(r.advice)}</dd></div>` +
    `<p class="model-note">model: ${escapeHtml(r.model_kind)}</p>` +
    "</dl>"
  );
}

export function errorBanner(message: string): string {
  return `<p class="error">${escapeHtml(message)}</p>`;
}

/** Comparison table: one column per input field, then label and
 * probability, one row per submission in submission order. */
export function historyTable(columns: string[], rows: readonly HistoryRow[]): string {
  if (rows.length === 0) {
    return "";
  }
  const head = [...columns, "label", "probability"]
    .map((c) => `<th>${escapeHtml(c)}</th>`)
    .join("");
  const body = rows
    .map((row) => {
      const inputs = row.inputs.map((v) => `<td>${escapeHtml(v)}</td>`).join("");
      return (
        `<tr>${inputs}<td class="history-label">${escapeHtml(row.label)}</td>` +
        `<td class="history-probability">${percent(row.probability)}</td></tr>`
      );
    })
    .join("");
  return (
    '<table class="history"><thead><tr>' +
    head +
    "</tr></thead><tbody>" +
    body +
    "</tbody></table>"
  );
}
