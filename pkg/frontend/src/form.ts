/** Form descriptors derived from the /models listing.
 *
 * Nothing here is hard-coded per disease: the service schema is the only
 * source of field names and their order, so a model added server-side
 * shows up in the UI without any change on this side.
 */

import type { ModelInfo } from "./api.js";

export type InputKind = "numeric-form" | "image-upload";

export interface FormField {
  name: string;
  /* every tabular feature is a required finite number; the service
     enforces the same rule, this just catches it before the round trip */
  kind: "number";
  required: true;
}

export interface FormDescriptor {
  disease: string;
  kind: InputKind;
  fields: FormField[]; // ordered exactly as the service schema lists them
  classNames: string[];
  imageSize: [number, number] | null;
}

export function describeForm(model: ModelInfo): FormDescriptor {
  return {
    disease: model.disease,
    kind: model.input_kind === "image" ? "image-upload" : "numeric-form",
    fields: model.feature_names.map((name) => ({ name, kind: "number", required: true })),
    classNames: model.class_names,
    imageSize: model.image_size,
  };
}

export interface FieldProblem {
  field: string;
  message: string;
}

export type BodyResult =
  | { ok: true; body: Record<string, number> }
  | { ok: false; problems: FieldProblem[] };

/** Turn raw input strings into the JSON body the service expects,
 * or a list of per-field problems. Field order follows the descriptor. */
export function buildBody(descriptor: FormDescriptor, raw: Record<string, string>): BodyResult {
  const problems: FieldProblem[] = [];
  const body: Record<string, number> = {};
  for (const field of descriptor.fields) {
    const text = (raw[field.name] ?? "").trim();
    if (text === "") {
      problems.push({ field: field.name, message: "enter a value" });
      continue;
    }
    const value = Number(text);
    if (!Number.isFinite(value)) {
      problems.push({ field: field.name, message: "must be a number" });
      continue;
    }
    body[field.name] = value;
  }
  return problems.length ? { ok: false, problems } : { ok: true, body };
}
