/** Types and calls for the prediction service's JSON contract. */

export interface ModelInfo {
  disease: string;
  model_kind: string;
  input_kind: "tabular" | "image";
  feature_names: string[];
  class_names: string[];
  image_size: [number, number] | null;
}

export interface PredictResponse {
  disease: string;
  label: string;
  probability: number;
  advice: string;
  model_kind: string;
}

export interface ApiFailure {
  error: string;
  fields?: string[];
}

export type PredictOutcome =
  | { ok: true; response: PredictResponse }
  | { ok: false; failure: ApiFailure; status: number };

export async function fetchModels(base = ""): Promise<ModelInfo[]> {
  const res = await fetch(`${base}/models`);
  if (!res.ok) {
    throw new Error(`could not list models: HTTP ${res.status}`);
  }
  return res.json();
}

export async function postTabular(
  disease: string,
  body: Record<string, number>,
  base = "",
): Promise<PredictOutcome> {
  const res = await fetch(`${base}/predict/${encodeURIComponent(disease)}`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  return outcomeFrom(res);
}

export async function postImage(disease: string, file: File, base = ""): Promise<PredictOutcome> {
  const data = new FormData();
  data.append("file", file);
  const res = await fetch(`${base}/predict/${encodeURIComponent(disease)}`, {
    method: "POST",
    body: data,
  });
  return outcomeFrom(res);
}

async function outcomeFrom(res: Response): Promise<PredictOutcome> {
  let payload: unknown;
  try {
    payload = await res.json();
  } catch {
    payload = { error: `the service answered HTTP ${res.status} without a JSON body` };
  }
  if (res.ok) {
    return { ok: true, response: payload as PredictResponse };
  }
  const failure =
    payload && typeof (payload as ApiFailure).error === "string"
      ? (payload as ApiFailure)
      : { error: `the service answered HTTP ${res.status}` };
  return { ok: false, failure, status: res.status };
}
