import {
  AdvisorApi,
  ModelInfo,
  PredictRequest,
  Prediction,
  ServiceError,
  WhatIfResult,
} from "./types.js";

async function request<T>(url: string, init: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (typeof body?.detail === "string") detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ServiceError(response.status, detail);
  }
  return response.json() as Promise<T>;
}

export function createHttpApi(baseUrl = ""): AdvisorApi {
  const headers = { "Content-Type": "application/json" };
  return {
    listModels: () => request<ModelInfo[]>(`${baseUrl}/models`, { method: "GET" }),
    predict: (req: PredictRequest, signal?: AbortSignal) =>
      request<Prediction>(`${baseUrl}/predict`, {
        method: "POST",
        headers,
        body: JSON.stringify(req),
        signal,
      }),
    whatif: (req, signal?: AbortSignal) =>
      request<WhatIfResult>(`${baseUrl}/whatif`, {
        method: "POST",
        headers,
        body: JSON.stringify(req),
        signal,
      }),
  };
}
