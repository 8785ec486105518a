import { FeatureValues, ModelInfo, Prediction, WhatIfResult } from "./types.js";

/** Session state of the console. Results are cleared whenever an input
 * changes, so the screen never shows a prediction for stale inputs; feature
 * values render back into the form exactly as entered. */
export class SessionState {
  models: ModelInfo[] = [];
  selectedState = "";
  selectedKind = "";
  features: FeatureValues = {};
  rawInputs: Record<string, string> = {};
  prediction: Prediction | null = null;
  whatif: WhatIfResult | null = null;
  error = "";
  fieldErrors: Record<string, string> = {};

  current(): ModelInfo | undefined {
    return this.models.find(
      (m) => m.state === this.selectedState && m.kind === this.selectedKind,
    );
  }

  selectModel(state: string, kind: string): void {
    this.selectedState = state;
    this.selectedKind = kind;
    this.features = {};
    this.rawInputs = {};
    this.clearResults();
  }

  /** Record a form edit; raw text is preserved verbatim for re-rendering. */
  setFeature(name: string, raw: string, kind: "nominal" | "numeric"): void {
    this.rawInputs[name] = raw;
    const trimmed = raw.trim();
    if (trimmed === "") {
      this.features[name] = null;
    } else if (kind === "numeric") {
      const parsed = Number(trimmed);
      this.features[name] = Number.isFinite(parsed) ? parsed : trimmed;
    } else {
      this.features[name] = trimmed;
    }
    this.clearResults();
  }

  clearResults(): void {
    this.prediction = null;
    this.whatif = null;
    this.error = "";
    this.fieldErrors = {};
  }

  /** Field-level hint from a validation message naming the feature. */
  noteServiceError(detail: string): void {
    this.error = detail;
    const match = detail.match(/feature '([^']+)'/);
    if (match) {
      this.fieldErrors[match[1]] = detail;
    }
  }
}

/** Columns are identical when every (class, p) pair matches. */
export function allColumnsIdentical(result: WhatIfResult): boolean {
  if (result.rows.length < 2) return true;
  const key = (p: Prediction) =>
    JSON.stringify(p.distribution.map((d) => [d.class, d.p]));
  const first = key(result.rows[0]);
  return result.rows.every((row) => key(row) === first);
}
