// Wire types of the advisor service; field names match the HTTP contract.

export interface FeatureSchema {
  name: string;
  kind: "nominal" | "numeric";
  values: string[];
}

export interface ModelInfo {
  state: string;
  kind: string;
  attributes: string[];
  feature_schema: FeatureSchema[];
  classes: string[];
  cv_recall: number | null;
  trained_at: string | null;
}

export interface DistributionEntry {
  class: string;
  p: number;
}

export interface Prediction {
  distribution: DistributionEntry[];
  explanation: string[];
}

export interface WhatIfRow extends Prediction {
  value: string;
}

export interface WhatIfResult {
  vary: string;
  base: Prediction;
  rows: WhatIfRow[];
}

export type FeatureValues = Record<string, string | number | null>;

export interface PredictRequest {
  state: string;
  kind: string;
  features: FeatureValues;
}

export class ServiceError extends Error {
  constructor(public status: number, public detail: string) {
    super(detail);
  }
}

export interface AdvisorApi {
  listModels(): Promise<ModelInfo[]>;
  predict(req: PredictRequest, signal?: AbortSignal): Promise<Prediction>;
  whatif(req: PredictRequest & { vary: string }, signal?: AbortSignal): Promise<WhatIfResult>;
}
