// Payload shapes of the analysis service. Every number the UI shows comes
// from one of these responses; the client never computes statistics itself.

export interface PreviewTable {
  x: number[];
  density: number[];
}

export interface QuantileMap {
  [prob: string]: number;
}

export interface EffectEntry {
  name: string;
  mean: number;
  sd: number;
  quantiles: QuantileMap;
  density?: { x: number[]; y: number[] };
}

export interface FitSummary {
  model: {
    model_type: number;
    link: string;
    modality: string | null;
    covariates: string[];
    quantiles: number[];
    nsample: number;
    seed: number;
  };
  priors: Record<string, unknown>;
  dataset: { studies: StudyJson[] };
  fixed: EffectEntry[];
  hyper: EffectEntry[];
  summary_points: EffectEntry[];
  mlik: number;
  mu_nu_correlation: { mu: string; nu: string; value: number }[];
  grid_size: number;
  variable_names: string[];
  fitted: Record<string, FittedRow[]>;
}

export interface StudyJson {
  studyname: string;
  TP: number;
  FP: number;
  TN: number;
  FN: number;
  modality?: string;
  covariates: Record<string, number>;
}

export interface FittedRow {
  name: string;
  mean: number;
  sd: number;
  quantiles: QuantileMap;
}

export interface FitStatus {
  fit_id: string;
  status: "queued" | "running" | "done" | "failed";
  error?: string;
  summary?: FitSummary;
}

export interface GeometryItem {
  kind: string;
  points: [number, number][];
  style: Record<string, unknown>;
}

export interface ForestRowJson {
  label: string;
  data_text: string;
  estimate: number;
  lo: number;
  hi: number;
  size: number;
  is_summary: boolean;
  level: string | null;
}

export interface ForestJson {
  kind: "forest";
  accuracy_type: string;
  label: string;
  intervals: number[];
  cut: number[];
  rows: ForestRowJson[];
}

export interface BuiltinDataset {
  name: string;
  n_studies: number;
  modality: string | null;
  covariates: string[];
  csv: string;
  data: { studies: StudyJson[] };
}

export type PriorBounds = Record<string, Record<string, [number | null, number | null]>>;
