// Client-side run state: what is selected, whether results are stale, and
// when the Run action is allowed.

import type { PriorPanelState } from "./priors.js";
import { defaultPriorPanel, priorConfigPayload } from "./priors.js";

export interface ModelPanelState {
  modelType: 1 | 2 | 3 | 4;
  link: "logit" | "probit" | "cloglog";
  quantiles: number[];
  nsample: number;
  seed: number;
  modality: string | null;
  covariates: string[];
}

export function defaultModelPanel(): ModelPanelState {
  return {
    modelType: 1,
    link: "logit",
    quantiles: [],
    nsample: 5000,
    seed: 0,
    modality: null,
    covariates: [],
  };
}

export type ResultTab =
  | "welcome"
  | "data"
  | "summary"
  | "marginals"
  | "fitted"
  | "forest"
  | "sroc"
  | "crosshair";

export class UiState {
  datasetId: string | null = null;
  priorPanel: PriorPanelState = defaultPriorPanel();
  modelPanel: ModelPanelState = defaultModelPanel();
  activeFitId: string | null = null;
  activeTab: ResultTab = "welcome";
  /** set when any panel changed after the last completed run */
  stale = false;
  priorValid = true;
  fitRunning = false;

  canRun(): boolean {
    return this.datasetId !== null && this.priorValid && !this.fitRunning;
  }

  /** any configuration change after a run flags the results as stale */
  touchConfig(): void {
    if (this.activeFitId !== null) {
      this.stale = true;
    }
  }

  markRunStarted(fitId: string): void {
    this.activeFitId = fitId;
    this.fitRunning = true;
  }

  markRunFinished(): void {
    this.fitRunning = false;
    this.stale = false;
  }

  fitPayload(): Record<string, unknown> {
    return {
      dataset_id: this.datasetId,
      model: {
        model_type: this.modelPanel.modelType,
        link: this.modelPanel.link,
        modality: this.modelPanel.modality,
        covariates: this.modelPanel.covariates,
        quantiles: this.modelPanel.quantiles.filter((q) => q > 0 && q < 1),
        nsample: this.modelPanel.nsample,
        seed: this.modelPanel.seed,
      },
      priors: priorConfigPayload(this.priorPanel),
    };
  }
}
