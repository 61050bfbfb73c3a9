import { describe, expect, it } from "vitest";

import { UiState } from "../src/state.js";

describe("run gating", () => {
  it("run is disabled until a dataset is selected and priors validate", () => {
    const state = new UiState();
    expect(state.canRun()).toBe(false);
    state.datasetId = "telomerase";
    expect(state.canRun()).toBe(true);
    state.priorValid = false;
    expect(state.canRun()).toBe(false);
    state.priorValid = true;
    state.fitRunning = true;
    expect(state.canRun()).toBe(false);
  });
});

describe("staleness", () => {
  it("panel changes after a run flag the results as stale until rerun", () => {
    const state = new UiState();
    state.datasetId = "telomerase";
    state.touchConfig();
    expect(state.stale).toBe(false); // nothing run yet: nothing to go stale

    state.markRunStarted("abc");
    state.markRunFinished();
    expect(state.stale).toBe(false);

    state.modelPanel.link = "probit";
    state.touchConfig();
    expect(state.stale).toBe(true);

    state.markRunStarted("def");
    state.markRunFinished();
    expect(state.stale).toBe(false);
  });
});

describe("fit payload", () => {
  it("mirrors the panels into the service body", () => {
    const state = new UiState();
    state.datasetId = "telomerase";
    state.modelPanel.modelType = 2;
    state.modelPanel.quantiles = [0.125, 0.875];
    state.modelPanel.nsample = 1234;
    const body = state.fitPayload() as {
      dataset_id: string;
      model: { model_type: number; quantiles: number[]; nsample: number };
      priors: Record<string, unknown>;
    };
    expect(body.dataset_id).toBe("telomerase");
    expect(body.model.model_type).toBe(2);
    expect(body.model.quantiles).toEqual([0.125, 0.875]);
    expect(body.priors["var.prior"]).toBe("PC");
    expect(body.priors["cor.par"]).toEqual([1, -0.1, 0.5, -0.95, 0.05, null, null]);
  });
});
