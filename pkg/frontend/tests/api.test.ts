import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import type { FitStatus, PreviewTable } from "../src/types.js";
import { fixture, replayFetch } from "./helpers.js";

describe("prior preview pass-through", () => {
  it("returns the service table verbatim, pointwise", async () => {
    const recorded = fixture<PreviewTable>("preview_pc_variance.json");
    const { fetch } = replayFetch({ "/priors/preview": recorded });
    const api = new ApiClient("", fetch);
    const table = await api.previewPrior({ kind: "variance", prior: "PC", par: [1, 0.05] });
    expect(table.x.length).toBe(401);
    expect(table.x.length).toBe(recorded.x.length);
    for (let i = 0; i < recorded.x.length; i++) {
      expect(table.x[i]).toBe(recorded.x[i]);
      expect(table.density[i]).toBe(recorded.density[i]);
    }
  });

  it("surfaces 400 details as ApiError", async () => {
    const { fetch } = replayFetch({
      "/priors/preview": { status: 400, body: { detail: "infeasible contrast: strategy 1" } },
    });
    const api = new ApiClient("", fetch);
    await expect(
      api.previewPrior({ kind: "correlation", prior: "PC", par: [1, -0.2, 0.4, -0.8, 0.6, null, null] }),
    ).rejects.toMatchObject({ status: 400, detail: expect.stringContaining("infeasible") });
  });
});

describe("fit lifecycle client", () => {
  it("reads recorded fit status and summary", async () => {
    const recorded = fixture<FitStatus>("telomerase_fit_status.json");
    const { fetch } = replayFetch({ "/fits/fixture": recorded });
    const api = new ApiClient("", fetch);
    const doc = await api.fitStatus("fixture");
    expect(doc.status).toBe("done");
    expect(doc.summary?.fixed.map((e) => e.name)).toEqual(["mu", "nu"]);
    expect(doc.summary?.mlik).toBeLessThan(-60);
  });

  it("propagates 404 for unknown fits", async () => {
    const { fetch } = replayFetch({});
    const api = new ApiClient("", fetch);
    await expect(api.fitStatus("nope")).rejects.toBeInstanceOf(ApiError);
  });
});
