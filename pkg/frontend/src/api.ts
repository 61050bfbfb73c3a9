import type {
  BuiltinDataset,
  FitStatus,
  ForestJson,
  GeometryItem,
  PreviewTable,
  PriorBounds,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(detail);
  }
}

/** Thin typed client; the fetch implementation is injectable for tests. */
export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    if (!resp.ok) {
      let detail = `${resp.status}`;
      try {
        const body = await resp.json();
        detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body);
      } catch {
        /* body not JSON */
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  builtinDatasets(): Promise<BuiltinDataset[]> {
    return this.request("/datasets/builtin");
  }

  priorBounds(): Promise<PriorBounds> {
    return this.request("/priors/bounds");
  }

  uploadDataset(csv: string, modality?: string): Promise<{ dataset_id: string }> {
    const q = modality ? `?modality=${encodeURIComponent(modality)}` : "";
    return this.request(`/datasets${q}`, { method: "POST", body: csv });
  }

  /** The preview table is rendered verbatim: no rescaling, no resampling. */
  previewPrior(body: {
    kind: "variance" | "correlation";
    prior: string;
    par: (number | null)[];
    grid_points?: number;
  }): Promise<PreviewTable> {
    return this.request("/priors/preview", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  submitFit(body: unknown): Promise<{ fit_id: string; status: string }> {
    return this.request("/fits", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  fitStatus(fitId: string): Promise<FitStatus> {
    return this.request(`/fits/${fitId}`);
  }

  geometry(fitId: string, params: Record<string, string | number | boolean>): Promise<{
    plot: string;
    geometry: GeometryItem[] | ForestJson;
  }> {
    const q = new URLSearchParams(
      Object.entries(params).map(([k, v]) => [k, String(v)]),
    ).toString();
    return this.request(`/fits/${fitId}/geometry?${q}`);
  }

  async svg(fitId: string, params: Record<string, string | number>): Promise<string> {
    const q = new URLSearchParams(
      Object.entries(params).map(([k, v]) => [k, String(v)]),
    ).toString();
    const resp = await this.fetchImpl(`${this.baseUrl}/fits/${fitId}/svg?${q}`);
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    return await resp.text();
  }

  async fitJson(fitId: string): Promise<string> {
    const resp = await this.fetchImpl(`${this.baseUrl}/fits/${fitId}/json`);
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    return await resp.text();
  }
}
