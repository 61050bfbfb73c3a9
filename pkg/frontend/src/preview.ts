// Debounced prior preview: at most one in-flight request, newer panel states
// cancel older responses, and server-side infeasibility surfaces as an
// inline Invalid marker while the last valid plot stays up.

import { ApiClient, ApiError } from "./api.js";
import type { PreviewTable } from "./types.js";

export interface PreviewOutcome {
  table?: PreviewTable;
  invalid?: string;
}

/** Toggle an inline Invalid! marker; the tooltip carries the server detail. */
export function applyOutcomeToMarker(marker: HTMLElement, outcome: PreviewOutcome): boolean {
  if (outcome.invalid) {
    marker.style.display = "inline";
    marker.title = outcome.invalid;
    return false;
  }
  marker.style.display = "none";
  marker.title = "";
  return true;
}

export class PreviewController {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private requestSeq = 0;
  lastValid: PreviewTable | null = null;

  constructor(
    private api: ApiClient,
    private onResult: (outcome: PreviewOutcome) => void,
    private debounceMs = 150,
  ) {}

  /** schedule a preview; earlier pending requests are superseded */
  schedule(body: { kind: "variance" | "correlation"; prior: string; par: (number | null)[] }): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.fire(body);
    }, this.debounceMs);
  }

  async fire(body: {
    kind: "variance" | "correlation";
    prior: string;
    par: (number | null)[];
  }): Promise<void> {
    const seq = ++this.requestSeq;
    try {
      const table = await this.api.previewPrior(body);
      if (seq !== this.requestSeq) return; // superseded while in flight
      this.lastValid = table;
      this.onResult({ table });
    } catch (err) {
      if (seq !== this.requestSeq) return;
      if (err instanceof ApiError && err.status === 400) {
        this.onResult({ invalid: err.detail, table: this.lastValid ?? undefined });
      } else {
        // network trouble: keep the last valid plot, no invalid marker
        this.onResult({ table: this.lastValid ?? undefined });
      }
    }
  }
}
