import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { FetchLike } from "../src/api.js";

const here = dirname(fileURLToPath(import.meta.url));

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, "fixtures", name), "utf-8")) as T;
}

/** fetch double that replays recorded responses keyed by path prefix */
export function replayFetch(
  routes: Record<string, unknown | { status: number; body: unknown }>,
): { fetch: FetchLike; calls: string[] } {
  const calls: string[] = [];
  const impl: FetchLike = async (input) => {
    calls.push(input);
    for (const [prefix, payload] of Object.entries(routes)) {
      if (input.startsWith(prefix)) {
        const wrapped = payload as { status?: number; body?: unknown };
        const status = wrapped && typeof wrapped.status === "number" ? wrapped.status : 200;
        const body = wrapped && typeof wrapped.status === "number" ? wrapped.body : payload;
        return new Response(JSON.stringify(body), {
          status,
          headers: { "content-type": "application/json" },
        });
      }
    }
    return new Response(JSON.stringify({ detail: `no route for ${input}` }), { status: 404 });
  };
  return { fetch: impl, calls };
}
