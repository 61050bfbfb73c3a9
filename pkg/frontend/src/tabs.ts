// Result tab renderers. Every cell is a value from a service response.

import type { EffectEntry, FitSummary, FittedRow } from "./types.js";

function fmt(v: number, digits = 3): string {
  return v.toFixed(digits);
}

function quantHeaders(entries: { quantiles: Record<string, number> }[]): string[] {
  if (!entries.length) return [];
  return Object.keys(entries[0].quantiles).sort((a, b) => Number(a) - Number(b));
}

export function effectTable(doc: Document, entries: EffectEntry[] | FittedRow[]): HTMLTableElement {
  const table = doc.createElement("table");
  table.className = "stat-table";
  const probs = quantHeaders(entries);
  const head = table.insertRow();
  for (const h of ["", "mean", "sd", ...probs.map((p) => `${p}quant`)]) {
    const cell = doc.createElement("th");
    cell.textContent = h;
    head.appendChild(cell);
  }
  for (const entry of entries) {
    const row = table.insertRow();
    row.insertCell().textContent = entry.name;
    row.insertCell().textContent = fmt(entry.mean);
    row.insertCell().textContent = fmt(entry.sd);
    for (const p of probs) row.insertCell().textContent = fmt(entry.quantiles[p]);
  }
  return table;
}

/** The summary tab: fixed effects, hyperparameters, summary points, scalars. */
export function renderSummaryTab(doc: Document, summary: FitSummary): HTMLElement {
  const root = doc.createElement("div");
  root.id = "summary-tab";

  const fixedTitle = doc.createElement("h3");
  fixedTitle.textContent = "Fixed effects";
  root.appendChild(fixedTitle);
  root.appendChild(effectTable(doc, summary.fixed));

  const hyperTitle = doc.createElement("h3");
  hyperTitle.textContent = "Model hyperparameters";
  root.appendChild(hyperTitle);
  root.appendChild(effectTable(doc, summary.hyper));

  if (summary.summary_points.length) {
    const spTitle = doc.createElement("h3");
    spTitle.textContent = "Summary points";
    root.appendChild(spTitle);
    const spTable = effectTable(doc, summary.summary_points);
    spTable.id = "summary-points";
    root.appendChild(spTable);
  }

  for (const entry of summary.mu_nu_correlation) {
    const p = doc.createElement("p");
    p.textContent = `Correlation between ${entry.mu} and ${entry.nu} is ${entry.value.toFixed(4)}.`;
    root.appendChild(p);
  }
  const mlik = doc.createElement("p");
  mlik.id = "mlik-line";
  mlik.textContent = `Marginal log-likelihood: ${summary.mlik.toFixed(4)}`;
  root.appendChild(mlik);
  const names = doc.createElement("p");
  names.textContent = `Variable names for marginal plotting: ${summary.variable_names.join(", ")}`;
  root.appendChild(names);
  return root;
}

export function renderFittedTab(
  doc: Document,
  summary: FitSummary,
  accuracyType: string,
): HTMLElement {
  const root = doc.createElement("div");
  root.id = "fitted-tab";
  const rows = summary.fitted[accuracyType];
  if (!rows) {
    root.textContent = `accuracy type ${accuracyType} not available`;
    return root;
  }
  root.appendChild(effectTable(doc, rows));
  return root;
}

/** Marginal curves come straight from the summary's density fields. */
export function marginalCurve(
  summary: FitSummary,
  name: string,
): { x: number[]; y: number[] } | null {
  const hyperNames: Record<string, string> = { var1: "var_phi", var2: "var_psi", rho: "cor" };
  const pool: EffectEntry[] = [...summary.fixed, ...summary.hyper];
  const target = hyperNames[name] ?? name;
  for (const entry of pool) {
    if (entry.name === target && entry.density) return entry.density;
  }
  return null;
}
