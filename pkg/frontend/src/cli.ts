// Builds the command-line invocation equivalent to the current panel state,
// shown alongside each result view.

import type { ModelPanelState } from "./state.js";
import type { PriorPanelState } from "./priors.js";
import { correlationPar, variancePar } from "./priors.js";

function joinPar(par: (number | null)[]): string {
  return par.map((v) => (v === null ? "_" : String(v))).join(",");
}

export function fitCommand(
  datasetName: string | null,
  model: ModelPanelState,
  priors: PriorPanelState,
): string {
  const parts = ["dtameta fit"];
  parts.push(datasetName ? `--builtin ${datasetName}` : "--data data.csv");
  parts.push(`--model-type ${model.modelType}`);
  if (model.link !== "logit") parts.push(`--link ${model.link}`);
  if (model.modality) parts.push(`--modality ${model.modality}`);
  if (model.covariates.length) parts.push(`--covariates ${model.covariates.join(",")}`);
  if (model.quantiles.length) parts.push(`--quantiles ${model.quantiles.join(",")}`);
  parts.push(`--var-prior ${priors.varFamily}`);
  parts.push(`--var-par ${joinPar(variancePar(priors.varFamily, priors.varValues))}`);
  parts.push(`--var2-prior ${priors.var2Family}`);
  parts.push(`--var2-par ${joinPar(variancePar(priors.var2Family, priors.var2Values))}`);
  parts.push(`--cor-prior ${priors.corFamily}`);
  parts.push(
    `--cor-par ${joinPar(correlationPar(priors.corFamily, priors.corStrategy, priors.corValues))}`,
  );
  parts.push(`--nsample ${model.nsample}`);
  parts.push(`--seed ${model.seed}`);
  parts.push("--out fit.json");
  return parts.join(" ");
}

export function plotCommand(
  plot: "sroc" | "forest" | "crosshair",
  options: Record<string, string | number> = {},
): string {
  const parts = [`dtameta ${plot} --fit fit.json`];
  for (const [key, value] of Object.entries(options)) {
    parts.push(`--${key} ${value}`);
  }
  return parts.join(" ");
}

export function fittedCommand(accuracyType: string): string {
  return `dtameta fitted --fit fit.json --accuracy-type ${accuracyType}`;
}
