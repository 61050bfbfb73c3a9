// Prior panel model: which sliders each family exposes, their validity
// intervals (mirroring the server's), and how panel state becomes the
// service's prior-configuration payload.

export interface SliderDef {
  key: string;
  label: string;
  min: number;
  max: number;
  step: number;
  value: number;
  /** open interval endpoints are invalid values, not just out-of-range ones */
  openLeft?: boolean;
  openRight?: boolean;
}

export const VARIANCE_FAMILIES = ["PC", "Tnormal", "Hcauchy", "Unif", "Invgamma"] as const;
export const CORRELATION_FAMILIES = ["PC", "Normal", "Beta"] as const;

export type VarFamily = (typeof VARIANCE_FAMILIES)[number];
export type CorFamily = (typeof CORRELATION_FAMILIES)[number];

// widget ranges are finite; validity intervals are checked separately
export function varianceSliders(family: VarFamily): SliderDef[] {
  switch (family) {
    case "PC":
      return [
        { key: "u", label: "u (sd threshold)", min: 0, max: 10, step: 0.05, value: 3, openLeft: true },
        { key: "a", label: "a = P(sd > u)", min: 0, max: 1, step: 0.005, value: 0.05, openLeft: true, openRight: true },
      ];
    case "Tnormal":
      return [
        { key: "mean", label: "mean", min: -5, max: 5, step: 0.1, value: 0 },
        { key: "variance", label: "variance", min: 0, max: 10, step: 0.1, value: 1, openLeft: true },
      ];
    case "Hcauchy":
      return [
        { key: "scale", label: "scale", min: 0, max: 5, step: 0.05, value: 0.5, openLeft: true },
      ];
    case "Unif":
      return [
        { key: "low", label: "low", min: 0, max: 5, step: 0.05, value: 0 },
        { key: "high", label: "high", min: 0, max: 10, step: 0.05, value: 2, openLeft: true },
      ];
    case "Invgamma":
      return [
        { key: "shape", label: "shape", min: 0, max: 10, step: 0.05, value: 2, openLeft: true },
        { key: "scale", label: "scale", min: 0, max: 10, step: 0.05, value: 1, openLeft: true },
      ];
  }
}

export function correlationSliders(family: CorFamily, strategy: 1 | 2 | 3): SliderDef[] {
  if (family === "Normal") {
    return [
      { key: "mean", label: "mean", min: -5, max: 5, step: 0.1, value: 0 },
      { key: "variance", label: "variance", min: 0, max: 20, step: 0.1, value: 5, openLeft: true },
    ];
  }
  if (family === "Beta") {
    return [
      { key: "alpha", label: "alpha", min: 0, max: 10, step: 0.1, value: 2, openLeft: true },
      { key: "beta", label: "beta", min: 0, max: 10, step: 0.1, value: 2, openLeft: true },
    ];
  }
  const rho0: SliderDef = {
    key: "rho0", label: "rho0 (base model)", min: -1, max: 1, step: 0.01, value: -0.2,
    openLeft: true, openRight: true,
  };
  const omega: SliderDef = {
    key: "omega", label: "omega = P(rho < rho0)", min: 0, max: 1, step: 0.01, value: 0.4,
    openLeft: true, openRight: true,
  };
  const u1: SliderDef = {
    key: "u1", label: "u1 (left tail point)", min: -1, max: 1, step: 0.01, value: -0.8,
    openLeft: true, openRight: true,
  };
  const a1: SliderDef = {
    key: "a1", label: "a1 = P(rho < u1)", min: 0, max: 1, step: 0.005, value: 0.1,
    openLeft: true, openRight: true,
  };
  const u2: SliderDef = {
    key: "u2", label: "u2 (right tail point)", min: -1, max: 1, step: 0.01, value: 0.8,
    openLeft: true, openRight: true,
  };
  const a2: SliderDef = {
    key: "a2", label: "a2 = P(rho > u2)", min: 0, max: 1, step: 0.005, value: 0.1,
    openLeft: true, openRight: true,
  };
  // strategy 3 has no omega slider; 1 and 2 expose only their tail
  if (strategy === 1) return [rho0, omega, u1, a1];
  if (strategy === 2) return [rho0, omega, u2, a2];
  return [rho0, u1, a1, u2, a2];
}

export function sliderValueInvalid(def: SliderDef, value: number): string | null {
  if (Number.isNaN(value)) return "not a number";
  if (value < def.min || (def.openLeft && value <= def.min)) {
    return `must be ${def.openLeft ? ">" : ">="} ${def.min}`;
  }
  if (value > def.max || (def.openRight && value >= def.max)) {
    return `must be ${def.openRight ? "<" : "<="} ${def.max}`;
  }
  return null;
}

export interface PriorPanelState {
  varFamily: VarFamily;
  varValues: Record<string, number>;
  var2Family: VarFamily;
  var2Values: Record<string, number>;
  corFamily: CorFamily;
  corStrategy: 1 | 2 | 3;
  corValues: Record<string, number>;
}

export function defaultPriorPanel(): PriorPanelState {
  const varDefaults = Object.fromEntries(varianceSliders("PC").map((s) => [s.key, s.value]));
  const corDefaults = Object.fromEntries(correlationSliders("PC", 1).map((s) => [s.key, s.value]));
  return {
    varFamily: "PC",
    varValues: { ...varDefaults },
    var2Family: "PC",
    var2Values: { ...varDefaults },
    corFamily: "PC",
    corStrategy: 1,
    corValues: { omega: 0.5, rho0: -0.1, u1: -0.95, a1: 0.05, u2: 0.8, a2: 0.1, ...{} },
  };
}

export function variancePar(family: VarFamily, values: Record<string, number>): number[] {
  switch (family) {
    case "PC":
      return [values.u, values.a];
    case "Tnormal":
      return [values.mean, values.variance];
    case "Hcauchy":
      return [values.scale];
    case "Unif":
      return [values.low, values.high];
    case "Invgamma":
      return [values.shape, values.scale];
  }
}

export function correlationPar(
  family: CorFamily,
  strategy: 1 | 2 | 3,
  values: Record<string, number>,
): (number | null)[] {
  if (family === "Normal") return [values.mean, values.variance];
  if (family === "Beta") return [values.alpha, values.beta];
  const slot = (key: string, used: boolean) => (used ? values[key] ?? null : null);
  return [
    strategy,
    values.rho0,
    slot("omega", strategy !== 3),
    slot("u1", strategy !== 2),
    slot("a1", strategy !== 2),
    slot("u2", strategy !== 1),
    slot("a2", strategy !== 1),
  ];
}

export function priorConfigPayload(panel: PriorPanelState): Record<string, unknown> {
  return {
    "var.prior": panel.varFamily,
    "var.par": variancePar(panel.varFamily, panel.varValues),
    "var2.prior": panel.var2Family,
    "var2.par": variancePar(panel.var2Family, panel.var2Values),
    "cor.prior": panel.corFamily,
    "cor.par": correlationPar(panel.corFamily, panel.corStrategy, panel.corValues),
  };
}

export function previewRequest(
  panel: PriorPanelState,
  which: "var" | "var2" | "cor",
): { kind: "variance" | "correlation"; prior: string; par: (number | null)[] } {
  if (which === "cor") {
    return {
      kind: "correlation",
      prior: panel.corFamily,
      par: correlationPar(panel.corFamily, panel.corStrategy, panel.corValues),
    };
  }
  const family = which === "var" ? panel.varFamily : panel.var2Family;
  const values = which === "var" ? panel.varValues : panel.var2Values;
  return { kind: "variance", prior: family, par: variancePar(family, values) };
}
