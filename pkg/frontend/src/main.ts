// Single-page app wiring: data/prior/model control panels on the left,
// result tabs on the right, Run button on top. Tab state lives in the URL
// fragment; polling runs at 500 ms while a fit executes.

import { ApiClient } from "./api.js";
import { fitCommand, fittedCommand, plotCommand } from "./cli.js";
import { renderDensity, renderForest, renderRocGeometry } from "./plot.js";
import { PreviewController, applyOutcomeToMarker } from "./preview.js";
import {
  CORRELATION_FAMILIES,
  VARIANCE_FAMILIES,
  correlationSliders,
  previewRequest,
  sliderValueInvalid,
  varianceSliders,
  type CorFamily,
  type SliderDef,
  type VarFamily,
} from "./priors.js";
import { UiState, type ResultTab } from "./state.js";
import { marginalCurve, renderFittedTab, renderSummaryTab } from "./tabs.js";
import type { BuiltinDataset, FitSummary, ForestJson, GeometryItem } from "./types.js";

const api = new ApiClient("");
const state = new UiState();
let builtins: BuiltinDataset[] = [];
let summary: FitSummary | null = null;
let pollTimer: ReturnType<typeof setInterval> | null = null;

function $(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element ${id}`);
  return node;
}

function setStatus(text: string, kind: "idle" | "busy" | "error" = "idle"): void {
  const badge = $("status-badge");
  badge.textContent = text;
  badge.className = `badge ${kind}`;
}

function updateRunButton(): void {
  ($("run-button") as HTMLButtonElement).disabled = !state.canRun();
  $("stale-badge").style.display = state.stale ? "inline-block" : "none";
  const exportDisabled = !(state.activeFitId && summary);
  ($("export-json") as HTMLButtonElement).disabled = exportDisabled;
  ($("export-svg") as HTMLButtonElement).disabled = exportDisabled;
}

// ---------------------------------------------------------------- data panel

async function initDataPanel(): Promise<void> {
  builtins = await api.builtinDatasets();
  const select = $("dataset-select") as HTMLSelectElement;
  for (const ds of builtins) {
    const opt = document.createElement("option");
    opt.value = ds.name;
    opt.textContent = `${ds.name} (${ds.n_studies} studies)`;
    select.appendChild(opt);
  }
  select.addEventListener("change", () => {
    state.datasetId = select.value || null;
    const ds = builtins.find((b) => b.name === select.value);
    state.modelPanel.modality = ds?.modality ?? null;
    state.modelPanel.covariates = ds?.covariates ?? [];
    state.touchConfig();
    renderDataTab();
    updateRunButton();
  });
  const upload = $("upload-input") as HTMLTextAreaElement;
  $("upload-button").addEventListener("click", () => {
    void (async () => {
      try {
        const doc = await api.uploadDataset(upload.value);
        state.datasetId = doc.dataset_id;
        state.touchConfig();
        setStatus(`uploaded dataset ${doc.dataset_id}`);
        updateRunButton();
      } catch (err) {
        setStatus(String(err), "error");
      }
    })();
  });
}

function renderDataTab(): void {
  const target = $("tab-data");
  target.innerHTML = "";
  const ds = builtins.find((b) => b.name === state.datasetId);
  if (!ds) {
    target.textContent = "No dataset selected.";
    return;
  }
  const pre = document.createElement("pre");
  pre.textContent = ds.csv;
  target.appendChild(pre);
}

// --------------------------------------------------------------- prior panel

type PriorBlock = "var" | "var2" | "cor";
const previewControllers = new Map<PriorBlock, PreviewController>();
const invalidByBlock = new Map<PriorBlock, boolean>();

function sliderRow(
  def: SliderDef,
  value: number,
  onInput: (v: number) => void,
): HTMLElement {
  const row = document.createElement("div");
  row.className = "slider-row";
  const label = document.createElement("label");
  label.textContent = def.label;
  const input = document.createElement("input");
  input.type = "range";
  input.min = String(def.min);
  input.max = String(def.max);
  input.step = String(def.step);
  input.value = String(value);
  input.dataset.key = def.key;
  const num = document.createElement("input");
  num.type = "number";
  num.step = String(def.step);
  num.value = String(value);
  num.className = "slider-value";
  const marker = document.createElement("span");
  marker.className = "invalid-marker";
  marker.style.display = "none";
  marker.textContent = "Invalid!";
  const apply = (raw: string) => {
    const v = Number(raw);
    const problem = sliderValueInvalid(def, v);
    if (problem) {
      marker.style.display = "inline";
      marker.title = `valid interval: ${problem}`;
      return;
    }
    marker.style.display = "none";
    input.value = raw;
    num.value = raw;
    onInput(v);
  };
  input.addEventListener("input", () => apply(input.value));
  num.addEventListener("change", () => apply(num.value));
  row.append(label, input, num, marker);
  return row;
}

function rebuildPriorBlock(block: PriorBlock): void {
  const holder = $(`${block}-sliders`);
  holder.innerHTML = "";
  const panel = state.priorPanel;
  let defs: SliderDef[];
  let values: Record<string, number>;
  if (block === "cor") {
    defs = correlationSliders(panel.corFamily, panel.corStrategy);
    values = panel.corValues;
    $("cor-strategy-row").style.display = panel.corFamily === "PC" ? "block" : "none";
  } else {
    const family = block === "var" ? panel.varFamily : panel.var2Family;
    defs = varianceSliders(family);
    values = block === "var" ? panel.varValues : panel.var2Values;
  }
  for (const def of defs) {
    if (!(def.key in values)) values[def.key] = def.value;
    holder.appendChild(
      sliderRow(def, values[def.key], (v) => {
        values[def.key] = v;
        state.touchConfig();
        schedulePreview(block);
        updateRunButton();
      }),
    );
  }
  schedulePreview(block);
}

function schedulePreview(block: PriorBlock): void {
  const controller = previewControllers.get(block);
  if (!controller) return;
  controller.schedule(previewBody(block));
}

function previewBody(block: PriorBlock) {
  return previewRequest(state.priorPanel, block);
}

function initPriorPanel(): void {
  for (const [block, selectId] of [
    ["var", "var-family"],
    ["var2", "var2-family"],
    ["cor", "cor-family"],
  ] as [PriorBlock, string][]) {
    const select = $(selectId) as HTMLSelectElement;
    const families = block === "cor" ? CORRELATION_FAMILIES : VARIANCE_FAMILIES;
    for (const fam of families) {
      const opt = document.createElement("option");
      opt.value = fam;
      opt.textContent = fam;
      select.appendChild(opt);
    }
    select.addEventListener("change", () => {
      if (block === "var") state.priorPanel.varFamily = select.value as VarFamily;
      else if (block === "var2") state.priorPanel.var2Family = select.value as VarFamily;
      else state.priorPanel.corFamily = select.value as CorFamily;
      state.touchConfig();
      rebuildPriorBlock(block);
      updateRunButton();
    });
    const controller = new PreviewController(api, (outcome) => {
      const marker = $(`${block}-invalid`);
      invalidByBlock.set(block, !applyOutcomeToMarker(marker, outcome));
      state.priorValid = ![...invalidByBlock.values()].some(Boolean);
      if (outcome.table) {
        const holder = $(`${block}-preview`);
        holder.innerHTML = "";
        holder.appendChild(renderDensity(outcome.table));
      }
      updateRunButton();
    });
    previewControllers.set(block, controller);
  }
  const strategy = $("cor-strategy") as HTMLSelectElement;
  strategy.addEventListener("change", () => {
    state.priorPanel.corStrategy = Number(strategy.value) as 1 | 2 | 3;
    state.touchConfig();
    rebuildPriorBlock("cor");
    updateRunButton();
  });
  (["var", "var2", "cor"] as PriorBlock[]).forEach(rebuildPriorBlock);
}

// --------------------------------------------------------------- model panel

function initModelPanel(): void {
  const modelType = $("model-type") as HTMLSelectElement;
  const link = $("link-select") as HTMLSelectElement;
  const nsample = $("nsample-input") as HTMLInputElement;
  const seed = $("seed-input") as HTMLInputElement;
  const quantiles = $("quantiles-input") as HTMLInputElement;
  modelType.addEventListener("change", () => {
    state.modelPanel.modelType = Number(modelType.value) as 1 | 2 | 3 | 4;
    state.touchConfig();
    updateRunButton();
  });
  link.addEventListener("change", () => {
    state.modelPanel.link = link.value as "logit" | "probit" | "cloglog";
    state.touchConfig();
    updateRunButton();
  });
  nsample.addEventListener("change", () => {
    state.modelPanel.nsample = Number(nsample.value);
    state.touchConfig();
    updateRunButton();
  });
  seed.addEventListener("change", () => {
    state.modelPanel.seed = Number(seed.value);
    state.touchConfig();
    updateRunButton();
  });
  quantiles.addEventListener("change", () => {
    state.modelPanel.quantiles = quantiles.value
      .split(",")
      .map((s) => Number(s.trim()))
      .filter((v) => !Number.isNaN(v));
    state.touchConfig();
    updateRunButton();
  });
}

// ----------------------------------------------------------------- run + poll

function initRun(): void {
  $("run-button").addEventListener("click", () => {
    void (async () => {
      try {
        setStatus("submitting fit...", "busy");
        const resp = await api.submitFit(state.fitPayload());
        state.markRunStarted(resp.fit_id);
        updateRunButton();
        pollTimer = setInterval(() => void poll(), 500);
      } catch (err) {
        setStatus(String(err), "error");
      }
    })();
  });
  $("export-json").addEventListener("click", () => {
    if (state.activeFitId) void download(`${state.activeFitId}.json`, api.fitJson(state.activeFitId));
  });
  $("export-svg").addEventListener("click", () => {
    if (state.activeFitId) {
      void download(
        `${state.activeFitId}-${state.activeTab}.svg`,
        api.svg(state.activeFitId, { plot: state.activeTab === "forest" ? "forest" : state.activeTab === "crosshair" ? "crosshair" : "sroc" }),
      );
    }
  });
}

async function download(filename: string, contentPromise: Promise<string>): Promise<void> {
  try {
    const content = await contentPromise;
    const blob = new Blob([content]);
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = filename;
    a.click();
    URL.revokeObjectURL(a.href);
  } catch (err) {
    setStatus(String(err), "error");
  }
}

async function poll(): Promise<void> {
  if (!state.activeFitId) return;
  try {
    const doc = await api.fitStatus(state.activeFitId);
    if (doc.status === "running" || doc.status === "queued") {
      setStatus(`fit ${doc.status}...`, "busy");
      return;
    }
    if (pollTimer !== null) clearInterval(pollTimer);
    pollTimer = null;
    state.markRunFinished();
    if (doc.status === "failed") {
      setStatus(`fit failed: ${doc.error}`, "error");
    } else {
      summary = doc.summary ?? null;
      setStatus("fit done");
      setTab("summary");
      void renderResultTabs();
    }
    updateRunButton();
  } catch (err) {
    if (pollTimer !== null) clearInterval(pollTimer);
    pollTimer = null;
    state.markRunFinished();
    setStatus(String(err), "error");
  }
}

// ------------------------------------------------------------------ tabs

const TABS: ResultTab[] = ["welcome", "data", "summary", "marginals", "fitted", "forest", "sroc", "crosshair"];

function setTab(tab: ResultTab): void {
  state.activeTab = tab;
  window.location.hash = tab;
  for (const t of TABS) {
    $(`tab-${t}`).style.display = t === tab ? "block" : "none";
    $(`tab-button-${t}`).classList.toggle("active", t === tab);
  }
}

function cliEcho(target: HTMLElement, command: string): void {
  let pre = target.querySelector("pre.cli-echo") as HTMLElement | null;
  if (!pre) {
    pre = document.createElement("pre");
    pre.className = "cli-echo";
    target.appendChild(pre);
  }
  pre.textContent = command;
}

async function renderResultTabs(): Promise<void> {
  if (!summary || !state.activeFitId) return;
  const datasetName = state.datasetId;
  // summary tab
  const summaryTab = $("tab-summary");
  summaryTab.innerHTML = "";
  summaryTab.appendChild(renderSummaryTab(document, summary));
  cliEcho(summaryTab, fitCommand(datasetName, state.modelPanel, state.priorPanel));

  // marginals tab
  const marginalsTab = $("tab-marginals");
  marginalsTab.innerHTML = "";
  const picker = document.createElement("select");
  picker.id = "marginal-picker";
  for (const name of summary.variable_names) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name;
    picker.appendChild(opt);
  }
  const curveHolder = document.createElement("div");
  const drawMarginal = () => {
    curveHolder.innerHTML = "";
    const curve = marginalCurve(summary!, picker.value);
    if (curve) curveHolder.appendChild(renderDensity({ x: curve.x, density: curve.y }));
  };
  picker.addEventListener("change", drawMarginal);
  marginalsTab.append(picker, curveHolder);
  drawMarginal();
  cliEcho(marginalsTab, "dtameta summary --fit fit.json");

  // fitted tab
  const fittedTab = $("tab-fitted");
  fittedTab.innerHTML = "";
  const typePicker = document.createElement("select");
  typePicker.id = "accuracy-picker";
  for (const t of Object.keys(summary.fitted)) {
    const opt = document.createElement("option");
    opt.value = t;
    opt.textContent = t;
    typePicker.appendChild(opt);
  }
  const tableHolder = document.createElement("div");
  const drawFitted = () => {
    tableHolder.innerHTML = "";
    tableHolder.appendChild(renderFittedTab(document, summary!, typePicker.value));
    cliEcho(fittedTab, fittedCommand(typePicker.value));
  };
  typePicker.addEventListener("change", drawFitted);
  fittedTab.append(typePicker, tableHolder);
  drawFitted();

  await renderGeometryTab("forest");
  await renderGeometryTab("sroc");
  await renderGeometryTab("crosshair");
}

async function renderGeometryTab(plot: "forest" | "sroc" | "crosshair"): Promise<void> {
  if (!state.activeFitId) return;
  const tab = $(`tab-${plot}`);
  tab.innerHTML = "";
  const params: Record<string, string | number> = { plot };
  if (plot === "sroc") {
    const srocType = Number(($("sroc-type") as HTMLSelectElement).value || "1");
    params.sroc_type = srocType;
  }
  if (plot === "forest") {
    params.accuracy_type = ($("forest-accuracy") as HTMLSelectElement).value || "sens";
  }
  try {
    const doc = await api.geometry(state.activeFitId, params);
    if (plot === "forest") {
      tab.appendChild(renderForest(doc.geometry as ForestJson));
      cliEcho(tab, plotCommand("forest", { "accuracy-type": params.accuracy_type ?? "sens" }));
    } else {
      tab.appendChild(renderRocGeometry(doc.geometry as GeometryItem[]));
      cliEcho(
        tab,
        plotCommand(plot, plot === "sroc" ? { "sroc-type": params.sroc_type ?? 1 } : {}),
      );
    }
  } catch (err) {
    tab.textContent = String(err);
  }
}

// ------------------------------------------------------------------ boot

export function boot(): void {
  initDataPanel()
    .then(() => {
      initPriorPanel();
      initModelPanel();
      initRun();
      for (const t of TABS) {
        $(`tab-button-${t}`).addEventListener("click", () => setTab(t));
      }
      $("sroc-type").addEventListener("change", () => void renderGeometryTab("sroc"));
      $("forest-accuracy").addEventListener("change", () => void renderGeometryTab("forest"));
      const fromHash = window.location.hash.replace("#", "") as ResultTab;
      setTab(TABS.includes(fromHash) ? fromHash : "welcome");
      updateRunButton();
      setStatus("ready");
    })
    .catch((err) => setStatus(String(err), "error"));
}

if (typeof window !== "undefined" && typeof document !== "undefined" && document.getElementById("run-button")) {
  boot();
}
