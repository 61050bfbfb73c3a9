"""Diagnostic accuracy summaries derived from posterior samples.

Whatever pair of measures the model was parameterised in, samples are
re-oriented to (Se, Sp) before a measure is evaluated, so fitted tables and
summary points always report conventional sensitivity/specificity-based
quantities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import links
from .inference import FitResult

ACCURACY_TYPES = (
    "sens",
    "spec",
    "TPR",
    "TNR",
    "FPR",
    "FNR",
    "LRpos",
    "LRneg",
    "RD",
    "DOR",
    "LLRpos",
    "LLRneg",
    "LDOR",
)

ACCURACY_LABELS = {
    "sens": "true positive rate (sensitivity)",
    "tpr": "true positive rate (sensitivity)",
    "spec": "true negative rate (specificity)",
    "tnr": "true negative rate (specificity)",
    "fpr": "false positive rate (1 - specificity)",
    "fnr": "false negative rate (1 - sensitivity)",
    "lrpos": "positive likelihood ratio (LR+)",
    "lrneg": "negative likelihood ratio (LR-)",
    "rd": "risk difference (Youden index)",
    "dor": "diagnostic odds ratio (DOR)",
    "llrpos": "log positive likelihood ratio (LLR+)",
    "llrneg": "log negative likelihood ratio (LLR-)",
    "ldor": "log diagnostic odds ratio (LDOR)",
}


def validate_accuracy_type(name: str) -> str:
    key = name.strip().lower()
    if key not in ACCURACY_LABELS:
        raise ValueError(
            f"unknown accuracy type {name!r}; options: {', '.join(ACCURACY_TYPES)}"
        )
    return key


def measure_from_pair(se, sp, accuracy_type: str):
    """Evaluate an accuracy measure from (sensitivity, specificity)."""
    key = validate_accuracy_type(accuracy_type)
    se = np.asarray(se, dtype=float)
    sp = np.asarray(sp, dtype=float)
    if key in ("sens", "tpr"):
        return se
    if key in ("spec", "tnr"):
        return sp
    if key == "fpr":
        return 1.0 - sp
    if key == "fnr":
        return 1.0 - se
    if key == "rd":
        return se + sp - 1.0
    lr_pos = se / (1.0 - sp)
    lr_neg = (1.0 - se) / sp
    if key == "lrpos":
        return lr_pos
    if key == "lrneg":
        return lr_neg
    if key == "dor":
        return lr_pos / lr_neg
    if key == "llrpos":
        return np.log(lr_pos)
    if key == "llrneg":
        return np.log(lr_neg)
    return np.log(lr_pos / lr_neg)  # ldor


def se_sp_samples(fit: FitResult) -> tuple[np.ndarray, np.ndarray]:
    """Per-study (Se, Sp) sample matrices, orientation fixed per model type."""
    if fit.samples is None:
        raise ValueError("fit carries no posterior samples")
    eta1, eta2 = fit.sample_study_predictors()
    p1 = links.inverse(fit.design.link, eta1)
    p2 = links.inverse(fit.design.link, eta2)
    first, second = fit.design.first_row_is
    se = p1 if first == "se" else 1.0 - p1
    sp = p2 if second == "sp" else 1.0 - p2
    return se, sp


@dataclass(frozen=True)
class AccuracyRow:
    name: str
    mean: float
    sd: float
    quantiles: dict[float, float]


@dataclass(frozen=True)
class StudyAccuracyTable:
    accuracy_type: str
    label: str
    rows: tuple[AccuracyRow, ...]

    def row(self, name: str) -> AccuracyRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        return {
            "accuracy_type": self.accuracy_type,
            "label": self.label,
            "rows": [
                {
                    "name": r.name,
                    "mean": r.mean,
                    "sd": r.sd,
                    "quantiles": {repr(p): v for p, v in sorted(r.quantiles.items())},
                }
                for r in self.rows
            ],
        }

    def to_csv(self) -> str:
        probs = sorted(self.rows[0].quantiles) if self.rows else []
        header = ["studyname", "mean", "sd"] + [f"{p:g}quant" for p in probs]
        lines = [",".join(header)]
        for r in self.rows:
            cells = [r.name, f"{r.mean:.6g}", f"{r.sd:.6g}"]
            cells += [f"{r.quantiles[p]:.6g}" for p in probs]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def _summarise(name: str, values: np.ndarray, probs) -> AccuracyRow:
    qs = np.quantile(values, list(probs))
    return AccuracyRow(
        name=name,
        mean=float(np.mean(values)),
        sd=float(np.std(values, ddof=1)),
        quantiles={float(p): float(q) for p, q in zip(probs, qs)},
    )


def fitted_study_measures(fit: FitResult, accuracy_type: str, probs=None) -> StudyAccuracyTable:
    """Posterior mean/sd/quantiles of a per-study accuracy measure."""
    key = validate_accuracy_type(accuracy_type)
    probs = tuple(probs) if probs is not None else fit.quantile_probs
    se, sp = se_sp_samples(fit)
    values = measure_from_pair(se, sp, key)
    rows = tuple(
        _summarise(name, values[:, i], probs)
        for i, name in enumerate(fit.design.study_names)
    )
    return StudyAccuracyTable(accuracy_type=key, label=ACCURACY_LABELS[key], rows=rows)


def summary_points(fit: FitResult, probs=None) -> tuple[AccuracyRow, ...]:
    """Summary mean(Se)/mean(Sp) rows per modality level from the intercepts.

    Unavailable when continuous covariates are in the model: the summary
    operating point is no longer defined by the intercepts alone.
    """
    if fit.spec.covariate_columns:
        raise ValueError("summary points are not available with continuous covariates")
    if fit.samples is None:
        raise ValueError("fit carries no posterior samples")
    probs = tuple(probs) if probs is not None else fit.quantile_probs
    first, second = fit.design.first_row_is
    se_rows, sp_rows = [], []
    levels = fit.design.modality_levels
    for mu_name, nu_name in fit.design.mu_nu_pairs():
        p1 = links.inverse(fit.design.link, fit.sample_fixed(mu_name))
        p2 = links.inverse(fit.design.link, fit.sample_fixed(nu_name))
        se = p1 if first == "se" else 1.0 - p1
        sp = p2 if second == "sp" else 1.0 - p2
        suffix = f".{mu_name.split('.', 1)[1]}" if levels else ""
        se_rows.append(_summarise(f"mean(Se{suffix})", se, probs))
        sp_rows.append(_summarise(f"mean(Sp{suffix})", sp, probs))
    return tuple(se_rows + sp_rows)


def observed_rates(fit_or_design) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Empirical (Se, Sp, study size) per study, for plot overlays only."""
    dataset = fit_or_design.dataset if hasattr(fit_or_design, "dataset") else fit_or_design
    se = np.array([s.TP / s.n_diseased for s in dataset.studies])
    sp = np.array([s.TN / s.n_healthy for s in dataset.studies])
    size = np.array([s.TP + s.FP + s.TN + s.FN for s in dataset.studies], dtype=float)
    return se, sp, size
