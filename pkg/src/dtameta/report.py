"""Text summary and canonical JSON export of a fit.

The JSON export is deterministic for a given seed: values are rounded to six
significant digits and volatile wall-clock timings are kept out of the file
(the key is present but null); timings appear only in the printed summary.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .accuracy import ACCURACY_TYPES, fitted_study_measures, summary_points
from .inference import FitResult, Marginal


def round_sig(x: float, digits: int = 6) -> float:
    if x == 0 or not math.isfinite(x):
        return x
    return float(f"{x:.{digits}g}")


def _quantile_key(p: float) -> str:
    return np.format_float_positional(p, trim="-")


def _marginal_entry(name: str, marg: Marginal, n_curve: int = 201) -> dict:
    idx = np.linspace(0, marg.support.size - 1, n_curve).round().astype(int)
    return {
        "name": name,
        "mean": round_sig(marg.mean),
        "sd": round_sig(marg.sd),
        "quantiles": {_quantile_key(p): round_sig(v) for p, v in sorted(marg.quantiles.items())},
        "density": {
            "x": [round_sig(float(v)) for v in marg.support[idx]],
            "y": [round_sig(float(v)) for v in marg.density[idx]],
        },
    }


HYPER_ROW_NAMES = {"var1": "var_phi", "var2": "var_psi", "rho": "cor"}


def fit_to_json_dict(fit: FitResult, include_timings: bool = False) -> dict:
    sp_rows = []
    if not fit.spec.covariate_columns:
        sp_rows = [
            {
                "name": r.name,
                "mean": round_sig(r.mean),
                "sd": round_sig(r.sd),
                "quantiles": {_quantile_key(p): round_sig(v) for p, v in sorted(r.quantiles.items())},
            }
            for r in summary_points(fit)
        ]
    fitted = {}
    if fit.samples is not None:
        for t in ACCURACY_TYPES:
            table = fitted_study_measures(fit, t)
            fitted[t] = [
                {
                    "name": r.name,
                    "mean": round_sig(r.mean),
                    "sd": round_sig(r.sd),
                    "quantiles": {
                        _quantile_key(p): round_sig(v) for p, v in sorted(r.quantiles.items())
                    },
                }
                for r in table.rows
            ]
    doc = {
        "model": {
            "model_type": fit.spec.model_type,
            "link": fit.spec.link,
            "modality": fit.spec.modality_column,
            "covariates": list(fit.spec.covariate_columns),
            "quantiles": list(fit.spec.quantiles),
            "nsample": fit.spec.nsample,
            "seed": fit.spec.seed,
        },
        "priors": fit.priors.to_json_dict(),
        "dataset": fit.dataset.to_json_dict(),
        "fixed": [_marginal_entry(n, m) for n, m in fit.fixed_marginals.items()],
        "hyper": [
            _marginal_entry(HYPER_ROW_NAMES[n], fit.hyper[n]) for n in ("var1", "var2", "rho")
        ],
        "summary_points": sp_rows,
        "mlik": round_sig(fit.mlik),
        "mu_nu_correlation": [
            {"mu": a, "nu": b, "value": round_sig(v)} for a, b, v in fit.mu_nu_correlations
        ],
        "timings": list(fit.timings) if (include_timings and fit.timings) else None,
        "grid_size": fit.grid_size,
        "variable_names": list(fit.fixed_marginals) + ["var1", "var2", "rho"],
        "fitted": fitted,
    }
    return doc


def fit_to_json(fit: FitResult, include_timings: bool = False) -> str:
    return json.dumps(fit_to_json_dict(fit, include_timings), indent=1, sort_keys=False)


def _table(headers: list[str], row_names: list[str], cells: list[list[float]], digits: int = 3) -> str:
    name_w = max([len(n) for n in row_names] + [0])
    col_ws = []
    text_cells = [[f"{v:.{digits}f}" for v in row] for row in cells]
    for j, h in enumerate(headers):
        w = max([len(h)] + [len(row[j]) for row in text_cells])
        col_ws.append(w)
    lines = [" " * name_w + " " + " ".join(h.rjust(w) for h, w in zip(headers, col_ws))]
    for name, row in zip(row_names, text_cells):
        lines.append(name.ljust(name_w) + " " + " ".join(c.rjust(w) for c, w in zip(row, col_ws)))
    return "\n".join(lines)


def _stat_rows(entries) -> tuple[list[str], list[str], list[list[float]]]:
    names, cells = [], []
    probs = None
    for name, mean, sd, quantiles in entries:
        names.append(name)
        probs = sorted(quantiles)
        cells.append([mean, sd] + [quantiles[p] for p in probs])
    headers = ["mean", "sd"] + [f"{np.format_float_positional(p, trim='-')}quant" for p in probs]
    return headers, names, cells


def format_summary(fit: FitResult) -> str:
    out = []
    if fit.timings is not None:
        pre, run, post = fit.timings
        out.append("Time used: ")
        labels = ["Pre-processing", "Running", "Post-processing", "Total"]
        values = [pre, run, post, pre + run + post]
        out.append(" " + " ".join(lab.rjust(15) for lab in labels))
        out.append(" " + " ".join(f"{v:.7f}".rjust(15) for v in values))
        out.append("")

    out.append("Fixed effects: ")
    headers, names, cells = _stat_rows(
        (n, m.mean, m.sd, m.quantiles) for n, m in fit.fixed_marginals.items()
    )
    out.append(_table(headers, names, cells))
    out.append("")
    out.append("Model hyperpar: ")
    headers, names, cells = _stat_rows(
        (HYPER_ROW_NAMES[n], fit.hyper[n].mean, fit.hyper[n].sd, fit.hyper[n].quantiles)
        for n in ("var1", "var2", "rho")
    )
    out.append(_table(headers, names, cells))

    if not fit.spec.covariate_columns and fit.samples is not None:
        out.append("")
        out.append("-------------------")
        headers, names, cells = _stat_rows(
            (r.name, r.mean, r.sd, r.quantiles) for r in summary_points(fit)
        )
        out.append(_table(headers, names, cells))

    out.append("")
    out.append("-------------------")
    for a, b, v in fit.mu_nu_correlations:
        out.append(f"Correlation between {a} and {b} is {v:.4f}.")
    out.append(f"Marginal log-likelihood: {fit.mlik:.4f}")
    out.append("Variable names for marginal plotting: ")
    out.append("      " + ", ".join(list(fit.fixed_marginals) + ["var1", "var2", "rho"]))
    return "\n".join(out) + "\n"


def format_fitted_table(fit: FitResult, accuracy_type: str) -> str:
    table = fitted_study_measures(fit, accuracy_type)
    headers, names, cells = _stat_rows(
        (r.name, r.mean, r.sd, r.quantiles) for r in table.rows
    )
    return f"Diagnostic accuracies {table.label}: \n" + _table(headers, names, cells) + "\n"
