"""Plot mathematics: SROC curves, credible/prediction regions, forest and
crosshair layouts, all as device-independent geometry in ROC coordinates
(x = 1 - specificity, y = sensitivity).

Curves are straight lines in link space through the summary operating point
(g(Se-intercept), g(Sp-intercept)); the five slope conventions differ in how
the between-study covariance is turned into a slope. With continuous
covariates the summary point is undefined and the regression-based Walter
curve over the fitted per-study estimates is used instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2

from . import links
from .accuracy import (
    fitted_study_measures,
    measure_from_pair,
    observed_rates,
    validate_accuracy_type,
)
from .inference import FitResult

SROC_TYPE_LABELS = {
    1: "regression of g(Se) on g(Sp)",
    2: "major axis",
    3: "difference-on-sum regression",
    4: "inverse regression",
    5: "variance-ratio curve",
}


class PlotError(ValueError):
    """Raised when a plot is unavailable for the fitted model."""


@dataclass(frozen=True)
class CurveGeometry:
    kind: str  # sroc_line | credible_region | prediction_region | summary_point | data_bubble | crosshair
    points: tuple[tuple[float, float], ...]
    style: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "points": [[x, y] for x, y in self.points], "style": self.style}


@dataclass(frozen=True)
class ForestRow:
    label: str
    data_text: str
    estimate: float
    lo: float
    hi: float
    size: float
    is_summary: bool = False
    level: str | None = None


@dataclass(frozen=True)
class ForestGeometry:
    rows: tuple[ForestRow, ...]
    accuracy_type: str
    label: str
    intervals: tuple[float, float]
    cut: tuple[float, float]
    flags: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "kind": "forest",
            "accuracy_type": self.accuracy_type,
            "label": self.label,
            "intervals": list(self.intervals),
            "cut": list(self.cut),
            "flags": self.flags,
            "rows": [
                {
                    "label": r.label,
                    "data_text": r.data_text,
                    "estimate": r.estimate,
                    "lo": r.lo,
                    "hi": r.hi,
                    "size": r.size,
                    "is_summary": r.is_summary,
                    "level": r.level,
                }
                for r in self.rows
            ],
        }


@dataclass(frozen=True)
class OrientedSummary:
    """Link-space summary of one modality level, oriented to (Se, Sp)."""

    level: str | None
    mu_se: float        # g-space mean of the Se intercept
    nu_sp: float        # g-space mean of the Sp intercept
    sd_mu: float
    sd_nu: float
    mu_nu_corr: float
    var_se: float       # posterior mean random-effect variance, Se side
    var_sp: float
    rho: float          # oriented random-effect correlation


def oriented_summaries(fit: FitResult) -> list[OrientedSummary]:
    first, second = fit.design.first_row_is
    s1 = 1.0 if first == "se" else -1.0
    s2 = 1.0 if second == "sp" else -1.0
    var1 = fit.hyper["var1"].mean
    var2 = fit.hyper["var2"].mean
    rho = s1 * s2 * fit.hyper["rho"].mean
    out = []
    pairs = fit.design.mu_nu_pairs()
    levels = fit.design.modality_levels or (None,) * len(pairs)
    for (mu_name, nu_name), level in zip(pairs, levels):
        corr = next(v for a, b, v in fit.mu_nu_correlations if a == mu_name)
        mu = fit.fixed_marginals[mu_name]
        nu = fit.fixed_marginals[nu_name]
        out.append(
            OrientedSummary(
                level=level,
                mu_se=s1 * mu.mean,
                nu_sp=s2 * nu.mean,
                sd_mu=mu.sd,
                sd_nu=nu.sd,
                mu_nu_corr=s1 * s2 * corr,
                var_se=var1,
                var_sp=var2,
                rho=rho,
            )
        )
    return out


def _sroc_slope(sroc_type: int, var_se: float, var_sp: float, rho: float) -> float:
    """Slope of g(Se) against g(Sp) for the chosen SROC formulation."""
    s_se, s_sp = math.sqrt(var_se), math.sqrt(var_sp)
    if sroc_type == 1:
        return rho * s_se / s_sp
    if sroc_type == 2:
        # principal axis of the covariance of (g(Sp), g(Se))
        cov = rho * s_se * s_sp
        if abs(cov) < 1e-14:
            if var_se > var_sp:
                raise PlotError("major-axis SROC is vertical at zero correlation")
            return 0.0
        half = 0.5 * (var_sp + var_se)
        disc = math.sqrt(0.25 * (var_sp - var_se) ** 2 + cov * cov)
        lam_max = half + disc
        return (lam_max - var_sp) / cov
    if sroc_type == 3:
        denom = var_se + var_sp - 2.0 * rho * s_se * s_sp
        if denom < 1e-14:
            raise PlotError("difference-on-sum regression undefined: Var(S) = 0")
        b = (var_se - var_sp) / denom
        if abs(1.0 - b) < 1e-12:
            raise PlotError("difference-on-sum regression undefined: unit slope")
        return -(1.0 + b) / (1.0 - b)
    if sroc_type == 4:
        if abs(rho) < 1e-12:
            raise PlotError("inverse-regression SROC undefined at rho = 0")
        return s_se / (rho * s_sp)
    if sroc_type == 5:
        return -s_se / s_sp
    raise PlotError(f"sroc_type must be 1..5, got {sroc_type}")


_LEVEL_COLORS = ("black", "red", "blue", "green", "orange", "purple")


def sroc_curve(fit: FitResult, sroc_type: int = 1, n_points: int = 200) -> list[CurveGeometry]:
    """One SROC line per modality level; needs a covariate-free model."""
    if fit.spec.covariate_columns:
        raise PlotError(
            "SROC summary curves are not available with continuous covariates;"
            " use the fitted-estimates regression curve instead"
        )
    link = fit.design.link
    obs_se, obs_sp, _ = observed_rates(fit)
    sp_clip = np.clip(obs_sp, 1e-3, 1.0 - 1e-3)
    g_lo, g_hi = float(np.min(links.forward(link, sp_clip))), float(np.max(links.forward(link, sp_clip)))
    pad = 0.05 * max(g_hi - g_lo, 1e-6)
    curves = []
    for idx, summary in enumerate(oriented_summaries(fit)):
        slope = _sroc_slope(sroc_type, summary.var_se, summary.var_sp, summary.rho)
        v = np.linspace(g_lo - pad, g_hi + pad, n_points)
        v = np.sort(np.append(v, summary.nu_sp))  # curve passes exactly through the summary point
        u = summary.mu_se + slope * (v - summary.nu_sp)
        x = 1.0 - links.inverse(link, v)
        y = links.inverse(link, u)
        order = np.argsort(x)
        pts = tuple(zip(x[order].tolist(), y[order].tolist()))
        style = {"color": _LEVEL_COLORS[idx % len(_LEVEL_COLORS)], "sroc_type": sroc_type}
        if summary.level:
            style["level"] = summary.level
        curves.append(CurveGeometry(kind="sroc_line", points=pts, style=style))
    return curves


def summary_point_geometry(fit: FitResult) -> list[CurveGeometry]:
    if fit.spec.covariate_columns:
        raise PlotError("summary points are not available with continuous covariates")
    link = fit.design.link
    out = []
    for idx, s in enumerate(oriented_summaries(fit)):
        x = 1.0 - float(links.inverse(link, s.nu_sp))
        y = float(links.inverse(link, s.mu_se))
        style = {"color": _LEVEL_COLORS[idx % len(_LEVEL_COLORS)]}
        if s.level:
            style["level"] = s.level
        out.append(CurveGeometry(kind="summary_point", points=((x, y),), style=style))
    return out


def data_bubbles(fit: FitResult) -> CurveGeometry:
    se, sp, size = observed_rates(fit)
    pts = tuple(zip((1.0 - sp).tolist(), se.tolist()))
    return CurveGeometry(
        kind="data_bubble",
        points=pts,
        style={"sizes": size.tolist(), "labels": list(fit.design.study_names)},
    )


def walter_sroc(se_hat, sp_hat, n_points: int = 200) -> tuple[float, float, CurveGeometry]:
    """Fit D = a + b S over per-study estimates and return the implied curve.

    D is the log diagnostic odds ratio, S the logit-scale positivity sum;
    solving the regression for sensitivity at a given false positive rate x
    gives SROC(x) = expit(a/(1-b) + (1+b)/(1-b) * logit(x)).
    """
    se_hat = np.asarray(se_hat, dtype=float)
    sp_hat = np.asarray(sp_hat, dtype=float)
    if se_hat.size < 2:
        raise PlotError("Walter SROC regression needs at least two studies")
    if np.any((se_hat <= 0) | (se_hat >= 1) | (sp_hat <= 0) | (sp_hat >= 1)):
        raise PlotError("Walter SROC regression needs estimates strictly inside (0, 1)")
    logit_se = np.log(se_hat / (1.0 - se_hat))
    logit_fpr = np.log((1.0 - sp_hat) / sp_hat)
    d = logit_se - logit_fpr
    s = logit_se + logit_fpr
    var_s = float(np.var(s))
    if var_s < 1e-12:
        raise PlotError("Walter SROC regression undefined: no spread in S")
    b = float(np.cov(d, s, bias=True)[0, 1] / var_s)
    a = float(np.mean(d) - b * np.mean(s))
    if abs(1.0 - b) < 1e-9:
        raise PlotError("Walter SROC curve undefined at b = 1")
    x = np.linspace(1e-3, 1.0 - 1e-3, n_points)
    t = a / (1.0 - b) + (1.0 + b) / (1.0 - b) * np.log(x / (1.0 - x))
    y = 1.0 / (1.0 + np.exp(-t))
    curve = CurveGeometry(
        kind="sroc_line",
        points=tuple(zip(x.tolist(), y.tolist())),
        style={"color": "black", "walter": True, "a": a, "b": b},
    )
    return a, b, curve


def walter_sroc_from_fit(fit: FitResult, est_type: str = "mean") -> tuple[float, float, CurveGeometry]:
    sens = fitted_study_measures(fit, "sens")
    spec = fitted_study_measures(fit, "spec")
    if est_type == "median":
        se_hat = [r.quantiles[0.5] for r in sens.rows]
        sp_hat = [r.quantiles[0.5] for r in spec.rows]
    else:
        se_hat = [r.mean for r in sens.rows]
        sp_hat = [r.mean for r in spec.rows]
    return walter_sroc(se_hat, sp_hat)


def ellipse_region(fit: FitResult, kind: str = "credible", level: float = 0.95) -> list[CurveGeometry]:
    """Level-contour of the (Se, Sp) summary in link space, as a ROC polygon.

    The prediction region inflates the summary covariance by the posterior
    mean between-study covariance, covering a new study rather than the
    summary point.
    """
    if kind not in ("credible", "prediction"):
        raise PlotError(f"region kind must be credible or prediction, got {kind!r}")
    if fit.spec.covariate_columns:
        raise PlotError("regions are not available with continuous covariates")
    if not 0.0 < level < 1.0:
        raise PlotError("region level must lie in (0, 1)")
    link = fit.design.link
    radius = math.sqrt(chi2.ppf(level, 2))
    out = []
    for idx, s in enumerate(oriented_summaries(fit)):
        corr = min(max(s.mu_nu_corr, -0.999999), 0.999999)
        cov = np.array(
            [
                [s.sd_mu**2, corr * s.sd_mu * s.sd_nu],
                [corr * s.sd_mu * s.sd_nu, s.sd_nu**2],
            ]
        )
        if kind == "prediction":
            r_cov = s.rho * math.sqrt(s.var_se * s.var_sp)
            cov = cov + np.array([[s.var_se, r_cov], [r_cov, s.var_sp]])
        chol = np.linalg.cholesky(cov + 1e-15 * np.eye(2))
        angles = np.linspace(0.0, 2.0 * math.pi, 100, endpoint=False)
        circle = np.stack([np.cos(angles), np.sin(angles)])
        uv = np.array([[s.mu_se], [s.nu_sp]]) + radius * (chol @ circle)
        x = 1.0 - links.inverse(link, uv[1])
        y = links.inverse(link, uv[0])
        pts = list(zip(x.tolist(), y.tolist()))
        pts.append(pts[0])
        style = {
            "color": "blue" if kind == "credible" else "gray",
            "dash": True,
            "level": s.level,
            "coverage": level,
        }
        out.append(CurveGeometry(kind=f"{kind}_region", points=tuple(pts), style=style))
    return out


def sroc_plot_geometry(
    fit: FitResult,
    sroc_type: int = 1,
    data_show: bool = True,
    cr_show: bool = True,
    pr_show: bool = True,
    line_show: bool = True,
    sp_show: bool = True,
    level: float = 0.95,
    est_type: str = "mean",
) -> list[CurveGeometry]:
    """Full SROC plot: bubbles, curve(s), regions and summary point(s)."""
    out: list[CurveGeometry] = []
    if data_show:
        out.append(data_bubbles(fit))
    if fit.spec.covariate_columns:
        if line_show:
            out.append(walter_sroc_from_fit(fit, est_type)[2])
        return out
    if line_show:
        out.extend(sroc_curve(fit, sroc_type))
    if cr_show:
        out.extend(ellipse_region(fit, "credible", level))
    if pr_show:
        out.extend(ellipse_region(fit, "prediction", level))
    if sp_show:
        out.extend(summary_point_geometry(fit))
    return out


def _marker_sizes(lengths: np.ndarray) -> np.ndarray:
    """Map interval lengths to [0.5, 2] drawing units, shorter = bigger."""
    inv = 1.0 / np.maximum(lengths, 1e-12)
    if np.ptp(inv) < 1e-12:
        return np.full(lengths.shape, 1.25)
    return 0.5 + 1.5 * (inv - inv.min()) / (inv.max() - inv.min())


def forest_layout(
    fit: FitResult,
    accuracy_type: str = "sens",
    est_type: str = "mean",
    intervals: tuple[float, float] = (0.025, 0.975),
    cut: tuple[float, float] | None = None,
    name_show=True,
    data_show=True,
    ci_show=True,
    est_show=True,
) -> ForestGeometry:
    key = validate_accuracy_type(accuracy_type)
    lo_p, hi_p = float(intervals[0]), float(intervals[1])
    if lo_p >= hi_p:
        raise PlotError("interval probabilities must satisfy lo < hi")
    probs = fit.quantile_probs
    for p in (lo_p, hi_p):
        if p not in probs:
            raise PlotError(
                f"requested interval quantile {p} was not computed; available: {probs}"
            )
    table = fitted_study_measures(fit, key)
    est = {
        r.name: (r.quantiles[0.5] if est_type == "median" else r.mean) for r in table.rows
    }
    lo = {r.name: r.quantiles[lo_p] for r in table.rows}
    hi = {r.name: r.quantiles[hi_p] for r in table.rows}
    lengths = np.array([hi[n] - lo[n] for n in est])
    sizes = _marker_sizes(lengths)

    dataset = fit.dataset
    levels = fit.design.modality_levels or (None,)
    rows: list[ForestRow] = []
    for level in levels:
        for i, s in enumerate(dataset.studies):
            if level is not None and s.modality != level:
                continue
            name = s.studyname
            rows.append(
                ForestRow(
                    label=name,
                    data_text=f"{s.TP} {s.FP} {s.TN} {s.FN}",
                    estimate=est[name],
                    lo=lo[name],
                    hi=hi[name],
                    size=float(sizes[i]),
                    level=level,
                )
            )
        if not fit.spec.covariate_columns:
            se_s, sp_s = _summary_se_sp_samples(fit, level)
            values = measure_from_pair(se_s, sp_s, key)
            center = float(np.quantile(values, 0.5)) if est_type == "median" else float(np.mean(values))
            qlo, qhi = np.quantile(values, [lo_p, hi_p])
            label = f"Summary ({level})" if level else "Summary"
            rows.append(
                ForestRow(
                    label=label,
                    data_text="",
                    estimate=center,
                    lo=float(qlo),
                    hi=float(qhi),
                    size=1.0,
                    is_summary=True,
                    level=level,
                )
            )
    if cut is None:
        span_lo = min(r.lo for r in rows)
        span_hi = max(r.hi for r in rows)
        pad = 0.05 * (span_hi - span_lo + 1e-9)
        cut = (span_lo - pad, span_hi + pad)
    return ForestGeometry(
        rows=tuple(rows),
        accuracy_type=key,
        label=table.label,
        intervals=(lo_p, hi_p),
        cut=(float(cut[0]), float(cut[1])),
        flags={
            "nameShow": name_show,
            "dataShow": data_show,
            "ciShow": ci_show,
            "estShow": est_show,
        },
    )


def _summary_se_sp_samples(fit: FitResult, level: str | None):
    first, second = fit.design.first_row_is
    pairs = dict(zip(fit.design.modality_levels or (None,), fit.design.mu_nu_pairs()))
    mu_name, nu_name = pairs[level]
    p1 = links.inverse(fit.design.link, fit.sample_fixed(mu_name))
    p2 = links.inverse(fit.design.link, fit.sample_fixed(nu_name))
    se = p1 if first == "se" else 1.0 - p1
    sp = p2 if second == "sp" else 1.0 - p2
    return se, sp


def crosshair_layout(
    fit: FitResult, est_type: str = "mean", intervals: tuple[float, float] = (0.025, 0.975)
) -> list[CurveGeometry]:
    """Per study: a cross at (FPR, Se) spanning both credible intervals."""
    sens = fitted_study_measures(fit, "sens")
    fpr = fitted_study_measures(fit, "FPR")
    lo_p, hi_p = intervals
    out = []
    for i, name in enumerate(fit.design.study_names):
        sr = sens.row(name)
        fr = fpr.row(name)
        y = sr.quantiles[0.5] if est_type == "median" else sr.mean
        x = fr.quantiles[0.5] if est_type == "median" else fr.mean
        pts = (
            (fr.quantiles[lo_p], y),
            (fr.quantiles[hi_p], y),
            (x, sr.quantiles[lo_p]),
            (x, sr.quantiles[hi_p]),
        )
        out.append(
            CurveGeometry(
                kind="crosshair",
                points=pts,
                style={"label": name, "color": _LEVEL_COLORS[i % len(_LEVEL_COLORS)], "center": [x, y]},
            )
        )
    return out
