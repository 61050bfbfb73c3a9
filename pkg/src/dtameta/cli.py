"""Command-line front end.

Flags are kebab-case versions of the model-fitting argument surface
(model.type -> --model-type and so on) with the same semantics and defaults.
Exit codes: 0 success, 2 validation/usage error, 1 numeric failure.
"""

from __future__ import annotations

import json
from pathlib import Path

import click
import numpy as np

from . import datasets, links, report, svg
from .accuracy import ACCURACY_TYPES
from .data import DataError, IngestOptions, ModelSpec, parse_dataset, validate_dataset
from .inference import FitOptions, NumericError, fit as run_fit
from .plots import (
    PlotError,
    crosshair_layout,
    forest_layout,
    sroc_plot_geometry,
)
from .priors import (
    PriorError,
    correlation_prior_from_config,
    prior_config_from_json,
    tabulate_prior,
    variance_prior_from_config,
)

DEFAULT_PLOT_DIR = "dtameta-plots"


def _parse_floats(text: str, allow_missing: bool = False) -> list:
    out = []
    for token in text.split(","):
        token = token.strip()
        if allow_missing and token.lower() in ("_", "na", "nan", "none", ""):
            out.append(None)
        else:
            try:
                out.append(float(token))
            except ValueError:
                raise click.UsageError(f"expected a number, got {token!r}") from None
    return out


def _prior_config(var_prior, var_par, var2_prior, var2_par, cor_prior, cor_par, wishart_par):
    doc: dict = {}
    if wishart_par or "invwishart" in {var_prior.lower(), var2_prior.lower(), cor_prior.lower()}:
        if not wishart_par:
            raise click.UsageError("--wishart-par is required with the Invwishart prior")
        doc["wishart.par"] = _parse_floats(wishart_par)
        return prior_config_from_json(doc)
    doc["var.prior"] = var_prior
    doc["var.par"] = _parse_floats(var_par)
    doc["var2.prior"] = var2_prior
    doc["var2.par"] = _parse_floats(var2_par)
    doc["cor.prior"] = cor_prior
    doc["cor.par"] = _parse_floats(cor_par, allow_missing=True)
    return prior_config_from_json(doc)


def _load_dataset(data, builtin, modality, covariates):
    if (data is None) == (builtin is None):
        raise click.UsageError("provide exactly one of --data or --builtin")
    covs = tuple(c.strip() for c in covariates.split(",") if c.strip()) if covariates else None
    if builtin is not None:
        if modality or covs:
            text = datasets.builtin_csv(builtin)
            return parse_dataset(text, IngestOptions(modality=modality, covariates=covs))
        return datasets.load_builtin(builtin)
    text = Path(data).read_text(encoding="utf-8")
    return parse_dataset(text, IngestOptions(modality=modality, covariates=covs))


def _model_spec(model_type, link, modality, covariates, quantiles, nsample, seed):
    covs = tuple(c.strip() for c in covariates.split(",") if c.strip()) if covariates else ()
    qs = tuple(_parse_floats(quantiles)) if quantiles else ()
    return ModelSpec(
        model_type=model_type,
        link=link,
        modality_column=modality,
        covariate_columns=covs,
        quantiles=qs,
        nsample=nsample,
        seed=seed,
    )


def _run_guarded(fn):
    try:
        return fn()
    except (DataError, PriorError, PlotError, ValueError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(2) from exc
    except NumericError as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        raise SystemExit(1) from exc


_model_options = [
    click.option("--data", type=click.Path(exists=True, dir_okay=False), default=None,
                 help="CSV file with TP/FP/TN/FN columns."),
    click.option("--builtin", type=click.Choice(datasets.builtin_names()), default=None,
                 help="Use a bundled dataset."),
    click.option("--model-type", type=click.IntRange(1, 4), default=1, show_default=True,
                 help="Which pair of accuracy measures is modelled jointly."),
    click.option("--link", type=click.Choice(links.LINKS), default="logit", show_default=True),
    click.option("--modality", default=None, help="Categorical covariate column."),
    click.option("--covariates", default=None, help="Comma-separated continuous covariate columns."),
    click.option("--quantiles", default=None,
                 help="Extra posterior quantiles (0.025, 0.5 and 0.975 are always included)."),
    click.option("--nsample", type=int, default=5000, show_default=True,
                 help="Number of iid posterior samples for derived quantities."),
    click.option("--seed", type=int, default=0, show_default=True),
    click.option("--var-prior", default="PC", show_default=True),
    click.option("--var-par", default="3,0.05", show_default=True),
    click.option("--var2-prior", default="PC", show_default=True),
    click.option("--var2-par", default="3,0.05", show_default=True),
    click.option("--cor-prior", default="PC", show_default=True),
    click.option("--cor-par", default="1,-0.1,0.5,-0.95,0.05,_,_", show_default=True,
                 help="PC layout: strategy,rho0,omega,u1,a1,u2,a2 (use _ for unused slots)."),
    click.option("--wishart-par", default=None, help="df,r11,r22,r12 for the Invwishart prior."),
    click.option("--threads", type=int, default=1, show_default=True,
                 envvar="DTAMETA_THREADS", help="Worker threads for grid exploration."),
]


def _with_options(opts):
    def wrap(fn):
        for opt in reversed(opts):
            fn = opt(fn)
        return fn
    return wrap


@click.group()
@click.version_option()
def main():
    """Bayesian bivariate meta-analysis of diagnostic test studies."""


@main.command("fit")
@_with_options(_model_options)
@click.option("--out", type=click.Path(dir_okay=False), default="fit.json", show_default=True,
              help="Where the fit result JSON is written.")
def fit_cmd(data, builtin, model_type, link, modality, covariates, quantiles, nsample, seed,
            var_prior, var_par, var2_prior, var2_par, cor_prior, cor_par, wishart_par,
            threads, out):
    """Fit the bivariate model and write the result JSON."""

    def run():
        dataset = _load_dataset(data, builtin, modality, covariates)
        spec = _model_spec(model_type, link, modality, covariates, quantiles, nsample, seed)
        rep = validate_dataset(dataset, spec)
        if not rep.ok:
            raise DataError("; ".join(rep.findings))
        priors = _prior_config(var_prior, var_par, var2_prior, var2_par,
                               cor_prior, cor_par, wishart_par)
        result = run_fit(dataset, spec, priors, FitOptions(threads=threads))
        Path(out).write_text(report.fit_to_json(result), encoding="utf-8")
        click.echo(report.format_summary(result))
        click.echo(f"fit result written to {out}")

    _run_guarded(run)


def _refit_from_json(path: str):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    from .data import dataset_from_json_dict

    dataset = dataset_from_json_dict(doc["dataset"])
    model = doc["model"]
    # modality labels are stored inline per study, so the dataset's column
    # name takes over from whatever the original CSV column was called
    modality = dataset.modality_name if model["modality"] is not None else None
    spec = ModelSpec(
        model_type=model["model_type"],
        link=model["link"],
        modality_column=modality,
        covariate_columns=tuple(model["covariates"]),
        quantiles=tuple(model["quantiles"]),
        nsample=model["nsample"],
        seed=model["seed"],
    )
    priors = prior_config_from_json(doc["priors"])
    return run_fit(dataset, spec, priors)


@main.command("summary")
@click.option("--fit", "fit_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Fit result JSON produced by the fit subcommand.")
def summary_cmd(fit_path):
    """Print the summary block for a saved fit."""

    def run():
        doc = json.loads(Path(fit_path).read_text(encoding="utf-8"))
        lines = []
        if doc.get("timings"):
            pre, run_t, post = doc["timings"]
            lines.append("Time used: ")
            lines.append(" ".join(x.rjust(15) for x in
                                  ["Pre-processing", "Running", "Post-processing", "Total"]))
            lines.append(" ".join(f"{v:.7f}".rjust(15) for v in
                                  [pre, run_t, post, pre + run_t + post]))
            lines.append("")
        lines.append("Fixed effects: ")
        lines.append(_json_table(doc["fixed"]))
        lines.append("")
        lines.append("Model hyperpar: ")
        lines.append(_json_table(doc["hyper"]))
        if doc.get("summary_points"):
            lines.append("")
            lines.append("-------------------")
            lines.append(_json_table(doc["summary_points"]))
        lines.append("")
        lines.append("-------------------")
        for entry in doc["mu_nu_correlation"]:
            lines.append(
                f"Correlation between {entry['mu']} and {entry['nu']} is {entry['value']:.4f}."
            )
        lines.append(f"Marginal log-likelihood: {doc['mlik']:.4f}")
        lines.append("Variable names for marginal plotting: ")
        lines.append("      " + ", ".join(doc["variable_names"]))
        click.echo("\n".join(lines))

    _run_guarded(run)


def _json_table(rows) -> str:
    probs = sorted(rows[0]["quantiles"], key=float) if rows else []
    headers = ["mean", "sd"] + [f"{p}quant" for p in probs]
    name_w = max(len(r["name"]) for r in rows)
    text_rows = [
        [f"{r['mean']:.3f}", f"{r['sd']:.3f}"] + [f"{r['quantiles'][p]:.3f}" for p in probs]
        for r in rows
    ]
    widths = [max(len(h), *(len(tr[j]) for tr in text_rows)) for j, h in enumerate(headers)]
    lines = [" " * name_w + " " + " ".join(h.rjust(w) for h, w in zip(headers, widths))]
    for r, tr in zip(rows, text_rows):
        lines.append(r["name"].ljust(name_w) + " " + " ".join(c.rjust(w) for c, w in zip(tr, widths)))
    return "\n".join(lines)


@main.command("fitted")
@click.option("--fit", "fit_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--accuracy-type", type=click.Choice(ACCURACY_TYPES, case_sensitive=False),
              default="sens", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Also write the table as CSV.")
def fitted_cmd(fit_path, accuracy_type, out):
    """Print per-study posterior accuracy estimates from a saved fit."""

    def run():
        doc = json.loads(Path(fit_path).read_text(encoding="utf-8"))
        key = next(t for t in doc["fitted"] if t.lower() == accuracy_type.lower())
        rows = doc["fitted"][key]
        from .accuracy import ACCURACY_LABELS

        click.echo(f"Diagnostic accuracies {ACCURACY_LABELS[key.lower()]}: ")
        click.echo(_json_table(rows))
        if out:
            probs = sorted(rows[0]["quantiles"], key=float)
            lines = [",".join(["studyname", "mean", "sd"] + [f"{p}quant" for p in probs])]
            for r in rows:
                cells = [r["name"], f"{r['mean']:.6g}", f"{r['sd']:.6g}"]
                cells += [f"{r['quantiles'][p]:.6g}" for p in probs]
                lines.append(",".join(cells))
            Path(out).write_text("\n".join(lines) + "\n", encoding="utf-8")
            click.echo(f"wrote {out}")

    _run_guarded(run)


def _plot_out(out, name):
    path = Path(out) if out else Path(DEFAULT_PLOT_DIR) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


@main.command("sroc")
@click.option("--fit", "fit_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--sroc-type", type=click.IntRange(1, 5), default=1, show_default=True)
@click.option("--est-type", type=click.Choice(["mean", "median"]), default="mean", show_default=True)
@click.option("--no-data", is_flag=True, help="Hide the observed-data bubbles.")
@click.option("--no-cr", is_flag=True, help="Hide the credible region.")
@click.option("--no-pr", is_flag=True, help="Hide the prediction region.")
@click.option("--level", type=float, default=0.95, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help=f"Output SVG path (default {DEFAULT_PLOT_DIR}/sroc.svg).")
def sroc_cmd(fit_path, sroc_type, est_type, no_data, no_cr, no_pr, level, out):
    """Render the SROC plot for a saved fit."""

    def run():
        result = _refit_from_json(fit_path)
        geoms = sroc_plot_geometry(
            result,
            sroc_type=sroc_type,
            data_show=not no_data,
            cr_show=not no_cr,
            pr_show=not no_pr,
            level=level,
            est_type=est_type,
        )
        path = _plot_out(out, "sroc.svg")
        path.write_bytes(svg.render_svg(geoms, {"title": "SROC"}))
        click.echo(f"wrote {path}")

    _run_guarded(run)


@main.command("forest")
@click.option("--fit", "fit_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--accuracy-type", type=click.Choice(ACCURACY_TYPES, case_sensitive=False),
              default="sens", show_default=True)
@click.option("--est-type", type=click.Choice(["mean", "median"]), default="mean", show_default=True)
@click.option("--intervals", default="0.025,0.975", show_default=True)
@click.option("--cut", default=None, help="Display range lo,hi.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def forest_cmd(fit_path, accuracy_type, est_type, intervals, cut, out):
    """Render a forest plot for a saved fit."""

    def run():
        result = _refit_from_json(fit_path)
        lo, hi = _parse_floats(intervals)
        cut_t = tuple(_parse_floats(cut)) if cut else None
        forest = forest_layout(result, accuracy_type, est_type, (lo, hi), cut_t)
        path = _plot_out(out, "forest.svg")
        path.write_bytes(svg.render_svg(forest))
        click.echo(f"wrote {path}")

    _run_guarded(run)


@main.command("crosshair")
@click.option("--fit", "fit_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--est-type", type=click.Choice(["mean", "median"]), default="mean", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def crosshair_cmd(fit_path, est_type, out):
    """Render a crosshair plot for a saved fit."""

    def run():
        result = _refit_from_json(fit_path)
        geoms = crosshair_layout(result, est_type)
        path = _plot_out(out, "crosshair.svg")
        path.write_bytes(svg.render_svg(geoms, {"title": "Crosshair"}))
        click.echo(f"wrote {path}")

    _run_guarded(run)


@main.command("prior-preview")
@click.option("--var-prior", default=None)
@click.option("--var-par", default=None)
@click.option("--cor-prior", default=None)
@click.option("--cor-par", default=None)
@click.option("--grid-min", type=float, default=None)
@click.option("--grid-max", type=float, default=None)
@click.option("--grid-points", type=int, default=401, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the table as CSV instead of printing JSON.")
def prior_preview_cmd(var_prior, var_par, cor_prior, cor_par, grid_min, grid_max,
                      grid_points, out):
    """Tabulate a prior density on its native scale."""

    def run():
        if (var_prior is None) == (cor_prior is None):
            raise click.UsageError("provide exactly one of --var-prior or --cor-prior")
        if var_prior is not None:
            prior = variance_prior_from_config(var_prior, _parse_floats(var_par or ""))
            lo = 0.0 if grid_min is None else grid_min
            hi = 4.0 if grid_max is None else grid_max
        else:
            prior = correlation_prior_from_config(
                cor_prior, _parse_floats(cor_par or "", allow_missing=True)
            )
            lo = -0.999 if grid_min is None else grid_min
            hi = 0.999 if grid_max is None else grid_max
        grid = np.linspace(lo, hi, grid_points)
        table = tabulate_prior(prior, grid)
        if out:
            lines = ["x,density"] + [f"{x:.6g},{d:.6g}" for x, d in table]
            Path(out).write_text("\n".join(lines) + "\n", encoding="utf-8")
            click.echo(f"wrote {out}")
        else:
            click.echo(json.dumps({"x": [x for x, _ in table], "density": [d for _, d in table]}))

    _run_guarded(run)


@main.command("datasets")
@click.option("--dump", default=None, help="Print a builtin dataset as CSV.")
def datasets_cmd(dump):
    """List bundled datasets, or dump one as CSV."""

    def run():
        if dump:
            click.echo(datasets.builtin_csv(dump), nl=False)
        else:
            for name in datasets.builtin_names():
                ds = datasets.load_builtin(name)
                click.echo(f"{name}: {len(ds)} studies")

    _run_guarded(run)


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--threads", type=int, default=2, show_default=True,
              envvar="DTAMETA_THREADS", help="Concurrent fit workers.")
@click.option("--session-ttl", type=float, default=3600.0, show_default=True,
              help="Idle session lifetime in seconds.")
@click.option("--persist-dir", type=click.Path(file_okay=False), default=None,
              help="Keep completed fit summaries on disk across restarts.")
def serve_cmd(host, port, threads, session_ttl, persist_dir):
    """Run the HTTP service (used by the web UI)."""
    import uvicorn

    from .service import create_app

    uvicorn.run(
        create_app(fit_workers=threads, session_ttl=session_ttl, persist_dir=persist_dir),
        host=host,
        port=port,
    )


if __name__ == "__main__":
    main()
