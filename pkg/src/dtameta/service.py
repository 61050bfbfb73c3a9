"""HTTP/JSON API for datasets, prior previews, fits and plot geometry.

Fits run asynchronously on a small worker pool so the prior-preview path
stays responsive while a model is running. State is an in-memory session
registry (header X-Session-Id, default session otherwise) with a configurable
idle TTL; fit results are immutable once done.
"""

from __future__ import annotations

import itertools
import json
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np
from fastapi import FastAPI, Header, HTTPException, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from . import datasets as builtin_data
from . import report, svg
from .accuracy import ACCURACY_TYPES
from .data import DataError, Dataset, IngestOptions, ModelSpec, parse_dataset, validate_dataset
from .inference import FitOptions, FitResult, fit as run_fit
from .plots import (
    PlotError,
    crosshair_layout,
    forest_layout,
    sroc_plot_geometry,
)
from .priors import (
    PRIOR_BOUNDS,
    PriorError,
    correlation_prior_from_config,
    prior_config_from_json,
    tabulate_prior,
    variance_prior_from_config,
)


class ModelBody(BaseModel):
    model_type: int = 1
    link: str = "logit"
    modality: str | None = None
    covariates: list[str] = Field(default_factory=list)
    quantiles: list[float] = Field(default_factory=list)
    nsample: int = 5000
    seed: int = 0


class FitBody(BaseModel):
    dataset_id: str
    model: ModelBody = Field(default_factory=ModelBody)
    priors: dict = Field(default_factory=dict)


class PriorPreviewBody(BaseModel):
    kind: str  # "variance" | "correlation"
    prior: str
    par: list = Field(default_factory=list)
    grid_min: float | None = None
    grid_max: float | None = None
    grid_points: int = 401


@dataclass
class FitJob:
    fit_id: str
    status: str = "queued"  # queued | running | done | failed
    error: str | None = None
    result: FitResult | None = None
    summary: dict | None = None


@dataclass
class Session:
    session_id: str
    created: float
    last_used: float
    datasets: dict[str, Dataset] = dc_field(default_factory=dict)
    fits: dict[str, FitJob] = dc_field(default_factory=dict)
    counter: itertools.count = dc_field(default_factory=itertools.count)


class Registry:
    def __init__(self, session_ttl: float):
        self.ttl = session_ttl
        self.lock = threading.Lock()
        self.sessions: dict[str, Session] = {}

    def session(self, session_id: str | None) -> Session:
        sid = session_id or "default"
        now = time.monotonic()
        with self.lock:
            expired = [k for k, s in self.sessions.items() if now - s.last_used > self.ttl]
            for k in expired:
                del self.sessions[k]
            if sid not in self.sessions:
                self.sessions[sid] = Session(session_id=sid, created=now, last_used=now)
            sess = self.sessions[sid]
            sess.last_used = now
            return sess


def _model_spec(body: ModelBody) -> ModelSpec:
    return ModelSpec(
        model_type=body.model_type,
        link=body.link,
        modality_column=body.modality,
        covariate_columns=tuple(body.covariates),
        quantiles=tuple(body.quantiles),
        nsample=body.nsample,
        seed=body.seed,
    )


def create_app(
    fit_workers: int = 2, session_ttl: float = 3600.0, persist_dir: str | None = None
) -> FastAPI:
    """Build the application. With `persist_dir` set, completed fit summaries
    are also written to disk and survive a restart (summaries only: geometry
    and SVG need the in-memory fit and return 404 after a restart)."""
    app = FastAPI(
        title="dtameta service",
        description="Bayesian bivariate meta-analysis of diagnostic test studies.",
        version="0.1.0",
    )
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    registry = Registry(session_ttl)
    pool = ThreadPoolExecutor(max_workers=fit_workers)
    persist_root = None
    if persist_dir is not None:
        from pathlib import Path

        persist_root = Path(persist_dir)
        persist_root.mkdir(parents=True, exist_ok=True)

    def _persist_summary(session_id: str, fit_id: str, summary: dict) -> None:
        if persist_root is None:
            return
        target = persist_root / session_id
        target.mkdir(parents=True, exist_ok=True)
        (target / f"{fit_id}.json").write_text(json.dumps(summary), encoding="utf-8")

    def _load_persisted(session_id: str, fit_id: str) -> dict | None:
        if persist_root is None:
            return None
        path = persist_root / session_id / f"{fit_id}.json"
        if path.is_file():
            return json.loads(path.read_text(encoding="utf-8"))
        return None

    def bad_request(exc: Exception) -> HTTPException:
        return HTTPException(status_code=400, detail=str(exc))

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/priors/bounds")
    def prior_bounds():
        return PRIOR_BOUNDS

    @app.get("/datasets/builtin")
    def builtin_datasets():
        out = []
        for name in builtin_data.builtin_names():
            ds = builtin_data.load_builtin(name)
            out.append(
                {
                    "name": name,
                    "n_studies": len(ds),
                    "modality": ds.modality_name,
                    "covariates": list(ds.covariate_names),
                    "csv": builtin_data.builtin_csv(name),
                    "data": ds.to_json_dict(),
                }
            )
        return out

    @app.post("/datasets", status_code=201)
    async def upload_dataset(
        request: Request,
        modality: str | None = Query(default=None),
        covariates: str | None = Query(default=None),
        x_session_id: str | None = Header(default=None),
    ):
        body = (await request.body()).decode("utf-8")
        covs = tuple(c.strip() for c in covariates.split(",") if c.strip()) if covariates else None
        try:
            ds = parse_dataset(body, IngestOptions(modality=modality, covariates=covs))
        except DataError as exc:
            raise bad_request(exc) from exc
        sess = registry.session(x_session_id)
        dataset_id = f"d{next(sess.counter)}"
        sess.datasets[dataset_id] = ds
        report_doc = validate_dataset(ds, ModelSpec()).to_json_dict()
        return {
            "dataset_id": dataset_id,
            "n_studies": len(ds),
            "modality": ds.modality_name,
            "covariates": list(ds.covariate_names),
            "report": report_doc,
        }

    @app.post("/priors/preview")
    def prior_preview(body: PriorPreviewBody):
        try:
            if body.kind == "variance":
                prior = variance_prior_from_config(body.prior, body.par)
                lo = 0.0 if body.grid_min is None else body.grid_min
                hi = 4.0 if body.grid_max is None else body.grid_max
            elif body.kind == "correlation":
                prior = correlation_prior_from_config(body.prior, body.par)
                lo = -0.999 if body.grid_min is None else body.grid_min
                hi = 0.999 if body.grid_max is None else body.grid_max
            else:
                raise PriorError(f"kind must be variance or correlation, got {body.kind!r}")
            grid = np.linspace(lo, hi, body.grid_points)
            table = tabulate_prior(prior, grid)
        except PriorError as exc:
            raise bad_request(exc) from exc
        return {"x": [x for x, _ in table], "density": [d for _, d in table]}

    def _resolve_dataset(sess: Session, dataset_id: str) -> Dataset:
        if dataset_id in sess.datasets:
            return sess.datasets[dataset_id]
        try:
            return builtin_data.load_builtin(dataset_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown dataset {dataset_id!r}") from None

    def _execute(job: FitJob, dataset: Dataset, spec: ModelSpec, priors, session_id: str) -> None:
        job.status = "running"
        try:
            result = run_fit(dataset, spec, priors, FitOptions())
            job.result = result
            job.summary = report.fit_to_json_dict(result)
            job.status = "done"
            _persist_summary(session_id, job.fit_id, job.summary)
        except Exception as exc:  # surfaced through the status endpoint
            job.error = str(exc)
            job.status = "failed"

    @app.post("/fits", status_code=202)
    def submit_fit(body: FitBody, x_session_id: str | None = Header(default=None)):
        sess = registry.session(x_session_id)
        dataset = _resolve_dataset(sess, body.dataset_id)
        try:
            spec = _model_spec(body.model)
            rep = validate_dataset(dataset, spec)
            if not rep.ok:
                raise DataError("; ".join(rep.findings))
            priors = prior_config_from_json(body.priors)
            priors.theta_logprior()  # calibration errors become 400s, not failed jobs
        except (DataError, PriorError) as exc:
            raise bad_request(exc) from exc
        fit_id = uuid.uuid4().hex[:12]
        job = FitJob(fit_id=fit_id)
        sess.fits[fit_id] = job
        pool.submit(_execute, job, dataset, spec, priors, sess.session_id)
        return {"fit_id": fit_id, "status": job.status}

    def _job(sess: Session, fit_id: str) -> FitJob:
        if fit_id not in sess.fits:
            persisted = _load_persisted(sess.session_id, fit_id)
            if persisted is not None:
                job = FitJob(fit_id=fit_id, status="done", summary=persisted)
                sess.fits[fit_id] = job
                return job
            raise HTTPException(status_code=404, detail=f"unknown fit {fit_id!r}")
        return sess.fits[fit_id]

    def _done_job(sess: Session, fit_id: str) -> FitJob:
        job = _job(sess, fit_id)
        if job.status in ("queued", "running"):
            raise HTTPException(status_code=409, detail=f"fit {fit_id} is still {job.status}")
        if job.status == "failed":
            raise HTTPException(status_code=500, detail=f"fit failed: {job.error}")
        return job

    def _resident_job(sess: Session, fit_id: str) -> FitJob:
        job = _done_job(sess, fit_id)
        if job.result is None:
            raise HTTPException(
                status_code=404,
                detail=f"fit {fit_id} has only a persisted summary; re-run it for plots",
            )
        return job

    @app.get("/fits/{fit_id}")
    def fit_status(fit_id: str, x_session_id: str | None = Header(default=None)):
        sess = registry.session(x_session_id)
        job = _job(sess, fit_id)
        payload = {"fit_id": fit_id, "status": job.status}
        if job.status == "failed":
            payload["error"] = job.error
        if job.status == "done":
            payload["summary"] = job.summary
        return payload

    @app.get("/fits/{fit_id}/fitted")
    def fit_fitted(
        fit_id: str,
        type: str = Query(default="sens"),
        x_session_id: str | None = Header(default=None),
    ):
        sess = registry.session(x_session_id)
        job = _done_job(sess, fit_id)
        match = [t for t in ACCURACY_TYPES if t.lower() == type.lower()]
        if not match:
            raise HTTPException(status_code=400, detail=f"unknown accuracy type {type!r}")
        return {"accuracy_type": match[0], "rows": job.summary["fitted"][match[0]]}

    def _geometry(job: FitJob, plot: str, params) -> list | dict:
        result = job.result
        if plot == "sroc":
            geoms = sroc_plot_geometry(
                result,
                sroc_type=params["sroc_type"],
                data_show=params["data_show"],
                cr_show=params["cr_show"],
                pr_show=params["pr_show"],
                level=params["level"],
                est_type=params["est_type"],
            )
            return [g.to_json_dict() for g in geoms]
        if plot == "forest":
            forest = forest_layout(
                result,
                accuracy_type=params["accuracy_type"],
                est_type=params["est_type"],
                intervals=params["intervals"],
            )
            return forest.to_json_dict()
        if plot == "crosshair":
            geoms = crosshair_layout(result, est_type=params["est_type"])
            return [g.to_json_dict() for g in geoms]
        raise HTTPException(status_code=400, detail=f"unknown plot {plot!r}")

    def _plot_params(
        sroc_type, est_type, accuracy_type, interval_lo, interval_hi, level,
        data_show, cr_show, pr_show,
    ) -> dict:
        return {
            "sroc_type": sroc_type,
            "est_type": est_type,
            "accuracy_type": accuracy_type,
            "intervals": (interval_lo, interval_hi),
            "level": level,
            "data_show": data_show,
            "cr_show": cr_show,
            "pr_show": pr_show,
        }

    @app.get("/fits/{fit_id}/geometry")
    def fit_geometry(
        fit_id: str,
        plot: str = Query(default="sroc"),
        sroc_type: int = Query(default=1, ge=1, le=5),
        est_type: str = Query(default="mean"),
        accuracy_type: str = Query(default="sens"),
        interval_lo: float = Query(default=0.025),
        interval_hi: float = Query(default=0.975),
        level: float = Query(default=0.95),
        data_show: bool = Query(default=True),
        cr_show: bool = Query(default=True),
        pr_show: bool = Query(default=True),
        x_session_id: str | None = Header(default=None),
    ):
        sess = registry.session(x_session_id)
        job = _resident_job(sess, fit_id)
        params = _plot_params(sroc_type, est_type, accuracy_type, interval_lo, interval_hi,
                              level, data_show, cr_show, pr_show)
        try:
            return {"plot": plot, "geometry": _geometry(job, plot, params)}
        except (PlotError, ValueError) as exc:
            raise bad_request(exc) from exc

    @app.get("/fits/{fit_id}/svg")
    def fit_svg(
        fit_id: str,
        plot: str = Query(default="sroc"),
        sroc_type: int = Query(default=1, ge=1, le=5),
        est_type: str = Query(default="mean"),
        accuracy_type: str = Query(default="sens"),
        interval_lo: float = Query(default=0.025),
        interval_hi: float = Query(default=0.975),
        level: float = Query(default=0.95),
        data_show: bool = Query(default=True),
        cr_show: bool = Query(default=True),
        pr_show: bool = Query(default=True),
        x_session_id: str | None = Header(default=None),
    ):
        sess = registry.session(x_session_id)
        job = _resident_job(sess, fit_id)
        params = _plot_params(sroc_type, est_type, accuracy_type, interval_lo, interval_hi,
                              level, data_show, cr_show, pr_show)
        try:
            if plot == "forest":
                payload = svg.render_svg(
                    forest_layout(
                        job.result,
                        accuracy_type=params["accuracy_type"],
                        est_type=params["est_type"],
                        intervals=params["intervals"],
                    )
                )
            elif plot == "sroc":
                payload = svg.render_svg(
                    sroc_plot_geometry(
                        job.result,
                        sroc_type=params["sroc_type"],
                        data_show=params["data_show"],
                        cr_show=params["cr_show"],
                        pr_show=params["pr_show"],
                        level=params["level"],
                        est_type=params["est_type"],
                    ),
                    {"title": "SROC"},
                )
            elif plot == "crosshair":
                payload = svg.render_svg(
                    crosshair_layout(job.result, est_type=params["est_type"]),
                    {"title": "Crosshair"},
                )
            else:
                raise HTTPException(status_code=400, detail=f"unknown plot {plot!r}")
        except (PlotError, ValueError) as exc:
            raise bad_request(exc) from exc
        return Response(content=payload, media_type="image/svg+xml")

    @app.get("/fits/{fit_id}/json")
    def fit_json(fit_id: str, x_session_id: str | None = Header(default=None)):
        sess = registry.session(x_session_id)
        job = _done_job(sess, fit_id)
        return Response(content=json.dumps(job.summary, indent=1), media_type="application/json")

    static_dir = _frontend_root()
    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def _frontend_root():
    """The built web client, when present: frontend/ with index.html + dist/."""
    from pathlib import Path

    here = Path(__file__).resolve()
    for base in [here.parent.parent.parent, here.parent.parent.parent.parent]:
        cand = base / "frontend"
        if (cand / "index.html").is_file() and (cand / "dist").is_dir():
            return str(cand)
    return None


app = create_app()
