"""Dataset ingestion, validation and design construction.

A study is a two-by-two table (TP, FP, TN, FN) plus an optional categorical
modality label and any number of continuous covariates. The design builder
turns a dataset into the interleaved binomial observation layout consumed by
the inference engine: row 2i models the first accuracy measure of study i,
row 2i+1 the second.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field

import numpy as np

RESERVED = ("tp", "fp", "tn", "fn", "studynames")

# (first measure, second measure) per model type; the successes column of the
# two binomial rows per study. Sizes are always (TP+FN, TN+FP).
MODEL_TYPE_MEASURES = {
    1: ("se", "sp"),
    2: ("se", "fpr"),
    3: ("fnr", "sp"),
    4: ("fnr", "fpr"),
}


class DataError(ValueError):
    """Raised for structurally invalid input data."""


def sanitize_level(label: str) -> str:
    """Make a modality level identifier-safe: runs of non-word chars -> '.'."""
    out = re.sub(r"[^0-9A-Za-z]+", ".", label.strip())
    return out.strip(".")


@dataclass(frozen=True)
class StudyRecord:
    studyname: str
    TP: int
    FP: int
    TN: int
    FN: int
    modality: str | None = None
    covariates: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        for name in ("TP", "FP", "TN", "FN"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise DataError(f"{self.studyname}: {name} must be an integer count, got {v!r}")
            if v < 0:
                raise DataError(f"{self.studyname}: {name} must be >= 0, got {v}")

    @property
    def n_diseased(self) -> int:
        return self.TP + self.FN

    @property
    def n_healthy(self) -> int:
        return self.TN + self.FP

    def covariate(self, name: str) -> float:
        for key, value in self.covariates:
            if key == name:
                return value
        raise KeyError(name)


@dataclass(frozen=True)
class Dataset:
    studies: tuple[StudyRecord, ...]
    modality_name: str | None = None
    covariate_names: tuple[str, ...] = ()

    @property
    def modality_levels(self) -> tuple[str, ...]:
        seen: list[str] = []
        for s in self.studies:
            if s.modality is not None and s.modality not in seen:
                seen.append(s.modality)
        return tuple(seen)

    def __len__(self) -> int:
        return len(self.studies)

    def to_csv(self) -> str:
        buf = io.StringIO()
        header = ["studynames", "TP", "FP", "TN", "FN"]
        if self.modality_name:
            header.append(self.modality_name)
        header.extend(self.covariate_names)
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for s in self.studies:
            row: list = [s.studyname, s.TP, s.FP, s.TN, s.FN]
            if self.modality_name:
                row.append(s.modality)
            row.extend(repr(s.covariate(c)) for c in self.covariate_names)
            w.writerow(row)
        return buf.getvalue()

    def to_json_dict(self) -> dict:
        studies = []
        for s in self.studies:
            entry: dict = {
                "studyname": s.studyname,
                "TP": s.TP,
                "FP": s.FP,
                "TN": s.TN,
                "FN": s.FN,
            }
            if s.modality is not None:
                entry["modality"] = s.modality
            entry["covariates"] = {k: v for k, v in s.covariates}
            studies.append(entry)
        return {"studies": studies}


@dataclass(frozen=True)
class IngestOptions:
    """How non-reserved CSV columns are interpreted."""

    modality: str | None = None
    covariates: tuple[str, ...] | None = None  # None: every remaining column


def dataset_from_json_dict(doc: dict) -> Dataset:
    studies = []
    modality_name = None
    cov_names: tuple[str, ...] | None = None
    for entry in doc["studies"]:
        covs = tuple((str(k), float(v)) for k, v in entry.get("covariates", {}).items())
        names = tuple(k for k, _ in covs)
        if cov_names is None:
            cov_names = names
        elif names != cov_names:
            raise DataError("studies carry differing covariate sets")
        modality = entry.get("modality")
        if modality is not None:
            modality_name = "modality"
        studies.append(
            StudyRecord(
                studyname=str(entry["studyname"]),
                TP=int(entry["TP"]),
                FP=int(entry["FP"]),
                TN=int(entry["TN"]),
                FN=int(entry["FN"]),
                modality=sanitize_level(str(modality)) if modality is not None else None,
                covariates=covs,
            )
        )
    _check_unique_names(studies)
    return Dataset(tuple(studies), modality_name, cov_names or ())


def _check_unique_names(studies) -> None:
    seen = set()
    for s in studies:
        if s.studyname in seen:
            raise DataError(f"duplicate study name {s.studyname!r}")
        seen.add(s.studyname)


def _parse_count(raw: str, col: str, rowno: int) -> int:
    text = raw.strip()
    try:
        value = int(text)
    except ValueError:
        raise DataError(f"row {rowno}: column {col} must be an integer count, got {raw!r}") from None
    return value


def parse_dataset(csv_text: str, options: IngestOptions | None = None) -> Dataset:
    """Parse a CSV with header into a Dataset.

    TP/FP/TN/FN and studynames are matched case-insensitively; all other
    columns become continuous covariates unless named as the modality.
    """
    options = options or IngestOptions()
    reader = csv.reader(io.StringIO(csv_text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty CSV: missing header row") from None
    header = [h.strip() for h in header]
    lower = [h.lower() for h in header]

    col_idx: dict[str, int] = {}
    for name in ("tp", "fp", "tn", "fn"):
        if name not in lower:
            raise DataError(f"missing mandatory column {name.upper()}")
        col_idx[name] = lower.index(name)
    name_idx = lower.index("studynames") if "studynames" in lower else None

    extra = [
        (i, header[i])
        for i in range(len(header))
        if lower[i] not in RESERVED
    ]
    modality_idx = None
    if options.modality is not None:
        matches = [i for i, h in extra if h.lower() == options.modality.lower()]
        if not matches:
            raise DataError(f"modality column {options.modality!r} not found")
        modality_idx = matches[0]
        extra = [(i, h) for i, h in extra if i != modality_idx]
    if options.covariates is not None:
        wanted = {c.lower() for c in options.covariates}
        unknown = wanted - {h.lower() for _, h in extra}
        if unknown:
            raise DataError(f"unknown covariate column(s): {', '.join(sorted(unknown))}")
        extra = [(i, h) for i, h in extra if h.lower() in wanted]

    studies: list[StudyRecord] = []
    for rowno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise DataError(f"row {rowno}: expected {len(header)} fields, got {len(row)}")
        covs = []
        for i, colname in extra:
            raw = row[i].strip()
            try:
                covs.append((colname, float(raw)))
            except ValueError:
                raise DataError(
                    f"row {rowno}: covariate column {colname!r} must be numeric, got {raw!r}"
                    " (declare a categorical column as the modality)"
                ) from None
        name = row[name_idx].strip() if name_idx is not None else f"study_{len(studies) + 1}"
        studies.append(
            StudyRecord(
                studyname=name,
                TP=_parse_count(row[col_idx["tp"]], "TP", rowno),
                FP=_parse_count(row[col_idx["fp"]], "FP", rowno),
                TN=_parse_count(row[col_idx["tn"]], "TN", rowno),
                FN=_parse_count(row[col_idx["fn"]], "FN", rowno),
                modality=sanitize_level(row[modality_idx]) if modality_idx is not None else None,
                covariates=tuple(covs),
            )
        )
    if not studies:
        raise DataError("CSV contains no study rows")
    _check_unique_names(studies)
    modality_name = header[modality_idx] if modality_idx is not None else None
    return Dataset(tuple(studies), modality_name, tuple(h for _, h in extra))


@dataclass(frozen=True)
class ModelSpec:
    model_type: int = 1
    link: str = "logit"
    modality_column: str | None = None
    covariate_columns: tuple[str, ...] = ()
    quantiles: tuple[float, ...] = ()
    nsample: int = 2000
    seed: int = 0

    def __post_init__(self):
        if self.model_type not in MODEL_TYPE_MEASURES:
            raise DataError(f"model_type must be 1..4, got {self.model_type}")
        from .links import validate_link

        object.__setattr__(self, "link", validate_link(self.link))
        qs = list(self.quantiles)
        for q in qs:
            if not (0.0 < q < 1.0):
                raise DataError(f"quantiles must lie in (0,1), got {q}")
        for q in (0.025, 0.5, 0.975):  # always returned
            if q not in qs:
                qs.append(q)
        object.__setattr__(self, "quantiles", tuple(sorted(qs)))
        if self.nsample <= 0:
            raise DataError("nsample must be a positive integer")
        if self.seed < 0:
            raise DataError("seed must be an unsigned integer")
        object.__setattr__(self, "covariate_columns", tuple(self.covariate_columns))


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.findings

    def to_json_dict(self) -> dict:
        return {"ok": self.ok, "findings": list(self.findings)}


def validate_dataset(dataset: Dataset, spec: ModelSpec) -> ValidationReport:
    findings: list[str] = []
    seen: set[str] = set()
    for s in dataset.studies:
        if s.studyname in seen:
            findings.append(f"duplicate study name {s.studyname!r}")
        seen.add(s.studyname)
        if s.n_diseased < 1:
            findings.append(f"{s.studyname}: no diseased subjects (TP+FN = 0)")
        if s.n_healthy < 1:
            findings.append(f"{s.studyname}: no non-diseased subjects (TN+FP = 0)")
    if spec.modality_column is not None and dataset.modality_name != spec.modality_column:
        findings.append(f"modality column absent: {spec.modality_column!r}")
    for cov in spec.covariate_columns:
        if cov not in dataset.covariate_names:
            findings.append(f"covariate column absent: {cov!r}")
    has_mod = [s.modality is not None for s in dataset.studies]
    if any(has_mod) and not all(has_mod):
        findings.append("modality label missing for some studies")
    return ValidationReport(tuple(findings))


@dataclass(frozen=True)
class DesignBundle:
    y: np.ndarray                 # 2I successes
    n: np.ndarray                 # 2I sizes
    fixed_design: np.ndarray      # (2I, p)
    fixed_effect_names: tuple[str, ...]
    pairing: tuple[tuple[int, int], ...]   # study i -> (row of phi_i, row of psi_i)
    first_row_is: tuple[str, str]          # measures of (row 2i, row 2i+1)
    link: str
    model_type: int
    modality_levels: tuple[str, ...] = ()
    study_names: tuple[str, ...] = ()

    @property
    def n_studies(self) -> int:
        return len(self.pairing)

    @property
    def n_fixed(self) -> int:
        return self.fixed_design.shape[1]

    @property
    def latent_dim(self) -> int:
        # fixed effects first, then the interleaved random-effect pairs
        return self.n_fixed + 2 * self.n_studies

    def mu_nu_pairs(self) -> tuple[tuple[str, str], ...]:
        """Paired intercept names, one (mu*, nu*) pair per modality level."""
        names = self.fixed_effect_names
        if self.modality_levels:
            return tuple(
                (f"mu.{lv}", f"nu.{lv}") for lv in self.modality_levels
            )
        assert "mu" in names and "nu" in names
        return (("mu", "nu"),)


def build_design(dataset: Dataset, spec: ModelSpec) -> DesignBundle:
    report = validate_dataset(dataset, spec)
    if not report.ok:
        raise DataError("invalid dataset: " + "; ".join(report.findings))

    measures = MODEL_TYPE_MEASURES[spec.model_type]
    n_studies = len(dataset.studies)
    y = np.empty(2 * n_studies)
    n = np.empty(2 * n_studies)
    for i, s in enumerate(dataset.studies):
        n[2 * i] = s.n_diseased
        n[2 * i + 1] = s.n_healthy
        first = {"se": s.TP, "fnr": s.FN}[measures[0]]
        second = {"sp": s.TN, "fpr": s.FP}[measures[1]]
        y[2 * i] = first
        y[2 * i + 1] = second

    use_modality = spec.modality_column is not None
    levels = dataset.modality_levels if use_modality else ()
    names: list[str] = []
    if use_modality:
        names.extend(f"mu.{lv}" for lv in levels)
        names.extend(f"nu.{lv}" for lv in levels)
    else:
        names.extend(["mu", "nu"])
    names.extend(f"alpha.{c}" for c in spec.covariate_columns)
    names.extend(f"beta.{c}" for c in spec.covariate_columns)

    p = len(names)
    X = np.zeros((2 * n_studies, p))
    n_levels = len(levels) if use_modality else 1
    for i, s in enumerate(dataset.studies):
        if use_modality:
            li = levels.index(s.modality)
            X[2 * i, li] = 1.0
            X[2 * i + 1, n_levels + li] = 1.0
        else:
            X[2 * i, 0] = 1.0
            X[2 * i + 1, 1] = 1.0
        for ci, cov in enumerate(spec.covariate_columns):
            value = s.covariate(cov)
            X[2 * i, 2 * n_levels + ci] = value
            X[2 * i + 1, 2 * n_levels + len(spec.covariate_columns) + ci] = value

    pairing = tuple((2 * i, 2 * i + 1) for i in range(n_studies))
    return DesignBundle(
        y=y,
        n=n,
        fixed_design=X,
        fixed_effect_names=tuple(names),
        pairing=pairing,
        first_row_is=measures,
        link=spec.link,
        model_type=spec.model_type,
        modality_levels=levels,
        study_names=tuple(s.studyname for s in dataset.studies),
    )
