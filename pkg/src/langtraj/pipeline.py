"""Stage wiring: ingest -> assess -> trajectory -> inference -> report."""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd

from . import __version__
from .assess import FEATURES, AssessmentTable, assess_cohort, assess_counts
from .cohort import (
    AnalysisSample,
    Demographics,
    PclRecord,
    apply_inclusion_criteria,
    group_pcl,
    parse_demographics,
    parse_pcl,
    parse_transcripts,
    sample_table,
)
from .errors import LangTrajError
from .inference import (
    CONCURRENT_COVARIATES,
    TRAJECTORY_COVARIATES,
    AssociationResult,
    JointResult,
    MediationRow,
    SuppressionRow,
    TertileSeries,
    concurrent_associations,
    joint_model,
    mediation_table,
    suppression_table,
    tertile_trajectories,
    trajectory_associations,
)
from .lexica import load_bundle
from .trajectory import TimedScore, TrajectoryFit, compute_time_offsets, fit_subject_trajectory, trajectory_table

log = logging.getLogger(__name__)

TERTILE_FEATURES = ("first_person_plural", "anxiety", "avg_word_length")


class StageError(LangTrajError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class AnalysisData:
    """Everything the inference stage needs, keyed by responder id."""

    frame: pd.DataFrame
    panel: dict[str, list[TimedScore]]
    fits: list[TrajectoryFit]
    sample: AnalysisSample

    def concurrent(self) -> pd.DataFrame:
        return self.frame[self.frame["eligible_concurrent"]]

    def trajectory(self) -> pd.DataFrame:
        return self.frame[self.frame["eligible_trajectory"]]


def covariate_frame(demographics: Iterable[Demographics], interview_dates: dict[str, object]) -> pd.DataFrame:
    rows = {}
    for d in demographics:
        if d.responder_id not in interview_dates:
            continue
        d = d.with_interview_date(interview_dates[d.responder_id])
        rows[d.responder_id] = {
            "age": d.age_at_interview,
            "female": 1.0 if d.gender == "female" else 0.0,
            "police": 1.0 if d.occupation_police else 0.0,
            "years_since_911": d.years_since_911,
            "married": {"married": 1.0, "not_married": 0.0}.get(d.marital_status, np.nan),
        }
    return pd.DataFrame.from_dict(rows, orient="index", columns=["age", "female", "police", "years_since_911", "married"])


def build_analysis_data(
    interview_dates: dict[str, object],
    pcl_records: Iterable[PclRecord],
    demographics: Iterable[Demographics],
    assessments: AssessmentTable,
) -> AnalysisData:
    grouped = group_pcl(pcl_records)
    sample = apply_inclusion_criteria(interview_dates, grouped)
    assessed = set(assessments.ids())
    frame = assessments.to_frame()
    cov = covariate_frame(demographics, interview_dates)
    frame = frame.join(cov, how="left")
    baseline = {k: e.baseline_pcl.score for k, e in sample.entries.items() if e.baseline_pcl is not None}
    frame["baseline_pcl"] = pd.Series(baseline, dtype=float)
    frame["eligible_concurrent"] = [bool(sample.entries[k].eligible_concurrent) if k in sample.entries else False for k in frame.index]
    frame["eligible_trajectory"] = [bool(sample.entries[k].eligible_trajectory) if k in sample.entries else False for k in frame.index]
    panel, fits = {}, []
    for rid in sample.trajectory_ids():
        if rid not in assessed:
            continue
        pts = compute_time_offsets(grouped[rid], interview_dates[rid])
        panel[rid] = pts
        fits.append(fit_subject_trajectory(pts, rid))
    frame["slope"] = pd.Series({f.responder_id: f.slope for f in fits}, dtype=float)
    return AnalysisData(frame, panel, fits, sample)


@dataclass
class Analyses:
    concurrent: bool = True
    trajectory: bool = True
    suppression: bool = True
    mediation: bool = True
    joint: bool = True
    tertiles: bool = True


@dataclass
class AnalysisResults:
    table2: list[AssociationResult] = field(default_factory=list)
    table3: list[AssociationResult] = field(default_factory=list)
    s1: list[SuppressionRow] = field(default_factory=list)
    s2: list[MediationRow] = field(default_factory=list)
    s3: list[MediationRow] = field(default_factory=list)
    joint: list[JointResult] = field(default_factory=list)
    tertiles: dict[str, tuple[TertileSeries, TertileSeries]] = field(default_factory=dict)


def run_analyses(
    data: AnalysisData,
    alpha: float = 0.05,
    toggles: Analyses | None = None,
    tertile_features: Sequence[str] = TERTILE_FEATURES,
) -> AnalysisResults:
    toggles = toggles or Analyses()
    out = AnalysisResults()
    feats = list(FEATURES)
    conc = data.concurrent()
    traj = data.trajectory()
    std_cov = list(CONCURRENT_COVARIATES)
    if toggles.concurrent:
        out.table2 = concurrent_associations(conc[feats], conc["baseline_pcl"], conc[std_cov], alpha)
    if toggles.trajectory:
        out.table3 = trajectory_associations(traj[feats], traj["slope"], traj["baseline_pcl"], traj[std_cov], alpha)
    traj_cov = traj[list(TRAJECTORY_COVARIATES)]
    if toggles.suppression:
        out.s1 = suppression_table(traj[feats], traj["slope"], traj_cov, alpha)
    if toggles.mediation:
        if conc["married"].notna().sum() >= 10 and traj["married"].notna().sum() >= 10:
            out.s2 = mediation_table(conc[feats], conc["baseline_pcl"], conc[std_cov], conc["married"], alpha)
            out.s3 = mediation_table(traj[feats], traj["slope"], traj_cov, traj["married"], alpha, marital_with=("baseline_pcl",))
        else:
            log.warning("marital status known for too few responders; skipping mediation tables")
    if toggles.joint:
        out.joint = [joint_model(data.panel, traj[f], traj_cov, f) for f in feats]
    if toggles.tertiles:
        for f in tertile_features:
            out.tertiles[f] = tertile_trajectories(traj[f], data.panel, traj["baseline_pcl"])
    return out


def analyze_synthetic(cohort, alpha: float = 0.05, toggles: Analyses | None = None) -> tuple[AnalysisData, AnalysisResults]:
    """Run assessment and inference on an in-memory synthetic cohort.

    Uses the generated transcripts when present, the bag-of-words counts otherwise.
    """
    if cohort.transcripts is not None:
        table = assess_cohort(cohort.transcripts, cohort.bundle)
    else:
        recs = [assess_counts(rid, counts, cohort.bundle) for rid, counts in cohort.word_counts.items()]
        table = AssessmentTable(recs, cohort.bundle.bundle_id)
    dates = cohort.interview_dates
    data = build_analysis_data(dates, cohort.pcl_records, cohort.demographics, table)
    if toggles is None:
        toggles = Analyses(suppression=False, mediation=False, joint=False, tertiles=False)
    return data, run_analyses(data, alpha, toggles)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def bundle_files(path) -> list[Path]:
    root = Path(path)
    return [root / "lexicon.csv", root / "topics.csv", *sorted((root / "traits").glob("*.json"))]


# --- end-to-end run ----------------------------------------------------------

STAGES = ("ingest", "assess", "trajectory", "inference", "report")
TABLE_TITLES = {
    "table2": "Cross-sectional association between language-based assessments and interview PCL",
    "table3": "Language-based assessments predicting PCL trajectories",
    "s1": "Suppression effects of covariates for PCL trajectories",
    "s2": "Marital status as a confound for interview PCL",
    "s3": "Marital status as a confound for PCL trajectories",
}


@dataclass
class RunOutcome:
    status: int
    manifest: dict
    error: StageError | None = None


class _Run:
    """Writes artifacts into ``out`` and records their digests for the manifest."""

    def __init__(self, out: Path):
        self.out = out
        self.artifacts: dict[str, str] = {}
        out.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str) -> Path:
        path = self.out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        self.artifacts[name] = sha256_file(path)
        return path

    def record(self, path: Path) -> None:
        self.artifacts[path.relative_to(self.out).as_posix()] = sha256_file(path)


def joint_csv(results: Sequence[JointResult]) -> str:
    import csv
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["feature", "n_subjects", "n_obs", "alpha_time", "alpha", "se", "ci_lo", "ci_hi", "p"])
    for j in results:
        f = j.feature_name
        w.writerow([f, j.n_subjects, j.n_obs, repr(j.alpha["intercept"]), repr(j.alpha[f]), repr(j.se[f]), repr(j.alpha_ci[0]), repr(j.alpha_ci[1]), repr(j.p)])
    return buf.getvalue()


def input_digests(config) -> dict[str, str]:
    out = {}
    for name in ("transcripts", "pcl", "demographics"):
        out[name] = sha256_file(getattr(config, name))
    for p in bundle_files(config.bundle):
        out["bundle/" + p.relative_to(config.bundle).as_posix()] = sha256_file(p)
    return out


def run_pipeline(config, until: str = "report") -> RunOutcome:
    """Run the stages in order up to ``until``; failures are tagged with their stage.

    The manifest lists input digests, the configuration (minus the output
    directory), and every artifact written with its digest. It has no
    timestamps, so identical inputs give a byte-identical output tree.
    """
    from .reporting import (
        association_rows,
        emit_tertile_plot,
        mediation_rows,
        render_association_table,
        render_mediation_table,
        render_suppression_table,
        results_csv,
        suppression_rows,
    )

    if until not in STAGES:
        raise ValueError(f"unknown stage {until!r}")
    config.validate()
    run = _Run(Path(config.out))
    settings = config.as_dict()
    settings.pop("out")
    for k in ("transcripts", "pcl", "demographics", "bundle"):
        settings[k] = Path(settings[k]).name
    manifest = {
        "version": __version__,
        "seed": config.seed,
        "config": settings,
        "inputs": input_digests(config),
        "stages_requested": list(STAGES[: STAGES.index(until) + 1]),
    }
    stage = "ingest"
    error = None
    completed: list[str] = []
    try:
        transcripts = parse_transcripts(config.transcripts)
        pcl = parse_pcl(config.pcl)
        demographics = parse_demographics(config.demographics)
        bundle = load_bundle(config.bundle)
        dates = {t.responder_id: t.interview_date for t in transcripts}
        run.write("sample.csv", sample_table(apply_inclusion_criteria(dates, group_pcl(pcl))))
        completed.append(stage)
        if until == stage:
            raise _Stop
        stage = "assess"
        table = assess_cohort(transcripts, bundle, jobs=config.jobs)
        run.write("assessments.csv", table.to_csv())
        if table.exclusions:
            run.write("exclusions.json", json.dumps(dict(table.exclusions), indent=1, sort_keys=True) + "\n")
        manifest["bundle_id"] = bundle.bundle_id
        completed.append(stage)
        if until == stage:
            raise _Stop
        stage = "trajectory"
        data = build_analysis_data(dates, pcl, demographics, table)
        run.write("trajectories.csv", trajectory_table(data.fits))
        completed.append(stage)
        if until == stage:
            raise _Stop
        stage = "inference"
        toggles = Analyses(**{k: config.enabled(k) for k in Analyses.__dataclass_fields__})
        results = run_analyses(data, config.alpha, toggles)
        completed.append(stage)
        if until == stage:
            raise _Stop
        stage = "report"
        header = {"bundle": bundle.bundle_id, "version": __version__, "alpha": repr(float(config.alpha))}
        rows = []
        for key, res in (("table2", results.table2), ("table3", results.table3)):
            if res:
                rendered = render_association_table(res, TABLE_TITLES[key])
                run.write(f"{key}.csv", rendered.to_csv())
                run.write(f"{key}.md", rendered.to_markdown())
                rows += association_rows(key, res)
        if results.s1:
            rendered = render_suppression_table(results.s1, TABLE_TITLES["s1"])
            run.write("s1.csv", rendered.to_csv())
            run.write("s1.md", rendered.to_markdown())
            rows += suppression_rows("s1", results.s1)
        for key, res, label in (("s2", results.s2, "Marital Status"), ("s3", results.s3, "Marital Status + Interview PCL")):
            if res:
                rendered = render_mediation_table(res, TABLE_TITLES[key], label)
                run.write(f"{key}.csv", rendered.to_csv())
                run.write(f"{key}.md", rendered.to_markdown())
                rows += mediation_rows(key, res)
        if rows:
            run.write("results.csv", results_csv(rows, header))
        if results.joint:
            run.write("joint.csv", joint_csv(results.joint))
        for feat, (top, bottom) in results.tertiles.items():
            for p in emit_tertile_plot(top, bottom, run.out / f"tertiles_{feat}"):
                run.record(p)
        completed.append(stage)
    except _Stop:
        pass
    except Exception as exc:  # noqa: BLE001 - every failure is reported with its stage
        error = StageError(stage, exc)
        log.error("%s", error)
    manifest["stages_completed"] = completed
    manifest["status"] = "complete" if error is None else "partial"
    if error is not None:
        manifest["error"] = str(error)
    manifest["artifacts"] = dict(sorted(run.artifacts.items()))
    (run.out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return RunOutcome(0 if error is None else 1, manifest, error)


class _Stop(Exception):
    pass
