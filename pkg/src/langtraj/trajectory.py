"""Per-responder PCL trajectories: ordinary least squares of PCL on years since interview."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from datetime import date
from typing import Iterable, Sequence

from .cohort import DAYS_PER_YEAR, PclRecord
from .errors import DegenerateDesign

MIN_POINTS = 3


@dataclass(frozen=True)
class TimedScore:
    t: float  # years since the interview
    pcl: float


@dataclass(frozen=True)
class TrajectoryFit:
    responder_id: str
    intercept: float
    slope: float
    n_points: int
    rss: float


def compute_time_offsets(pcl_records: Iterable[PclRecord], interview_date: date) -> list[TimedScore]:
    """Post-interview records as (years since interview, PCL); records on or before the interview are dropped."""
    return [
        TimedScore((r.date - interview_date).days / DAYS_PER_YEAR, r.score)
        for r in pcl_records
        if r.date > interview_date
    ]


def fit_subject_trajectory(points: Sequence[TimedScore], responder_id: str = "") -> TrajectoryFit:
    points = list(points)
    if len(points) < MIN_POINTS:
        raise DegenerateDesign(f"{responder_id or 'subject'}: {len(points)} points, need {MIN_POINTS}")
    n = len(points)
    t_bar = math.fsum(p.t for p in points) / n
    y_bar = math.fsum(p.pcl for p in points) / n
    sxx = math.fsum((p.t - t_bar) ** 2 for p in points)
    if sxx == 0.0:
        raise DegenerateDesign(f"{responder_id or 'subject'}: all time points identical")
    sxy = math.fsum((p.t - t_bar) * (p.pcl - y_bar) for p in points)
    slope = sxy / sxx
    intercept = y_bar - slope * t_bar
    rss = math.fsum((p.pcl - intercept - slope * p.t) ** 2 for p in points)
    return TrajectoryFit(responder_id, intercept, slope, n, rss)


def fit_cohort(panels: dict[str, list[PclRecord]], interview_dates: dict[str, date], ids: Iterable[str]) -> list[TrajectoryFit]:
    return [
        fit_subject_trajectory(compute_time_offsets(panels[rid], interview_dates[rid]), rid) for rid in ids
    ]


def trajectory_table(fits: Iterable[TrajectoryFit]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["responder_id", "intercept", "slope", "n_points", "rss"])
    for f in fits:
        w.writerow([f.responder_id, repr(f.intercept), repr(f.slope), f.n_points, repr(f.rss)])
    return buf.getvalue()
