"""Transcript, PCL and demographics ingestion plus sample selection.

File formats
------------
transcripts : JSON lines, one responder per line::

    {"responder_id": "r1", "interview_date": "2012-05-01",
     "utterances": [{"t": 0.0, "speaker": "responder", "text": "..."}]}

pcl : CSV with header ``responder_id,date,pcl``
demographics : CSV with header ``responder_id,age,gender,police,marital_status``
(an optional ``years_since_911`` column is cross-checked against the interview date).
"""
from __future__ import annotations

import csv
import io
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Mapping

from .errors import NoBaseline, ParseError

SPEAKERS = ("responder", "interviewer")
GENDERS = ("male", "female")
MARITAL = ("married", "not_married", "unknown")

PCL_MIN = 17.0
PCL_MAX = 85.0
BASELINE_WINDOW_DAYS = 730
FOLLOW_UP_MIN_DAYS = 730
MIN_POST_RECORDS = 3
DAYS_PER_YEAR = 365.25
ATTACK_DATE = date(2001, 9, 11)


@dataclass(frozen=True)
class Utterance:
    start_time: float
    speaker: str
    text: str

    def __post_init__(self):
        if not (self.start_time >= 0 and math.isfinite(self.start_time)):
            raise ValueError(f"start_time must be finite and >= 0, got {self.start_time!r}")
        if self.speaker not in SPEAKERS:
            raise ValueError(f"unknown speaker {self.speaker!r}")


@dataclass(frozen=True)
class Transcript:
    responder_id: str
    interview_date: date
    utterances: tuple[Utterance, ...]

    def __post_init__(self):
        if not self.responder_id:
            raise ValueError("responder_id must be non-empty")
        times = [u.start_time for u in self.utterances]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError(f"utterances of {self.responder_id} are not sorted by start_time")

    def responder_text(self) -> list[str]:
        return [u.text for u in self.utterances if u.speaker == "responder"]


@dataclass(frozen=True)
class PclRecord:
    responder_id: str
    date: date
    score: float

    def __post_init__(self):
        if not (PCL_MIN <= self.score <= PCL_MAX):
            raise ValueError(
                f"PCL score {self.score} for {self.responder_id} outside [{PCL_MIN:g}, {PCL_MAX:g}]"
            )


def years_between(start: date, end: date) -> float:
    return (end - start).days / DAYS_PER_YEAR


@dataclass(frozen=True)
class Demographics:
    responder_id: str
    age_at_interview: float
    gender: str
    occupation_police: bool
    marital_status: str = "unknown"
    years_since_911: float | None = None

    def __post_init__(self):
        if not self.age_at_interview > 0:
            raise ValueError(f"age must be positive for {self.responder_id}")
        if self.gender not in GENDERS:
            raise ValueError(f"unknown gender {self.gender!r}")
        if self.marital_status not in MARITAL:
            raise ValueError(f"unknown marital_status {self.marital_status!r}")
        if self.years_since_911 is not None and self.years_since_911 < 0:
            raise ValueError("years_since_911 must be >= 0")

    def with_interview_date(self, interview_date: date) -> "Demographics":
        """Fill ``years_since_911`` from the interview date, checking any stored value."""
        derived = years_between(ATTACK_DATE, interview_date)
        if derived < 0:
            raise ValueError(f"interview date {interview_date} precedes 2001-09-11")
        if self.years_since_911 is not None and abs(self.years_since_911 - derived) > 0.1:
            raise ValueError(
                f"years_since_911={self.years_since_911} inconsistent with interview date "
                f"{interview_date} ({derived:.2f}) for {self.responder_id}"
            )
        return Demographics(
            self.responder_id,
            self.age_at_interview,
            self.gender,
            self.occupation_police,
            self.marital_status,
            derived,
        )


@dataclass
class SampleEntry:
    responder_id: str
    baseline_pcl: PclRecord | None
    pre_interview_count: int
    post_interview_count: int
    eligible_concurrent: bool
    eligible_trajectory: bool
    reason: str = ""


@dataclass
class AnalysisSample:
    entries: dict[str, SampleEntry] = field(default_factory=dict)

    def concurrent_ids(self) -> list[str]:
        return [k for k, e in self.entries.items() if e.eligible_concurrent]

    def trajectory_ids(self) -> list[str]:
        return [k for k, e in self.entries.items() if e.eligible_trajectory]

    def __len__(self):
        return len(self.entries)


# --- parsing ---------------------------------------------------------------


def _is_path(source) -> bool:
    if isinstance(source, Path):
        return True
    return isinstance(source, str) and "\n" not in source and len(source) < 4096 and Path(source).is_file()


def _lines(source) -> tuple[list[str], str | None]:
    if _is_path(source):
        return Path(source).read_text(encoding="utf-8").splitlines(), str(source)
    if isinstance(source, str):
        return source.splitlines(), None
    return [line.rstrip("\r\n") for line in source], getattr(source, "name", None)


def _parse_date(value, *, source, line, what) -> date:
    try:
        return date.fromisoformat(str(value).strip())
    except (TypeError, ValueError):
        raise ParseError(f"invalid {what} {value!r}", source=source, line=line) from None


def parse_transcripts(source) -> list[Transcript]:
    """Parse line-delimited JSON transcripts; utterances are sorted by start time.

    ``source`` may be a path, a string of JSON lines, or an iterable of lines.
    """
    lines, name = _lines(source)
    out: list[Transcript] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON ({exc.msg})", source=name, line=lineno) from None
        if not isinstance(rec, dict):
            raise ParseError("record is not an object", source=name, line=lineno)
        rid = rec.get("responder_id")
        if not isinstance(rid, str) or not rid:
            raise ParseError("missing responder_id", source=name, line=lineno)
        if rid in seen:
            raise ParseError(f"duplicate responder_id {rid}", source=name, line=lineno)
        seen.add(rid)
        interview = _parse_date(rec.get("interview_date"), source=name, line=lineno, what="interview_date")
        utts = []
        for j, u in enumerate(rec.get("utterances") or []):
            if not isinstance(u, dict) or "speaker" not in u or "text" not in u:
                raise ParseError(f"utterance {j} missing speaker/text", source=name, line=lineno)
            try:
                utts.append(Utterance(float(u.get("t", 0.0)), u["speaker"], str(u["text"])))
            except (TypeError, ValueError) as exc:
                raise ParseError(f"utterance {j}: {exc}", source=name, line=lineno) from None
        # stable sort keeps same-time utterances in file order
        utts.sort(key=lambda u: u.start_time)
        out.append(Transcript(rid, interview, tuple(utts)))
    return out


def serialize_transcripts(transcripts: Iterable[Transcript]) -> str:
    rows = []
    for tr in transcripts:
        rows.append(
            json.dumps(
                {
                    "responder_id": tr.responder_id,
                    "interview_date": tr.interview_date.isoformat(),
                    "utterances": [
                        {"t": u.start_time, "speaker": u.speaker, "text": u.text} for u in tr.utterances
                    ],
                },
                ensure_ascii=False,
            )
        )
    return "".join(r + "\n" for r in rows)


def _csv_rows(source, required: tuple[str, ...]):
    lines, name = _lines(source)
    reader = csv.DictReader(lines)
    missing = [c for c in required if c not in (reader.fieldnames or [])]
    if missing:
        raise ParseError(f"missing column(s) {', '.join(missing)}", source=name, line=1)
    for lineno, row in enumerate(reader, start=2):
        yield name, lineno, row


def parse_pcl(source) -> list[PclRecord]:
    out = []
    for name, lineno, row in _csv_rows(source, ("responder_id", "date", "pcl")):
        rid = (row["responder_id"] or "").strip()
        if not rid:
            raise ParseError("missing responder_id", source=name, line=lineno)
        when = _parse_date(row["date"], source=name, line=lineno, what="date")
        try:
            score = float(row["pcl"])
        except (TypeError, ValueError):
            raise ParseError(f"invalid pcl {row['pcl']!r}", source=name, line=lineno) from None
        try:
            out.append(PclRecord(rid, when, score))
        except ValueError as exc:
            raise ParseError(str(exc), source=name, line=lineno) from None
    return out


def serialize_pcl(records: Iterable[PclRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["responder_id", "date", "pcl"])
    for r in records:
        w.writerow([r.responder_id, r.date.isoformat(), repr(float(r.score))])
    return buf.getvalue()


_TRUE = {"1", "true", "yes", "police", "y", "t"}
_FALSE = {"0", "false", "no", "other", "n", "f"}


def parse_demographics(source) -> list[Demographics]:
    out = []
    seen = set()
    for name, lineno, row in _csv_rows(source, ("responder_id", "age", "gender", "police", "marital_status")):
        rid = (row["responder_id"] or "").strip()
        if not rid:
            raise ParseError("missing responder_id", source=name, line=lineno)
        if rid in seen:
            raise ParseError(f"duplicate responder_id {rid}", source=name, line=lineno)
        seen.add(rid)
        police = (row["police"] or "").strip().lower()
        if police not in _TRUE | _FALSE:
            raise ParseError(f"invalid police flag {row['police']!r}", source=name, line=lineno)
        marital = (row["marital_status"] or "").strip().lower() or "unknown"
        years = (row.get("years_since_911") or "").strip()
        try:
            out.append(
                Demographics(
                    rid,
                    float(row["age"]),
                    (row["gender"] or "").strip().lower(),
                    police in _TRUE,
                    marital,
                    float(years) if years else None,
                )
            )
        except (TypeError, ValueError) as exc:
            raise ParseError(str(exc), source=name, line=lineno) from None
    return out


def serialize_demographics(demographics: Iterable[Demographics]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["responder_id", "age", "gender", "police", "marital_status"])
    for d in demographics:
        w.writerow([d.responder_id, repr(float(d.age_at_interview)), d.gender, int(d.occupation_police), d.marital_status])
    return buf.getvalue()


# --- selection -------------------------------------------------------------


def _baseline_key(rec: PclRecord, interview_date: date):
    gap = (rec.date - interview_date).days
    # ties on |gap| go to the pre-interview record; date and score complete the order
    return (abs(gap), gap > 0, rec.date, rec.score)


def select_baseline_pcl(records: Iterable[PclRecord], interview_date: date) -> PclRecord:
    """PCL record closest to the interview, within two years (730 days)."""
    records = list(records)
    if not records:
        raise NoBaseline("no PCL records")
    ids = {r.responder_id for r in records}
    if len(ids) > 1:
        raise ValueError(f"records span several responders: {sorted(ids)}")
    best = min(records, key=lambda r: _baseline_key(r, interview_date))
    if abs((best.date - interview_date).days) > BASELINE_WINDOW_DAYS:
        raise NoBaseline(f"no PCL within {BASELINE_WINDOW_DAYS} days of {interview_date} for {best.responder_id}")
    return best


def group_pcl(records: Iterable[PclRecord]) -> dict[str, list[PclRecord]]:
    grouped: dict[str, list[PclRecord]] = defaultdict(list)
    for r in records:
        grouped[r.responder_id].append(r)
    for recs in grouped.values():
        recs.sort(key=lambda r: (r.date, r.score))
    return dict(grouped)


def apply_inclusion_criteria(
    transcripts: Iterable[Transcript] | Mapping[str, date],
    pcl_records: Iterable[PclRecord] | Mapping[str, list[PclRecord]],
    demographics: Iterable[Demographics] | Mapping[str, Demographics] | None = None,
) -> AnalysisSample:
    """Flag each transcript's responder for the concurrent and trajectory analyses.

    ``transcripts`` may also be a mapping of responder id to interview date.
    Demographics do not affect eligibility; missing covariates are handled by
    listwise deletion in each analysis.
    """
    grouped = pcl_records if isinstance(pcl_records, Mapping) else group_pcl(pcl_records)
    if isinstance(transcripts, Mapping):
        interviews = list(transcripts.items())
    else:
        interviews = [(tr.responder_id, tr.interview_date) for tr in transcripts]
    sample = AnalysisSample()
    for rid, day in interviews:
        recs = grouped.get(rid, [])
        pre = [r for r in recs if r.date < day]
        post = [r for r in recs if r.date > day]
        baseline = None
        reason = ""
        if not recs:
            reason = "no PCL records"
        else:
            try:
                baseline = select_baseline_pcl(recs, day)
            except NoBaseline:
                reason = "no PCL within two years"
        concurrent = baseline is not None and len(pre) >= 1
        if baseline is not None and not pre:
            reason = "no pre-interview PCL"
        trajectory = (
            concurrent
            and len(post) >= MIN_POST_RECORDS
            and (max(r.date for r in post) - day).days >= FOLLOW_UP_MIN_DAYS
        )
        if concurrent and not trajectory:
            reason = "insufficient post-interview follow-up"
        sample.entries[rid] = SampleEntry(
            rid, baseline, len(pre), len(post), concurrent, trajectory, reason
        )
    return sample


def sample_table(sample: AnalysisSample) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(
        ["responder_id", "baseline_date", "baseline_pcl", "pre_count", "post_count",
         "eligible_concurrent", "eligible_trajectory", "reason"]
    )
    for e in sample.entries.values():
        b = e.baseline_pcl
        w.writerow(
            [e.responder_id, b.date.isoformat() if b else "", repr(b.score) if b else "",
             e.pre_interview_count, e.post_interview_count, int(e.eligible_concurrent),
             int(e.eligible_trajectory), e.reason]
        )
    return buf.getvalue()
