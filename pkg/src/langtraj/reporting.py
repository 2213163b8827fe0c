"""Association tables in the published layout, plus tertile plot data and figures.

Cells read ``0.38* [0.16, 0.56]``: the point estimate to two decimals, a star
when the Benjamini-Hochberg adjusted p-value is below alpha, then the 95%
interval. Everything here is a pure function of its inputs.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .assess import FEATURE_LABELS, FEATURES
from .inference import COVARIATE_LABELS, AssociationResult, Effect, MediationRow, SuppressionRow, TertileSeries

TRAIT_GROUP = "Psychological Traits"
STYLE_GROUP = "Linguistic Style"
_GROUP = {f: (TRAIT_GROUP if i < 4 else STYLE_GROUP) for i, f in enumerate(FEATURES)}


def fmt2(value: float) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "NA"
    text = "%.2f" % value
    return "0.00" if text == "-0.00" else text


def format_cell(value: float, ci: Sequence[float], significant: bool) -> str:
    star = "*" if significant else ""
    return f"{fmt2(value)}{star} [{fmt2(ci[0])}, {fmt2(ci[1])}]"


def effect_cell(e: Effect) -> str:
    return format_cell(e.value, e.ci, e.significant)


@dataclass
class RenderedTable:
    title: str
    headers: list[str]
    rows: list[list[str]]
    notes: list[str] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.headers)
        w.writerows(self.rows)
        return buf.getvalue()

    def to_markdown(self) -> str:
        lines = [f"**{self.title}**", ""]
        lines.append("| " + " | ".join(self.headers) + " |")
        lines.append("|" + "|".join("---" for _ in self.headers) + "|")
        lines += ["| " + " | ".join(r) + " |" for r in self.rows]
        if self.notes:
            lines.append("")
            lines += self.notes
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        widths = [max(len(h), *(len(r[j]) for r in self.rows)) if self.rows else len(h) for j, h in enumerate(self.headers)]
        def line(cells):
            return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
        out = [self.title, line(self.headers), line(["-" * w for w in widths])]
        out += [line(r) for r in self.rows]
        out += self.notes
        return "\n".join(out) + "\n"

    def serialize(self, fmt: str) -> str:
        try:
            return {"csv": self.to_csv, "markdown": self.to_markdown, "md": self.to_markdown, "text": self.to_text}[fmt]()
        except KeyError:
            raise ValueError(f"unknown table format {fmt!r}") from None


def _canonical(items, key) -> list:
    """Known features in the fixed order, then any others in input order."""
    rank = {f: i for i, f in enumerate(FEATURES)}
    indexed = list(enumerate(items))
    indexed.sort(key=lambda p: (rank.get(key(p[1]), len(rank)), p[0]))
    return [it for _, it in indexed]


def _label_cells(name: str) -> list[str]:
    return [_GROUP.get(name, ""), FEATURE_LABELS.get(name, name)]


STAR_NOTE = "*p<0.05, Benjamini-Hochberg (False-Discovery Rate) corrected."


def render_association_table(
    results: Iterable[AssociationResult],
    title: str,
    r_header: str = "r [95% CI]",
    beta_header: str = "β (adjusted) [95% CI]",
) -> RenderedTable:
    results = list(results)
    if not results:
        raise ValueError("no results to render")
    rows = [
        [*_label_cells(a.feature_name), format_cell(a.r, a.r_ci, a.r_significant), format_cell(a.beta, a.beta_ci, a.significant)]
        for a in _canonical(results, lambda a: a.feature_name)
    ]
    return RenderedTable(title, ["Group", "Language Feature", r_header, beta_header], rows, [STAR_NOTE])


def render_suppression_table(rows: Iterable[SuppressionRow], title: str) -> RenderedTable:
    rows = list(rows)
    if not rows:
        raise ValueError("no results to render")
    covs = list(rows[0].single)
    headers = ["Group", "Language Feature", "Unadjusted", *(COVARIATE_LABELS.get(c, c) for c in covs), "Adjusted"]
    body = [
        [*_label_cells(r.feature_name), effect_cell(r.unadjusted), *(effect_cell(r.single[c]) for c in covs), effect_cell(r.adjusted)]
        for r in _canonical(rows, lambda r: r.feature_name)
    ]
    note = "Adjusted for " + ", ".join(COVARIATE_LABELS.get(c, c) for c in covs) + "."
    return RenderedTable(title, headers, body, [STAR_NOTE, note])


def render_mediation_table(rows: Iterable[MediationRow], title: str, marital_header: str = "Marital Status") -> RenderedTable:
    rows = list(rows)
    if not rows:
        raise ValueError("no results to render")
    headers = ["Group", "Language Feature", "Unadjusted", marital_header, "Adjusted", "Adjusted + Marital Status"]
    body = [
        [*_label_cells(r.feature_name), *(effect_cell(e) for e in (r.unadjusted, r.marital_only, r.standard, r.with_marital))]
        for r in _canonical(rows, lambda r: r.feature_name)
    ]
    return RenderedTable(title, headers, body, [STAR_NOTE])


# --- flat results file -----------------------------------------------------

RESULT_COLUMNS = ("table", "feature", "column", "n", "value", "ci_lo", "ci_hi", "p", "p_adj", "significant")


@dataclass(frozen=True)
class ResultRow:
    table: str
    feature: str
    column: str
    n: int
    effect: Effect


def association_rows(table: str, results: Iterable[AssociationResult]) -> list[ResultRow]:
    out = []
    for a in results:
        out.append(ResultRow(table, a.feature_name, "r", a.n, a.r_effect))
        out.append(ResultRow(table, a.feature_name, "beta", a.n, a.beta_effect))
    return out


def suppression_rows(table: str, rows: Iterable[SuppressionRow]) -> list[ResultRow]:
    out = []
    for r in rows:
        out.append(ResultRow(table, r.feature_name, "unadjusted", r.n, r.unadjusted))
        out += [ResultRow(table, r.feature_name, c, r.n, e) for c, e in r.single.items()]
        out.append(ResultRow(table, r.feature_name, "adjusted", r.n, r.adjusted))
    return out


def mediation_rows(table: str, rows: Iterable[MediationRow]) -> list[ResultRow]:
    return [
        ResultRow(table, r.feature_name, col, r.n, getattr(r, col))
        for r in rows
        for col in ("unadjusted", "marital_only", "standard", "with_marital")
    ]


def _num(x: float) -> str:
    return "nan" if math.isnan(x) else repr(float(x))


def results_csv(rows: Iterable[ResultRow], header: dict[str, str] | None = None) -> str:
    buf = io.StringIO()
    for k, v in (header or {}).items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in rows:
        e = r.effect
        w.writerow([r.table, r.feature, r.column, r.n, _num(e.value), _num(e.ci[0]), _num(e.ci[1]), _num(e.p), _num(e.p_adj), int(e.significant)])
    return buf.getvalue()


def read_results_csv(source) -> list[ResultRow]:
    text = Path(source).read_text() if isinstance(source, Path) or "\n" not in str(source) else str(source)
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    out = []
    for rec in csv.DictReader(lines):
        e = Effect(
            float(rec["value"]),
            (float(rec["ci_lo"]), float(rec["ci_hi"])),
            float(rec["p"]),
            float(rec["p_adj"]),
            rec["significant"] == "1",
        )
        out.append(ResultRow(rec["table"], rec["feature"], rec["column"], int(rec["n"]), e))
    return out


def render_results(rows: Iterable[ResultRow], titles: dict[str, str] | None = None) -> list[RenderedTable]:
    """One table per ``table`` key, columns in first-seen order."""
    titles = titles or {}
    tables: dict[str, dict[str, dict[str, Effect]]] = {}
    columns: dict[str, list[str]] = {}
    for r in rows:
        tables.setdefault(r.table, {}).setdefault(r.feature, {})[r.column] = r.effect
        cols = columns.setdefault(r.table, [])
        if r.column not in cols:
            cols.append(r.column)
    out = []
    for name, feats in tables.items():
        cols = columns[name]
        body = [
            [*_label_cells(f), *(effect_cell(feats[f][c]) if c in feats[f] else "" for c in cols)]
            for f in _canonical(list(feats), lambda f: f)
        ]
        heads = [COVARIATE_LABELS.get(c, c) for c in cols]
        out.append(RenderedTable(titles.get(name, name), ["Group", "Language Feature", *heads], body, [STAR_NOTE]))
    return out


# --- tertile figure --------------------------------------------------------

TOP_COLOR = "#d62728"
BOTTOM_COLOR = "#1f77b4"


def tertile_rows(top: TertileSeries, bottom: TertileSeries) -> list[tuple[str, float, float]]:
    if set(top.members) & set(bottom.members):
        raise ValueError("tertile groups overlap")
    return [(s.group, float(t), float(v)) for s in (top, bottom) for t, v in zip(s.t, s.mean_adjusted_pcl)]


def tertile_csv(top: TertileSeries, bottom: TertileSeries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["group", "t", "mean_adjusted_pcl"])
    for g, t, v in tertile_rows(top, bottom):
        w.writerow([g, repr(t), repr(v)])
    return buf.getvalue()


def read_tertile_csv(source) -> dict[str, tuple[list[float], list[float]]]:
    text = Path(source).read_text()
    series: dict[str, tuple[list[float], list[float]]] = {}
    for rec in csv.DictReader(ln for ln in text.splitlines() if not ln.startswith("#")):
        ts, vs = series.setdefault(rec["group"], ([], []))
        ts.append(float(rec["t"]))
        vs.append(float(rec["mean_adjusted_pcl"]))
    return series


def tertile_svg(series: dict[str, tuple[Sequence[float], Sequence[float]]], title: str = "") -> str:
    """Deterministic SVG: top tertile in red, bottom in blue."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "langtraj", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        styles = {"top": (TOP_COLOR, "-", "Top tertile"), "bottom": (BOTTOM_COLOR, "--", "Bottom tertile")}
        for group in ("top", "bottom"):
            if group in series:
                color, ls, label = styles[group]
                ts, vs = series[group]
                ax.plot(ts, vs, color=color, linestyle=ls, linewidth=2, label=label)
        ax.set_xlabel("Years since interview")
        ax.set_ylabel("Adjusted PCL")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        fig.tight_layout()
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": "langtraj"})
        plt.close(fig)
    return buf.getvalue()


def emit_tertile_plot(top: TertileSeries, bottom: TertileSeries, out_stem) -> tuple[Path, Path]:
    """Write ``<stem>.csv`` (group, t, mean_adjusted_pcl) and ``<stem>.svg``."""
    stem = Path(out_stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    csv_path, svg_path = stem.with_suffix(".csv"), stem.with_suffix(".svg")
    csv_path.write_text(tertile_csv(top, bottom))
    data = {s.group: (list(s.t), list(s.mean_adjusted_pcl)) for s in (top, bottom)}
    svg_path.write_text(tertile_svg(data, FEATURE_LABELS.get(top.feature_name, top.feature_name)))
    return csv_path, svg_path
