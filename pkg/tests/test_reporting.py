import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from langtraj.assess import FEATURES
from langtraj.inference import AssociationResult, TertileSeries
from langtraj.reporting import (
    association_rows,
    emit_tertile_plot,
    format_cell,
    read_results_csv,
    render_association_table,
    render_results,
    results_csv,
    tertile_rows,
)


def result(name, r=0.1, sig=False, p_adj=0.5):
    return AssociationResult(name, 75, r, (r - 0.2, r + 0.2), 0.3, r, (r - 0.2, r + 0.2), 0.3, p_adj, sig, p_adj, sig)


def test_published_cell():
    assert format_cell(0.38, (0.16, 0.56), True) == "0.38* [0.16, 0.56]"


def test_negative_zero():
    assert format_cell(-0.002, (-0.2, 0.001), False) == "0.00 [-0.20, 0.00]"


def test_canonical_row_order():
    results = [result(f) for f in FEATURES]
    random.Random(1).shuffle(results)
    table = render_association_table(results, "T")
    assert [row[1] for row in table.rows] == [
        "Anxiety", "Depression", "Neuroticism", "Extraversion", "First-Person Singular",
        "First-Person Plural", "Articles", "AVG Word Length", "Word Count",
    ]


def test_empty_results():
    with pytest.raises(ValueError):
        render_association_table([], "T")


def test_serializations_are_stable():
    results = [result(f, r=0.05 * i, sig=i % 2 == 0, p_adj=0.01 if i % 2 == 0 else 0.3) for i, f in enumerate(FEATURES)]
    a = render_association_table(results, "T")
    b = render_association_table([result(f, r=0.05 * i, sig=i % 2 == 0, p_adj=0.01 if i % 2 == 0 else 0.3) for i, f in enumerate(FEATURES)], "T")
    for fmt in ("csv", "markdown", "text"):
        assert a.serialize(fmt) == b.serialize(fmt)


@given(st.floats(-1, 1), st.booleans())
def test_star_iff_significant(r, sig):
    cell = format_cell(r, (r - 0.1, r + 0.1), sig)
    assert ("*" in cell) == sig
    assert not cell.startswith("-0.00")


def test_results_file_round_trip():
    results = [result(f, r=0.1 * i, sig=i == 2, p_adj=0.01 if i == 2 else 0.4) for i, f in enumerate(FEATURES)]
    rows = association_rows("table3", results)
    back = read_results_csv(results_csv(rows, {"bundle": "x"}))
    assert back == rows
    (table,) = render_results(back)
    assert table.rows[2][2] == "0.20* [0.00, 0.40]"
    for row in back:
        if row.effect.significant:
            assert row.effect.p_adj < 0.05


def series(group, values, members):
    values = np.asarray(values, float)
    return TertileSeries("anxiety", group, members, np.linspace(0, 5, len(values)), values)


def test_tertile_plot(tmp_path):
    top, bottom = series("top", [2.0] * 25, ["a"]), series("bottom", [-1.0] * 25, ["b"])
    csv_path, svg_path = emit_tertile_plot(top, bottom, tmp_path / "fig")
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "group,t,mean_adjusted_pcl" and len(lines) == 1 + 50
    assert {ln.split(",")[2] for ln in lines[1:26]} == {"2.0"}
    svg = svg_path.read_text()
    assert svg.lstrip().startswith("<?xml") and "#d62728" in svg and "#1f77b4" in svg
    again = emit_tertile_plot(top, bottom, tmp_path / "fig2")[1].read_text()
    assert again == svg


def test_overlapping_groups_rejected():
    with pytest.raises(ValueError):
        tertile_rows(series("top", [1, 2], ["a"]), series("bottom", [1, 2], ["a"]))
