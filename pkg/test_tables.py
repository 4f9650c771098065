"""Tests for the reference table registry and table reproduction."""

import pandas as pd
import pytest

from busyq.errors import ParameterDomainError, UnknownTableError
from busyq.tables import (
    TABLES,
    TableTolerances,
    compute_table,
    get_table,
    horizon_sweep,
    list_tables,
    normalize_table_id,
    table_exit_code,
)
from data.reference_tables import (
    GOLDEN,
    GOLDEN_CELLS,
    NOT_REPORTED,
    SUSPECTED_ERRATUM,
    TRUNCATION_DEPENDENT,
    golden_frame,
)

REPORT_COLUMNS = [
    "table", "row", "column", "coordinate", "expected", "computed", "computed_text",
    "rel_error", "tolerance", "status", "outcome", "diagnostic",
]


# ===================== Registry =====================


@pytest.mark.parametrize("text", ["T3.1", "t3_1", "3.1", " T3-1 "])
def test_normalize_table_id(text):
    assert normalize_table_id(text) == "T3_1"


@pytest.mark.parametrize("text", ["T9.9", "", "moments"])
def test_unknown_table(text):
    with pytest.raises(UnknownTableError):
        normalize_table_id(text)


def test_registry_contents():
    assert len(TABLES) == 12
    assert len(GOLDEN_CELLS) == 360
    assert len(get_table("T6.1").cells) == 90
    assert len(get_table("T8.3").cells) == 32
    described = list_tables()
    assert [t["table_id"] for t in described] == list(TABLES)


def test_unprinted_cells_are_not_reported():
    cells = {(c.row, c.column): c for c in get_table("T8_6").cells}
    assert cells[("n=8", "G1")].expected is None
    assert cells[("n=8", "G1")].status == NOT_REPORTED
    assert cells[("n=1", "G1")].status == GOLDEN


def test_golden_frame_matches_cells():
    frame = golden_frame()
    assert len(frame) == len(GOLDEN_CELLS)
    assert set(frame["table_id"]) == set(TABLES)


# ===================== Reproduction =====================


@pytest.mark.parametrize("table_id", list(TABLES))
def test_every_table_reproduces(table_id):
    report = compute_table(table_id)
    assert list(report.columns) == REPORT_COLUMNS
    golden = report[report["status"] == GOLDEN]
    assert (golden["outcome"] == "pass").all(), golden[golden["outcome"] != "pass"]
    assert table_exit_code(report) == 0


def test_flagged_cell_is_informational():
    report = compute_table("T5_1")
    cell = report[report["coordinate"] == "T5_1[rho=50, delta3]"].iloc[0]
    assert cell["status"] != GOLDEN
    assert cell["outcome"] == "informational"
    # δ3 − 9 tracks δ2 − 4 = 0.0049 here, not the printed 0.055
    assert cell["computed"] == pytest.approx(9.005, abs=2e-3)
    assert cell["rel_error"] > 1e-3


@pytest.mark.parametrize("table_id, golden_count", [("T8_1", 23), ("T8_2", 24)])
def test_analytic_moment_columns_reproduce(table_id, golden_count):
    report = compute_table(table_id)
    analytic = report[report["column"].isin(["G1", "D", "EXP"]) & (report["status"] == GOLDEN)]
    assert len(analytic) == golden_count
    assert (analytic["outcome"] == "pass").all()


def test_moments_beyond_float_range():
    report = compute_table("T8_6")
    cell = report[report["coordinate"] == "T8_6[n=8, G1]"].iloc[0]
    assert cell["outcome"] == "informational"
    assert cell["computed_text"].endswith("e+352")


def test_power_law_table_selected_cells():
    report = compute_table("T6_1").set_index("coordinate")
    assert report.loc["T6_1[rho=6, a0.8_delta3]", "computed"] == pytest.approx(8.9996, abs=1e-3)
    for rho in (20, 50, 100):
        assert report.loc[f"T6_1[rho={rho}, a0.8_delta2]", "outcome"] == "pass"
        assert report.loc[f"T6_1[rho={rho}, a0.8_delta3]", "outcome"] == "pass"
    assert report.loc["T6_1[rho=10, a0.5_delta2]", "outcome"] == "pass"
    assert report.loc["T6_1[rho=10, a0.5_delta3]", "outcome"] == "pass"


def test_pareto_table_plateau():
    report = compute_table("T7_1").set_index("coordinate")
    for rho in (50, 100):
        assert report.loc[f"T7_1[rho={rho}, delta2]", "outcome"] == "pass"
        assert report.loc[f"T7_1[rho={rho}, delta3]", "outcome"] == "pass"
    assert report.loc["T7_1[rho=1, delta2]", "status"] == TRUNCATION_DEPENDENT


# Misprinted cells and independent values of what they should read.
@pytest.mark.parametrize("table_id, coordinate, value, rel", [
    ("T5_1", "T5_1[rho=0.5, delta2]", 5.04787431, 1e-6),
    ("T5_1", "T5_1[rho=0.5, delta3]", 10.4338446, 1e-6),
    ("T6_1", "T6_1[rho=100, a0.25_delta2]", 4.18712485, 1e-6),
    ("T8_1", "T8_1[n=5, G1]", 575.2125434, 1e-8),
    ("T8_2", "T8_2[n=3, M]", 47.02679461, 1e-6),
    ("T8_3", "T8_3[n=2, D]", 969845809.0, 1e-8),
    ("T8_6", "T8_6[n=6, D]", 2.716574617e263, 1e-8),
])
def test_suspected_errata_match_independent_values(table_id, coordinate, value, rel):
    report = compute_table(table_id).set_index("coordinate")
    assert report.loc[coordinate, "status"] == SUSPECTED_ERRATUM
    assert report.loc[coordinate, "outcome"] == "informational"
    assert report.loc[coordinate, "computed"] == pytest.approx(value, rel=rel)


def test_exponential_shape_row_agrees_in_first_coefficient():
    report = compute_table("T5_1").set_index("coordinate")
    assert report.loc["T5_1[rho=0.5, delta1]", "status"] == GOLDEN
    assert report.loc["T5_1[rho=0.5, delta1]", "computed"] == pytest.approx(1.11071199, rel=1e-6)


# ===================== Horizon sweeps =====================


HORIZONS = (1e3, 1e4, 1e5, 1e6)


def test_sweep_layout():
    sweep = horizon_sweep("T7.1", HORIZONS[:2], rhos=[20])
    assert list(sweep.columns) == [
        "table", "row", "horizon", "delta2", "delta3",
        "expected_delta2", "expected_delta3", "diagnostic",
    ]
    assert list(sweep["horizon"]) == list(HORIZONS[:2])
    assert (sweep["expected_delta2"] == 4.0048588).all()


def test_sweep_rejects_other_tables_and_rows():
    with pytest.raises(ParameterDomainError):
        horizon_sweep("T5_1", HORIZONS)
    with pytest.raises(ParameterDomainError):
        horizon_sweep("T7_1", HORIZONS, rhos=[3])
    with pytest.raises(ParameterDomainError):
        horizon_sweep("T7_1", [0.0])


def test_shape_three_rho_20_is_horizon_invariant():
    sweep = horizon_sweep("T7_1", HORIZONS, rhos=[20])
    delta2 = sweep["delta2"].to_numpy()
    assert delta2.max() - delta2.min() <= 1e-7 * delta2.max()
    # no truncation brings the row to the printed 4.0048588
    assert (abs(delta2 / 4.0048588 - 1.0) > 1e-3).all()
    # the printed third coefficient is met at every horizon
    assert sweep["delta3"].to_numpy() == pytest.approx(9.0049233, rel=1e-3)


def test_shape_three_light_traffic_follows_the_horizon():
    sweep = horizon_sweep("T7_1", HORIZONS, rhos=[1])
    delta2 = sweep["delta2"].to_numpy()
    assert (delta2[1:] > delta2[:-1]).all()


def test_fixed_scale_heavy_rows_follow_the_horizon():
    sweep = horizon_sweep("T7_2", (1e3, 1e6), rhos=[10])
    delta2 = sweep["delta2"].to_numpy()
    assert abs(delta2[1] / delta2[0] - 1.0) > 1e-3


def test_fixed_scale_light_row_converges_away_from_print():
    report = compute_table("T7_2").set_index("coordinate")
    for column in ("delta2", "delta3"):
        cell = report.loc[f"T7_2[rho=0.5, {column}]"]
        assert cell["status"] == SUSPECTED_ERRATUM
        assert "divergent" not in cell["diagnostic"]
        assert cell["rel_error"] > 0.1
    assert report.loc["T7_2[rho=0.5, delta2]", "computed"] == pytest.approx(6.04, abs=0.02)
    assert report.loc["T7_2[rho=0.5, delta3]", "computed"] == pytest.approx(13.47, abs=0.05)
    sweep = horizon_sweep("T7_2", HORIZONS, rhos=[0.5])
    assert sweep["delta2"].to_numpy() == pytest.approx(6.04, abs=0.02)


def test_tight_tolerance_fails_the_table():
    report = compute_table("T3_1", tolerances=TableTolerances(closed_form=1e-30))
    assert (report["outcome"] == "fail").any()
    assert table_exit_code(report) == 3


def test_exit_code_on_error_cells():
    report = pd.DataFrame({"status": [GOLDEN, GOLDEN], "outcome": ["pass", "error"]})
    assert table_exit_code(report) == 3
    report = pd.DataFrame({"status": [GOLDEN, "suspected_erratum"], "outcome": ["pass", "fail"]})
    assert table_exit_code(report) == 0
