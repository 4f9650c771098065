"""
BusyQ - Reference Table Reproduction
======================================
Recomputes every cell of the shape tables (T3_1 ... T7_2) and the moment
tables (T8_1 ... T8_6) with the engine each one calls for, and compares
the result with the embedded reference values.

  T3_1            closed form, constant-β family with β = 0
  T4_1            exact kernel derivatives, deterministic service
  T5_1, T6_1      quadrature kernel derivatives (exponential, power law)
  T7_1, T7_2      quadrature under truncation (Pareto)
  T8_x            all four moment columns (G1, D, M, EXP)

horizon_sweep() reruns the Pareto rows at fixed truncation horizons, which
separates horizon-driven cells from misprinted ones.

Moments are compared in log space, so cells far beyond the float range are
checked as precisely as small ones.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from busyq.config import TABLE_WORKERS, TOL_CLOSED_FORM, TOL_PARETO_PLATEAU, TOL_QUADRATURE
from busyq.distributions import (
    Deterministic,
    Exponential,
    QueueConfig,
    pareto_fixed_scale_for_mean,
    pareto_fixed_shape_for_mean,
    power_for_mean,
)
from busyq.errors import BusyQError, ParameterDomainError, UnknownTableError
from busyq.moments import (
    busy_period_moments,
    closed_moments_g1,
    exponential_reference_moments,
    mean_busy_period,
    shape_stats,
)
from busyq.quadrature import QuadratureSettings, TailPolicy
from data.reference_tables import (
    GOLDEN,
    GOLDEN_CELLS,
    MOMENT_TABLE_RHOS,
    POWER_ALPHAS,
    POWER_RHOS,
    SHAPE_RHOS,
)

logger = logging.getLogger(__name__)

PASS, FAIL, INFORMATIONAL, ERROR = "pass", "fail", "informational", "error"

TABLE_TITLES = {
    "T3_1": "Shape coefficients, constant-beta service (beta = 0)",
    "T4_1": "Shape coefficients, deterministic service",
    "T5_1": "Shape coefficients, exponential service",
    "T6_1": "Shape coefficients, power-law service (alpha = .25, .5, .8)",
    "T7_1": "Shape coefficients, Pareto service with shape 3",
    "T7_2": "Shape coefficients, Pareto service with scale 0.4",
    "T8_1": "Busy-period moments, rho = .5",
    "T8_2": "Busy-period moments, rho = 1",
    "T8_3": "Busy-period moments, rho = 10",
    "T8_4": "Busy-period moments, rho = 20",
    "T8_5": "Busy-period moments, rho = 50",
    "T8_6": "Busy-period moments, rho = 100",
}


class TableTolerances(BaseModel):
    """Relative tolerance per cell class."""

    model_config = ConfigDict(frozen=True)

    closed_form: float = Field(default=TOL_CLOSED_FORM, gt=0)
    quadrature: float = Field(default=TOL_QUADRATURE, gt=0)
    pareto_plateau: float = Field(default=TOL_PARETO_PLATEAU, gt=0)


@dataclass(frozen=True)
class GoldenCell:
    table_id: str
    row: str
    column: str
    expected: Optional[float]
    status: str
    coordinate: str


@dataclass(frozen=True)
class TableSpec:
    table_id: str
    title: str
    rows: tuple
    columns: tuple
    cells: tuple

    @property
    def is_moment_table(self) -> bool:
        return self.table_id.startswith("T8")

    def describe(self) -> dict:
        return {
            "table_id": self.table_id,
            "title": self.title,
            "rows": list(self.rows),
            "columns": list(self.columns),
            "cells": len(self.cells),
            "golden_cells": sum(1 for c in self.cells if c.status == GOLDEN),
        }


def _build_registry() -> dict:
    grouped = {}
    for raw in GOLDEN_CELLS:
        grouped.setdefault(raw["table_id"], []).append(GoldenCell(**raw))
    registry = {}
    for table_id, cells in grouped.items():
        rows = tuple(dict.fromkeys(c.row for c in cells))
        columns = tuple(dict.fromkeys(c.column for c in cells))
        registry[table_id] = TableSpec(table_id, TABLE_TITLES[table_id], rows, columns, tuple(cells))
    return registry


TABLES = _build_registry()


def normalize_table_id(text: str) -> str:
    """'T3.1', 't3_1' and '3.1' all name T3_1."""
    key = str(text).strip().upper().replace(".", "_").replace("-", "_")
    if not key.startswith("T"):
        key = "T" + key
    if key not in TABLES:
        raise UnknownTableError(f"unknown table {text!r} (known: {', '.join(TABLES)})")
    return key


def get_table(table_id: str) -> TableSpec:
    return TABLES[normalize_table_id(table_id)]


def list_tables() -> list:
    return [spec.describe() for spec in TABLES.values()]


# ===================== Cell Computation =====================
#
# A job computes every column of one row (or one row/α group) and returns
# {(row, column): value}. Shape jobs return plain floats, moment jobs return
# natural-log moments.


def _row(rho):
    return f"rho={rho:g}"


def _shape_job(rho, make_config, settings, columns=("delta1", "delta2", "delta3"),
               prefix=""):
    def run():
        moments = busy_period_moments(make_config(rho), 4, settings)
        stats = shape_stats(moments, allow_divergent=True)
        values = stats.as_dict()
        return {(_row(rho), prefix + c): values[c] for c in columns}, moments.warnings

    return run


def _g1_shape_job(rho):
    def run():
        stats = shape_stats(closed_moments_g1(1.0, rho, 4))
        values = stats.as_dict()
        return {(_row(rho), c): values[c] for c in ("delta1", "delta2", "delta3")}, ()

    return run


def _moment_job(column, rho, settings):
    def run():
        if column == "G1":
            moments = closed_moments_g1(1.0, rho, 8)
        elif column == "D":
            moments = busy_period_moments(QueueConfig(1.0, Deterministic(rho)), 8, settings)
        elif column == "M":
            moments = busy_period_moments(QueueConfig(1.0, Exponential(rho)), 8, settings)
        else:
            moments = exponential_reference_moments(mean_busy_period(1.0, rho), 8, 1.0, rho)
        return {(f"n={n}", column): moments.log_moment(n) for n in range(1, 9)}, moments.warnings

    return run


def _jobs(table_id: str, settings: QuadratureSettings) -> list:
    """(cell keys the job covers, callable) pairs for one table."""
    truncating = settings.model_copy(update={"tail_policy": TailPolicy.TRUNCATE_AND_WARN})
    shape_cols = ("delta1", "delta2", "delta3")
    jobs = []
    if table_id == "T3_1":
        for rho in SHAPE_RHOS:
            jobs.append(([(_row(rho), c) for c in shape_cols], _g1_shape_job(rho)))
    elif table_id in ("T4_1", "T5_1"):
        family = Deterministic if table_id == "T4_1" else Exponential
        for rho in SHAPE_RHOS:
            jobs.append((
                [(_row(rho), c) for c in shape_cols],
                _shape_job(rho, lambda r, f=family: QueueConfig(1.0, f(r)), settings),
            ))
    elif table_id == "T6_1":
        for rho in POWER_RHOS:
            for alpha in POWER_ALPHAS:
                prefix = f"a{alpha:g}_"
                jobs.append((
                    [(_row(rho), prefix + c) for c in ("delta2", "delta3")],
                    _shape_job(
                        rho,
                        lambda r, a=alpha: QueueConfig(r / a, power_for_mean(a)),
                        settings, columns=("delta2", "delta3"), prefix=prefix,
                    ),
                ))
    elif table_id in ("T7_1", "T7_2"):
        family = pareto_fixed_shape_for_mean if table_id == "T7_1" else pareto_fixed_scale_for_mean
        for rho in SHAPE_RHOS:
            jobs.append((
                [(_row(rho), c) for c in ("delta2", "delta3")],
                _shape_job(rho, lambda r, f=family: QueueConfig(1.0, f(r)),
                           truncating, columns=("delta2", "delta3")),
            ))
    else:
        rho = MOMENT_TABLE_RHOS[table_id]
        for column in ("G1", "D", "M", "EXP"):
            jobs.append(([(f"n={n}", column) for n in range(1, 9)],
                         _moment_job(column, rho, settings)))
    return jobs


def _tolerance(table_id: str, column: str, tolerances: TableTolerances) -> float:
    if table_id in ("T3_1", "T4_1"):
        return tolerances.closed_form
    if table_id in ("T7_1", "T7_2"):
        return tolerances.pareto_plateau
    if table_id.startswith("T8"):
        return tolerances.quadrature if column == "M" else tolerances.closed_form
    return tolerances.quadrature


def _format_moment(log_value: float) -> str:
    if log_value == -math.inf:
        return "0"
    log10_value = log_value / math.log(10.0)
    exponent = math.floor(log10_value)
    mantissa = 10.0 ** (log10_value - exponent)
    return f"{mantissa:.7f}e{exponent:+03d}"


def _compare(spec: TableSpec, cell: GoldenCell, value, failure, tolerance, warning) -> dict:
    record = {
        "table": spec.table_id,
        "row": cell.row,
        "column": cell.column,
        "coordinate": cell.coordinate,
        "expected": cell.expected,
        "computed": None,
        "computed_text": "",
        "rel_error": None,
        "tolerance": tolerance,
        "status": cell.status,
        "outcome": INFORMATIONAL,
        "diagnostic": warning or "",
    }
    if failure is not None:
        record["outcome"] = ERROR if cell.status == GOLDEN else INFORMATIONAL
        record["diagnostic"] = failure
        return record

    if spec.is_moment_table:
        record["computed"] = math.exp(value) if value < 709.78 else math.inf
        record["computed_text"] = _format_moment(value)
        if cell.expected is not None:
            record["rel_error"] = abs(math.expm1(value - math.log(cell.expected)))
    else:
        record["computed"] = value
        record["computed_text"] = f"{value:.8g}"
        if cell.expected is not None:
            record["rel_error"] = abs(value - cell.expected) / abs(cell.expected)

    if cell.status == GOLDEN and record["rel_error"] is not None:
        record["outcome"] = PASS if record["rel_error"] <= tolerance else FAIL
    return record


def compute_table(table_id: str, settings: Optional[QuadratureSettings] = None,
                  workers: int = TABLE_WORKERS,
                  tolerances: Optional[TableTolerances] = None) -> pd.DataFrame:
    """
    Recompute a table and compare it with the reference values.

    Engine errors never abort the run: the affected cells get outcome
    "error" (golden cells) or "informational" with the message as diagnostic.

    Returns:
        DataFrame with one row per cell in table order: table, row, column,
        coordinate, expected, computed, computed_text, rel_error, tolerance,
        status, outcome, diagnostic
    """
    spec = get_table(table_id)
    settings = settings or QuadratureSettings()
    tolerances = tolerances or TableTolerances()
    jobs = _jobs(spec.table_id, settings)

    values, failures, warnings = {}, {}, {}
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = [(keys, pool.submit(run)) for keys, run in jobs]
        for keys, future in futures:
            try:
                result, job_warnings = future.result()
            except BusyQError as e:
                logger.warning("%s: %s", spec.table_id, e)
                failures.update({key: f"{type(e).__name__}: {e}" for key in keys})
                continue
            values.update(result)
            if job_warnings:
                warnings.update({key: job_warnings[-1] for key in keys})

    records = []
    for cell in spec.cells:
        key = (cell.row, cell.column)
        records.append(_compare(
            spec, cell, values.get(key), failures.get(key),
            _tolerance(spec.table_id, cell.column, tolerances), warnings.get(key),
        ))
    report = pd.DataFrame(records)
    counts = report["outcome"].value_counts().to_dict()
    logger.info("%s: %s", spec.table_id, counts)
    return report


def table_exit_code(report: pd.DataFrame) -> int:
    """0 when every golden cell passes, 3 otherwise."""
    golden = report[report["status"] == GOLDEN]
    return 0 if (golden["outcome"] == PASS).all() else 3


# ===================== Horizon Sweep =====================


def horizon_sweep(table_id: str, horizons, rhos=None,
                  settings: Optional[QuadratureSettings] = None,
                  workers: int = TABLE_WORKERS) -> pd.DataFrame:
    """
    Recompute the Pareto shape rows at explicit truncation horizons.

    A cell whose value moves with the horizon is truncation dependent; one
    that stays put while disagreeing with the printed value is not.

    Returns:
        DataFrame with one row per (row, horizon): table, row, horizon,
        delta2, delta3, expected_delta2, expected_delta3, diagnostic
    """
    spec = get_table(table_id)
    if spec.table_id not in ("T7_1", "T7_2"):
        raise ParameterDomainError(f"horizon sweeps apply to T7_1 and T7_2, not {spec.table_id}")
    horizons = [float(h) for h in horizons]
    if not horizons or any(not math.isfinite(h) or h <= 0.0 for h in horizons):
        raise ParameterDomainError("horizons must be positive and finite")
    rhos = SHAPE_RHOS if rhos is None else tuple(float(r) for r in rhos)
    unknown = [r for r in rhos if _row(r) not in spec.rows]
    if unknown:
        raise ParameterDomainError(f"{spec.table_id} has no row for rho={unknown[0]:g}")

    base = (settings or QuadratureSettings()).model_copy(
        update={"tail_policy": TailPolicy.TRUNCATE_AND_WARN}
    )
    family = pareto_fixed_shape_for_mean if spec.table_id == "T7_1" else pareto_fixed_scale_for_mean
    expected = {(c.row, c.column): c.expected for c in spec.cells}
    columns = ("delta2", "delta3")

    jobs = []
    for rho in rhos:
        for horizon in horizons:
            at_horizon = base.model_copy(update={"truncation_horizon": horizon})
            jobs.append((rho, horizon, _shape_job(
                rho, lambda r, f=family: QueueConfig(1.0, f(r)), at_horizon, columns=columns,
            )))

    records = []
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = [(rho, horizon, pool.submit(run)) for rho, horizon, run in jobs]
        for rho, horizon, future in futures:
            row = _row(rho)
            record = {"table": spec.table_id, "row": row, "horizon": horizon,
                      "delta2": None, "delta3": None, "diagnostic": ""}
            try:
                values, _ = future.result()
            except BusyQError as e:
                record["diagnostic"] = f"{type(e).__name__}: {e}"
            else:
                record.update({c: values[(row, c)] for c in columns})
            for c in columns:
                record[f"expected_{c}"] = expected.get((row, c))
            records.append(record)

    logger.info("%s: swept %d rows over %d horizons", spec.table_id, len(rhos), len(horizons))
    return pd.DataFrame(records, columns=[
        "table", "row", "horizon", "delta2", "delta3",
        "expected_delta2", "expected_delta3", "diagnostic",
    ])
