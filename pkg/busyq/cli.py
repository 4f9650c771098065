"""
BusyQ - Command-Line Interface
================================
    busyq [global options] moments|shape|cdf|lst|simulate|table|sweep ...

Global options: --format csv|json|markdown, --rel-tol, --abs-tol, --horizon,
--tail-policy error|truncate, --seed, --verbose.

Exit codes: 0 success, 1 usage or parameter error, 2 computation error,
3 reference-table mismatch.
"""

import json
import logging
import math
import sys
from typing import Literal, Optional

import click
import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from busyq import __version__
from busyq.config import SIM_DEFAULT_SEED, SIM_MAX_EVENTS_PER_PERIOD, TABLE_WORKERS, configure_logging
from busyq.data_loader import parse_dist_spec
from busyq.distributions import BetaFamily, QueueConfig
from busyq.errors import BusyQError, ParameterDomainError, UnknownTableError
from busyq.moments import (
    busy_period_moments,
    exponential_reference_moments,
    mean_busy_period,
    shape_stats,
)
from busyq.quadrature import QuadratureSettings, TailPolicy
from busyq.simulate import SimulationPlan, sample_busy_periods
from busyq.tables import TableTolerances, compute_table, horizon_sweep, table_exit_code
from busyq.transforms import (
    GridFunction,
    GridKind,
    SeriesSettings,
    busy_cdf_beta,
    busy_cdf_heavy_traffic,
    busy_cdf_series,
    lst_busy_beta,
    lst_busy_period,
    resolve_grid,
)

logger = logging.getLogger(__name__)


class RunConfig(BaseModel):
    """Settings shared by every subcommand."""

    model_config = ConfigDict(frozen=True)

    output_format: Literal["csv", "json", "markdown"] = Field(default="csv")
    quadrature: QuadratureSettings = Field(default_factory=QuadratureSettings)
    seed: int = Field(default=SIM_DEFAULT_SEED, ge=0, lt=2**64)
    verbose: bool = False


# ===================== Helpers =====================


def _queue_config(dist: str, lam: Optional[float], rho: Optional[float]) -> QueueConfig:
    service = parse_dist_spec(dist)
    if isinstance(service, BetaFamily):
        return QueueConfig(service.lam if lam is None else lam, service)
    if lam is not None:
        return QueueConfig(lam, service)
    if rho is not None:
        return QueueConfig.from_rho(service, rho)
    raise click.UsageError("--lambda (or --rho) is required for this distribution")


def _json_default(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def _emit(run: RunConfig, records, meta: Optional[dict] = None, warnings=()):
    """Render records as CSV, JSON or markdown on stdout; warnings go to stderr."""
    for message in dict.fromkeys(warnings):
        click.echo(f"warning: {message}", err=True)
    if run.output_format == "json":
        payload = dict(meta or {})
        payload["rows"] = records
        payload["warnings"] = list(dict.fromkeys(warnings))
        click.echo(json.dumps(payload, indent=2, default=_json_default))
        return
    df = records if isinstance(records, pd.DataFrame) else pd.DataFrame(records)
    if run.output_format == "markdown":
        click.echo(df.to_markdown(index=False))
    else:
        click.echo(df.to_csv(index=False), nl=False)


def _grid_records(grid: GridFunction) -> list:
    return grid.to_frame().to_dict(orient="records")


def _parse_horizon(ctx, param, value):
    if value is None or value == "auto":
        return "auto"
    try:
        horizon = float(value)
    except ValueError:
        raise click.BadParameter("expected a positive number or 'auto'") from None
    if not math.isfinite(horizon) or horizon <= 0.0:
        raise click.BadParameter("expected a positive number or 'auto'")
    return horizon


def _parse_terms(ctx, param, value):
    if value is None or value == "auto":
        return "auto"
    try:
        terms = int(value)
    except ValueError:
        raise click.BadParameter("expected a positive integer or 'auto'") from None
    if terms < 1:
        raise click.BadParameter("expected a positive integer or 'auto'")
    return terms


dist_option = click.option("--dist", "dist", required=True,
                           help="Distribution spec, e.g. exp:alpha=1 or beta:lambda=1,rho=1,beta=0")
lambda_option = click.option("--lambda", "lam", type=float, default=None, help="Arrival rate λ")
rho_option = click.option("--rho", type=float, default=None,
                          help="Traffic intensity ρ (sets λ = ρ/α when --lambda is absent)")


# ===================== Command Group =====================


@click.group()
@click.version_option(__version__, prog_name="busyq")
@click.option("--format", "output_format", type=click.Choice(["csv", "json", "markdown"]),
              default="csv", show_default=True, help="Output format")
@click.option("--rel-tol", type=float, default=None, help="Quadrature relative tolerance")
@click.option("--abs-tol", type=float, default=None, help="Quadrature absolute tolerance")
@click.option("--horizon", callback=_parse_horizon, default="auto", show_default=True,
              help="Truncation horizon substituted for ∞, or 'auto'")
@click.option("--tail-policy", type=click.Choice(["error", "truncate"]), default="error",
              show_default=True, help="Divergent tails: raise, or truncate with a warning")
@click.option("--seed", type=int, default=SIM_DEFAULT_SEED, show_default=True,
              help="Simulation seed")
@click.option("--verbose", "-v", is_flag=True, help="Log progress to stderr")
@click.pass_context
def cli(ctx, output_format, rel_tol, abs_tol, horizon, tail_policy, seed, verbose):
    """Busy-period analysis of the M|G|∞ queue."""
    quadrature = {"truncation_horizon": horizon, "tail_policy": TailPolicy(tail_policy)}
    if rel_tol is not None:
        quadrature["rel_tol"] = rel_tol
    if abs_tol is not None:
        quadrature["abs_tol"] = abs_tol
    try:
        ctx.obj = RunConfig(
            output_format=output_format,
            quadrature=QuadratureSettings(**quadrature),
            seed=seed,
            verbose=verbose,
        )
    except ValidationError as e:
        raise click.UsageError(f"invalid global option: {e.errors()[0]['msg']}") from e
    configure_logging("INFO" if verbose else None)


@cli.command()
@dist_option
@lambda_option
@rho_option
@click.option("--n", "n_max", type=click.IntRange(min=1), default=4, show_default=True,
              help="Highest moment order")
@click.option("--compare-exponential", is_flag=True,
              help="Add E[B^n]/E[X^n] against the exponential law of equal mean")
@click.pass_obj
def moments(run, dist, lam, rho, n_max, compare_exponential):
    """Raw moments E[B^1..B^n], rendered from their logarithms."""
    config = _queue_config(dist, lam, rho)
    result = busy_period_moments(config, n_max, run.quadrature)
    records = result.to_records()
    ratios = ()
    if compare_exponential:
        reference = exponential_reference_moments(mean_busy_period(config.lam, config.rho), n_max)
        ratios = result.ratio_to(reference)
    for k, record in enumerate(records):
        record["rho"] = config.rho
        record["provenance"] = result.provenance.value
        if ratios:
            record["ratio_to_exponential"] = ratios[k]
    meta = {
        "distribution": config.service.label,
        "lambda": config.lam,
        "rho": config.rho,
        "provenance": result.provenance.value,
        "divergent_from": result.divergent_from,
        "degenerate": result.degenerate,
    }
    _emit(run, records, meta, result.warnings)


@cli.command()
@click.option("--dist", "dist", default=None, help="Distribution spec")
@lambda_option
@rho_option
@click.option("--exponential-reference", is_flag=True,
              help="Shape of the exponential law itself: (1, 4, 9)")
@click.pass_obj
def shape(run, dist, lam, rho, exponential_reference):
    """Coefficient of variation and Pearson coefficients (δ1, δ2, δ3)."""
    if exponential_reference:
        stats = shape_stats(exponential_reference_moments(1.0, 4))
        _emit(run, [dict(stats.as_dict(), distance_from_exponential=0.0)],
              {"distribution": "exponential reference"})
        return
    if dist is None:
        raise click.UsageError("--dist is required unless --exponential-reference is given")
    config = _queue_config(dist, lam, rho)
    result = busy_period_moments(config, 4, run.quadrature)
    truncating = run.quadrature.tail_policy is TailPolicy.TRUNCATE_AND_WARN
    stats = shape_stats(result, allow_divergent=truncating)
    record = dict(stats.as_dict(), distance_from_exponential=stats.distance_from_exponential())
    record["rho"] = config.rho
    _emit(run, [record], {"distribution": config.service.label, "lambda": config.lam,
                          "rho": config.rho}, result.warnings)


@cli.command()
@dist_option
@lambda_option
@rho_option
@click.option("--method", type=click.Choice(["series", "beta-closed", "heavy-traffic"]),
              default="series", show_default=True, help="How B(t) is evaluated")
@click.option("--dt", type=float, default=None, help="Grid step")
@click.option("--t-max", type=float, default=None, help="Grid extent")
@click.option("--n-terms", callback=_parse_terms, default="auto", show_default=True,
              help="Convolution terms, or 'auto'")
@click.pass_obj
def cdf(run, dist, lam, rho, method, dt, t_max, n_terms):
    """Busy-period distribution function B(t) on a uniform grid."""
    config = _queue_config(dist, lam, rho)
    try:
        settings = SeriesSettings(dt=dt, t_max=t_max, n_terms=n_terms)
    except ValidationError as e:
        raise click.UsageError(f"invalid grid option: {e.errors()[0]['msg']}") from e
    service = config.service

    if method == "series":
        grid = busy_cdf_series(config, settings)
        summary = f"series: {len(grid)} points, dt={grid.dt:.6g}, method={grid.method}"
        if isinstance(service, BetaFamily):
            gap = grid.sup_distance(lambda t: busy_cdf_beta(service.lam, service.rho, service.beta, t))
            summary += f", max |series - beta-closed| = {gap:.3g}"
    else:
        if method == "beta-closed" and not isinstance(service, BetaFamily):
            raise click.UsageError("--method beta-closed needs a beta: distribution")
        warnings = []
        step, points = resolve_grid(config, settings, warnings)
        times = step * np.arange(points)
        if method == "beta-closed":
            values = busy_cdf_beta(service.lam, service.rho, service.beta, times)
        else:
            values = busy_cdf_heavy_traffic(config.lam, config.rho, times)
        grid = GridFunction(0.0, step, values, GridKind.CDF, method, tuple(warnings))
        summary = f"{method}: {len(grid)} points, dt={grid.dt:.6g}"

    click.echo(summary, err=True)
    _emit(run, _grid_records(grid), {"distribution": service.label, "lambda": config.lam,
                                     "rho": config.rho, "method": grid.method}, grid.warnings)


@cli.command()
@dist_option
@lambda_option
@rho_option
@click.option("--s", "points", type=float, multiple=True, required=True,
              help="Transform argument s > 0 (repeatable)")
@click.pass_obj
def lst(run, dist, lam, rho, points):
    """Laplace-Stieltjes transform E[exp(-sB)]."""
    config = _queue_config(dist, lam, rho)
    service = config.service
    records = []
    for s in points:
        record = {"s": s, "lst": lst_busy_period(config, s, run.quadrature)}
        if isinstance(service, BetaFamily):
            record["closed_form"] = lst_busy_beta(service.lam, service.rho, service.beta, s)
        records.append(record)
    _emit(run, records, {"distribution": service.label, "lambda": config.lam, "rho": config.rho})


@cli.command()
@dist_option
@lambda_option
@rho_option
@click.option("--periods", type=click.IntRange(min=1), default=10_000, show_default=True,
              help="Busy periods to simulate")
@click.option("--replications", type=click.IntRange(min=1), default=1, show_default=True,
              help="Independent replications (seeds spawned from --seed)")
@click.option("--max-events", type=click.IntRange(min=1), default=SIM_MAX_EVENTS_PER_PERIOD,
              show_default=True, help="Event cap per busy period")
@click.pass_obj
def simulate(run, dist, lam, rho, periods, replications, max_events):
    """Monte Carlo estimates of the first four busy-period moments."""
    config = _queue_config(dist, lam, rho)
    plan = SimulationPlan(config, periods, seed=run.seed, max_events_per_period=max_events,
                          replications=replications)
    report = sample_busy_periods(plan)
    analytic = mean_busy_period(config.lam, config.rho)
    se = report.standard_errors[0]
    click.echo(
        f"simulated {report.count} periods (truncated {report.truncated_periods}); "
        f"mean {report.mean:.6g} ± {se if se is not None else float('nan'):.3g}, "
        f"analytic {analytic:.6g}",
        err=True,
    )
    meta = {
        "distribution": config.service.label,
        "lambda": config.lam,
        "rho": config.rho,
        "seed": run.seed,
        "count": report.count,
        "truncated_periods": report.truncated_periods,
        "analytic_mean": analytic,
    }
    _emit(run, report.summary_records(), meta, report.warnings)


@cli.command()
@click.argument("table_id")
@click.option("--tol-closed", type=float, default=None, help="Tolerance of closed-form cells")
@click.option("--tol-quadrature", type=float, default=None, help="Tolerance of quadrature cells")
@click.option("--tol-pareto", type=float, default=None, help="Tolerance of Pareto plateau cells")
@click.option("--workers", type=click.IntRange(min=1), default=TABLE_WORKERS, show_default=True,
              help="Concurrent cell computations")
@click.pass_context
def table(ctx, table_id, tol_closed, tol_quadrature, tol_pareto, workers):
    """Recompute a reference table and compare it cell by cell."""
    run = ctx.obj
    overrides = {
        key: value
        for key, value in (("closed_form", tol_closed), ("quadrature", tol_quadrature),
                           ("pareto_plateau", tol_pareto))
        if value is not None
    }
    try:
        tolerances = TableTolerances(**overrides)
    except ValidationError as e:
        raise click.UsageError(f"invalid tolerance: {e.errors()[0]['msg']}") from e
    report = compute_table(table_id, run.quadrature, workers, tolerances)
    code = table_exit_code(report)
    counts = report["outcome"].value_counts().to_dict()
    click.echo(f"{report['table'].iloc[0]}: {counts}", err=True)
    if run.output_format == "json":
        records = json.loads(report.to_json(orient="records"))
        _emit(run, records, {"table": report["table"].iloc[0], "exit_code": code})
    else:
        _emit(run, report)
    ctx.exit(code)


@cli.command()
@click.argument("table_id")
@click.option("--at", "horizons", type=click.FloatRange(min=0.0, min_open=True), multiple=True,
              default=(1e3, 1e4, 1e5, 1e6), show_default=True,
              help="Truncation horizon (repeatable)")
@click.option("--rho", "rhos", type=float, multiple=True, help="Row to sweep (repeatable; default all)")
@click.option("--workers", type=click.IntRange(min=1), default=TABLE_WORKERS, show_default=True,
              help="Concurrent row computations")
@click.pass_obj
def sweep(run, table_id, horizons, rhos, workers):
    """Pareto shape rows recomputed at several truncation horizons."""
    frame = horizon_sweep(table_id, horizons, rhos or None, run.quadrature, workers)
    click.echo(f"{frame['table'].iloc[0]}: {len(frame)} row/horizon pairs", err=True)
    if run.output_format == "json":
        records = json.loads(frame.to_json(orient="records"))
        _emit(run, records, {"table": frame["table"].iloc[0]})
    else:
        _emit(run, frame)


# ===================== Entry Point =====================


def main(argv=None) -> int:
    """Run the CLI and translate failures into exit codes."""
    try:
        result = cli.main(args=argv, prog_name="busyq", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    except click.ClickException as e:
        e.show()
        return 1
    except (ParameterDomainError, UnknownTableError, ValidationError) as e:
        click.echo(f"error: {e}", err=True)
        return 1
    except BusyQError as e:
        click.echo(f"computation error: {e}", err=True)
        return 2
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
