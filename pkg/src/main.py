"""Command-line entry point."""

import logging
import sys
from pathlib import Path
from typing import List, Optional

import click
from rich.console import Console
from rich.table import Table

from . import __version__
from .config import ConfigManager, LogConfig, RunConfig, setup_logging
from .config.presets import PRESETS
from .errors import ConfigError, DephasingError
from .oracle import CheckResult
from .pipeline import run_dd, run_evolve, run_kernels, run_preset, run_sweep, run_validate

logger = logging.getLogger(__name__)

console = Console(stderr=True)


def _load(config_path: Optional[str]) -> RunConfig:
    if config_path is None:
        raise ConfigError("a run configuration is required (--config PATH)", field="config")
    return ConfigManager(config_path).run


def _fail(error: DephasingError, **params) -> None:
    echoed = ", ".join(f"{k}={v}" for k, v in params.items() if v is not None)
    logger.error(f"{type(error).__name__}: {error}" + (f" [{echoed}]" if echoed else ""))
    click.secho(f"Error: {error}", fg="red", bold=True, err=True)
    sys.exit(1)


def _results_table(results: List[CheckResult]) -> Table:
    table = Table(title="Validation")
    table.add_column("check")
    table.add_column("deviation", justify="right")
    table.add_column("tolerance", justify="right")
    table.add_column("status")
    for r in results:
        status = "[green]pass[/green]" if r.passed else "[red]FAIL[/red]"
        table.add_row(r.name, f"{r.value:.3e}", f"{r.tolerance:.1e}", status)
    return table


@click.group()
@click.version_option(__version__, prog_name="sbc-dephasing")
@click.option("--log-level", default=None, help="Override the configured log level (DEBUG, INFO, ...).")
@click.option("--log-file", type=click.Path(dir_okay=False), default=None, help="Also write the log to this file.")
@click.pass_context
def cli(ctx, log_level, log_file):
    """Pure-dephasing dynamics of N atoms with system-bath initial correlations."""
    ctx.ensure_object(dict)
    ctx.obj["log"] = LogConfig(level=log_level or "INFO", file=log_file)
    ctx.obj["log_override"] = log_level is not None
    setup_logging(ctx.obj["log"])


def _configure_logging(ctx, config: RunConfig) -> None:
    if not ctx.obj["log_override"]:
        log = config.log
        if ctx.obj["log"].file and not log.file:
            log = LogConfig(log.level, ctx.obj["log"].file, log.format)
        setup_logging(log)


def _run_options(fn):
    fn = click.option("--threads", type=click.IntRange(min=1), default=None, help="Worker threads for the time grid.")(fn)
    fn = click.option("--tolerance", type=float, default=None, help="Quadrature tolerance for tabulated spectra.")(fn)
    fn = click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Output CSV path.")(fn)
    fn = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="Run configuration (YAML).")(fn)
    return fn


def _run(ctx, runner, config_path, out, threads, tolerance):
    try:
        config = _load(config_path)
        _configure_logging(ctx, config)
        result = runner(config, out=out, threads=threads, tolerance=tolerance)
    except DephasingError as e:
        _fail(e, config=config_path, tolerance=tolerance)
    click.echo(str(result.path))
    for sidecar in result.sidecars:
        click.echo(str(sidecar))


@cli.command()
@_run_options
@click.pass_context
def evolve(ctx, config_path, out, tolerance, threads):
    """Write j_x(t) (and an optional rho element) for a configured run."""
    _run(ctx, run_evolve, config_path, out, threads, tolerance)


@cli.command()
@_run_options
@click.pass_context
def dd(ctx, config_path, out, tolerance, threads):
    """Write j_x(t) under the configured pulse sequence plus a sequence/kernel sidecar."""
    _run(ctx, run_dd, config_path, out, threads, tolerance)


@cli.command()
@_run_options
@click.pass_context
def kernels(ctx, config_path, out, tolerance, threads):
    """Write C, Phi(t), B(t), D(t), gamma(t) and Delta(t) on the configured grid."""
    _run(ctx, run_kernels, config_path, out, threads, tolerance)


@cli.command()
@_run_options
@click.option(
    "--kind",
    "kinds",
    type=click.Choice(["bang_bang", "udd"]),
    multiple=True,
    default=("bang_bang", "udd"),
    show_default=True,
    help="Sequence families to compare.",
)
@click.option("--max-pulses", type=click.IntRange(min=1), default=8, show_default=True, help="Largest pulse count.")
@click.pass_context
def sweep(ctx, config_path, out, tolerance, threads, kinds, max_pulses):
    """Compare pulse sequences at t_max: pulsed kernels and j_x for 1..max-pulses pulses."""
    try:
        config = _load(config_path)
        _configure_logging(ctx, config)
        path = run_sweep(config, out, threads, tolerance, kinds, max_pulses)
    except DephasingError as e:
        _fail(e, config=config_path, max_pulses=max_pulses)
    click.echo(str(path))


@cli.command()
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None, help="Directory for report CSVs.")
@click.option("--tolerance", type=float, default=1e-7, show_default=True, help="Allowed oracle deviation.")
@click.option("--n-max", type=click.IntRange(min=2), default=None, help="Force the Fock cutoff of every oracle case.")
@click.option("--phi-sign", type=float, default=1.0, hidden=True)
def validate(out, tolerance, n_max, phi_sign):
    """Check closed forms against quadrature and exact diagonalization."""
    try:
        results = run_validate(out, tolerance=tolerance, phi_sign=phi_sign, n_max=n_max)
    except DephasingError as e:
        _fail(e, tolerance=tolerance, n_max=n_max)
    console.print(_results_table(results))
    failed = [r for r in results if not r.passed]
    if failed:
        worst = max(failed, key=lambda r: r.value / r.tolerance if r.tolerance else float("inf"))
        click.secho(f"FAILED: {worst.name} deviation {worst.value:.3e} > {worst.tolerance:.1e} {worst.detail}", fg="red", err=True)
        sys.exit(1)
    click.secho("All checks passed", fg="green", bold=True, err=True)


@cli.command()
@click.argument("name", type=click.Choice(sorted(PRESETS)))
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Output CSV path.")
@click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True, help="Worker threads for the time grid.")
def preset(name, out, threads):
    """Evaluate every series of a figure preset."""
    try:
        result = run_preset(name, out, threads)
    except DephasingError as e:
        _fail(e, preset=name)
    click.echo(str(result.path))


def main():
    """Console entry point."""
    cli(obj={})


if __name__ == "__main__":
    try:
        main()
    except KeyboardInterrupt:
        sys.exit(130)
