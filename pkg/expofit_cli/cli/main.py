#!/usr/bin/env python3
"""
Main CLI interface for expofit

Click command group with global options; every fitting command writes a JSON
ReportDocument to stdout (or --out) and can emit plot arrays with --plot.
Human-readable messages go to stderr.
"""

import functools
import logging
import time
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Optional, Tuple

import click
import numpy as np
from rich.console import Console
from rich.table import Table

from .. import __version__
from ..core.classifier import classify
from ..core.dataset import Dataset, load, load_series, series_text
from ..core.demand import PRICE_DESIGN, DemandParams, simulate_demand
from ..core.errors import ExpofitError
from ..core.expar import REFERENCE_PARAMS, REFERENCE_START, ExpArParams, expar_generate
from ..core.global_fitter import GlobalFitter
from ..core.logging_system import EventType, LoggingSystem, get_logging_system, initialize_logging
from ..core.minimax import AlternationCertificate, ExponentialModel, fit_line_minimax, fitted_values
from ..core.quartet import fit_quartet
from ..core.report import ReportDocument, plot_array, write_plot
from ..core.separable import fit_separable
from ..patterns.registry import get_pattern, get_registry
from ..settings import reload_settings, settings

# Human-facing output; stdout carries reports
console = Console(stderr=True)

COOLING_RATE = -0.0026042
COOLING_AMPLITUDE = 5.7259032
COOLING_OFFSET = -1.3743464


class CLIContext:
    def __init__(self) -> None:
        self.debug = False
        self.verbose = False
        self.config_file: Optional[str] = None
        self.logging_system: Optional[LoggingSystem] = None

    def setup_logging(self) -> None:
        """Setup logging based on debug/verbose flags"""
        if self.debug:
            level = "DEBUG"
        elif self.verbose:
            level = "INFO"
        else:
            level = settings.logging.level
        self.logging_system = initialize_logging({"level": level})
        self.logging_system.start_session(f"cli_{int(datetime.now().timestamp())}")

    def teardown(self) -> None:
        if self.logging_system is not None:
            self.logging_system.end_session()
            self.logging_system.cleanup()

    def record(self, command: str, message: str, **kwargs: Any) -> None:
        if self.logging_system is not None:
            self.logging_system.log_fit_event(command, message, **kwargs)


pass_context = click.make_pass_decorator(CLIContext, ensure=True)


def handles_errors(func: Callable) -> Callable:
    """Print expofit errors on stderr and exit with their family's code"""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        command = click.get_current_context().info_name or func.__name__
        try:
            with get_logging_system().log_context(command):
                return func(*args, **kwargs)
        except ExpofitError as e:
            console.print(f"❌ [red]Error: {e}[/red]")
            if settings.debug_mode:
                console.print_exception()
            raise click.exceptions.Exit(getattr(e, "exit_code", 1))

    return wrapper


def data_argument(func: Callable) -> Callable:
    return click.argument("data", type=click.File("r"), default="-")(func)


def output_options(func: Callable) -> Callable:
    func = click.option(
        "--plot", type=click.Path(dir_okay=False, path_type=Path),
        help="Write t,T,fitted,lower,upper,residual,relative_error,extremal rows here",
    )(func)
    return click.option(
        "--out", "-o", type=click.Path(dir_okay=False, path_type=Path),
        help="Write the JSON report here instead of stdout",
    )(func)


def emit(document: ReportDocument, out: Optional[Path]) -> None:
    text = document.write(out)
    if out is None:
        click.echo(text)
    else:
        console.print(f"✅ Report written to {out}")


def emit_text(text: str, out: Optional[Path]) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        out.write_text(text, encoding="utf-8")
        console.print(f"✅ Data written to {out}")


def resolve_seed(seed: Optional[int]) -> int:
    if seed is not None:
        return seed
    if settings.default_seed is not None:
        return settings.default_seed
    return int(np.random.SeedSequence().entropy % (2**32))


def _summary(document: ReportDocument) -> None:
    rows = []
    if document.taxonomy:
        rows.append(("taxonomy", document.taxonomy["tag"]))
    rows.extend((key, str(value)) for key, value in (document.model or {}).items())
    for key in ("error", "rss", "mse"):
        value = getattr(document, key)
        if value is not None:
            rows.append((key, f"{value:.10g}"))

    if not settings.rich_output:
        for key, value in rows:
            click.echo(f"{key}: {value}", err=True)
        return
    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Field", style="cyan")
    table.add_column("Value", style="green")
    for key, value in rows:
        table.add_row(key, value)
    console.print(table)


def _fit_document(
    ctx: CLIContext, command: str, data: Dataset, report: Any, started: float, plot: Optional[Path],
    include_band: bool = False,
) -> ReportDocument:
    document = ReportDocument.from_fit(command, data, report, include_band=include_band)
    document.timing["elapsed"] = time.perf_counter() - started
    if plot is not None:
        rows = plot_array(data, fitted_values(report.model, data), report.error, report.certificate.indices)
        write_plot(plot, rows)
    ctx.record(
        command,
        f"{command} finished",
        digest=document.inputs_digest,
        taxonomy=report.taxonomy.tag.value,
        error=report.error,
        elapsed=document.timing["elapsed"],
    )
    if ctx.verbose:
        _summary(document)
    return document


@click.group()
@click.option("--debug", is_flag=True, help="Enable debug mode with detailed logging")
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose output")
@click.option(
    "--config", "-c", type=click.Path(exists=True), help="Path to configuration file"
)
@click.version_option(version=__version__, prog_name="expofit")
@pass_context
def cli(ctx: CLIContext, debug: bool, verbose: bool, config: Optional[str]):
    """
    expofit - best uniform exponential fits

    Fits a*exp(k*t) + b in the max norm, classifies datasets whose best
    approximation is a line, a constant or a limit, and fits separable
    least-squares patterns (exponential, demand, ExpAR).

    Examples:
        expofit fit-minimax data.csv
        expofit fit-tac --model expar --grid gamma=0.5:2 series.txt
        expofit simulate-demand --seed 1 | expofit fit-tac --model demand
    """
    if config:
        reload_settings(Path(config))
    settings.debug_mode = debug or settings.debug_mode
    settings.verbose_mode = verbose or settings.verbose_mode
    console.no_color = not settings.rich_output
    ctx.debug = settings.debug_mode
    ctx.verbose = settings.verbose_mode
    ctx.config_file = config
    ctx.setup_logging()
    click.get_current_context().call_on_close(ctx.teardown)

    if ctx.debug:
        console.print("[dim]Debug mode enabled[/dim]", style="blue")


@cli.command("fit-minimax")
@data_argument
@click.option("--tol", type=float, help="Relative rate bracket width at which the search stops")
@click.option("--k-min", type=float, help="Smallest rate magnitude searched")
@click.option("--k-max", type=float, help="Largest rate magnitude searched")
@click.option("--workers", type=int, help="Threads for the rate scan")
@output_options
@pass_context
@handles_errors
def fit_minimax(ctx: CLIContext, data, tol, k_min, k_max, workers, out, plot):
    """Best uniform approximation by a*exp(k*t) + b (or its limit forms)."""
    started = time.perf_counter()
    dataset = load(data)
    fitter = GlobalFitter(tol=tol, k_min=k_min, k_max=k_max, workers=workers)
    report = fitter.fit(dataset)
    if report.warning:
        console.print(f"⚠️  [yellow]{report.warning}[/yellow]")
        ctx.record("fit-minimax", report.warning, event_type=EventType.FALLBACK, level=logging.WARNING)
    emit(_fit_document(ctx, "fit-minimax", dataset, report, started, plot), out)


@cli.command("fit-line")
@data_argument
@output_options
@pass_context
@handles_errors
def fit_line(ctx: CLIContext, data, out, plot):
    """Best uniform line with its alternation certificate."""
    started = time.perf_counter()
    dataset = load(data)
    line, certificate = fit_line_minimax(dataset)
    document = ReportDocument(
        command="fit-line",
        inputs_digest=dataset.digest(),
        n=dataset.n,
        model=line.to_dict(),
        error=certificate.error,
        certificate=certificate.to_dict(),
        timing={"elapsed": time.perf_counter() - started},
    )
    if plot is not None:
        write_plot(plot, plot_array(dataset, fitted_values(line, dataset), certificate.error, certificate.indices))
    ctx.record("fit-line", "fit-line finished", digest=document.inputs_digest, error=certificate.error)
    emit(document, out)


@cli.command("fit-quartet")
@data_argument
@output_options
@pass_context
@handles_errors
def fit_quartet_command(ctx: CLIContext, data, out, plot):
    """Exact best approximation of a four-point dataset."""
    started = time.perf_counter()
    dataset = load(data)
    report = fit_quartet(dataset)
    emit(_fit_document(ctx, "fit-quartet", dataset, report, started, plot), out)


@cli.command("classify")
@data_argument
@click.option("--out", "-o", type=click.Path(dir_okay=False, path_type=Path))
@pass_context
@handles_errors
def classify_command(ctx: CLIContext, data, out):
    """Tag the dataset: InteriorExponential, ConstantBest, LineBest or a limit."""
    started = time.perf_counter()
    dataset = load(data)
    taxonomy = classify(dataset)
    document = ReportDocument(
        command="classify",
        inputs_digest=dataset.digest(),
        n=dataset.n,
        taxonomy=taxonomy.to_dict(),
        timing={"elapsed": time.perf_counter() - started},
    )
    ctx.record(
        "classify", f"classified as {taxonomy.tag.value}",
        event_type=EventType.CLASSIFICATION, digest=document.inputs_digest, taxonomy=taxonomy.tag.value,
    )
    if ctx.verbose:
        console.print(f"🏷️  [bold]{taxonomy.tag.value}[/bold] ({taxonomy.orientation.label})")
    emit(document, out)


@cli.command("band")
@data_argument
@output_options
@pass_context
@handles_errors
def band_command(ctx: CLIContext, data, out, plot):
    """Best approximation with its constant-width band."""
    started = time.perf_counter()
    dataset = load(data)
    report = GlobalFitter().fit(dataset)
    emit(_fit_document(ctx, "band", dataset, report, started, plot, include_band=True), out)


@cli.command("fit-tac")
@data_argument
@click.option("--model", "-m", "model_name", default="exponential", show_default=True,
              help="Pattern name (see list-patterns)")
@click.option("--grid", "-g", multiple=True, help="Search interval name=lo:hi[:points]; repeatable")
@click.option("--tol", type=float, help="Relative width at which grid refinement stops")
@click.option("--points", type=int, help="Grid points per parameter per level")
@click.option("--norm", type=click.Choice(["max", "l2"]), default="l2", show_default=True)
@click.option("--workers", type=int, help="Threads for grid-node evaluation")
@output_options
@pass_context
@handles_errors
def fit_tac(ctx: CLIContext, data, model_name, grid, tol, points, norm, workers, out, plot):
    """Separable least squares by grid refinement."""
    if norm != "l2":
        raise click.UsageError("fit-tac patterns are least-squares fits; only --norm l2 is available")
    started = time.perf_counter()
    pattern = get_pattern(model_name)
    if model_name == "expar":
        series = load_series(data)
        dataset = Dataset(np.arange(series.size, dtype=np.float64), series)
    else:
        dataset = load(data)
    x, y = pattern.prepare(dataset)
    result = fit_separable(pattern, x, y, grid=grid, tol=tol, points=points, workers=workers)
    document = ReportDocument.from_separable(
        "fit-tac", dataset, result, timing={"elapsed": time.perf_counter() - started}
    )
    if plot is not None:
        response = Dataset(np.arange(y.size, dtype=np.float64), y) if model_name == "expar" else Dataset(dataset.t, y)
        fitted = pattern.predict(result.nonlinear, result.linear, x)
        write_plot(plot, plot_array(response, fitted))
    ctx.record(
        "fit-tac", f"{model_name} fit finished", digest=document.inputs_digest,
        elapsed=document.timing["elapsed"], metadata={"rss": result.rss, "pattern": model_name},
    )
    if not result.converged:
        console.print("⚠️  [yellow]Grid refinement hit the level limit before converging[/yellow]")
    if ctx.verbose:
        _summary(document)
    emit(document, out)


@cli.command("simulate-demand")
@click.option("--q0", type=float, default=48.0, show_default=True, help="Demand intensity")
@click.option("--k", "k", type=float, default=3.42, show_default=True, help="Log-range constant")
@click.option("--alpha", type=float, default=0.006, show_default=True, help="Essential value")
@click.option("--noise", type=float, default=0.1, show_default=True, help="Gaussian sd on log10 Q")
@click.option("--seed", type=int, help="Random seed (default: EXPOFIT_SEED or fresh)")
@click.option("--out", "-o", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--report", type=click.Path(dir_okay=False, path_type=Path), help="Write a JSON report here")
@pass_context
@handles_errors
def simulate_demand_command(ctx: CLIContext, q0, k, alpha, noise, seed, out, report):
    """Consumption at the 15-price design with noise on log10 Q."""
    seed = resolve_seed(seed)
    params = DemandParams(q0=q0, k=k, alpha=alpha)
    dataset = simulate_demand(params, PRICE_DESIGN, noise=noise, seed=seed)
    emit_text(dataset.serialize(), out)
    ctx.record("simulate-demand", "demand data simulated", event_type=EventType.SIMULATION, seed=seed)
    if report is not None:
        ReportDocument(
            command="simulate-demand", inputs_digest=dataset.digest(), n=dataset.n,
            parameters={**params.to_dict(), "noise": noise}, seed=seed,
        ).write(report)


@cli.command("simulate-expar")
@click.option("--c0", type=float, default=REFERENCE_PARAMS.c0, show_default=True)
@click.option("--c1", type=float, default=REFERENCE_PARAMS.c1, show_default=True)
@click.option("--c2", type=float, default=REFERENCE_PARAMS.c2, show_default=True)
@click.option("--pi1", type=float, default=REFERENCE_PARAMS.pi1, show_default=True)
@click.option("--pi2", type=float, default=REFERENCE_PARAMS.pi2, show_default=True)
@click.option("--gamma", type=float, default=REFERENCE_PARAMS.gamma, show_default=True)
@click.option("--z1", type=float, default=REFERENCE_PARAMS.z1, show_default=True)
@click.option("--z2", type=float, default=REFERENCE_PARAMS.z2, show_default=True)
@click.option("--x1", type=float, default=REFERENCE_START[0], show_default=True)
@click.option("--x2", type=float, default=REFERENCE_START[1], show_default=True)
@click.option("--count", type=int, default=100, show_default=True)
@click.option("--noise", type=float, default=0.0, show_default=True, help="Gaussian sd of eps_t")
@click.option("--seed", type=int)
@click.option("--out", "-o", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--report", type=click.Path(dir_okay=False, path_type=Path), help="Write a JSON report here")
@pass_context
@handles_errors
def simulate_expar_command(
    ctx: CLIContext, c0, c1, c2, pi1, pi2, gamma, z1, z2, x1, x2, count, noise, seed, out, report
):
    """ExpAR(2) series, one value per row."""
    seed = resolve_seed(seed)
    params = ExpArParams(c0=c0, c1=c1, c2=c2, pi1=pi1, pi2=pi2, gamma=gamma, z1=z1, z2=z2)
    series = expar_generate(params, x1, x2, count, noise=noise, seed=seed)
    emit_text(series_text(series), out)
    ctx.record("simulate-expar", "ExpAR series simulated", event_type=EventType.SIMULATION, seed=seed)
    if report is not None:
        dataset = Dataset(np.arange(series.size, dtype=np.float64), series)
        ReportDocument(
            command="simulate-expar", inputs_digest=dataset.digest(), n=dataset.n,
            parameters={**params.to_dict(), "x1": x1, "x2": x2, "noise": noise}, seed=seed,
        ).write(report)


def _indices(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as e:
        raise click.BadParameter(f"expected comma-separated integers, got {text!r}") from e


@cli.command("simulate-cooling")
@click.option("--k", "k", type=float, default=COOLING_RATE, show_default=True)
@click.option("--amplitude", type=float, default=COOLING_AMPLITUDE, show_default=True)
@click.option("--offset", type=float, default=COOLING_OFFSET, show_default=True)
@click.option("--step", type=float, default=200.0, show_default=True)
@click.option("--count", type=int, default=12, show_default=True)
@click.option("--perturbation", type=float, default=0.01, show_default=True)
@click.option("--indices", default="0,3,7,11", show_default=True,
              help="Indices receiving +p, -p, +p, ... in turn")
@click.option("--out", "-o", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--report", type=click.Path(dir_okay=False, path_type=Path), help="Write a JSON report here")
@pass_context
@handles_errors
def simulate_cooling_command(ctx: CLIContext, k, amplitude, offset, step, count, perturbation, indices, out, report):
    """Cooling curve amplitude*exp(k*t) + offset with alternating perturbations."""
    dataset = cooling_dataset(k, amplitude, offset, step, count, perturbation, _indices(indices))
    emit_text(dataset.serialize(), out)
    ctx.record("simulate-cooling", "cooling data simulated", event_type=EventType.SIMULATION)
    if report is not None:
        ReportDocument(
            command="simulate-cooling", inputs_digest=dataset.digest(), n=dataset.n,
            parameters={"k": k, "amplitude": amplitude, "offset": offset, "step": step,
                        "perturbation": perturbation, "indices": list(_indices(indices))},
        ).write(report)


def cooling_dataset(
    k: float, amplitude: float, offset: float, step: float, count: int,
    perturbation: float, indices: Tuple[int, ...],
) -> Dataset:
    t = step * np.arange(count, dtype=np.float64)
    model = ExponentialModel(amplitude, k, offset)
    T = np.array(model(t))
    for position, index in enumerate(indices):
        if not 0 <= index < count:
            raise click.BadParameter(f"index {index} outside 0..{count - 1}", param_hint="--indices")
        T[index] += perturbation if position % 2 == 0 else -perturbation
    return Dataset(t, T)


@cli.command("list-patterns")
@click.argument("name", required=False)
@pass_context
@handles_errors
def list_patterns(ctx: CLIContext, name: Optional[str]):
    """Show the registered separable patterns, or the details of one."""
    if name is not None:
        click.echo(get_pattern(name).get_help())
        return
    metadata = get_registry().list_metadata()
    if not settings.rich_output:
        for meta in metadata:
            click.echo(f"{meta.name}\t{meta.version}\t{meta.description}")
        return
    table = Table(title="Separable patterns", show_header=True, header_style="bold magenta")
    table.add_column("Name", style="cyan")
    table.add_column("Version", style="yellow")
    table.add_column("Nonlinear", style="green")
    table.add_column("Linear", style="green")
    table.add_column("Description", style="dim")
    for meta in metadata:
        table.add_row(meta.name, meta.version, ", ".join(meta.nonlinear), ", ".join(meta.linear), meta.description)
    Console().print(table)


if __name__ == "__main__":
    cli()
