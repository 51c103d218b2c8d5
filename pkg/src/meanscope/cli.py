"""CLI interface for meanscope."""

import sys
from typing import List, NoReturn, Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from meanscope import __version__
from meanscope.config.settings import (
    DEFAULT_ARITY,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_TOL_REL,
    DEFAULT_WINDOW,
    Command,
    OutputFormat,
    RunConfig,
)
from meanscope.core.battery import run_battery
from meanscope.core.checkers import CHECKERS, compare_means
from meanscope.core.generators import build
from meanscope.core.means import qa_mean
from meanscope.core.parser import parse_generator, pretty, simplify_spec
from meanscope.core.semidiff import detect_kinks, find_alpha
from meanscope.models.errors import GeneratorSyntaxError, MeanscopeError
from meanscope.models.generator import Direction, Generator, Window
from meanscope.models.mean import SampleVector
from meanscope.models.report import (
    AlphaCommandReport,
    AlphaInfo,
    BatteryCommandReport,
    CheckReport,
    CompareReport,
    ErrorInfo,
    ErrorReport,
    GeneratorInfo,
    KinksReport,
    MeanReport,
    Report,
)
from meanscope.models.verdict import Resolution, Status, Verdict
from meanscope.utils.logging import setup_logging

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_UNDECIDED = 2
EXIT_USAGE = 64
EXIT_DATA = 65

STATUS_EXIT = {Status.PASS: EXIT_OK, Status.FAIL: EXIT_FAIL, Status.INCONCLUSIVE: EXIT_UNDECIDED}
RESOLUTION_EXIT = {
    Resolution.SUBADDITIVE: EXIT_OK,
    Resolution.NOT_SUBADDITIVE: EXIT_FAIL,
    Resolution.DISAGREEMENT: EXIT_UNDECIDED,
    Resolution.INCONCLUSIVE: EXIT_UNDECIDED,
}
STATUS_STYLE = {Status.PASS: "green", Status.FAIL: "red", Status.INCONCLUSIVE: "yellow"}

app = typer.Typer(
    name="meanscope",
    help="Decide subadditivity of quasi-arithmetic means by cross-checking equivalent conditions",
    add_completion=False,
)
console = Console()
err_console = Console(stderr=True)

# typer may bundle its own click; use the UsageError class it actually raises.
UsageError = next(c for c in typer.BadParameter.__mro__ if c.__name__ == "UsageError")


class UsageProblem(Exception):
    """Bad flag value detected after typer parsing."""


# Shared options
GENERATOR = typer.Option(..., "--generator", "-g", help="Generator spec, e.g. 'power(2)' or 'x^2 + x'")
WINDOW = typer.Option(str(DEFAULT_WINDOW), "--window", help="Analysis window lo:hi")
SAMPLES = typer.Option(DEFAULT_SAMPLES, "--samples", help="Samples per checker")
ARITY = typer.Option(DEFAULT_ARITY, "--arity", help="Number of mean arguments n")
SEED = typer.Option(DEFAULT_SEED, "--seed", help="Unsigned 64-bit seed")
TOL = typer.Option(DEFAULT_TOL_REL, "--tol", help="Relative tolerance of the margin rule")
JSON = typer.Option(False, "--json", help="Write a JSON report to stdout")
NUMERIC = typer.Option(False, "--numeric", help="Use finite differences even when closed forms exist")
VERBOSE = typer.Option(False, "--verbose", "-v", help="Debug logging on stderr")


def _window(text: str) -> Window:
    try:
        return Window.parse(text)
    except (ValueError, ValidationError) as e:
        raise UsageProblem(f"invalid --window {text!r}: {e}") from e


def _points(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise UsageProblem(f"invalid -x {text!r}: expected comma-separated numbers") from e


def _run_config(command: Command, generators: List[str], window: str, **fields) -> RunConfig:
    try:
        return RunConfig(command=command, generators=generators, window=_window(window), **fields)
    except ValidationError as e:
        raise UsageProblem(str(e)) from e


def _load(text: str, run: RunConfig) -> Generator:
    spec = simplify_spec(parse_generator(text))
    return build(spec, run.window, analytic=not run.numeric)


def _info(g: Generator) -> GeneratorInfo:
    return GeneratorInfo(
        spec=pretty(g.spec),
        direction=g.direction,
        canonicalized=g.direction == Direction.DECREASING,
        window=g.window,
        requested_window=g.requested_window,
    )


def _emit(report: Report, run: RunConfig, render) -> None:
    if run.output == OutputFormat.JSON:
        typer.echo(report.model_dump_json(indent=2))
    else:
        render(report)


def _fail(exc: Exception, as_json: bool) -> NoReturn:
    """Report an error and exit with 64 (usage) or 65 (construction/evaluation)."""
    if isinstance(exc, MeanscopeError):
        data = exc.to_dict()
    else:
        data = {"type": type(exc).__name__, "message": str(exc)}
    code = EXIT_USAGE if isinstance(exc, (GeneratorSyntaxError, UsageProblem)) else EXIT_DATA
    if as_json:
        typer.echo(ErrorReport(error=ErrorInfo(**data)).model_dump_json(indent=2))
    else:
        err_console.print(f"[red]ERROR ({data['type']}): {escape(data['message'])}[/red]")
    raise typer.Exit(code)


def _single(generators: List[str]) -> str:
    if len(generators) != 1:
        raise UsageProblem(f"expected exactly one --generator, got {len(generators)}")
    return generators[0]


# Rendering


def _generator_line(info: GeneratorInfo) -> str:
    line = f"[bold]{info.spec}[/bold] on {info.window} ({info.direction.value}"
    line += ", canonicalized)" if info.canonicalized else ")"
    if info.requested_window is not None:
        line += f" [yellow]clipped from {info.requested_window}[/yellow]"
    return line


def _verdict_table(verdicts: List[Verdict], title: str) -> Table:
    table = Table(title=title, show_header=True, header_style="bold magenta")
    table.add_column("Checker", style="cyan")
    table.add_column("Role", style="blue")
    table.add_column("Status")
    table.add_column("Min margin", justify="right")
    table.add_column("Samples", justify="right")
    table.add_column("Witness / note")
    for v in verdicts:
        margin = "-" if v.min_margin is None else f"{v.min_margin:.3g}"
        if v.counterexample is not None:
            ce = v.counterexample
            detail = f"{ce.kind}: {ce.witness} violation {ce.violation:.4g}"
        else:
            detail = v.note or ""
        style = STATUS_STYLE[v.status]
        table.add_row(
            v.id, v.role.value, f"[{style}]{v.status.value}[/]", margin, str(v.samples_run), detail
        )
    return table


def _render_mean(report: MeanReport) -> None:
    console.print(_generator_line(report.generator))
    console.print(f"mean = [bold green]{report.mean.value!r}[/bold green]")
    console.print(f"   solver iterations: {report.mean.solver_iters}")
    console.print(f"   residual: {report.mean.residual:.3g}")


def _render_alpha(report: AlphaCommandReport) -> None:
    console.print(_generator_line(report.generator))
    value = "inf" if report.alpha.value == float("inf") else f"{report.alpha.value:.6g}"
    console.print(f"alpha = [bold]{value}[/bold]")
    if report.alpha.pattern_ok:
        console.print("[green]f''_+ is positive then zero[/green]")
    else:
        console.print(
            f"[red]sign pattern broken at {report.alpha.violation_count} grid points[/red]"
        )
        console.print(f"   first: {report.alpha.violations[:5]}")


def _render_kinks(report: KinksReport) -> None:
    console.print(_generator_line(report.generator))
    table = Table(title="Kinks", show_header=True, header_style="bold magenta")
    table.add_column("Order", style="cyan")
    table.add_column("x", justify="right")
    table.add_column("Left", justify="right")
    table.add_column("Right", justify="right")
    for kinks in report.kinks:
        for k in kinks.points:
            table.add_row(str(k.order), f"{k.x:.8g}", f"{k.left_value:.6g}", f"{k.right_value:.6g}")
    console.print(table)
    total = sum(len(k.points) for k in report.kinks)
    console.print(f"\n[bold]Found {total} kinks[/bold]")


def _render_check(report: CheckReport) -> None:
    console.print(_generator_line(report.generator))
    console.print(_verdict_table(report.checkers, "Checker"))


def _render_compare(report: CompareReport) -> None:
    console.print(_generator_line(report.generator))
    console.print(_generator_line(report.other))
    console.print(_verdict_table(report.checkers, "Comparison"))


def _render_battery(report: BatteryCommandReport) -> None:
    console.print(_generator_line(report.generator))
    value = "inf" if report.alpha.value == float("inf") else f"{report.alpha.value:.6g}"
    console.print(f"alpha = {value} (pattern_ok={report.alpha.pattern_ok})")
    console.print(_verdict_table(report.checkers, "Battery"))
    style = {
        Resolution.SUBADDITIVE: "green",
        Resolution.NOT_SUBADDITIVE: "red",
    }.get(report.resolution, "yellow")
    console.print(f"\n[bold {style}]Resolution: {report.resolution.value}[/]")
    if report.short_circuited:
        console.print("[yellow]Stopped after a failed necessary condition[/yellow]")
    if report.details:
        console.print(f"   {report.details}")
    if report.convexity_consistent is False:
        console.print("[yellow]WARNING: Jensen convexity and ratio convexity disagree[/yellow]")


# Commands


@app.command()
def mean(
    generator: List[str] = GENERATOR,
    points: str = typer.Option(..., "-x", help="Comma-separated positive entries"),
    window: str = WINDOW,
    json_output: bool = JSON,
    numeric: bool = NUMERIC,
    verbose: bool = VERBOSE,
):
    """Evaluate the quasi-arithmetic mean of -x."""
    setup_logging(verbose)
    try:
        xs = _points(points)
        run = _run_config(
            Command.MEAN,
            generator,
            window,
            points=xs,
            output=OutputFormat.JSON if json_output else OutputFormat.TEXT,
            numeric=numeric,
        )
        g = _load(_single(generator), run)
        try:
            vector = SampleVector(entries=tuple(xs))
        except ValidationError as e:
            raise UsageProblem(f"invalid -x {points!r}: entries must be positive") from e
        result = qa_mean(g, vector)
    except (MeanscopeError, UsageProblem) as e:
        _fail(e, json_output)
    _emit(MeanReport(config=run, generator=_info(g), mean=result), run, _render_mean)


@app.command()
def alpha(
    generator: List[str] = GENERATOR,
    window: str = WINDOW,
    json_output: bool = JSON,
    numeric: bool = NUMERIC,
    verbose: bool = VERBOSE,
):
    """Locate the threshold where f''_+ turns from positive to zero."""
    setup_logging(verbose)
    try:
        run = _run_config(
            Command.ALPHA,
            generator,
            window,
            output=OutputFormat.JSON if json_output else OutputFormat.TEXT,
            numeric=numeric,
        )
        g = _load(_single(generator), run)
        report = find_alpha(g, run.check_config().scan_points)
    except (MeanscopeError, UsageProblem) as e:
        _fail(e, json_output)
    _emit(
        AlphaCommandReport(config=run, generator=_info(g), alpha=AlphaInfo.from_report(report)),
        run,
        _render_alpha,
    )


@app.command()
def kinks(
    generator: List[str] = GENERATOR,
    window: str = WINDOW,
    json_output: bool = JSON,
    numeric: bool = NUMERIC,
    verbose: bool = VERBOSE,
):
    """List points where one-sided first or second derivatives differ."""
    setup_logging(verbose)
    try:
        run = _run_config(
            Command.KINKS,
            generator,
            window,
            output=OutputFormat.JSON if json_output else OutputFormat.TEXT,
            numeric=numeric,
        )
        g = _load(_single(generator), run)
        points = run.check_config().scan_points
        reports = [detect_kinks(g, order, points) for order in (1, 2)]
    except (MeanscopeError, UsageProblem) as e:
        _fail(e, json_output)
    _emit(KinksReport(config=run, generator=_info(g), kinks=reports), run, _render_kinks)


@app.command()
def check(
    generator: List[str] = GENERATOR,
    checker: str = typer.Option(..., "--checker", "-c", help=f"One of: {', '.join(CHECKERS)}"),
    window: str = WINDOW,
    samples: int = SAMPLES,
    arity: int = ARITY,
    seed: int = SEED,
    tol: float = TOL,
    json_output: bool = JSON,
    numeric: bool = NUMERIC,
    verbose: bool = VERBOSE,
):
    """Run a single checker."""
    setup_logging(verbose)
    try:
        if checker not in CHECKERS:
            raise UsageProblem(f"unknown checker {checker!r}; valid: {', '.join(CHECKERS)}")
        run = _run_config(
            Command.CHECK,
            generator,
            window,
            samples=samples,
            arity=arity,
            seed=seed,
            tol_rel=tol,
            checker=checker,
            output=OutputFormat.JSON if json_output else OutputFormat.TEXT,
            numeric=numeric,
        )
        g = _load(_single(generator), run)
        verdict = CHECKERS[checker](g, run.check_config())
    except (MeanscopeError, UsageProblem) as e:
        _fail(e, json_output)
    _emit(CheckReport(config=run, generator=_info(g), checkers=[verdict]), run, _render_check)
    raise typer.Exit(STATUS_EXIT[verdict.status])


@app.command()
def compare(
    generator: List[str] = GENERATOR,
    window: str = WINDOW,
    samples: int = SAMPLES,
    arity: int = ARITY,
    seed: int = SEED,
    tol: float = TOL,
    json_output: bool = JSON,
    numeric: bool = NUMERIC,
    verbose: bool = VERBOSE,
):
    """Check A_f <= A_g for -g f -g g."""
    setup_logging(verbose)
    try:
        if len(generator) != 2:
            raise UsageProblem(f"compare needs two --generator options, got {len(generator)}")
        run = _run_config(
            Command.COMPARE,
            generator,
            window,
            samples=samples,
            arity=arity,
            seed=seed,
            tol_rel=tol,
            output=OutputFormat.JSON if json_output else OutputFormat.TEXT,
            numeric=numeric,
        )
        f, g = (_load(text, run) for text in generator)
        verdict = compare_means(f, g, run.check_config())
    except (MeanscopeError, UsageProblem) as e:
        _fail(e, json_output)
    report = CompareReport(config=run, generator=_info(f), other=_info(g), checkers=[verdict])
    _emit(report, run, _render_compare)
    raise typer.Exit(STATUS_EXIT[verdict.status])


@app.command()
def battery(
    generator: List[str] = GENERATOR,
    window: str = WINDOW,
    samples: int = SAMPLES,
    arity: int = ARITY,
    seed: int = SEED,
    tol: float = TOL,
    short_circuit: bool = typer.Option(
        False,
        "--short-circuit",
        help=(
            "Stop after the first failed necessary condition. Off by default, so every"
            " equivalent condition runs and is reported."
        ),
    ),
    json_output: bool = JSON,
    numeric: bool = NUMERIC,
    verbose: bool = VERBOSE,
):
    """Run every checker and resolve them into one verdict."""
    setup_logging(verbose)
    try:
        run = _run_config(
            Command.BATTERY,
            generator,
            window,
            samples=samples,
            arity=arity,
            seed=seed,
            tol_rel=tol,
            short_circuit=short_circuit,
            output=OutputFormat.JSON if json_output else OutputFormat.TEXT,
            numeric=numeric,
        )
        g = _load(_single(generator), run)
        result = run_battery(g, run.check_config())
    except (MeanscopeError, UsageProblem) as e:
        _fail(e, json_output)
    report = BatteryCommandReport(
        config=run,
        generator=_info(g),
        alpha=AlphaInfo.from_report(result.alpha),
        checkers=result.verdicts,
        resolution=result.resolution,
        details=result.details,
        short_circuited=result.short_circuited,
        convexity_consistent=result.convexity_consistent,
    )
    _emit(report, run, _render_battery)
    raise typer.Exit(RESOLUTION_EXIT[result.resolution])


@app.command()
def version():
    """Show version information."""
    console.print(f"meanscope version {__version__}")


def main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and return its exit code; usage errors map to 64."""
    command = typer.main.get_command(app)
    try:
        result = command.main(
            args=sys.argv[1:] if argv is None else argv,
            prog_name="meanscope",
            standalone_mode=False,
        )
    except UsageError as e:
        e.show()
        return EXIT_USAGE
    except typer.Abort:
        err_console.print("[red]Aborted[/red]")
        return EXIT_FAIL
    return result if isinstance(result, int) else EXIT_OK


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
