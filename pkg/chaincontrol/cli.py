"""
Command-line interface for chaincontrol.

Exit codes: 0 success, 1 usage/parse/runtime error, 2 verdict negative
(not controllable, proof hypotheses unmet, identity failed), 3 target
gate error not reached.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional

import typer
from rich.table import Table

from .config import Config
from .errors import ChainControlError, PreconditionError
from .models import GATE_NAMES, ChainSpec
from .parse import load_spec
from .pipeline import ControlPipeline
from .utils import console, setup_logging

app = typer.Typer(help="chaincontrol - controllability and switch-control gate synthesis for quantum chains")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2
EXIT_UNREACHED = 3

SPEC_HELP = "Chain spec file (or the name of a bundled spec, e.g. heis4_r1)"


def _resolve_spec(spec: str) -> ChainSpec:
    path = Path(spec)
    if not path.exists():
        bundled = Config.bundled_spec(spec)
        if bundled.exists():
            path = bundled
    return load_spec(path)


def _emit(data: Dict[str, Any], as_json: bool):
    if as_json:
        typer.echo(json.dumps(data, indent=2, default=str))


def _fail(message: str, verbose: bool, code: int = EXIT_ERROR):
    console.print(f"[red]{message}[/red]")
    if verbose:
        console.print_exception()
    raise typer.Exit(code)


def _parse_floats(text: str, option: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise typer.BadParameter(f"expected comma-separated numbers, got {text!r}", param_hint=option)


@app.command()
def check(
    spec: str = typer.Option(..., "--spec", help=SPEC_HELP),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Write the JSON report here"),
    as_json: bool = typer.Option(False, "--json", help="Print the report as JSON"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose logging"),
):
    """Controllability verdict: theorem conditions and Lie closure dimension."""
    setup_logging("DEBUG" if verbose else Config.LOG_LEVEL)
    try:
        chain = _resolve_spec(spec)
        pipeline = ControlPipeline()
        report = pipeline.check(chain)
        if out:
            pipeline.save_report(report.to_json(), out, "check")
    except (ChainControlError, ValueError) as e:
        _fail(f"Check failed: {e}", verbose)

    _emit(report.to_json(), as_json)
    if not as_json:
        _show_check(report.to_json())
    raise typer.Exit(EXIT_OK if report.controllable else EXIT_NEGATIVE)


@app.command()
def prooftrace(
    spec: str = typer.Option(..., "--spec", help=SPEC_HELP),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Write the residual report here"),
    as_json: bool = typer.Option(False, "--json", help="Print the report as JSON"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose logging"),
):
    """Replay the controllability proof numerically and report identity residuals."""
    setup_logging("DEBUG" if verbose else Config.LOG_LEVEL)
    try:
        chain = _resolve_spec(spec)
        pipeline = ControlPipeline()
        report = pipeline.prooftrace(chain)
        if out:
            pipeline.save_report(report.to_json(), out, "prooftrace")
    except PreconditionError as e:
        _fail(f"Hypotheses not met: {e}", verbose, EXIT_NEGATIVE)
    except (ChainControlError, ValueError) as e:
        _fail(f"Proof trace failed: {e}", verbose)

    data = report.to_json()
    _emit(data, as_json)
    if not as_json:
        console.print(
            f"Theorem {report.theorem} (k={report.k}): {len(report.identities)} identities, "
            f"max residual {report.max_residual:.2e}"
        )
        for name, convention in data["conventions"].items():
            console.print(f"  [yellow]{name}[/yellow] holds as: {convention}")
        status = "[green]✓ all identities hold[/green]" if report.passed else "[red]✗ identities failed[/red]"
        console.print(status)
    raise typer.Exit(EXIT_OK if report.passed else EXIT_NEGATIVE)


@app.command()
def synth(
    spec: str = typer.Option(..., "--spec", help=SPEC_HELP),
    gate: str = typer.Option(..., "--gate", "-g", help=f"Target gate: {', '.join(GATE_NAMES)} or 'all'"),
    k: Optional[int] = typer.Option(None, "--k", "-k", help="Number of switching intervals"),
    restarts: Optional[int] = typer.Option(None, "--restarts", "-r", help="Independent simplex restarts"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Master seed"),
    target_error: Optional[float] = typer.Option(None, "--target-error", help="Stop once a restart reaches this error"),
    max_evaluations: Optional[int] = typer.Option(None, "--max-evaluations", help="Objective evaluations per restart"),
    t_max: Optional[float] = typer.Option(None, "--t-max", help="Initial durations drawn from [0, t_max]"),
    concurrency: Optional[int] = typer.Option(None, "--concurrency", "-c", help="Restarts run concurrently"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Result file (JSON; CSV for --gate all)"),
    as_json: bool = typer.Option(False, "--json", help="Print the result as JSON"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose logging"),
):
    """Search for a switching sequence implementing a target gate."""
    setup_logging("DEBUG" if verbose else Config.LOG_LEVEL)

    if max_evaluations is not None:
        Config.MAX_EVALUATIONS = max_evaluations
    if t_max is not None:
        Config.T_MAX = t_max
    if concurrency is not None:
        Config.CONCURRENCY = concurrency
    threshold = Config.TARGET_ERROR if target_error is None else target_error

    if gate != "all" and gate not in GATE_NAMES:
        _fail(f"Unknown gate {gate!r}; expected one of {', '.join(GATE_NAMES)} or 'all'", verbose)

    try:
        chain = _resolve_spec(spec)
        pipeline = ControlPipeline()
        if gate == "all":
            results, table_path = pipeline.synthesize_all(
                chain, k, restarts, seed, threshold, out=out, show_progress=not as_json
            )
            errors = {g: r.error for g, r in results.items()}
            _emit({"kind": "synthesis_table", "errors": errors, "table": str(table_path)}, as_json)
            if not as_json:
                _show_synthesis(results)
                console.print(f"• Table: [cyan]{table_path}[/cyan]")
            worst = max(errors.values())
        else:
            result, json_path, csv_path = pipeline.synthesize(
                chain, gate, k, restarts, seed, threshold, out=out, show_progress=not as_json
            )
            _emit({"kind": "synthesis", "target": gate, "error": result.error, "duration": result.duration,
                   "result": str(json_path), "sequence": str(csv_path)}, as_json)
            if not as_json:
                _show_synthesis({gate: result})
                console.print(f"• JSON: [cyan]{json_path}[/cyan]")
                console.print(f"• CSV: [cyan]{csv_path}[/cyan]")
            worst = result.error
    except KeyboardInterrupt:
        console.print("\n[yellow]Synthesis interrupted by user[/yellow]")
        raise typer.Exit(EXIT_ERROR)
    except (ChainControlError, ValueError) as e:
        _fail(f"Synthesis failed: {e}", verbose)

    raise typer.Exit(EXIT_OK if worst <= threshold else EXIT_UNREACHED)


@app.command()
def verify(
    spec: str = typer.Option(..., "--spec", help=SPEC_HELP),
    sequence: Path = typer.Option(..., "--sequence", "-s", help="CSV with a t_k column"),
    gate: str = typer.Option(..., "--gate", "-g", help=f"Target gate: {', '.join(GATE_NAMES)}"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Write the JSON report here"),
    as_json: bool = typer.Option(False, "--json", help="Print the report as JSON"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose logging"),
):
    """Re-evaluate a stored switching sequence against a target gate."""
    setup_logging("DEBUG" if verbose else Config.LOG_LEVEL)
    try:
        chain = _resolve_spec(spec)
        pipeline = ControlPipeline()
        report = pipeline.verify(chain, sequence, gate)
        if out:
            pipeline.save_report(report, out, "verify")
    except (ChainControlError, ValueError) as e:
        _fail(f"Verification failed: {e}", verbose)

    _emit(report, as_json)
    if not as_json:
        console.print(f"{gate}: gate error {report['error']:.6e} over T = {report['duration']:.4f}")
    raise typer.Exit(EXIT_OK if report["error"] <= Config.TARGET_ERROR else EXIT_UNREACHED)


@app.command()
def table1(
    action: str = typer.Argument(..., help="validate | replay"),
    coupling: float = typer.Option(1.0, "--coupling", "-d", help="Uniform coupling for replay"),
    f_off: float = typer.Option(0.0, "--f-off", help="Field level with the switch off"),
    f_on: Optional[float] = typer.Option(None, "--f-on", help="Field level with the switch on (default -d)"),
    actuator: int = typer.Option(1, "--actuator", help="Actuator transition r"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Write the JSON report here"),
    as_json: bool = typer.Option(False, "--json", help="Print the report as JSON"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose logging"),
):
    """Validate or replay the bundled published switching-time table."""
    setup_logging("DEBUG" if verbose else Config.LOG_LEVEL)
    if action not in ("validate", "replay"):
        _fail(f"Unknown action {action!r}; expected validate or replay", verbose)

    try:
        pipeline = ControlPipeline()
        if action == "validate":
            report = pipeline.table1_validate()
        else:
            rows = pipeline.table1_replay(coupling, f_off, f_on, actuator)
            report = {"kind": "table1_replay", "rows": rows}
        if out:
            pipeline.save_report(report, out, f"table1_{action}")
    except (ChainControlError, ValueError) as e:
        _fail(f"Table check failed: {e}", verbose)

    _emit(report, as_json)
    if action == "validate":
        if not as_json:
            _show_validation(report)
        raise typer.Exit(EXIT_OK if report["passed"] else EXIT_ERROR)
    if not as_json:
        _show_replay(report["rows"])
    raise typer.Exit(EXIT_OK)


@app.command()
def scan(
    couplings: str = typer.Option("0.5,1,1.5,2", "--couplings", help="Comma-separated coupling values"),
    f_on: str = typer.Option("-2,-1,-0.5,0.5,1,2", "--f-on", help="Comma-separated switch-on levels"),
    f_off: float = typer.Option(0.0, "--f-off", help="Field level with the switch off"),
    actuator: int = typer.Option(1, "--actuator", help="Actuator transition r"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="CSV with every scanned row"),
    as_json: bool = typer.Option(False, "--json", help="Print the best rows as JSON"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose logging"),
):
    """Search chain parameters under which the published sequences replay best."""
    setup_logging("DEBUG" if verbose else Config.LOG_LEVEL)
    d_values = _parse_floats(couplings, "--couplings")
    f_values = _parse_floats(f_on, "--f-on")
    try:
        pipeline = ControlPipeline()
        rows, path = pipeline.table1_scan(d_values, f_values, f_off=f_off, actuator=actuator, out=out,
                                          show_progress=not as_json)
    except (ChainControlError, ValueError) as e:
        _fail(f"Scan failed: {e}", verbose)

    best: Dict[str, Dict[str, Any]] = {}
    for row in rows:
        if row["gate"] not in best or row["error"] < best[row["gate"]]["error"]:
            best[row["gate"]] = row
    _emit({"kind": "table1_scan", "best": best, "rows": len(rows), "csv": str(path)}, as_json)
    if not as_json:
        _show_replay(list(best.values()), title="Best replay per gate")
        console.print(f"• CSV: [cyan]{path}[/cyan]")


@app.command()
def placements(
    spec: str = typer.Option(..., "--spec", help=SPEC_HELP),
    as_json: bool = typer.Option(False, "--json", help="Print the rows as JSON"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose logging"),
):
    """Controllability for every actuator position on the same chain."""
    setup_logging("DEBUG" if verbose else Config.LOG_LEVEL)
    try:
        rows = ControlPipeline().placements(_resolve_spec(spec))
    except (ChainControlError, ValueError) as e:
        _fail(f"Placement scan failed: {e}", verbose)

    _emit({"kind": "placements", "rows": rows}, as_json)
    if not as_json:
        table = Table(title="Actuator placements")
        for column in ("r", "omega_r", "Thm 1", "Thm 2 k", "symmetric", "dimension", "controllable"):
            table.add_column(column, style="cyan" if column == "r" else "green")
        for row in rows:
            table.add_row(
                str(row["actuator"]),
                f"{row['omega_r']:.4g}",
                "✓" if row["thm1"] else "-",
                "-" if row["thm2_k"] is None else str(row["thm2_k"]),
                "✓" if row["reflection_symmetric"] else "-",
                str(row["closure_dimension"]),
                "[green]yes[/green]" if row["controllable"] else "[red]no[/red]",
            )
        console.print(table)


@app.command()
def plot(
    report: Path = typer.Argument(..., help="Synthesis result or proof-trace report (JSON)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="SVG output path"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose logging"),
):
    """Render a result or residual report as a static SVG."""
    setup_logging("DEBUG" if verbose else Config.LOG_LEVEL)
    try:
        path = ControlPipeline().plot(report, out)
    except (ChainControlError, ValueError) as e:
        _fail(f"Plot failed: {e}", verbose)
    console.print(f"[green]✓ Plot written to {path}[/green]")


@app.command()
def config():
    """Show current configuration."""
    _show_config()


def _show_config():
    """Display current configuration."""
    table = Table(title="Configuration")
    table.add_column("Setting", style="cyan")
    table.add_column("Value", style="green")

    table.add_row("Zero threshold", f"{Config.ZERO_TOL:g}")
    table.add_row("Closure tolerance", f"{Config.CLOSURE_TOL:g}")
    table.add_row("Trace tolerance", f"{Config.TRACE_TOL:g}")
    table.add_row("Switching intervals K", str(Config.K_SWITCHES))
    table.add_row("Restarts", str(Config.RESTARTS))
    table.add_row("Evaluations / restart", str(Config.MAX_EVALUATIONS))
    table.add_row("Initial t_max", f"{Config.T_MAX:g}")
    table.add_row("Simplex scale", f"{Config.SIMPLEX_SCALE:g}")
    table.add_row("Target error", f"{Config.TARGET_ERROR:g}")
    table.add_row("Concurrency", str(Config.CONCURRENCY))
    table.add_row("Seed", str(Config.SEED))
    table.add_row("Output dir", str(Config.OUTPUT_DIR))

    console.print(table)


def _show_check(report: Dict[str, Any]):
    table = Table(title="Controllability")
    table.add_column("Property", style="cyan")
    table.add_column("Value", style="green")
    table.add_row("Spec hash", report["spec_hash"])
    table.add_row("N / actuator", f"{report['n']} / r={report['actuator']}")
    table.add_row("Connected", str(report["connected"]))
    table.add_row("Theorem 1 conditions", str(report["thm1"]))
    table.add_row("Theorem 2 depth k", "-" if report["thm2_k"] is None else str(report["thm2_k"]))
    table.add_row("Reflection symmetric", str(report["reflection_symmetric"]))
    table.add_row("Closure dimension", f"{report['closure_dimension']} / {report['full_dimension']}")
    table.add_row("Controllable", "[green]yes[/green]" if report["controllable"] else "[red]no[/red]")
    console.print(table)


def _show_synthesis(results):
    table = Table(title="Synthesis Results")
    table.add_column("Gate", style="cyan")
    table.add_column("Error", style="green")
    table.add_column("Duration", style="yellow")
    table.add_column("Restarts", style="magenta")
    table.add_column("Evaluations")
    for gate, result in results.items():
        table.add_row(gate, f"{result.error:.3e}", f"{result.duration:.4f}", str(result.restarts_used),
                      str(result.evaluations))
    console.print(table)


def _show_validation(report: Dict[str, Any]):
    table = Table(title="Published table consistency")
    table.add_column("Gate", style="cyan")
    table.add_column("sum t_k", style="green")
    table.add_column("duration", style="green")
    table.add_column("error", style="yellow")
    table.add_column("ok")
    for gate, row in report["gates"].items():
        ok = row["sum_ok"] and row["error_ok"]
        table.add_row(gate, f"{row['sum']:.6f}", f"{row['duration']:g}", f"{row['error']:.5e}",
                      "[green]✓[/green]" if ok else "[red]✗[/red]")
    console.print(table)
    console.print(f"Max published error {report['max_error']:.5e} ({report['max_error_gate']})")


def _show_replay(rows: List[Dict[str, Any]], title: str = "Replay"):
    table = Table(title=title)
    table.add_column("Gate", style="cyan")
    table.add_column("Ordering")
    table.add_column("d")
    table.add_column("f_on")
    table.add_column("Error", style="yellow")
    for row in rows:
        table.add_row(row["gate"], row["ordering"], f"{row['coupling']:g}", f"{row['f_on']:g}", f"{row['error']:.3e}")
    console.print(table)


if __name__ == "__main__":
    app()
