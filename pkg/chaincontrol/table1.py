"""
The published switching-time table for the six elementary gates: loading
with checksum verification, consistency validation, replay under chosen
chain parameters and a coarse parameter scan.
"""

import itertools
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional

import pandas as pd
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn

from .chain import heisenberg_spec
from .config import Config
from .errors import DatasetError
from .models import GATE_NAMES, SynthesisResult, Table1Column, Table1Dataset
from .propagate import SwitchPropagator, frobenius_distance, gate_error
from .synth import build_target
from .utils import console, file_sha256

logger = logging.getLogger(__name__)

SUM_TOLERANCE = 5e-4
MAX_PUBLISHED_ERROR = 6.03e-5
TIME_ROWS = [f"t_{k}" for k in range(1, 21)]
ORDERINGS = {"H1 first": False, "H2 first": True}


def _expected_checksum(checksum_path: Path) -> str:
    try:
        return checksum_path.read_text(encoding="utf-8").split()[0].strip()
    except (OSError, IndexError) as e:
        raise DatasetError(f"cannot read checksum file {checksum_path}: {e}") from e


def load_table1(path: Optional[Path] = None, checksum_path: Optional[Path] = None, verify: bool = True) -> Table1Dataset:
    """Read the bundled CSV (rows error, duration, t_1..t_20; one column per gate)."""
    path = Path(path or Config.TABLE1_CSV)
    if not path.exists():
        raise DatasetError(f"dataset not found: {path}")
    if verify:
        checksum_path = Path(checksum_path or path.with_suffix(path.suffix + ".sha256"))
        expected = _expected_checksum(checksum_path)
        actual = file_sha256(path)
        if actual != expected:
            raise DatasetError(f"checksum mismatch for {path.name}: expected {expected[:12]}, got {actual[:12]}")

    try:
        df = pd.read_csv(path, index_col="row", float_precision="round_trip")
    except (ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DatasetError(f"cannot parse {path.name}: {e}") from e

    expected_rows = ["error", "duration"] + TIME_ROWS
    if list(df.index) != expected_rows:
        raise DatasetError(f"unexpected rows in {path.name}: {list(df.index)}")

    try:
        columns = {
            gate: Table1Column(
                error=float(df.at["error", gate]),
                duration=float(df.at["duration", gate]),
                durations=[float(df.at[row, gate]) for row in TIME_ROWS],
            )
            for gate in df.columns
        }
        return Table1Dataset(columns=columns)
    except (KeyError, ValueError) as e:
        raise DatasetError(f"malformed dataset {path.name}: {e}") from e


def validate_table1(
    dataset: Table1Dataset,
    sum_tolerance: float = SUM_TOLERANCE,
    max_error: float = MAX_PUBLISHED_ERROR,
) -> Dict[str, Any]:
    """Check sum(t_k) against the published duration and the published errors against max_error."""
    gates = {}
    for gate in GATE_NAMES:
        col = dataset.columns[gate]
        total = sum(col.durations)
        gates[gate] = {
            "sum": total,
            "duration": col.duration,
            "difference": total - col.duration,
            "sum_ok": abs(total - col.duration) <= sum_tolerance,
            "error": col.error,
            "error_ok": col.error <= max_error,
        }
    worst = max(GATE_NAMES, key=lambda g: dataset.columns[g].error)
    report = {
        "kind": "table1_validate",
        "gates": gates,
        "max_error": dataset.columns[worst].error,
        "max_error_gate": worst,
        "passed": all(g["sum_ok"] and g["error_ok"] for g in gates.values()),
    }
    logger.info(f"Table validation {'passed' if report['passed'] else 'FAILED'}; max error {report['max_error']:.5e} ({worst})")
    return report


def replay_table1(
    dataset: Table1Dataset,
    coupling: float = 1.0,
    f_off: float = 0.0,
    f_on: Optional[float] = None,
    actuator: int = 1,
) -> List[Dict[str, Any]]:
    """Propagate every column on a uniform 4-state Heisenberg chain, both orderings.

    Informational: the generating parameters of the published table are unknown.
    """
    spec = heisenberg_spec(4, [coupling] * 3, actuator, f_off=f_off, f_on=f_on)
    propagator = SwitchPropagator.from_spec(spec)
    rows = []
    for gate in GATE_NAMES:
        target = build_target(gate).matrix
        durations = dataset.columns[gate].durations
        for label, swap in ORDERINGS.items():
            u = propagator.propagate(durations, swap=swap)
            rows.append({
                "gate": gate,
                "ordering": label,
                "coupling": coupling,
                "f_off": spec.f_off,
                "f_on": spec.f_on,
                "error": gate_error(u, target),
                "frobenius": frobenius_distance(u, target),
                "published_error": dataset.columns[gate].error,
            })
    return rows


def parameter_scan(
    dataset: Table1Dataset,
    couplings: Iterable[float],
    f_on_values: Iterable[float],
    f_off: float = 0.0,
    actuator: int = 1,
    show_progress: bool = False,
) -> pd.DataFrame:
    """Replay over a (coupling, f_on) grid; one row per gate, ordering and grid point."""
    grid = list(itertools.product(couplings, f_on_values))
    rows: List[Dict[str, Any]] = []
    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TextColumn("[progress.percentage]{task.percentage:>3.0f}%"),
        TimeElapsedColumn(),
        console=console,
        disable=not show_progress,
    ) as progress:
        task = progress.add_task("Scanning parameters...", total=len(grid))
        for d, f_on in grid:
            rows.extend(replay_table1(dataset, coupling=d, f_off=f_off, f_on=f_on, actuator=actuator))
            progress.advance(task)
    df = pd.DataFrame(rows)
    for gate, row in best_per_gate(df).items():
        logger.info(f"{gate}: best error {row['error']:.3e} at d={row['coupling']:g}, f_on={row['f_on']:g} ({row['ordering']})")
    return df


def best_per_gate(scan: pd.DataFrame) -> Dict[str, Dict[str, Any]]:
    if scan.empty:
        return {}
    best = scan.loc[scan.groupby("gate")["error"].idxmin()]
    return {row["gate"]: row.to_dict() for _, row in best.iterrows()}


def results_frame(results: Mapping[str, SynthesisResult]) -> pd.DataFrame:
    """Synthesis results in the published layout: rows error, duration, t_1..t_K."""
    k = max(len(r.sequence) for r in results.values())
    index = ["error", "duration"] + [f"t_{i}" for i in range(1, k + 1)]
    data = {}
    for gate, result in results.items():
        times = list(result.sequence.durations) + [None] * (k - len(result.sequence))
        data[gate] = [result.error, result.duration] + times
    df = pd.DataFrame(data, index=index)
    df.index.name = "row"
    return df


def export_results(results: Mapping[str, SynthesisResult], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    results_frame(results).to_csv(path)
    logger.info(f"Exported {len(results)} gate columns to {path}")
    return path
