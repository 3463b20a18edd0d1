"""
Pipeline that drives every command: checks, proof traces, synthesis,
verification, the published table and plots, writing reports as it goes.
"""

import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

from .chain import is_connected
from .config import Config
from .lie import closure_of, has_reflection_symmetry, placement_scan, thm1_condition, thm2_condition
from .models import GATE_NAMES, ChainSpec, CheckReport, ProofTraceReport, SynthesisResult
from .parse import read_sequence_csv, read_sidecar, spec_hash, write_sequence_csv
from .plot import plot_report
from .prooftrace import proof_trace
from .synth import build_target, synthesize_gate, verify_sequence
from .table1 import export_results, load_table1, parameter_scan, replay_table1, validate_table1
from .utils import generate_timestamp, save_json

logger = logging.getLogger(__name__)


def result_payload(result: SynthesisResult, target_error: Optional[float] = None) -> Dict[str, Any]:
    """JSON form of a synthesis result, durations flattened for other tools."""
    data = result.model_dump(mode="json")
    data.pop("sequence", None)
    return {
        "kind": "synthesis",
        **data,
        "durations": list(result.sequence.durations),
        "duration": result.duration,
        "k": len(result.sequence),
        "target_error": target_error,
    }


class ControlPipeline:
    """Orchestrates the library calls behind each CLI verb."""

    def __init__(self, output_dir: Optional[Path] = None):
        self.output_dir = Path(output_dir or Config.OUTPUT_DIR)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def _default_path(self, stem: str, suffix: str) -> Path:
        return self.output_dir / f"{generate_timestamp()}_{stem}{suffix}"

    def check(self, spec: ChainSpec) -> CheckReport:
        """Connectivity, theorem predicates and the closure verdict."""
        logger.info(f"🔎 Checking N={spec.n} chain with actuator r={spec.actuator}")
        basis = closure_of(spec)
        report = CheckReport(
            spec_hash=spec_hash(spec),
            n=spec.n,
            actuator=spec.actuator,
            connected=is_connected(spec),
            thm1=thm1_condition(spec),
            thm2_k=thm2_condition(spec),
            reflection_symmetric=has_reflection_symmetry(spec),
            closure_dimension=basis.dimension,
            full_dimension=basis.full_dimension,
            controllable=basis.is_full,
        )
        logger.info(
            f"✓ closure dimension {report.closure_dimension}/{report.full_dimension} "
            f"({'controllable' if report.controllable else 'not controllable'})"
        )
        return report

    def prooftrace(self, spec: ChainSpec) -> ProofTraceReport:
        logger.info(f"🧮 Tracing proof identities for N={spec.n}, r={spec.actuator}")
        return proof_trace(spec)

    def placements(self, spec: ChainSpec) -> List[Dict[str, Any]]:
        logger.info(f"📍 Scanning {spec.n - 1} actuator placements")
        return placement_scan(spec)

    def synthesize(
        self,
        spec: ChainSpec,
        gate: str,
        k_switches: Optional[int] = None,
        restarts: Optional[int] = None,
        seed: Optional[int] = None,
        target_error: Optional[float] = None,
        out: Optional[Path] = None,
        show_progress: bool = False,
    ) -> Tuple[SynthesisResult, Path, Path]:
        """Synthesize one gate; writes the JSON result and the t_k CSV beside it."""
        target = build_target(gate)
        target_error = Config.TARGET_ERROR if target_error is None else target_error
        logger.info(f"🚀 Starting synthesis of {gate}")
        result = synthesize_gate(
            spec,
            target,
            k_switches=k_switches,
            restarts=restarts,
            seed=seed,
            target_error=target_error,
            show_progress=show_progress,
        )
        json_path = Path(out) if out else self._default_path(f"{gate}_{result.spec_hash}", ".json")
        save_json(result_payload(result, target_error), json_path)
        csv_path = json_path.with_suffix(".csv")
        write_sequence_csv(result.sequence, csv_path, spec=spec, extra={"target": gate, "error": result.error})
        logger.info(f"💾 Result written to {json_path}")
        return result, json_path, csv_path

    def synthesize_all(
        self,
        spec: ChainSpec,
        k_switches: Optional[int] = None,
        restarts: Optional[int] = None,
        seed: Optional[int] = None,
        target_error: Optional[float] = None,
        out: Optional[Path] = None,
        show_progress: bool = False,
    ) -> Tuple[Dict[str, SynthesisResult], Path]:
        """All six gates, exported in the published table layout."""
        started = datetime.now()
        results: Dict[str, SynthesisResult] = {}
        for gate in GATE_NAMES:
            result, _, _ = self.synthesize(
                spec, gate, k_switches, restarts, seed, target_error, show_progress=show_progress
            )
            results[gate] = result
        table_path = Path(out) if out else self._default_path(f"table_{spec_hash(spec)}", ".csv")
        export_results(results, table_path)
        logger.info("📊 Synthesis completed!")
        for gate, result in results.items():
            logger.info(f"   • {gate}: error {result.error:.3e}, duration {result.duration:.4f}")
        logger.info(f"   • Duration: {datetime.now() - started}")
        return results, table_path

    def verify(self, spec: ChainSpec, sequence_csv: Path, gate: str) -> Dict[str, Any]:
        seq = read_sequence_csv(sequence_csv)
        meta = read_sidecar(sequence_csv) or {}
        if meta.get("spec_hash") and meta["spec_hash"] != spec_hash(spec):
            logger.warning(f"sequence was produced for spec {meta['spec_hash']}, verifying against {spec_hash(spec)}")
        error = verify_sequence(spec, seq, build_target(gate))
        return {
            "kind": "verify",
            "gate": gate,
            "k": len(seq),
            "duration": seq.total_time,
            "error": error,
            "recorded_error": meta.get("error"),
        }

    def table1_validate(self) -> Dict[str, Any]:
        logger.info("📋 Validating the bundled switching-time table")
        return validate_table1(load_table1())

    def table1_replay(self, coupling: float, f_off: float, f_on: Optional[float], actuator: int) -> List[Dict[str, Any]]:
        logger.info(f"▶️ Replaying table columns at d={coupling}, f_off={f_off}, f_on={f_on}")
        return replay_table1(load_table1(), coupling=coupling, f_off=f_off, f_on=f_on, actuator=actuator)

    def table1_scan(
        self,
        couplings: Iterable[float],
        f_on_values: Iterable[float],
        f_off: float = 0.0,
        actuator: int = 1,
        out: Optional[Path] = None,
        show_progress: bool = False,
    ) -> Tuple[List[Dict[str, Any]], Path]:
        df = parameter_scan(load_table1(), couplings, f_on_values, f_off=f_off, actuator=actuator,
                            show_progress=show_progress)
        path = Path(out) if out else self._default_path("table_scan", ".csv")
        path.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(path, index=False)
        logger.info(f"💾 Scan of {len(df)} rows written to {path}")
        return df.to_dict(orient="records"), path

    def plot(self, report_path: Path, out_svg: Optional[Path] = None) -> Path:
        out_svg = Path(out_svg) if out_svg else Path(report_path).with_suffix(".svg")
        return plot_report(report_path, out_svg)

    def save_report(self, data: Dict[str, Any], out: Optional[Path], stem: str) -> Path:
        path = Path(out) if out else self._default_path(stem, ".json")
        save_json(data, path)
        logger.debug(f"Report saved to {path}")
        return path
