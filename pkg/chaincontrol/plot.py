"""
Static SVG plots of synthesis results and proof-trace reports.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import SpecFileError  # noqa: E402

logger = logging.getLogger(__name__)


def _read_report(path: Path) -> Dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SpecFileError(f"cannot read {path}: {e}") from e
    if not text.strip():
        raise SpecFileError(f"{Path(path).name} is empty")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecFileError(f"{Path(path).name} is not JSON: {e}") from e
    if not isinstance(data, dict):
        raise SpecFileError(f"{Path(path).name}: expected a JSON object")
    return data


def plot_restart_errors(report: Dict[str, Any], out_svg: Path) -> Path:
    """Final gate error of every restart on a log scale, best restart highlighted."""
    errors = np.asarray(report.get("restart_errors") or [report["error"]], dtype=float)
    restarts = np.arange(1, errors.size + 1)
    floor = np.maximum(errors, 1e-16)

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.scatter(restarts, floor, s=18, color="#1f77b4", label="restart")
    best = int(np.argmin(errors))
    ax.scatter([restarts[best]], [floor[best]], s=60, color="#d62728", marker="*", label="best")
    if report.get("target_error"):
        ax.axhline(report["target_error"], color="#2ca02c", linestyle="--", linewidth=1.2, label="target")
    ax.set_yscale("log")
    ax.set_xlabel("Restart")
    ax.set_ylabel("Gate error")
    ax.set_title(f"{report.get('target', '?')}: best error {errors[best]:.3e}")
    ax.grid(alpha=0.25)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_svg, format="svg")
    plt.close(fig)
    return out_svg


def plot_residuals(report: Dict[str, Any], out_svg: Path) -> Path:
    """One bar per identity, log scale, with the pass threshold drawn in."""
    residuals = report.get("residuals") or {}
    if not residuals:
        raise SpecFileError("proof-trace report has no residuals")
    names = list(residuals)
    values = np.maximum(np.asarray([residuals[n] for n in names], dtype=float), 1e-18)

    fig, ax = plt.subplots(figsize=(max(6.0, 0.3 * len(names)), 4.5))
    ax.bar(np.arange(len(names)), values, color="#9467bd")
    ax.axhline(report.get("tolerance", 1e-8), color="#d62728", linestyle="--", linewidth=1.2)
    ax.set_yscale("log")
    ax.set_xticks(np.arange(len(names)))
    ax.set_xticklabels(names, rotation=90, fontsize=7)
    ax.set_ylabel("max-abs residual")
    ax.set_title(f"Theorem {report.get('theorem', '?')} trace (k={report.get('k', 0)})")
    fig.tight_layout()
    fig.savefig(out_svg, format="svg")
    plt.close(fig)
    return out_svg


def plot_report(report_path: Path, out_svg: Path) -> Path:
    """Pick the plot from the report's ``kind`` and write it as SVG."""
    report = _read_report(report_path)
    out_svg = Path(out_svg)
    out_svg.parent.mkdir(parents=True, exist_ok=True)
    kind = report.get("kind")
    if kind == "synthesis":
        path = plot_restart_errors(report, out_svg)
    elif kind == "prooftrace":
        path = plot_residuals(report, out_svg)
    else:
        raise SpecFileError(f"unknown report schema {kind!r}", key="kind")
    logger.info(f"Plot written to {path}")
    return path
