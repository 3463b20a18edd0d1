"""
Readers and writers for chain spec files and switching-sequence CSVs.

Spec files are flat ``key = value`` text, one key per line, ``#`` starts a
comment. Keys: n, couplings (comma-separated), energies (optional, absent
means Heisenberg first-excitation energies), actuator, f_off, f_on.
"""

import logging
import math
import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from .chain import heisenberg_energies
from .errors import SpecFileError
from .models import ORDERING, ChainSpec, SwitchSequence
from .utils import load_json, save_json, sidecar_path, text_to_hash

logger = logging.getLogger(__name__)

SEQUENCE_COLUMN = "t_k"


class SpecFileParser:
    """Line-oriented parser for the chain spec format."""

    KNOWN_KEYS = ("n", "couplings", "energies", "actuator", "f_off", "f_on")
    REQUIRED_KEYS = ("n", "couplings", "actuator")

    def __init__(self):
        self.line_pattern = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*[=:]\s*(.*?)\s*$")

    def split_lines(self, text: str) -> Dict[str, str]:
        fields: Dict[str, str] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            match = self.line_pattern.match(line)
            if not match:
                raise SpecFileError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = match.group(1).lower(), match.group(2)
            if key not in self.KNOWN_KEYS:
                raise SpecFileError(f"unknown key on line {lineno}", key=key)
            if key in fields:
                raise SpecFileError(f"duplicate key on line {lineno}", key=key)
            fields[key] = value
        return fields

    def _real(self, key: str, value: str) -> float:
        try:
            x = float(value)
        except ValueError:
            raise SpecFileError(f"not a real number: {value!r}", key=key) from None
        if not math.isfinite(x):
            raise SpecFileError(f"must be finite, got {value!r}", key=key)
        return x

    def _integer(self, key: str, value: str) -> int:
        try:
            return int(value)
        except ValueError:
            raise SpecFileError(f"not an integer: {value!r}", key=key) from None

    def _reals(self, key: str, value: str) -> List[float]:
        items = [v for v in re.split(r"[,\s]+", value.strip("[]() ")) if v]
        if not items:
            raise SpecFileError("empty list", key=key)
        return [self._real(key, v) for v in items]

    def parse(self, text: str) -> ChainSpec:
        fields = self.split_lines(text)
        for key in self.REQUIRED_KEYS:
            if key not in fields:
                raise SpecFileError("missing required key", key=key)

        n = self._integer("n", fields["n"])
        couplings = self._reals("couplings", fields["couplings"])
        if len(couplings) != n - 1:
            raise SpecFileError(f"expected {n - 1} values for n={n}, got {len(couplings)}", key="couplings")
        if "energies" in fields:
            energies = self._reals("energies", fields["energies"])
            if len(energies) != n:
                raise SpecFileError(f"expected {n} values for n={n}, got {len(energies)}", key="energies")
        else:
            energies = heisenberg_energies(couplings)
        actuator = self._integer("actuator", fields["actuator"])
        if not 1 <= actuator <= n - 1:
            raise SpecFileError(f"must lie in [1, {n - 1}], got {actuator}", key="actuator")

        data: Dict[str, Any] = {
            "n": n,
            "couplings": couplings,
            "energies": energies,
            "actuator": actuator,
        }
        if "f_off" in fields:
            data["f_off"] = self._real("f_off", fields["f_off"])
        if "f_on" in fields:
            data["f_on"] = self._real("f_on", fields["f_on"])
        try:
            return ChainSpec(**data)
        except ValueError as e:
            raise SpecFileError(str(e)) from e


def parse_spec(text: str) -> ChainSpec:
    return SpecFileParser().parse(text)


def serialize_spec(spec: ChainSpec) -> str:
    """Canonical text form; parse_spec(serialize_spec(s)) == s exactly."""
    def fmt(values) -> str:
        return ", ".join(repr(float(v)) for v in values)

    lines = [
        f"n = {spec.n}",
        f"couplings = {fmt(spec.couplings)}",
        f"energies = {fmt(spec.energies)}",
        f"actuator = {spec.actuator}",
        f"f_off = {float(spec.f_off)!r}",
        f"f_on = {float(spec.f_on)!r}",
    ]
    return "\n".join(lines) + "\n"


def spec_hash(spec: ChainSpec) -> str:
    return text_to_hash(serialize_spec(spec))


def load_spec(path: Path) -> ChainSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise SpecFileError(f"cannot read {path}: {e}") from e
    spec = parse_spec(text)
    logger.debug(f"Loaded spec {path.name} (n={spec.n}, r={spec.actuator}, hash {spec_hash(spec)})")
    return spec


def save_spec(spec: ChainSpec, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_spec(spec), encoding="utf-8")
    return path


def write_sequence_csv(
    seq: SwitchSequence,
    path: Path,
    spec: Optional[ChainSpec] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> Tuple[Path, Path]:
    """CSV with a single ``t_k`` column plus a JSON sidecar describing the switch levels."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame({SEQUENCE_COLUMN: list(seq.durations)}).to_csv(path, index=False)

    meta: Dict[str, Any] = {"ordering": ORDERING, "k": len(seq), "total_time": seq.total_time}
    if spec is not None:
        meta.update({"f_off": spec.f_off, "f_on": spec.f_on, "spec_hash": spec_hash(spec)})
    if extra:
        meta.update(extra)
    side = sidecar_path(path)
    save_json(meta, side)
    return path, side


def read_sequence_csv(path: Path) -> SwitchSequence:
    path = Path(path)
    try:
        df = pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise SpecFileError(f"cannot read sequence {path}: {e}") from e
    if SEQUENCE_COLUMN not in df.columns:
        raise SpecFileError(f"missing column in {path.name}", key=SEQUENCE_COLUMN)
    try:
        return SwitchSequence(durations=tuple(float(t) for t in df[SEQUENCE_COLUMN]))
    except ValueError as e:
        raise SpecFileError(str(e), key=SEQUENCE_COLUMN) from e


def read_sidecar(path: Path) -> Optional[Dict[str, Any]]:
    return load_json(sidecar_path(Path(path)))
