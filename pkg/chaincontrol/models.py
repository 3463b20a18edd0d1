"""
Pydantic models and matrix validators for chain-coupled control systems.

Matrices (Hamiltonians, Lie algebra elements, propagators, density operators)
are plain complex numpy arrays; the ``as_*`` helpers below check the
invariants each role requires and return a complex128 copy.
"""

import math
from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import ChainModelError, NumericError

# Matrix roles. All are dense N x N complex arrays.
HermitianOp = NDArray[np.complex128]
SuElement = NDArray[np.complex128]
UnitaryOp = NDArray[np.complex128]
DensityOp = NDArray[np.complex128]

GATE_NAMES = ("II", "HadI", "TI", "IHad", "IT", "CNOT")
ORDERING = "U(t) = U1(t_1) U2(t_2) ... ; rightmost factor acts first; odd slots H1 (f_off), even slots H2 (f_on)"


def _square(a: Any, role: str) -> NDArray[np.complex128]:
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NumericError(f"{role} must be a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NumericError(f"{role} has non-finite entries")
    return m


def as_hermitian(a: Any) -> HermitianOp:
    """Validate a Hermitian matrix (relative tolerance 1e-12)."""
    m = _square(a, "HermitianOp")
    scale = np.max(np.abs(m)) if m.size else 0.0
    if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-12 * scale:
        raise NumericError("matrix is not Hermitian")
    return m


def as_su_element(a: Any, tol: float = 1e-12) -> SuElement:
    """Validate a traceless anti-Hermitian matrix."""
    m = _square(a, "SuElement")
    if np.max(np.abs(m + m.conj().T), initial=0.0) > tol:
        raise NumericError("element is not anti-Hermitian")
    if abs(np.trace(m)) > tol:
        raise NumericError("element is not traceless")
    return m


def as_unitary(a: Any, tol: float = 1e-10) -> UnitaryOp:
    """Validate a unitary matrix: max-abs(U^dag U - I) <= tol."""
    m = _square(a, "UnitaryOp")
    defect = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])), initial=0.0)
    if defect > tol:
        raise NumericError(f"matrix is not unitary (defect {defect:.2e})")
    return m


def as_density(a: Any, tol: float = 1e-10) -> DensityOp:
    """Validate a density operator: Hermitian, PSD, unit trace."""
    m = _square(a, "DensityOp")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
        raise NumericError("density operator is not Hermitian")
    if abs(np.trace(m) - 1.0) > tol:
        raise NumericError("density operator does not have unit trace")
    if np.linalg.eigvalsh(m).min() < -tol:
        raise NumericError("density operator is not positive semidefinite")
    return m


class ChainSpec(BaseModel):
    """Physical model of an N-state nearest-neighbour chain with one local actuator.

    States are labelled 1..N. The actuator sits on the (r, r+1) transition.
    ``f_on`` defaults to -d_r, i.e. switching on cancels the controlled coupling.
    """
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=2)
    couplings: Tuple[float, ...]
    energies: Tuple[float, ...]
    actuator: int
    f_off: float = 0.0
    f_on: Optional[float] = None

    @model_validator(mode="before")
    @classmethod
    def _default_switch_levels(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("f_on") is None:
            couplings = data.get("couplings")
            couplings = () if couplings is None else couplings
            r = data.get("actuator")
            if isinstance(r, int) and 1 <= r <= len(couplings):
                data = {**data, "f_on": -float(couplings[r - 1])}
        return data

    @model_validator(mode="after")
    def _check_shape(self) -> "ChainSpec":
        if len(self.couplings) != self.n - 1:
            raise ChainModelError(f"expected {self.n - 1} couplings, got {len(self.couplings)}")
        if len(self.energies) != self.n:
            raise ChainModelError(f"expected {self.n} energies, got {len(self.energies)}")
        if not 1 <= self.actuator <= self.n - 1:
            raise ChainModelError(f"actuator {self.actuator} outside [1, {self.n - 1}]")
        values = list(self.couplings) + list(self.energies) + [self.f_off, self.f_on]
        if not all(v is not None and math.isfinite(v) for v in values):
            raise ChainModelError("all chain fields must be finite real numbers")
        return self

    def d(self, index: int) -> float:
        """Coupling d_index with the boundary convention d_0 = d_N = 0."""
        if 1 <= index <= self.n - 1:
            return self.couplings[index - 1]
        return 0.0

    def energy(self, index: int) -> float:
        """Energy E_index (1-based)."""
        if not 1 <= index <= self.n:
            raise ChainModelError(f"state {index} outside [1, {self.n}]")
        return self.energies[index - 1]


class SwitchSequence(BaseModel):
    """Dwell times t_1..t_K; odd slots evolve under H1, even slots under H2."""
    durations: Tuple[float, ...] = Field(min_length=1)

    @field_validator("durations")
    @classmethod
    def _nonnegative(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        for t in v:
            if not math.isfinite(t) or t < 0:
                raise ValueError(f"durations must be finite and >= 0, got {t}")
        return v

    @property
    def total_time(self) -> float:
        return float(sum(self.durations))

    def __len__(self) -> int:
        return len(self.durations)


class GateTarget(BaseModel):
    """A named (or custom) target unitary."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str
    matrix: np.ndarray

    @field_validator("matrix")
    @classmethod
    def _unitary(cls, v: np.ndarray) -> np.ndarray:
        return as_unitary(v, tol=1e-12)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


class LieBasisSet(BaseModel):
    """Hilbert-Schmidt orthonormal basis of a generated subalgebra of su(N)."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    dim: int
    elements: List[np.ndarray] = Field(default_factory=list)
    sweeps: int = 0

    @property
    def dimension(self) -> int:
        return len(self.elements)

    @property
    def full_dimension(self) -> int:
        return self.dim * self.dim - 1

    @property
    def is_full(self) -> bool:
        return self.dimension == self.full_dimension

    def gram(self) -> np.ndarray:
        """Gram matrix Re Tr(A^dag B) of the stored elements."""
        if not self.elements:
            return np.zeros((0, 0))
        flat = np.array([e.ravel() for e in self.elements])
        return np.real(flat.conj() @ flat.T)


class SimplexOptions(BaseModel):
    """Nelder-Mead settings."""
    scale: float = Field(default=0.5, gt=0)
    max_evaluations: int = Field(default=2000, ge=1)
    target: Optional[float] = None
    xatol: float = 1e-10
    fatol: float = 1e-14


class SynthesisResult(BaseModel):
    """Best switching sequence found for one target gate."""
    sequence: SwitchSequence
    error: float = Field(ge=0.0, le=1.0)
    target: str
    evaluations: int
    restarts_used: int
    seed: int
    frobenius: Optional[float] = None
    restart_errors: List[float] = Field(default_factory=list)
    t_max: float = 5.0
    simplex_scale: float = 0.5
    spec_hash: Optional[str] = None
    ordering: str = ORDERING
    created_at: datetime = Field(default_factory=datetime.now)

    @property
    def duration(self) -> float:
        return self.sequence.total_time


class Table1Column(BaseModel):
    """One gate column of the published switching-time table."""
    error: float
    duration: float
    durations: List[float] = Field(min_length=20, max_length=20)


class Table1Dataset(BaseModel):
    """The six published columns keyed by gate name."""
    columns: Dict[str, Table1Column]

    @field_validator("columns")
    @classmethod
    def _six_gates(cls, v: Dict[str, Table1Column]) -> Dict[str, Table1Column]:
        if set(v) != set(GATE_NAMES):
            raise ValueError(f"expected columns {GATE_NAMES}, got {sorted(v)}")
        return v


class TraceIdentity(BaseModel):
    """Residual of one closed-form identity from a controllability proof."""
    name: str
    residual: float
    convention: str = "stated"


class ProofTraceReport(BaseModel):
    """All identity residuals for one proof trace."""
    theorem: int
    k: int = 0
    actuator: int
    reflected: bool = False
    x_convention: str = ""
    identities: List[TraceIdentity] = Field(default_factory=list)
    closure_dimension: Optional[int] = None
    controllable: Optional[bool] = None
    tolerance: float = 1e-8

    @property
    def max_residual(self) -> float:
        return max((i.residual for i in self.identities), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance

    def residuals(self) -> Dict[str, float]:
        return {i.name: i.residual for i in self.identities}

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": "prooftrace",
            "theorem": self.theorem,
            "k": self.k,
            "actuator": self.actuator,
            "reflected": self.reflected,
            "x_convention": self.x_convention,
            "residuals": self.residuals(),
            "conventions": {i.name: i.convention for i in self.identities if i.convention != "stated"},
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "closure_dimension": self.closure_dimension,
            "controllable": self.controllable,
        }


class CheckReport(BaseModel):
    """Controllability verdicts for one chain spec."""
    spec_hash: str
    n: int
    actuator: int
    connected: bool
    thm1: bool
    thm2_k: Optional[int] = None
    reflection_symmetric: bool = False
    closure_dimension: int
    full_dimension: int
    controllable: bool

    def to_json(self) -> Dict[str, Any]:
        return {"kind": "check", **self.model_dump(mode="json")}
