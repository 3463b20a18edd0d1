"""
Piecewise-constant evolution under the two switch Hamiltonians, gate metrics
and density-operator evolution.

Ordering: U(t) = U1(t_1) U2(t_2) U1(t_3) ... ; the rightmost factor acts
first on states, odd slots evolve under H1 = A_0 + f_off A_r, even slots
under H2 = A_0 + f_on A_r.
"""

import logging
from typing import Sequence, Tuple

import numpy as np
import scipy.linalg

from .chain import build_actuator, build_drift
from .errors import ChainModelError, NumericError
from .models import ChainSpec, DensityOp, HermitianOp, SwitchSequence, UnitaryOp, as_density, as_hermitian, as_unitary

logger = logging.getLogger(__name__)


def switch_hamiltonians(spec: ChainSpec) -> Tuple[HermitianOp, HermitianOp]:
    """(A_0 + f_off A_r, A_0 + f_on A_r) for the spec's actuator."""
    drift = build_drift(spec)
    actuator = build_actuator(spec)
    return drift + spec.f_off * actuator, drift + spec.f_on * actuator


class HamiltonianExp:
    """exp(-i t H) for many t from one eigendecomposition H = Q diag(w) Q^dag."""

    def __init__(self, h: HermitianOp):
        h = as_hermitian(h)
        try:
            w, q = scipy.linalg.eigh(h)
        except (np.linalg.LinAlgError, ValueError) as e:
            raise NumericError(f"eigendecomposition failed: {e}") from e
        self.dim = h.shape[0]
        self._w = w
        self._q = q
        self._qh = q.conj().T
        self._w.flags.writeable = False
        self._q.flags.writeable = False

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._w

    def __call__(self, t: float) -> UnitaryOp:
        if not np.isfinite(t):
            raise NumericError(f"evolution time must be finite, got {t}")
        return (self._q * np.exp(-1j * t * self._w)) @ self._qh


def expm_hermitian(h: HermitianOp, t: float) -> UnitaryOp:
    """U = exp(-i t H) via Hermitian eigendecomposition."""
    return HamiltonianExp(h)(t)


class SwitchPropagator:
    """Alternating product for a fixed pair of switch Hamiltonians.

    Both eigendecompositions are computed once; instances are read-only and
    can be shared between threads.
    """

    def __init__(self, h1: HermitianOp, h2: HermitianOp):
        if np.shape(h1) != np.shape(h2):
            raise ChainModelError(f"switch Hamiltonians differ in shape: {np.shape(h1)} vs {np.shape(h2)}")
        self.exps = (HamiltonianExp(h1), HamiltonianExp(h2))
        self.dim = self.exps[0].dim
        logger.debug(f"switch spectra cached for dim {self.dim}")

    @classmethod
    def from_spec(cls, spec: ChainSpec) -> "SwitchPropagator":
        return cls(*switch_hamiltonians(spec))

    def propagate(self, durations: Sequence[float], swap: bool = False) -> UnitaryOp:
        """Literal product U1(t_1) U2(t_2) ...; ``swap`` starts with H2 instead."""
        first = 1 if swap else 0
        u = np.eye(self.dim, dtype=np.complex128)
        for k, t in enumerate(durations):
            u = u @ self.exps[(first + k) % 2](t)
        return u


def propagate(seq: SwitchSequence, h1: HermitianOp, h2: HermitianOp) -> UnitaryOp:
    """U(t) for a switching sequence; output checked unitary to 1e-10."""
    u = SwitchPropagator(h1, h2).propagate(seq.durations)
    return as_unitary(u, tol=1e-10)


def _same_shape(u: np.ndarray, target: np.ndarray):
    if np.shape(u) != np.shape(target):
        raise ChainModelError(f"shape mismatch: {np.shape(u)} vs {np.shape(target)}")


def gate_error(u: UnitaryOp, target: UnitaryOp) -> float:
    """1 - |Tr(target^dag u)| / N, invariant under global phases."""
    _same_shape(u, target)
    n = u.shape[0]
    overlap = abs(np.vdot(target, u)) / n
    return float(min(1.0, max(0.0, 1.0 - overlap)))


def frobenius_distance(u: UnitaryOp, target: UnitaryOp) -> float:
    """Phase-minimised distance min_phi ||target - e^{i phi} u||_F."""
    _same_shape(u, target)
    sq = np.vdot(target, target).real + np.vdot(u, u).real - 2 * abs(np.vdot(target, u))
    return float(np.sqrt(max(0.0, sq)))


def evolve_density(rho: DensityOp, u: UnitaryOp) -> DensityOp:
    """U rho U^dag, with the spectrum checked to be preserved."""
    rho = as_density(rho)
    _same_shape(u, rho)
    out = u @ rho @ u.conj().T
    before = np.linalg.eigvalsh(rho)
    after = np.linalg.eigvalsh(0.5 * (out + out.conj().T))
    drift = float(np.max(np.abs(before - after)))
    if drift > 1e-9:
        raise NumericError(f"density evolution is not isospectral (drift {drift:.2e})")
    return out
