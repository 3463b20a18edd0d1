"""
Dynamical Lie algebra of a drift + single actuator and the explicit
controllability conditions for tridiagonal chains.
"""

import logging
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .chain import (
    build_actuator,
    build_drift,
    diagonal_part,
    global_coupling,
    is_connected,
    is_zero,
    transition_frequency,
)
from .config import Config
from .errors import ChainModelError, NumericError, PreconditionError
from .models import ChainSpec, HermitianOp, LieBasisSet, SuElement, as_hermitian, as_su_element

logger = logging.getLogger(__name__)


def traceless_part(h: HermitianOp) -> SuElement:
    """i (H - Tr(H)/N I)."""
    h = as_hermitian(h)
    n = h.shape[0]
    return 1j * (h - np.trace(h) / n * np.eye(n))


def su_basis_element(kind: str, m: int, n: int, dim: int) -> SuElement:
    """Standard su(N) generators with 1-based labels.

    x_mn = |n><m| - |m><n|, y_mn = i(|n><m| + |m><n|) for m < n;
    h_n = i(|n><n| - |n+1><n+1|) for kind "h" (m is ignored).
    """
    e = np.zeros((dim, dim), dtype=np.complex128)
    if kind == "h":
        if not 1 <= n <= dim - 1:
            raise ChainModelError(f"h_{n} needs 1 <= n <= {dim - 1}")
        e[n - 1, n - 1] = 1j
        e[n, n] = -1j
        return e
    if kind not in ("x", "y"):
        raise ChainModelError(f"unknown basis kind {kind!r}")
    if not 1 <= m < n <= dim:
        raise ChainModelError(f"{kind}_{m}{n} needs 1 <= m < n <= {dim}")
    if kind == "x":
        e[n - 1, m - 1] = 1.0
        e[m - 1, n - 1] = -1.0
    else:
        e[n - 1, m - 1] = 1j
        e[m - 1, n - 1] = 1j
    return e


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def hs_inner(a: np.ndarray, b: np.ndarray) -> float:
    """Hilbert-Schmidt inner product Re Tr(A^dag B)."""
    return float(np.real(np.vdot(a, b)))


def _to_real(a: np.ndarray) -> np.ndarray:
    # Re Tr(A^dag B) is the Euclidean product of the stacked real/imag parts.
    return np.concatenate([a.real.ravel(), a.imag.ravel()])


def _from_real(v: np.ndarray, dim: int) -> np.ndarray:
    half = dim * dim
    return (v[:half] + 1j * v[half:]).reshape(dim, dim)


class _ClosureBuilder:
    """Incrementally grown orthonormal basis of real vectors."""

    def __init__(self, dim: int, tol: float):
        self.dim = dim
        self.tol = tol
        self.full = dim * dim - 1
        self.vectors = np.zeros((self.full, 2 * dim * dim))
        self.elements: List[np.ndarray] = []

    def __len__(self) -> int:
        return len(self.elements)

    def _orthogonal(self, v: np.ndarray) -> np.ndarray:
        q = self.vectors[:len(self)]
        # Classical Gram-Schmidt, applied twice.
        r = v - q.T @ (q @ v)
        return r - q.T @ (q @ r)

    def _project(self, r: np.ndarray) -> np.ndarray:
        # Back onto su(N): anti-Hermitian part, trace removed.
        m = _from_real(r, self.dim)
        m = 0.5 * (m - m.conj().T)
        m = m - np.trace(m) / self.dim * np.eye(self.dim)
        return _to_real(m)

    def add(self, candidate: np.ndarray) -> bool:
        if len(self) >= self.full:
            return False
        norm = np.linalg.norm(candidate)
        if not np.isfinite(norm) or norm <= self.tol:
            return False
        r = self._orthogonal(_to_real(candidate / norm))
        if np.linalg.norm(r) <= self.tol:
            return False
        r = self._project(self._orthogonal(self._project(r)))
        rnorm = np.linalg.norm(r)
        if rnorm <= self.tol:
            return False
        r /= rnorm
        try:
            element = as_su_element(_from_real(r, self.dim), tol=1e-9)
        except NumericError as e:
            logger.debug(f"dropping residual direction of norm {rnorm:.2e}: {e}")
            return False
        self.vectors[len(self)] = r
        self.elements.append(element)
        return True


def lie_closure(generators: Sequence[SuElement], tol: Optional[float] = None) -> LieBasisSet:
    """Orthonormal basis of the smallest real Lie algebra containing the generators.

    Breadth-first: each sweep commutes every newly added element with all
    earlier ones; stops when a sweep adds nothing or su(N) is reached.
    """
    tol = Config.CLOSURE_TOL if tol is None else tol
    if not generators:
        raise PreconditionError("lie_closure needs at least one generator")
    if tol <= 0:
        raise PreconditionError(f"closure tolerance must be positive, got {tol}")
    dims = {np.shape(g) for g in generators}
    if len(dims) != 1:
        raise ChainModelError(f"generators have mismatched shapes {sorted(dims)}")
    dim = np.shape(generators[0])[0]

    builder = _ClosureBuilder(dim, tol)
    for g in generators:
        builder.add(as_su_element(g, tol=1e-9))

    sweeps = 0
    start = 0
    while len(builder) < builder.full:
        end = len(builder)
        if start == end:
            break
        for j in range(start, end):
            for i in range(j):
                builder.add(commutator(builder.elements[i], builder.elements[j]))
                if len(builder) == builder.full:
                    break
            if len(builder) == builder.full:
                break
        start = end
        sweeps += 1

    if len(builder) < builder.full:
        logger.debug(f"closure stalled at dimension {len(builder)} < {builder.full} after {sweeps} sweeps")
    return LieBasisSet(dim=dim, elements=builder.elements, sweeps=sweeps)


def closure_of(spec: ChainSpec, tol: Optional[float] = None) -> LieBasisSet:
    """Closure generated by the drift and the actuator."""
    return lie_closure([traceless_part(build_drift(spec)), traceless_part(build_actuator(spec))], tol)


def closure_dimension(spec: ChainSpec, tol: Optional[float] = None) -> int:
    return closure_of(spec, tol).dimension


def is_controllable(spec: ChainSpec, tol: Optional[float] = None) -> bool:
    """True iff drift and actuator generate all of su(N)."""
    basis = closure_of(spec, tol)
    logger.debug(f"closure dimension {basis.dimension}/{basis.full_dimension} for r={spec.actuator}")
    return basis.is_full


def is_controllable_global(spec: ChainSpec, tol: Optional[float] = None) -> bool:
    """Controllability when one field drives every transition: H_0 + f(t) H_1."""
    generators = [traceless_part(diagonal_part(spec)), traceless_part(global_coupling(spec))]
    return lie_closure(generators, tol).is_full


def thm1_condition(spec: ChainSpec) -> bool:
    """omega_r != 0, every d_n != 0 and d_{r+1}^2 != d_{r-1}^2."""
    r = spec.actuator
    omega = transition_frequency(spec, r, r + 1)
    return (
        not is_zero(omega)
        and is_connected(spec)
        and not is_zero(spec.d(r + 1) ** 2 - spec.d(r - 1) ** 2)
    )


def thm2_condition(spec: ChainSpec) -> Optional[int]:
    """Smallest k >= 0 with d_{r-k-1}^2 != d_{r+k+1}^2, or None.

    Requires omega_r != 0 and a connected chain; couplings outside
    [1, N-1] count as zero.
    """
    r = spec.actuator
    if is_zero(transition_frequency(spec, r, r + 1)) or not is_connected(spec):
        return None
    for k in range(max(r, spec.n - r) + 1):
        if not is_zero(spec.d(r - k - 1) ** 2 - spec.d(r + k + 1) ** 2):
            return k
    return None


def has_reflection_symmetry(spec: ChainSpec) -> bool:
    """Centered actuator on an even chain that is its own mirror image."""
    n, r = spec.n, spec.actuator
    if n % 2 or 2 * r != n:
        return False
    couplings_match = all(
        is_zero(abs(spec.d(k)) - abs(spec.d(n - k))) for k in range(1, n)
    )
    energies_match = all(
        is_zero(spec.energy(k) - spec.energy(n + 1 - k)) for k in range(1, n + 1)
    )
    return couplings_match and energies_match


def placement_scan(spec: ChainSpec, tol: Optional[float] = None) -> List[Dict[str, Any]]:
    """Verdicts for every actuator position r = 1..N-1 on the same drift."""
    implied_f_on = spec.f_on == -spec.d(spec.actuator)
    rows = []
    for r in range(1, spec.n):
        fields = {**spec.model_dump(), "actuator": r}
        if implied_f_on:
            fields["f_on"] = None
        placed = ChainSpec(**fields)
        basis = closure_of(placed, tol)
        rows.append({
            "actuator": r,
            "f_on": placed.f_on,
            "omega_r": transition_frequency(placed, r, r + 1),
            "thm1": thm1_condition(placed),
            "thm2_k": thm2_condition(placed),
            "reflection_symmetric": has_reflection_symmetry(placed),
            "closure_dimension": basis.dimension,
            "controllable": basis.is_full,
        })
    return rows
