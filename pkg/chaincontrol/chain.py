"""
Drift and actuator Hamiltonians for nearest-neighbour N-state chains.

Units: hbar = 1, energies and times dimensionless. States are labelled 1..N
on every interface; arrays are 0-based internally.
"""

import itertools
import logging
import math
from typing import Iterable, List, Optional

import numpy as np

from .config import Config
from .errors import ChainModelError
from .models import ChainSpec, HermitianOp

logger = logging.getLogger(__name__)


def _checked(spec: ChainSpec) -> ChainSpec:
    # Catches specs built with model_construct, which skips validation.
    if len(spec.couplings) != spec.n - 1 or len(spec.energies) != spec.n:
        raise ChainModelError(
            f"dimension mismatch: n={spec.n}, {len(spec.couplings)} couplings, {len(spec.energies)} energies"
        )
    if not 1 <= spec.actuator <= spec.n - 1:
        raise ChainModelError(f"actuator {spec.actuator} outside [1, {spec.n - 1}]")
    return spec


def diagonal_part(spec: ChainSpec) -> HermitianOp:
    """H_0 = diag(E_1, ..., E_N)."""
    _checked(spec)
    return np.diag(np.asarray(spec.energies, dtype=np.complex128))


def global_coupling(spec: ChainSpec) -> HermitianOp:
    """H_1 = sum_n d_n (|n><n+1| + |n+1><n|), the field driving every transition."""
    _checked(spec)
    d = np.asarray(spec.couplings, dtype=np.complex128)
    return np.diag(d, 1) + np.diag(d, -1)


def build_drift(spec: ChainSpec) -> HermitianOp:
    """A_0 = H_0 + H_1: tridiagonal, energies on the diagonal, couplings beside it."""
    return diagonal_part(spec) + global_coupling(spec)


def build_actuator(spec: ChainSpec, actuator: Optional[int] = None) -> HermitianOp:
    """A_r = |r><r+1| + |r+1><r| for the spec's actuator (or an explicit r)."""
    _checked(spec)
    r = spec.actuator if actuator is None else actuator
    if not 1 <= r <= spec.n - 1:
        raise ChainModelError(f"actuator {r} outside [1, {spec.n - 1}]")
    a = np.zeros((spec.n, spec.n), dtype=np.complex128)
    a[r - 1, r] = 1.0
    a[r, r - 1] = 1.0
    return a


def heisenberg_energies(couplings: Iterable[float]) -> List[float]:
    """First-excitation energies of an isotropic Heisenberg chain.

    E_n = 1/2 sum_{l != n-1, n} d_l - 1/2 (d_{n-1} + d_n), with d_0 = d_N = 0.
    """
    d = [0.0] + [float(c) for c in couplings] + [0.0]
    n = len(d) - 1
    energies = []
    for k in range(1, n + 1):
        rest = sum(d[l] for l in range(1, n) if l not in (k - 1, k))
        energies.append(0.5 * rest - 0.5 * (d[k - 1] + d[k]))
    return energies


def heisenberg_spec(
    n: int,
    couplings: Iterable[float],
    actuator: int,
    f_off: float = 0.0,
    f_on: Optional[float] = None,
) -> ChainSpec:
    """Chain spec for the first excitation subspace of a Heisenberg spin chain."""
    couplings = [float(c) for c in couplings]
    if n < 2:
        raise ChainModelError(f"chain needs at least 2 states, got {n}")
    if len(couplings) != n - 1:
        raise ChainModelError(f"expected {n - 1} couplings for n={n}, got {len(couplings)}")
    return ChainSpec(
        n=n,
        couplings=couplings,
        energies=heisenberg_energies(couplings),
        actuator=actuator,
        f_off=f_off,
        f_on=f_on,
    )


def oscillator_spec(n: int, actuator: int = 1) -> ChainSpec:
    """Truncated harmonic oscillator: equally spaced levels, d_n = sqrt(n)."""
    return ChainSpec(
        n=n,
        couplings=[math.sqrt(k) for k in range(1, n)],
        energies=[float(k) for k in range(n)],
        actuator=actuator,
    )


def reflect(spec: ChainSpec) -> ChainSpec:
    """Mirror the chain, n -> N+1-n; the actuator moves from r to N-r."""
    return ChainSpec(
        n=spec.n,
        couplings=tuple(reversed(spec.couplings)),
        energies=tuple(reversed(spec.energies)),
        actuator=spec.n - spec.actuator,
        f_off=spec.f_off,
        f_on=spec.f_on,
    )


def transition_frequency(spec: ChainSpec, m: int, n: int) -> float:
    """omega_mn = E_n - E_m."""
    return spec.energy(n) - spec.energy(m)


def is_zero(value: float) -> bool:
    """Zero-threshold policy shared by the connectivity and theorem predicates."""
    return abs(value) <= Config.ZERO_TOL


def is_connected(spec: ChainSpec) -> bool:
    """The tridiagonal transition graph is a path iff no coupling vanishes."""
    return not any(is_zero(d) for d in spec.couplings)


def graph_criterion(spec: ChainSpec) -> bool:
    """Sufficient condition for the global-field system H_0 + f(t) H_1.

    Connected transition graph and pairwise distinct adjacent transition
    frequencies |omega_n|.
    """
    if not is_connected(spec):
        return False
    freqs = [abs(transition_frequency(spec, k, k + 1)) for k in range(1, spec.n)]
    for a, b in itertools.combinations(freqs, 2):
        if is_zero(a - b):
            logger.debug(f"degenerate transition frequencies {a} and {b}")
            return False
    return True
