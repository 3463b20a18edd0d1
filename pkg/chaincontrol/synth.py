"""
Target gates for the two-qubit reading of a 4-state chain and multi-restart
Nelder-Mead search for switching sequences.
"""

import asyncio
import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.optimize
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn

from .config import Config
from .errors import ChainModelError, OptimizationError, PreconditionError
from .models import GATE_NAMES, ChainSpec, GateTarget, SimplexOptions, SwitchSequence, SynthesisResult
from .parse import spec_hash
from .propagate import SwitchPropagator, frobenius_distance, gate_error, propagate, switch_hamiltonians
from .utils import console

logger = logging.getLogger(__name__)

# Basis |0>=|00>, |1>=|01>, |2>=|10>, |3>=|11>: index = 2 q1 + q2.
_I2 = np.eye(2, dtype=np.complex128)
_HAD = np.array([[1, -1], [1, 1]], dtype=np.complex128) / np.sqrt(2)
_T = np.diag([np.exp(-1j * np.pi / 8), np.exp(1j * np.pi / 8)])
_SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)


def _cnot() -> np.ndarray:
    m = np.zeros((4, 4), dtype=np.complex128)
    m[:2, :2] = _I2
    m[2:, 2:] = _SIGMA_X
    return np.exp(-1j * np.pi / 4) * m


_GATES: Dict[str, Callable[[], np.ndarray]] = {
    "II": lambda: np.kron(_I2, _I2),
    "HadI": lambda: np.kron(_HAD, _I2),
    "TI": lambda: np.kron(_T, _I2),
    "IHad": lambda: np.kron(_I2, _HAD),
    "IT": lambda: np.kron(_I2, _T),
    "CNOT": _cnot,
}


def build_target(name: str) -> GateTarget:
    """One of the six elementary two-qubit gates."""
    if name not in _GATES:
        raise PreconditionError(f"unknown gate {name!r}; expected one of {', '.join(GATE_NAMES)}")
    return GateTarget(name=name, matrix=_GATES[name]())


def custom_target(matrix: np.ndarray, name: str = "custom") -> GateTarget:
    return GateTarget(name=name, matrix=np.asarray(matrix, dtype=np.complex128))


def target_error_matrix() -> np.ndarray:
    """Pairwise gate errors of the named targets, rows/columns in GATE_NAMES order."""
    targets = [build_target(name).matrix for name in GATE_NAMES]
    return np.array([[gate_error(a, b) for b in targets] for a in targets])


def nelder_mead(
    objective: Callable[[np.ndarray], float],
    x0: Sequence[float],
    opts: Optional[SimplexOptions] = None,
) -> Tuple[np.ndarray, float, int]:
    """Downhill simplex from x0 with an axis-aligned initial simplex of size opts.scale.

    Stops at max_evaluations, at opts.target, or once the simplex is within
    both xatol and fatol; zero tolerances spend the whole budget.

    Returns (x*, f*, evaluations). Raises OptimizationError on a non-finite
    objective value or if the best vertex ever gets worse.
    """
    opts = opts or SimplexOptions()
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim != 1 or x0.size == 0:
        raise PreconditionError(f"x0 must be a non-empty vector, got shape {x0.shape}")
    simplex = np.vstack([x0, x0 + opts.scale * np.eye(x0.size)])

    def checked(x: np.ndarray) -> float:
        value = float(objective(x))
        if not np.isfinite(value):
            raise OptimizationError(f"objective returned {value} at x={np.array2string(x, precision=4)}")
        return value

    best = [np.inf]

    def callback(intermediate_result: scipy.optimize.OptimizeResult):
        f = float(intermediate_result.fun)
        if f > best[0]:
            raise OptimizationError(f"best vertex increased from {best[0]:.6e} to {f:.6e}")
        best[0] = f
        if opts.target is not None and f <= opts.target:
            raise StopIteration

    res = scipy.optimize.minimize(
        checked,
        x0,
        method="Nelder-Mead",
        callback=callback,
        options={
            "initial_simplex": simplex,
            "maxfev": opts.max_evaluations,
            "maxiter": opts.max_evaluations,
            "xatol": opts.xatol,
            "fatol": opts.fatol,
        },
    )
    return np.asarray(res.x, dtype=float), float(res.fun), int(res.nfev)


class GateSynthesizer:
    """Multi-restart simplex search for one spec and one target gate."""

    def __init__(
        self,
        spec: ChainSpec,
        target: GateTarget,
        k_switches: int,
        t_max: Optional[float] = None,
        options: Optional[SimplexOptions] = None,
    ):
        if k_switches < 1:
            raise PreconditionError(f"k_switches must be >= 1, got {k_switches}")
        if target.dim != spec.n:
            raise ChainModelError(f"target {target.name} is {target.dim}x{target.dim} but the chain has N={spec.n}")
        self.spec = spec
        self.target = target
        self.k = k_switches
        self.t_max = Config.T_MAX if t_max is None else t_max
        self.options = options or SimplexOptions(scale=Config.SIMPLEX_SCALE, max_evaluations=Config.MAX_EVALUATIONS)
        self.propagator = SwitchPropagator.from_spec(spec)

    def objective(self, x: np.ndarray) -> float:
        # Negative durations are clamped, not penalised.
        return gate_error(self.propagator.propagate(np.clip(x, 0.0, None)), self.target.matrix)

    def run_restart(self, seed: np.random.SeedSequence, target_error: Optional[float]) -> Tuple[np.ndarray, float, int]:
        rng = np.random.default_rng(seed)
        x0 = rng.uniform(0.0, self.t_max, self.k)
        opts = self.options.model_copy(update={"target": target_error})
        x, f, nfev = nelder_mead(self.objective, x0, opts)
        return np.clip(x, 0.0, None), f, nfev

    async def _run_batch(self, batch: List[int], seeds, target_error, concurrency: int, on_done) -> List[Tuple[int, np.ndarray, float, int]]:
        semaphore = asyncio.Semaphore(concurrency)

        async def run_one(i: int):
            async with semaphore:
                x, f, nfev = await asyncio.to_thread(self.run_restart, seeds[i], target_error)
                return i, x, f, nfev

        results = []
        for coro in asyncio.as_completed([run_one(i) for i in batch]):
            results.append(await coro)
            on_done()
        return results

    def run(
        self,
        restarts: int,
        seed: int,
        target_error: Optional[float] = None,
        concurrency: Optional[int] = None,
        show_progress: bool = False,
    ) -> SynthesisResult:
        if restarts < 1:
            raise PreconditionError(f"restarts must be >= 1, got {restarts}")
        concurrency = max(1, concurrency or Config.CONCURRENCY)
        seeds = np.random.SeedSequence(seed).spawn(restarts)

        outcomes: Dict[int, Tuple[np.ndarray, float, int]] = {}
        logger.info(
            f"🎯 Synthesizing {self.target.name}: K={self.k}, restarts={restarts}, "
            f"concurrency={concurrency}, seed={seed}"
        )

        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TextColumn("[progress.percentage]{task.percentage:>3.0f}%"),
            TimeElapsedColumn(),
            console=console,
            disable=not show_progress,
        ) as progress:
            task = progress.add_task(f"{self.target.name} restarts...", total=restarts)

            for start in range(0, restarts, concurrency):
                batch = list(range(start, min(start + concurrency, restarts)))
                if concurrency == 1:
                    i = batch[0]
                    outcomes[i] = self.run_restart(seeds[i], target_error)
                    progress.advance(task)
                else:
                    done = asyncio.run(self._run_batch(batch, seeds, target_error, concurrency,
                                                       lambda: progress.advance(task)))
                    for i, x, f, nfev in done:
                        outcomes[i] = (x, f, nfev)

                best_f = min(f for _, f, _ in outcomes.values())
                logger.debug(f"after {len(outcomes)} restarts best error {best_f:.3e}")
                if target_error is not None and best_f <= target_error:
                    logger.info(f"✓ Target error {target_error:g} reached after {len(outcomes)} restarts")
                    break

        order = sorted(outcomes)
        best_i = min(order, key=lambda i: (outcomes[i][1], i))
        x_best = outcomes[best_i][0]
        seq = SwitchSequence(durations=tuple(float(t) for t in x_best))

        h1, h2 = switch_hamiltonians(self.spec)
        u = propagate(seq, h1, h2)
        error = gate_error(u, self.target.matrix)

        result = SynthesisResult(
            sequence=seq,
            error=error,
            target=self.target.name,
            evaluations=sum(outcomes[i][2] for i in order),
            restarts_used=len(outcomes),
            seed=seed,
            frobenius=frobenius_distance(u, self.target.matrix),
            restart_errors=[outcomes[i][1] for i in order],
            t_max=self.t_max,
            simplex_scale=self.options.scale,
            spec_hash=spec_hash(self.spec),
        )
        logger.info(
            f"{self.target.name}: error {result.error:.3e}, duration {result.duration:.4f}, "
            f"{result.evaluations} evaluations"
        )
        return result


def synthesize_gate(
    spec: ChainSpec,
    target: GateTarget,
    k_switches: Optional[int] = None,
    restarts: Optional[int] = None,
    seed: Optional[int] = None,
    target_error: Optional[float] = None,
    t_max: Optional[float] = None,
    options: Optional[SimplexOptions] = None,
    concurrency: Optional[int] = None,
    show_progress: bool = False,
) -> SynthesisResult:
    """Best switching sequence for ``target`` over independently seeded restarts.

    Stops early once a restart reaches ``target_error``; an unreached target
    is not an error, the best sequence found is returned.
    """
    synthesizer = GateSynthesizer(
        spec,
        target,
        Config.K_SWITCHES if k_switches is None else k_switches,
        t_max=t_max,
        options=options,
    )
    return synthesizer.run(
        Config.RESTARTS if restarts is None else restarts,
        Config.SEED if seed is None else seed,
        target_error=Config.TARGET_ERROR if target_error is None else target_error,
        concurrency=concurrency,
        show_progress=show_progress,
    )


def verify_sequence(spec: ChainSpec, seq: SwitchSequence, target: GateTarget) -> float:
    """Re-evaluate a claimed sequence: gate error of its propagator."""
    if target.dim != spec.n:
        raise ChainModelError(f"target {target.name} is {target.dim}x{target.dim} but the chain has N={spec.n}")
    h1, h2 = switch_hamiltonians(spec)
    u = propagate(seq, h1, h2)
    error = gate_error(u, target.matrix)
    logger.info(
        f"{target.name}: gate error {error:.6e}, Frobenius distance {frobenius_distance(u, target.matrix):.6e}"
    )
    return error
