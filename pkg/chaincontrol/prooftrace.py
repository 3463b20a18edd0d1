"""
Numerical execution of the commutator recurrences behind the single-actuator
controllability theorems.

Every step forms its left-hand side from commutators of earlier results and
compares it with the closed form the proof states. Downstream steps are fed
the exact closed form, so each residual measures one step in isolation and
stays at float-noise level. Where the proof text admits two readings (sign
slips, index typos) both are tried and the one that holds is recorded.
"""

import logging
import re
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .chain import build_actuator, build_drift, diagonal_part, is_zero, reflect, transition_frequency
from .config import Config
from .errors import IdentityFailure, PreconditionError
from .lie import closure_of, commutator, su_basis_element, thm1_condition, thm2_condition, traceless_part
from .models import ChainSpec, ProofTraceReport, TraceIdentity

logger = logging.getLogger(__name__)

X_AS_DEFINED = "x_mn = |n><m| - |m><n| (as defined)"
X_TRANSPOSED = "x_mn -> |m><n| - |n><m| (transposed)"

_GENERATOR_NAME = re.compile(r"^([xyh])_(\d+)(.*)$")


def _mirror_names(identities: List[TraceIdentity], n: int) -> List[TraceIdentity]:
    """Relabel generator identities from the mirrored chain back to transition N - m."""
    out = []
    for ident in identities:
        match = _GENERATOR_NAME.match(ident.name)
        if match:
            kind, m, rest = match.groups()
            ident = ident.model_copy(update={"name": f"{kind}_{n - int(m)}{rest}"})
        out.append(ident)
    return out


class _Frame:
    """Basis elements and chain data for one trace, with out-of-range terms dropped."""

    def __init__(self, spec: ChainSpec):
        self.spec = spec
        self.n = spec.n
        self.r = spec.actuator
        self.zero = np.zeros((self.n, self.n), dtype=np.complex128)
        self.idiag = traceless_part(diagonal_part(spec))
        # The proof needs h_r = [x_r, y_r] / 2; pick the x orientation that gives it.
        x = su_basis_element("x", 1, 2, self.n)
        y = su_basis_element("y", 1, 2, self.n)
        h = su_basis_element("h", 1, 1, self.n)
        half = 0.5 * commutator(x, y)
        self.sign = 1.0 if np.allclose(half, h) else -1.0
        self.convention = X_AS_DEFINED if self.sign > 0 else X_TRANSPOSED

    def d(self, i: int) -> float:
        return self.spec.d(i)

    def omega(self, i: int) -> float:
        if 1 <= i <= self.n - 1:
            return transition_frequency(self.spec, i, i + 1)
        return 0.0

    def x(self, m: int, n: Optional[int] = None) -> np.ndarray:
        n = m + 1 if n is None else n
        if not 1 <= m < n <= self.n:
            return self.zero
        return self.sign * su_basis_element("x", m, n, self.n)

    def y(self, m: int, n: Optional[int] = None) -> np.ndarray:
        n = m + 1 if n is None else n
        if not 1 <= m < n <= self.n:
            return self.zero
        return su_basis_element("y", m, n, self.n)

    def h(self, m: int) -> np.ndarray:
        if not 1 <= m <= self.n - 1:
            return self.zero
        return su_basis_element("h", m, m, self.n)

    def interior(self, i: int) -> bool:
        return 1 <= i <= self.n - 1

    def drift(self, excluded: Iterable[int], sign: float = 1.0) -> np.ndarray:
        """i H_0 + sign * sum of d_n y_n over the couplings not yet peeled off."""
        skip = set(excluded)
        total = self.idiag.copy()
        for k in range(1, self.n):
            if k not in skip:
                total = total + sign * self.d(k) * self.y(k)
        return total


class _Trace:
    """Collects residuals; every check hands back the exact closed form."""

    def __init__(self, frame: _Frame, tol: float):
        self.f = frame
        self.tol = tol
        self.identities: List[TraceIdentity] = []

    @staticmethod
    def _residual(a: np.ndarray, b: np.ndarray) -> float:
        return float(np.max(np.abs(a - b)))

    def _record(self, name: str, scored: Sequence[Tuple[str, float]]) -> int:
        for idx, (label, res) in enumerate(scored):
            if res <= self.tol:
                break
        else:
            idx = int(np.argmin([res for _, res in scored]))
        label, res = scored[idx]
        self.identities.append(TraceIdentity(name=name, residual=res, convention=label))
        if res > self.tol:
            logger.warning(f"identity {name} residual {res:.3e}")
        elif label != "stated":
            logger.debug(f"identity {name} holds as '{label}'")
        return idx

    def check(self, name: str, lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        self._record(name, [("stated", self._residual(lhs, rhs))])
        return rhs

    def check_forms(self, name: str, lhs: np.ndarray, forms: Sequence[Tuple[str, np.ndarray]]) -> np.ndarray:
        """Compare one left-hand side against alternative closed forms."""
        idx = self._record(name, [(label, self._residual(lhs, rhs)) for label, rhs in forms])
        return forms[idx][1]

    def check_steps(self, name: str, steps: Sequence[Tuple[str, np.ndarray]], rhs: np.ndarray) -> np.ndarray:
        """Compare alternative constructions of a left-hand side against one closed form."""
        self._record(name, [(label, self._residual(lhs, rhs)) for label, lhs in steps])
        return rhs

    def generator(self, kind: str, m: int, lhs: np.ndarray, suffix: str = "") -> np.ndarray:
        expected = {"x": self.f.x, "y": self.f.y, "h": self.f.h}[kind](m)
        return self.check(f"{kind}_{m}{suffix}", lhs, expected)


def failed_conditions(spec: ChainSpec, theorem: int = 1) -> List[str]:
    """Human-readable list of the theorem hypotheses the spec violates."""
    r = spec.actuator
    reasons = []
    if spec.n < 4:
        reasons.append("trace requires N >= 4")
    if is_zero(transition_frequency(spec, r, r + 1)):
        reasons.append("omega_r = 0")
    zero = [k for k in range(1, spec.n) if is_zero(spec.d(k))]
    if zero:
        reasons.append(f"d_n = 0 for n in {zero}")
    if theorem == 1 and is_zero(spec.d(r + 1) ** 2 - spec.d(r - 1) ** 2):
        reasons.append("d_{r+1}^2 = d_{r-1}^2")
    if theorem == 2 and not reasons and thm2_condition(spec) is None:
        reasons.append("d_{r-k-1}^2 = d_{r+k+1}^2 for every k")
    return reasons


def _opening(t: _Trace) -> Dict[str, np.ndarray]:
    """Shared first steps: y_r, x_r, h_r and the order-zero combinations."""
    f = t.f
    r, d, w = f.r, f.d, f.omega(f.r)
    iv0 = traceless_part(build_drift(f.spec))
    yr = t.check("iV_1", traceless_part(build_actuator(f.spec)), f.y(r))
    v00 = t.check("V_0^(0)", iv0 - d(r) * yr, f.drift([r]))

    x0 = t.check("X_0", commutator(yr, v00),
                 d(r - 1) * f.x(r - 1, r + 1) - d(r + 1) * f.x(r, r + 2) - w * f.x(r))
    y0 = t.check("Y_0", commutator(x0, yr),
                 d(r - 1) * f.y(r - 1) + d(r + 1) * f.y(r + 1) - 2 * w * f.h(r))
    x0p = t.check("X_0'", commutator(y0, yr),
                  -d(r - 1) * f.x(r - 1, r + 1) + d(r + 1) * f.x(r, r + 2) + 4 * w * f.x(r))
    y0p = t.check("Y_0'", commutator(x0p, yr),
                  -d(r - 1) * f.y(r - 1) - d(r + 1) * f.y(r + 1) + 8 * w * f.h(r))
    xr = t.generator("x", r, (x0 + x0p) / (3 * w))
    hr = t.generator("h", r, 0.5 * commutator(xr, yr))

    y1 = t.check("Y_1", (4 * y0 + y0p) / 3, d(r - 1) * f.y(r - 1) + d(r + 1) * f.y(r + 1))
    x1 = t.check("X_1", commutator(commutator(xr, y1), yr), d(r - 1) * f.x(r - 1) + d(r + 1) * f.x(r + 1))
    z1 = t.check("Z_1", 0.5 * commutator(x1, y1),
                 d(r - 1) ** 2 * f.h(r - 1) + d(r + 1) ** 2 * f.h(r + 1))
    return {"v00": v00, "yr": yr, "xr": xr, "hr": hr, "Y1": y1, "X1": x1, "Z1": z1}


def _sweep_right(t: _Trace, gens: Dict[Tuple[str, int], np.ndarray], start: int, v: np.ndarray) -> np.ndarray:
    """x_m = [h_{m-1}, V] / d_m, y_m = [x_m, h_{m-1}], then peel d_m y_m off V."""
    f = t.f
    for m in range(start, f.n):
        hprev = gens[("h", m - 1)]
        gens[("x", m)] = t.generator("x", m, commutator(hprev, v) / f.d(m))
        gens[("y", m)] = t.generator("y", m, commutator(gens[("x", m)], hprev))
        gens[("h", m)] = t.generator("h", m, 0.5 * commutator(gens[("x", m)], gens[("y", m)]))
        v = v - f.d(m) * gens[("y", m)]
    return v


def _sweep_left(t: _Trace, gens: Dict[Tuple[str, int], np.ndarray], start: int, w: np.ndarray) -> np.ndarray:
    """x_m = [h_{m+1}, W] / d_m, y_m = [x_m, h_{m+1}], then peel d_m y_m off W."""
    f = t.f
    for m in range(start, 0, -1):
        hnext = gens[("h", m + 1)]
        gens[("x", m)] = t.generator("x", m, commutator(hnext, w) / f.d(m))
        gens[("y", m)] = t.generator("y", m, commutator(gens[("x", m)], hnext))
        gens[("h", m)] = t.generator("h", m, 0.5 * commutator(gens[("x", m)], gens[("y", m)]))
        w = w - f.d(m) * gens[("y", m)]
    return w


def _finish(report: ProofTraceReport, spec: ChainSpec, strict: bool) -> ProofTraceReport:
    basis = closure_of(spec)
    report.closure_dimension = basis.dimension
    report.controllable = basis.is_full
    logger.info(
        f"Theorem {report.theorem} trace: {len(report.identities)} identities, "
        f"max residual {report.max_residual:.2e}"
    )
    if strict and not report.passed:
        worst = max(report.identities, key=lambda i: i.residual)
        raise IdentityFailure(worst.name, worst.residual)
    return report


def proof_trace_thm1(spec: ChainSpec, tol: Optional[float] = None, strict: bool = False) -> ProofTraceReport:
    """Replay the Theorem 1 construction of every x_n, y_n, h_n.

    With the actuator on the first transition d_{r-1} = d_0 vanishes and the
    step dividing by d_{r-1}^4 is undefined, so the mirrored chain is traced.
    """
    tol = Config.TRACE_TOL if tol is None else tol
    if spec.n < 4 or not thm1_condition(spec):
        raise PreconditionError("; ".join(failed_conditions(spec, theorem=1)))

    reflected = spec.actuator == 1
    work = reflect(spec) if reflected else spec
    f = _Frame(work)
    t = _Trace(f, tol)
    r, d, n = f.r, f.d, f.n

    o = _opening(t)
    y1, x1, z1 = o["Y1"], o["X1"], o["Z1"]
    gens = {("x", r): o["xr"], ("y", r): o["yr"], ("h", r): o["hr"]}

    y1p = t.check("Y_1'", 0.5 * commutator(z1, x1), d(r - 1) ** 3 * f.y(r - 1) + d(r + 1) ** 3 * f.y(r + 1))
    x1p = t.check("X_1'", 0.5 * commutator(y1, z1), d(r - 1) ** 3 * f.x(r - 1) + d(r + 1) ** 3 * f.x(r + 1))
    c1 = d(r - 1) ** 2 - d(r + 1) ** 2
    ly = t.check("Y_1' - d_{r+1}^2 Y_1", y1p - d(r + 1) ** 2 * y1, d(r - 1) * c1 * f.y(r - 1))
    lx = t.check("X_1' - d_{r+1}^2 X_1", x1p - d(r + 1) ** 2 * x1, d(r - 1) * c1 * f.x(r - 1))
    ry = t.check("Y_1' - d_{r-1}^2 Y_1", y1p - d(r - 1) ** 2 * y1, -d(r + 1) * c1 * f.y(r + 1))
    rx = t.check("X_1' - d_{r-1}^2 X_1", x1p - d(r - 1) ** 2 * x1, -d(r + 1) * c1 * f.x(r + 1))

    for m, ym, xm, scale in ((r - 1, ly, lx, d(r - 1) * c1), (r + 1, ry, rx, -d(r + 1) * c1)):
        if f.interior(m):
            gens[("y", m)] = t.generator("y", m, ym / scale)
            gens[("x", m)] = t.generator("x", m, xm / scale)
            gens[("h", m)] = t.generator("h", m, 0.5 * commutator(gens[("x", m)], gens[("y", m)]))

    v01 = t.check("V_0^(1)", o["v00"] - y1, f.drift(range(r - 1, r + 2)))
    y2p = t.check("Y_2'", commutator(commutator(z1, v01), z1),
                  d(r - 2) * d(r - 1) ** 4 * f.y(r - 2) + d(r + 1) ** 4 * d(r + 2) * f.y(r + 2))
    c2 = d(r + 2) * (1 - d(r + 1) ** 4 / d(r - 1) ** 4)
    v = t.check("V_0^(2)", v01 - y2p / d(r - 1) ** 4, f.drift(range(r - 2, r + 3)) + c2 * f.y(r + 2))

    if f.interior(r + 2):
        x2 = t.check("X_2", commutator(z1, v), d(r + 1) ** 2 * c2 * f.x(r + 2))
        y2 = t.check("Y_2", commutator(x2, z1), d(r + 1) ** 4 * c2 * f.y(r + 2))
        gens[("x", r + 2)] = t.generator("x", r + 2, x2 / (d(r + 1) ** 2 * c2))
        gens[("y", r + 2)] = t.generator("y", r + 2, y2 / (d(r + 1) ** 4 * c2))
        gens[("h", r + 2)] = t.generator("h", r + 2, 0.5 * commutator(gens[("x", r + 2)], gens[("y", r + 2)]))
        v = t.check_steps("V_0^(3)", [
            ("stated", v - d(r + 2) * gens[("y", r + 2)]),
            ("subtract c_{r+2} y_{r+2}", v - c2 * gens[("y", r + 2)]),
        ], f.drift(range(r - 2, r + 3)))
        v = _sweep_right(t, gens, r + 3, v)

    if f.interior(r - 2):
        known = gens.get(("y", r + 2), f.zero)
        ym = (y2p - d(r + 1) ** 4 * d(r + 2) * known) / (d(r - 2) * d(r - 1) ** 4)
        gens[("y", r - 2)] = t.generator("y", r - 2, ym)
        gens[("x", r - 2)] = t.generator("x", r - 2, commutator(gens[("h", r - 1)], gens[("y", r - 2)]))
        gens[("h", r - 2)] = t.generator("h", r - 2, 0.5 * commutator(gens[("x", r - 2)], gens[("y", r - 2)]))
        _sweep_left(t, gens, r - 3, v)

    missing = [m for m in range(1, n) if ("x", m) not in gens or ("y", m) not in gens]
    if missing:
        logger.warning(f"trace did not reach generators {missing}")

    report = ProofTraceReport(
        theorem=1,
        k=0,
        actuator=spec.actuator,
        reflected=reflected,
        x_convention=f.convention,
        identities=_mirror_names(t.identities, n) if reflected else t.identities,
        tolerance=tol,
    )
    return _finish(report, spec, strict)


def proof_trace_thm2(spec: ChainSpec, tol: Optional[float] = None, strict: bool = False) -> ProofTraceReport:
    """Replay the Theorem 2 construction for a chain symmetric about r up to depth k.

    k = 0 is Theorem 1 and is delegated to proof_trace_thm1.
    """
    tol = Config.TRACE_TOL if tol is None else tol
    k = thm2_condition(spec)
    if k is None:
        raise PreconditionError("; ".join(failed_conditions(spec, theorem=2)))
    if k == 0:
        return proof_trace_thm1(spec, tol=tol, strict=strict)

    f = _Frame(spec)
    t = _Trace(f, tol)
    r, d, n, w = f.r, f.d, f.n, f.omega

    o = _opening(t)
    gens = {("x", r): o["xr"], ("y", r): o["yr"], ("h", r): o["hr"]}
    xs = {1: o["X1"]}
    ys = {1: o["Y1"]}
    zs = {1: o["Z1"]}

    def peeled(j: int) -> range:
        return range(r - j, r + j + 1)

    v = t.check_forms("V_0^(1)", o["v00"] - ys[1], [
        ("stated", f.drift(peeled(1), sign=-1.0)),
        ("plus sign", f.drift(peeled(1))),
    ])

    def x_order1(j: int) -> List[Tuple[str, np.ndarray]]:
        common = d(r - j) * d(r - j - 1) * f.x(r - j - 1, r - j + 1) - d(r + j) * d(r + j + 1) * f.x(r + j, r + j + 2)
        return [
            ("stated", common - d(r - j) * w(r - j) * f.h(r - j) - d(r + j) * w(r + j) * f.h(r + j)),
            ("x in omega terms", common - d(r - j) * w(r - j) * f.x(r - j) - d(r + j) * w(r + j) * f.x(r + j)),
        ]

    def y_order1(j: int) -> np.ndarray:
        return (d(r - j) ** 2 * d(r - j - 1) * f.y(r - j - 1) - 2 * d(r - j) ** 2 * w(r - j) * f.h(r - j)
                + d(r + j) ** 2 * d(r + j + 1) * f.y(r + j + 1) - 2 * d(r + j) ** 2 * w(r + j) * f.h(r + j))

    for j in range(1, k):
        zj1 = t.check_steps(f"Z_{j}^(1)", [
            ("stated", zs[1] / d(r - j) ** 2),
            ("Z_j^(0) for Z_1^(0)", zs[j] / d(r - j) ** 2),
        ], f.h(r - j) + f.h(r + j))
        xj1 = t.check_forms(f"X_{j}^(1)", commutator(ys[j], v), x_order1(j))
        yj1 = t.check(f"Y_{j}^(1)", commutator(xj1, ys[j]), y_order1(j))
        yj2 = t.check(f"Y_{j}^(2)", yj1 / d(r - j) ** 2,
                      d(r - j - 1) * f.y(r - j - 1) - 2 * w(r - j) * f.h(r - j)
                      + d(r + j + 1) * f.y(r + j + 1) - 2 * w(r + j) * f.h(r + j))
        xs[j + 1] = t.check(f"X_{j + 1}^(0)", commutator(zj1, yj2),
                            d(r - j - 1) * f.x(r - j - 1) + d(r + j + 1) * f.x(r + j + 1))
        ys[j + 1] = t.check(f"Y_{j + 1}^(0)", commutator(xs[j + 1], zj1),
                            d(r - j - 1) * f.y(r - j - 1) + d(r + j + 1) * f.y(r + j + 1))
        zs[j + 1] = t.check(f"Z_{j + 1}^(0)", 0.5 * commutator(xs[j + 1], ys[j + 1]),
                            d(r - j - 1) ** 2 * f.h(r - j - 1) + d(r + j + 1) ** 2 * f.h(r + j + 1))
        v = t.check_forms(f"V_0^({j + 1})", v - ys[j + 1], [
            ("stated", f.drift(peeled(j + 1), sign=-1.0)),
            ("plus sign", f.drift(peeled(j + 1))),
        ])

    # Separate the two sides at depth k + 1.
    xk1 = t.check_forms(f"X_{k}^(1)", commutator(ys[k], v), x_order1(k))
    yk1 = t.check(f"Y_{k}^(1)", commutator(xk1, ys[k]), y_order1(k))
    zk1 = t.check(f"Z_{k}^(1)", zs[k] / d(r - k) ** 2, f.h(r - k) + f.h(r + k))
    lo, hi = r - k - 1, r + k + 1
    xk2 = t.check_forms(f"X_{k}^(2)", commutator(zk1, yk1), [
        ("stated", d(lo) / d(r - k) ** 2 * f.x(lo) + d(hi) / d(r + k) ** 2 * f.x(hi)),
        ("d^+2 coefficients", d(r - k) ** 2 * d(lo) * f.x(lo) + d(r + k) ** 2 * d(hi) * f.x(hi)),
    ])
    xk3 = t.check(f"X_{k}^(3)", xk2 / d(r - k) ** 2, d(lo) * f.x(lo) + d(hi) * f.x(hi))
    yk2 = t.check(f"Y_{k}^(2)", commutator(xk3, zk1), d(lo) * f.y(lo) + d(hi) * f.y(hi))
    zk2 = t.check(f"Z_{k}^(2)", 0.5 * commutator(xk3, yk2), d(lo) ** 2 * f.h(lo) + d(hi) ** 2 * f.h(hi))
    yk3 = t.check(f"Y_{k}^(3)", 0.5 * commutator(zk2, xk3), d(lo) ** 3 * f.y(lo) + d(hi) ** 3 * f.y(hi))

    for m, mirror in ((hi, lo), (lo, hi)):
        if not f.interior(m):
            continue
        denom = d(m) * (d(m) ** 2 - d(mirror) ** 2)
        gens[("y", m)] = t.check_steps(f"y_{m}", [
            ("stated", (yk3 - d(mirror) * yk2) / denom),
            ("squared mirror coefficient", (yk3 - d(mirror) ** 2 * yk2) / denom),
        ], f.y(m))
        gens[("x", m)] = t.generator("x", m, commutator(gens[("y", m)], zk2) / (2 * d(m) ** 2))
        gens[("h", m)] = t.generator("h", m, 0.5 * commutator(gens[("x", m)], gens[("y", m)]))

    v = t.check_forms(f"V_0^({k + 1})",
                      v - d(lo) * gens.get(("y", lo), f.zero) - d(hi) * gens.get(("y", hi), f.zero), [
                          ("stated", f.drift(peeled(k + 1), sign=-1.0)),
                          ("plus sign", f.drift(peeled(k + 1))),
                      ])

    # Inner generators r +- j, j = k..1, from the pair one step further out.
    for j in range(k, 0, -1):
        sides = [(r + j, r + j + 1, r - j), (r - j, r - j - 1, r + j)]
        sides.sort(key=lambda s: ("y", s[1]) not in gens)
        for m, outer, mirror in sides:
            if ("y", outer) in gens:
                yo, xo = gens[("y", outer)], gens[("x", outer)]
                gens[("x", m)] = t.generator("x", m, commutator(commutator(yo, xs[j]), yo) / d(m))
                gens[("y", m)] = t.generator("y", m, commutator(xo, commutator(gens[("x", m)], yo)))
                suffix = ""
            else:
                xm = (xs[j] - d(mirror) * gens[("x", mirror)]) / d(m)
                ym = (ys[j] - d(mirror) * gens[("y", mirror)]) / d(m)
                suffix = " (by subtraction)"
                gens[("x", m)] = t.generator("x", m, xm, suffix)
                gens[("y", m)] = t.generator("y", m, ym, suffix)
            gens[("h", m)] = t.generator("h", m, 0.5 * commutator(gens[("x", m)], gens[("y", m)]), suffix)

    if f.interior(hi):
        v = _sweep_right(t, gens, hi + 1, v)
    if f.interior(lo):
        _sweep_left(t, gens, lo - 1, v)

    missing = [m for m in range(1, n) if ("x", m) not in gens or ("y", m) not in gens]
    if missing:
        logger.warning(f"trace did not reach generators {missing}")

    report = ProofTraceReport(
        theorem=2,
        k=k,
        actuator=spec.actuator,
        x_convention=f.convention,
        identities=t.identities,
        tolerance=tol,
    )
    return _finish(report, spec, strict)


def proof_trace(spec: ChainSpec, tol: Optional[float] = None, strict: bool = False) -> ProofTraceReport:
    """Run whichever theorem's trace the spec qualifies for."""
    if spec.n < 4:
        raise PreconditionError("trace requires N >= 4")
    if thm1_condition(spec):
        return proof_trace_thm1(spec, tol=tol, strict=strict)
    return proof_trace_thm2(spec, tol=tol, strict=strict)
