#!/usr/bin/env python3

import numpy as np
import pytest

from chaincontrol.chain import build_drift, heisenberg_spec
from chaincontrol.errors import ChainModelError, NumericError, OptimizationError, PreconditionError
from chaincontrol.models import GATE_NAMES, SimplexOptions, SwitchSequence
from chaincontrol.propagate import expm_hermitian, gate_error
from chaincontrol.synth import (
    GateSynthesizer,
    build_target,
    custom_target,
    nelder_mead,
    synthesize_gate,
    target_error_matrix,
    verify_sequence,
)

SMALL = SimplexOptions(scale=0.5, max_evaluations=200)


@pytest.fixture
def heis4():
    return heisenberg_spec(4, [1, 1, 1], actuator=1)


def test_target_closed_forms():
    np.testing.assert_array_equal(build_target("II").matrix, np.eye(4))
    cnot = build_target("CNOT").matrix
    expected = np.zeros((4, 4), dtype=np.complex128)
    expected[0, 0] = expected[1, 1] = 1
    expected[2, 3] = expected[3, 2] = 1
    np.testing.assert_allclose(cnot, np.exp(-1j * np.pi / 4) * expected)
    a, b = np.exp(-1j * np.pi / 8), np.exp(1j * np.pi / 8)
    np.testing.assert_allclose(build_target("TI").matrix, np.diag([a, a, b, b]))
    np.testing.assert_allclose(build_target("IT").matrix, np.diag([a, b, a, b]))


def test_targets_are_distinct():
    errors = target_error_matrix()
    assert errors.shape == (len(GATE_NAMES), len(GATE_NAMES))
    np.testing.assert_allclose(np.diag(errors), 0.0, atol=1e-12)
    off = errors[~np.eye(len(GATE_NAMES), dtype=bool)]
    assert off.min() > 0.05


def test_unknown_and_invalid_targets():
    with pytest.raises(PreconditionError):
        build_target("SWAP")
    with pytest.raises(NumericError):
        custom_target(np.array([[1, 1], [0, 1]]))


def test_simplex_quadratic():
    opts = SimplexOptions(scale=0.5, max_evaluations=5000)
    x, f, nfev = nelder_mead(lambda x: float(np.sum((x - 1.0) ** 2)), np.zeros(5), opts)
    np.testing.assert_allclose(x, np.ones(5), atol=1e-6)
    assert f <= 1e-11


def test_simplex_rosenbrock():
    def rosen(x):
        return float(100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2)

    x, f, nfev = nelder_mead(rosen, [-1.2, 1.0], SimplexOptions(max_evaluations=1000))
    assert f <= 1e-8
    np.testing.assert_allclose(x, [1.0, 1.0], atol=1e-3)


def test_simplex_constant_objective_uses_the_budget():
    # A flat objective only stops through xatol, so switch the size tests off.
    opts = SimplexOptions(max_evaluations=100, xatol=0.0, fatol=0.0)
    x, f, nfev = nelder_mead(lambda x: 3.5, [0.1, 0.2, 0.3], opts)
    assert f == 3.5
    # scipy may finish the iteration in progress
    assert 100 <= nfev <= 100 + 5


def test_simplex_stops_at_target():
    objective = lambda x: float(np.sum(x ** 2))  # noqa: E731
    full = nelder_mead(objective, [2.0, -1.0], SimplexOptions(max_evaluations=2000))
    early = nelder_mead(objective, [2.0, -1.0], SimplexOptions(max_evaluations=2000, target=1e-3))
    assert early[1] <= 1e-3
    assert early[2] < full[2]


def test_simplex_rejects_non_finite_objective():
    with pytest.raises(OptimizationError):
        nelder_mead(lambda x: float("nan"), [1.0, 2.0])
    with pytest.raises(PreconditionError):
        nelder_mead(lambda x: 0.0, [])


def test_synthesis_preconditions(heis4):
    target = build_target("II")
    with pytest.raises(PreconditionError):
        synthesize_gate(heis4, target, k_switches=0, restarts=1)
    with pytest.raises(PreconditionError):
        synthesize_gate(heis4, target, k_switches=2, restarts=0)
    three = heisenberg_spec(3, [1, 1], actuator=1)
    with pytest.raises(ChainModelError):
        synthesize_gate(three, target, k_switches=2, restarts=1)


def test_synthesis_is_deterministic(heis4):
    target = build_target("HadI")
    kwargs = dict(k_switches=4, restarts=3, seed=11, target_error=0.0, options=SMALL)
    a = synthesize_gate(heis4, target, **kwargs)
    b = synthesize_gate(heis4, target, **kwargs)
    assert a.sequence.durations == b.sequence.durations
    assert a.error == b.error
    assert a.restarts_used == 3
    assert len(a.restart_errors) == 3
    assert a.error == pytest.approx(min(a.restart_errors), abs=1e-12)
    assert verify_sequence(heis4, a.sequence, target) == pytest.approx(a.error, abs=1e-12)


def test_concurrency_does_not_change_the_result(heis4):
    target = build_target("IT")
    serial = GateSynthesizer(heis4, target, 3, options=SMALL).run(4, seed=2, concurrency=1)
    threaded = GateSynthesizer(heis4, target, 3, options=SMALL).run(4, seed=2, concurrency=3)
    assert serial.sequence.durations == threaded.sequence.durations
    assert serial.restart_errors == threaded.restart_errors


def test_early_stop_on_reached_target(heis4):
    result = synthesize_gate(heis4, build_target("II"), k_switches=2, restarts=10, seed=0,
                             target_error=1.0, options=SMALL, concurrency=1)
    assert result.restarts_used == 1


def test_degenerate_switch_depends_only_on_total_time(heis4):
    spec = heis4.model_copy(update={"f_on": heis4.f_off})
    result = synthesize_gate(spec, build_target("II"), k_switches=3, restarts=2, seed=4,
                             target_error=1e-6, options=SMALL)
    collapsed = gate_error(expm_hermitian(build_drift(spec), result.duration), np.eye(4))
    assert result.error == pytest.approx(collapsed, abs=1e-10)


def test_zero_sequence_is_identity(heis4):
    seq = SwitchSequence(durations=[0.0] * 4)
    assert verify_sequence(heis4, seq, build_target("II")) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.slow
def test_hadamard_reaches_desk_accuracy(heis4):
    result = synthesize_gate(heis4, build_target("HadI"), k_switches=20, restarts=50, seed=0,
                             target_error=1e-3, options=SimplexOptions(max_evaluations=2000))
    assert result.error <= 1e-3


def test_most_gates_reach_desk_accuracy(heis4):
    reached = {}
    for gate in GATE_NAMES:
        result = synthesize_gate(heis4, build_target(gate), k_switches=20, restarts=50, seed=0,
                                 target_error=1e-3, options=SimplexOptions(max_evaluations=2000))
        reached[gate] = result.error <= 1e-3
    assert reached["CNOT"], reached
    assert sum(reached.values()) >= 4, reached
