#!/usr/bin/env python3

import numpy as np
import pytest
from pydantic import ValidationError

from chaincontrol.chain import (
    build_actuator,
    build_drift,
    diagonal_part,
    global_coupling,
    graph_criterion,
    heisenberg_energies,
    heisenberg_spec,
    is_connected,
    oscillator_spec,
    reflect,
    transition_frequency,
)
from chaincontrol.errors import ChainModelError
from chaincontrol.models import ChainSpec


def test_two_level_drift():
    spec = ChainSpec(n=2, couplings=[1.0], energies=[0.0, 0.0], actuator=1)
    np.testing.assert_array_equal(build_drift(spec), [[0, 1], [1, 0]])


def test_three_level_drift_places_entries_directly():
    spec = ChainSpec(n=3, couplings=[1, 2], energies=[0, 1, 2], actuator=1)
    np.testing.assert_array_equal(build_drift(spec), [[0, 1, 0], [1, 1, 2], [0, 2, 2]])


def test_uniform_heisenberg_four():
    spec = heisenberg_spec(4, [1, 1, 1], actuator=1)
    assert spec.energies == pytest.approx((0.5, -0.5, -0.5, 0.5))
    drift = build_drift(spec)
    np.testing.assert_allclose(np.diag(drift).real, [0.5, -0.5, -0.5, 0.5])
    np.testing.assert_allclose(np.diag(drift, 1).real, [1, 1, 1])
    assert spec.f_off == 0.0
    assert spec.f_on == -1.0


def test_heisenberg_two_level_energies():
    assert heisenberg_energies([1.0]) == pytest.approx([-0.5, -0.5])


def test_heisenberg_wrong_length():
    with pytest.raises(ChainModelError):
        heisenberg_spec(4, [1, 1], actuator=1)


@pytest.mark.parametrize("r, entries", [(1, (0, 1)), (3, (2, 3))])
def test_actuator_entries(r, entries):
    spec = heisenberg_spec(4, [1, 1, 1], actuator=r)
    a = build_actuator(spec)
    i, j = entries
    assert a[i, j] == 1 and a[j, i] == 1
    assert np.count_nonzero(a) == 2
    assert np.trace(a) == 0
    assert np.linalg.norm(a) == pytest.approx(np.sqrt(2))


def test_two_level_actuator_is_pauli_x():
    spec = heisenberg_spec(2, [0.7], actuator=1)
    np.testing.assert_array_equal(build_actuator(spec), [[0, 1], [1, 0]])


def test_actuator_out_of_range():
    spec = heisenberg_spec(4, [1, 1, 1], actuator=1)
    with pytest.raises(ChainModelError):
        build_actuator(spec, actuator=4)


def test_spec_rejects_bad_shapes():
    with pytest.raises(ValueError):
        ChainSpec(n=3, couplings=[1], energies=[0, 0, 0], actuator=1)
    with pytest.raises(ValueError):
        ChainSpec(n=3, couplings=[1, 1], energies=[0, 0, 0], actuator=3)
    with pytest.raises(ValueError):
        ChainSpec(n=3, couplings=[1, float("nan")], energies=[0, 0, 0], actuator=1)


def test_spec_validation_surfaces_as_validation_error():
    with pytest.raises(ValidationError, match="expected 2 couplings") as excinfo:
        ChainSpec(n=3, couplings=[1], energies=[0, 0, 0], actuator=1)
    assert isinstance(excinfo.value, ValueError)
    assert not isinstance(excinfo.value, ChainModelError)
    with pytest.raises(ChainModelError):
        heisenberg_spec(4, [1, 1], actuator=1)


def test_transition_frequencies():
    spec = heisenberg_spec(4, [1, 1, 1], actuator=1)
    assert transition_frequency(spec, 2, 2) == 0
    assert transition_frequency(spec, 1, 2) == pytest.approx(-1.0)
    assert transition_frequency(heisenberg_spec(4, [2, 1, 3], actuator=2), 2, 3) == pytest.approx(-1.0)
    with pytest.raises(ChainModelError):
        transition_frequency(spec, 0, 2)


def test_connectivity_threshold():
    assert is_connected(heisenberg_spec(4, [1, 1, 1], actuator=1))
    assert not is_connected(heisenberg_spec(4, [1, 0, 1], actuator=1))
    assert not is_connected(heisenberg_spec(3, [1e-15, 1], actuator=2))


def test_random_chains_drift_hermitian_tridiagonal():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(2, 9))
        d = rng.uniform(-2, 2, n - 1)
        r = int(rng.integers(1, n))
        spec = heisenberg_spec(n, d, actuator=r)
        drift = build_drift(spec)
        np.testing.assert_array_equal(drift, drift.conj().T)
        assert np.count_nonzero(np.triu(drift, 2)) == 0

        # omega_r = d_{r-1} - d_{r+1} on Heisenberg chains
        expected = spec.d(r - 1) - spec.d(r + 1)
        assert transition_frequency(spec, r, r + 1) == pytest.approx(expected, abs=1e-12)


def test_uniform_heisenberg_energies_are_mirror_symmetric():
    rng = np.random.default_rng(11)
    for n in range(2, 10):
        d = float(rng.uniform(0.1, 3))
        e = heisenberg_energies([d] * (n - 1))
        np.testing.assert_allclose(e, e[::-1], atol=1e-12)


def test_reflect_moves_actuator():
    spec = ChainSpec(n=5, couplings=[1, 2, 3, 4], energies=[0, 1, 2, 3, 4], actuator=1)
    mirrored = reflect(spec)
    assert mirrored.actuator == 4
    assert mirrored.couplings == (4, 3, 2, 1)
    assert mirrored.energies == (4, 3, 2, 1, 0)
    assert reflect(mirrored) == spec


def test_global_field_parts():
    spec = oscillator_spec(4)
    np.testing.assert_allclose(np.diag(diagonal_part(spec)).real, [0, 1, 2, 3])
    np.testing.assert_allclose(np.diag(global_coupling(spec), 1).real, [1, np.sqrt(2), np.sqrt(3)])


def test_graph_criterion():
    # Distinct adjacent frequencies on a connected chain.
    spec = ChainSpec(n=4, couplings=[1, 1, 1], energies=[0, 1, 3, 6], actuator=1)
    assert graph_criterion(spec)
    # Equally spaced oscillator levels are degenerate.
    assert not graph_criterion(oscillator_spec(4))
    assert not graph_criterion(ChainSpec(n=3, couplings=[1, 0], energies=[0, 1, 3], actuator=1))
