from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from geotoc.dynamics import IntegratorOptions
from geotoc.errors import ConvergenceError, InvalidInputError
from geotoc.linalg import rx, ry
from geotoc.metrics import (
    FidelityReport,
    RobustnessGrid,
    avg_gate_fidelity_1q,
    avg_gate_fidelity_2q,
    leakage,
    perturbed_gate,
    perturbed_gate_grid,
    single_qubit_inputs,
    state_grid_size,
    trace_fidelity,
)
from geotoc.model import KHZ, MHZ, CoupledSystemParams, TransmonParams, perturbed_two_level_hamiltonian
from geotoc.synthesis import DragCorrection, synth_dynamical, synth_single_qubit_toc, synth_two_qubit_toc

KAPPA = 4 * KHZ


def ivp_gate(h, duration):
    def rhs(t, y):
        return (-1j * h(t) @ y.reshape(2, 2)).ravel()

    sol = solve_ivp(rhs, (0, duration), np.eye(2, dtype=complex).ravel(), method="DOP853", rtol=1e-12, atol=1e-13)
    return sol.y[:, -1].reshape(2, 2)


def test_trace_fidelity_examples():
    u = rx(np.pi / 2)
    assert trace_fidelity(u, u) == pytest.approx(1.0, abs=1e-15)
    assert trace_fidelity(u, np.exp(0.7j) * u) == pytest.approx(1.0, abs=1e-15)
    assert trace_fidelity(u, rx(np.pi / 2 + 0.01)) == pytest.approx(np.cos(0.005), abs=1e-12)
    with pytest.raises(InvalidInputError):
        trace_fidelity(np.eye(2), np.eye(3))


@given(st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi))
def test_trace_fidelity_global_phase_invariant(a, b, theta):
    u, v = rx(theta), ry(0.3) @ rx(theta)
    f = trace_fidelity(u, v)
    assert trace_fidelity(np.exp(1j * a) * u, np.exp(1j * b) * v) == pytest.approx(f, abs=1e-14)
    assert 0.0 <= f <= 1.0 + 1e-12


def test_perturbed_gate_null_and_range():
    p = synth_single_qubit_toc("X", np.pi / 2, 45 * MHZ)
    assert abs(trace_fidelity(p.target(), perturbed_gate(p, 0.0, 0.0)) - 1) < 1e-9
    with pytest.raises(InvalidInputError):
        perturbed_gate(p, 0.3, 0.0)
    with pytest.raises(InvalidInputError):
        perturbed_gate_grid(p, [0.0], [-0.25])


def test_perturbed_gate_matches_independent_integrator():
    p = synth_single_qubit_toc("X", np.pi / 2, 45 * MHZ)
    om = p.omega_max
    ref = ivp_gate(perturbed_two_level_hamiltonian(p, 0.1 * om, 0.0), p.tau)
    ours = perturbed_gate(p, 0.1, 0.0)
    assert abs(trace_fidelity(p.target(), ours) - trace_fidelity(p.target(), ref)) < 1e-8
    assert np.max(np.abs(ours - ref)) < 1e-8


def test_perturbed_grid_matches_pointwise():
    for pulse in (synth_single_qubit_toc("Y", np.pi / 2, 45 * MHZ), synth_dynamical("X", np.pi / 2, 45 * MHZ)):
        grid = perturbed_gate_grid(pulse, [-0.1, 0.05], [0.0, 0.1])
        assert grid.shape == (2, 2, 2, 2)
        assert np.max(np.abs(grid[1, 1] - perturbed_gate(pulse, 0.05, 0.1))) < 1e-13


def test_geometric_beats_dynamical_at_corner():
    g = synth_single_qubit_toc("X", np.pi / 2, 45 * MHZ)
    d = synth_dynamical("X", np.pi / 2, 45 * MHZ)
    fg = trace_fidelity(g.target(), perturbed_gate(g, 0.1, 0.1))
    fd = trace_fidelity(d.target(), perturbed_gate(d, 0.1, 0.1))
    assert fg > fd


def test_robustness_grid_shape_and_lookup():
    with pytest.raises(InvalidInputError):
        RobustnessGrid(np.zeros(2), np.zeros(3), np.zeros((3, 2)), "geometric", "X", 1.0)
    g = RobustnessGrid(np.array([-0.1, 0.0]), np.array([0.0, 0.1]), np.array([[0.5, 0.6], [1.0, 0.9]]),
                       "geometric", "X", 1.0)
    assert g.at(0.0, 0.0) == 1.0 and g.mean() == pytest.approx(0.75)


def test_fidelity_report_validation():
    with pytest.raises(InvalidInputError):
        FidelityReport(1.1, "trace", 1)
    with pytest.raises(InvalidInputError):
        FidelityReport(0.5, "haar", 1)


def test_single_qubit_inputs():
    angles, states = single_qubit_inputs(1001)
    assert angles[0] == 0.0 and angles[-1] == pytest.approx(2 * np.pi)
    assert np.allclose(np.linalg.norm(states, axis=1), 1)
    assert angles[1] == pytest.approx(2 * np.pi / 1000)
    with pytest.raises(InvalidInputError):
        single_qubit_inputs(1)


def test_state_grid_size():
    assert state_grid_size(10001) == 101
    assert state_grid_size(441) == 21
    assert state_grid_size(442) == 22


def test_avg_fidelity_1q_closed_system_near_one():
    p = synth_single_qubit_toc("X", np.pi / 2, 45 * MHZ)
    rep = avg_gate_fidelity_1q(p, DragCorrection(), TransmonParams(220 * MHZ), n_states=201)
    assert 0.9999 <= rep.value <= 1.0
    assert rep.metadata["leakage_max"] < 1e-4
    assert rep.kind == "averaged-1q" and rep.n_states == 201


def test_avg_fidelity_1q_ideal_two_level_limit():
    # a large anharmonicity freezes the third level out; the finer step keeps RK4 stable
    p = synth_single_qubit_toc("Y", -np.pi / 2, 40 * MHZ)
    opts = IntegratorOptions(steps=20000)
    rep = avg_gate_fidelity_1q(p, DragCorrection(False, 1e3), TransmonParams(1e3), n_states=101, opts=opts)
    assert abs(rep.value - 1.0) < 1e-8


def test_unstable_step_is_reported():
    p = synth_single_qubit_toc("Y", -np.pi / 2, 40 * MHZ)
    with np.errstate(all="ignore"), pytest.raises(ConvergenceError):
        avg_gate_fidelity_1q(p, DragCorrection(False, 1e6), TransmonParams(1e6), n_states=11)


def test_avg_fidelity_1q_monotone_in_decoherence():
    p = synth_single_qubit_toc("X", np.pi / 2, 45 * MHZ)
    q = TransmonParams(220 * MHZ, KAPPA, KAPPA)
    f1 = avg_gate_fidelity_1q(p, DragCorrection(), q, n_states=101).value
    f2 = avg_gate_fidelity_1q(p, DragCorrection(), q.scaled(2.0), n_states=101).value
    assert f2 < f1


def test_avg_fidelity_1q_rejects_other_pulses():
    with pytest.raises(InvalidInputError):
        avg_gate_fidelity_1q(synth_dynamical("X", 1.0, 0.3), DragCorrection(), TransmonParams(1.0))


def test_avg_fidelity_1q_is_batch_independent():
    p = synth_single_qubit_toc("X", np.pi / 2, 45 * MHZ)
    q = TransmonParams(220 * MHZ, KAPPA, KAPPA)
    a = avg_gate_fidelity_1q(p, DragCorrection(), q, n_states=101)
    b = avg_gate_fidelity_1q(p, DragCorrection(), q, n_states=101)
    assert a.value == b.value


@pytest.fixture(scope="module")
def coupled():
    q1 = TransmonParams(220 * MHZ, KAPPA, KAPPA)
    q2 = TransmonParams(180 * MHZ, KAPPA, KAPPA)
    return CoupledSystemParams(8 * MHZ, 320 * MHZ, q1, q2)


def test_avg_fidelity_2q_small_grid(coupled):
    d = synth_two_qubit_toc(np.pi / 2, np.pi / 2, 8 * MHZ, 1.3, 320 * MHZ)
    rep = avg_gate_fidelity_2q(d, coupled, grid=9)
    assert rep.kind == "averaged-2q" and rep.n_states == 81
    assert 0.997 < rep.value < 1.0
    worse = avg_gate_fidelity_2q(d, coupled.scaled(2.0), grid=9)
    assert worse.value < rep.value


def test_avg_fidelity_2q_requires_coupling(coupled):
    d = synth_two_qubit_toc(np.pi / 2, np.pi / 2, 8 * MHZ, 1.3, 320 * MHZ)
    weak = replace(coupled.scaled(0.0), g12=1e-9)
    rep = avg_gate_fidelity_2q(d, weak, grid=9)
    assert rep.value < 0.9
    with pytest.raises(InvalidInputError):
        avg_gate_fidelity_2q(d, coupled, grid=1)


def test_leakage_examples():
    assert leakage(np.diag([0.5, 0.5, 0.0]), [0, 1]) == pytest.approx(0.0)
    assert leakage(np.diag([0.0, 0.0, 1.0]), [0, 1]) == pytest.approx(1.0)
    with pytest.raises(InvalidInputError):
        leakage(np.eye(3) / 3, [0, 3])
