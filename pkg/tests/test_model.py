import warnings
from dataclasses import replace

import numpy as np
import pytest
import scipy.special
from hypothesis import given
from hypothesis import strategies as st

from geotoc.dynamics import propagate_unitary
from geotoc.errors import InvalidInputError, RangeError
from geotoc.linalg import phase_distance
from geotoc.model import (
    COMPUTATIONAL_2Q,
    LOWERING,
    MHZ,
    NUMBER,
    S_Z,
    CoupledSystemParams,
    TransmonParams,
    bessel_j1,
    collapse_operators,
    coupled_transmon_hamiltonian,
    effective_frame,
    effective_two_qubit_hamiltonian,
    embed_qubit_state,
    h_coupled_transmons,
    h_effective_two_qubit,
    h_single_transmon_3lvl,
    h_two_level,
    leakage_projector,
    perturbed_two_level_hamiltonian,
    two_level_matrix,
)
from geotoc.synthesis import DragCorrection, synth_dynamical, synth_single_qubit_toc, synth_two_qubit_toc

# scipy.special.j1, frozen
J1_TABLE = [
    (0.0, 0.0),
    (0.5, 0.24226845767487387),
    (1.0, 0.44005058574493355),
    (1.3, 0.5220232474146604),
    (2.0, 0.5767248077568734),
    (5.0, -0.3275791375914653),
    (7.5, 0.13524842757970554),
    (10.0, 0.04347274616886141),
]


@pytest.fixture
def x_pulse():
    return synth_single_qubit_toc("X", np.pi / 2, 45 * MHZ)


@pytest.fixture
def coupled():
    q1 = TransmonParams(220 * MHZ, 4e-6 * 2 * np.pi, 4e-6 * 2 * np.pi)
    q2 = TransmonParams(180 * MHZ, 4e-6 * 2 * np.pi, 4e-6 * 2 * np.pi)
    return CoupledSystemParams(8 * MHZ, 320 * MHZ, q1, q2)


@pytest.fixture
def drive():
    return synth_two_qubit_toc(np.pi / 2, np.pi / 2, 8 * MHZ, 1.3, 320 * MHZ)


@pytest.mark.parametrize("x,expected", J1_TABLE)
def test_bessel_j1_table(x, expected):
    assert abs(bessel_j1(x) - expected) < 1e-12


@given(st.floats(0.0, 10.0))
def test_bessel_j1_matches_scipy(x):
    assert abs(bessel_j1(x) - scipy.special.j1(x)) < 1e-12


def test_bessel_j1_first_zero_and_range():
    assert abs(bessel_j1(3.8317)) < 1e-4
    with pytest.raises(RangeError):
        bessel_j1(-0.1)
    with pytest.raises(RangeError):
        bessel_j1(10.5)


def test_params_validation():
    with pytest.raises(InvalidInputError):
        TransmonParams(0.0)
    with pytest.raises(InvalidInputError):
        TransmonParams(1.0, kappa_minus=-1e-6)
    with pytest.raises(InvalidInputError):
        TransmonParams(1.0, levels=4)
    q = TransmonParams(1.0)
    with pytest.warns(UserWarning):
        CoupledSystemParams(0.1, 0.5, q, q)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        CoupledSystemParams(0.05, 2.0, q, q)
    assert TransmonParams(1.0, 2e-5, 3e-5).scaled(2.0).kappa_z == pytest.approx(6e-5)


def test_two_level_examples(x_pulse):
    assert np.allclose(two_level_matrix(0.0, 0.4, 1.0), np.diag([-0.2, 0.2]))
    assert np.allclose(two_level_matrix(0.6, 0.0, 0.0), [[0, 0.3], [0.3, 0]])
    h = h_two_level(x_pulse, x_pulse.tau / 2)
    phi = x_pulse.phase(x_pulse.tau / 2)
    assert np.isclose(h[1, 0], 0.5 * x_pulse.omega_max * np.exp(1j * phi))
    assert np.isclose(h[1, 1], 0.5 * x_pulse.delta)


def test_perturbed_hamiltonian_shifts(x_pulse):
    t = np.linspace(0.5, x_pulse.tau - 0.5, 7)
    h0 = h_two_level(x_pulse, t)
    h1 = perturbed_two_level_hamiltonian(x_pulse, 0.1, 0.2)(t)
    assert np.allclose(h1[:, 1, 1] - h0[:, 1, 1], 0.05)
    assert np.allclose(np.abs(h1[:, 1, 0]) - np.abs(h0[:, 1, 0]), 0.1)
    assert np.allclose(np.angle(h1[:, 1, 0]), np.angle(h0[:, 1, 0]))


def _random_times(rng, duration, n=100):
    return np.sort(rng.uniform(0, duration, n))


def test_all_builders_hermitian(rng, x_pulse, drive, coupled):
    checks = [
        (h_two_level(x_pulse, _random_times(rng, x_pulse.tau))),
        (h_single_transmon_3lvl(x_pulse, DragCorrection(), _random_times(rng, x_pulse.tau))),
        (h_single_transmon_3lvl(x_pulse, DragCorrection(False), _random_times(rng, x_pulse.tau))),
        (h_coupled_transmons(drive, coupled, _random_times(rng, drive.duration))),
        (h_effective_two_qubit(drive, _random_times(rng, drive.duration))),
    ]
    seg = synth_dynamical("Y", np.pi / 2, 40 * MHZ).segments[0]
    checks.append(h_two_level(seg, _random_times(rng, seg.tau)))
    for h in checks:
        assert h.shape[0] == 100
        assert np.max(np.abs(h - h.conj().swapaxes(-1, -2))) < 1e-12


def test_three_level_spectrum_without_drive(x_pulse):
    h = h_single_transmon_3lvl(x_pulse, DragCorrection(False), 0.0)
    d = -x_pulse.delta
    assert np.allclose(h, np.diag([d / 2, -d / 2, -3 * d / 2 - 220 * MHZ]), atol=1e-15)
    assert np.allclose(np.diag(S_Z), [1, -1, -3])


def test_three_level_restriction_and_leakage_coupling(x_pulse):
    t = np.linspace(0.1, x_pulse.tau - 0.1, 9)
    h3 = h_single_transmon_3lvl(x_pulse, DragCorrection(False), t)
    assert np.allclose(h3[:, :2, :2], h_two_level(x_pulse, t), atol=1e-15)
    assert np.allclose(np.abs(h3[:, 2, 1]), np.sqrt(2) * x_pulse.omega(t) / 2)


def test_drag_changes_only_transverse_field(x_pulse):
    t = np.linspace(0, x_pulse.tau, 11)
    on = h_single_transmon_3lvl(x_pulse, DragCorrection(True), t)
    off = h_single_transmon_3lvl(x_pulse, DragCorrection(False), t)
    assert np.allclose(np.diagonal(on, axis1=1, axis2=2), np.diagonal(off, axis1=1, axis2=2))
    assert np.max(np.abs(on - off)) > 1e-3


def test_coupled_examples(drive, coupled):
    assert np.max(np.abs(h_coupled_transmons(drive, coupled, 3.0))) > 0
    zero_g = replace(coupled, g12=1e-300)
    assert np.max(np.abs(h_coupled_transmons(drive, zero_g, 3.0))) < 1e-299
    h0 = h_coupled_transmons(drive, coupled, 0.0)
    # <01|H|10> at t=0
    assert np.isclose(h0[1, 3], coupled.g12 * np.exp(-1j * drive.beta * np.sin(drive.varphi0)))
    no_mod = replace(drive, beta=0.0)
    t = 2.7
    h = h_coupled_transmons(no_mod, coupled, t)
    assert np.isclose(h[1, 3], coupled.g12 * np.exp(1j * coupled.delta1 * t))
    allowed = {(1, 3), (4, 6), (2, 4)}
    nz = {(i, j) for i, j in zip(*np.nonzero(np.abs(h) > 0)) if i < j}
    assert nz == allowed


def test_coupled_frobenius_norm_is_constant(rng, drive, coupled):
    h = h_coupled_transmons(drive, coupled, _random_times(rng, drive.duration, 50))
    norms = np.linalg.norm(h, axis=(1, 2))
    assert np.ptp(norms) < 1e-12 * norms[0]
    assert coupled_transmon_hamiltonian(drive, coupled).max_dt == pytest.approx(2 * np.pi / (40 * drive.nu))


def test_effective_propagation_reproduces_target_block(drive):
    u = propagate_unitary(effective_two_qubit_hamiltonian(drive), drive.duration)
    assert phase_distance(drive.target()[1:3, 1:3], u) < 1e-6
    assert np.max(np.abs(drive.target()[1:3, 1:3] - u)) < 1e-6


def test_rotating_wave_consistency(drive, coupled):
    full = coupled_transmon_hamiltonian(drive, coupled)
    eff = effective_two_qubit_hamiltonian(drive)
    block = [COMPUTATIONAL_2Q[1], COMPUTATIONAL_2Q[2]]
    worst = 0.0
    for t in np.linspace(drive.duration / 6, drive.duration, 6):
        uf = effective_frame(drive, t).conj().T @ propagate_unitary(full, t)
        ue = propagate_unitary(eff, t)
        worst = max(worst, np.max(np.abs(uf[np.ix_(block, block)] - ue)))
    assert worst < 0.05


def test_effective_frame_leaves_diagonal_block():
    d = synth_two_qubit_toc(np.pi / 2, 0.0, 8 * MHZ, 1.3, 320 * MHZ)
    r = effective_frame(d, 5.0)
    assert r[0, 0] == 1 and r[4, 4] == 1
    assert np.isclose(r[3, 3] * r[1, 1].conj(), np.exp(1j * d.delta_t * 5.0))


def test_collapse_operators(coupled):
    ops = collapse_operators(1, TransmonParams(1.0, 2e-5, 3e-5))
    assert len(ops) == 2 and all(op.shape == (3, 3) for op, _ in ops)
    assert ops[0][1] == pytest.approx(1e-5) and ops[1][1] == pytest.approx(1.5e-5)
    assert np.allclose(LOWERING @ [0, 0, 1], [0, np.sqrt(2), 0])
    assert np.allclose(NUMBER, np.diag([0, 1, 2]))
    ops2 = collapse_operators(2, coupled)
    assert len(ops2) == 4 and all(op.shape == (9, 9) for op, _ in ops2)
    assert np.allclose(ops2[2][0], np.kron(np.eye(3), LOWERING))
    assert np.allclose(ops2[0][0], np.kron(LOWERING, np.eye(3)))
    with pytest.raises(InvalidInputError):
        collapse_operators(2, TransmonParams(1.0))


def test_embedding_helpers():
    assert np.allclose(embed_qubit_state([0.6, 0.8]), [0.6, 0.8, 0])
    p = leakage_projector(3, [0, 1])
    assert np.allclose(p, np.diag([0, 0, 1]))
