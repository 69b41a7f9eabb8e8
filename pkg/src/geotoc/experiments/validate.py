"""Invariant suite run by ``geotoc validate``.

Each check returns a residual and the tolerance it must stay below.
"""

from dataclasses import dataclass

import numpy as np

from ..dynamics import IntegratorOptions, evolve_lindblad, propagate_unitary
from ..geometry import decompose_phase, invariant_matrix, pancharatnam_phase
from ..linalg import phase_distance, pure_density
from ..model import (
    KHZ,
    MHZ,
    TransmonParams,
    collapse_operators,
    h_two_level,
    single_transmon_hamiltonian,
    two_level_hamiltonian,
)
from ..synthesis import DragCorrection, synth_dynamical, synth_single_qubit_toc

CASES = (("X", np.pi / 2, 45 * MHZ), ("Y", -np.pi / 2, 40 * MHZ), ("X", np.pi / 3, 30 * MHZ))


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tol: float

    @property
    def passed(self):
        return bool(np.isfinite(self.residual) and self.residual < self.tol)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: residual {self.residual:.3e} (tol {self.tol:.0e})"


def invariant_residual(pulse, n=2001):
    """``max |dI/dt + i[H, I]|`` along the pulse, with ``dI/dt`` in closed form."""
    t = np.linspace(0.0, pulse.tau, n)
    xi = pulse.phase(t) + np.pi
    inv = invariant_matrix(pulse.chi, xi)
    h = h_two_level(pulse, t)
    rate = pulse.phase_rate(t)
    s = np.sin(pulse.chi)
    dinv = np.zeros_like(inv)
    dinv[:, 0, 1] = -0.5j * s * rate * np.exp(-1j * xi)
    dinv[:, 1, 0] = 0.5j * s * rate * np.exp(1j * xi)
    return float(np.max(np.abs(dinv + 1j * (h @ inv - inv @ h))))


def _max(values):
    return float(max(values))


def check_invariant():
    res = _max(invariant_residual(synth_single_qubit_toc(*c)) for c in CASES)
    return Check("invariant equation on TOC paths", res, 1e-5)


def _decompositions():
    for c in CASES:
        p = synth_single_qubit_toc(*c)
        yield decompose_phase(p.dressed_path(), p.delta)


def check_phase_sum():
    res = _max(abs(d.gamma - (d.gamma_g + d.gamma_d)) for d in _decompositions())
    return Check("gamma = gamma_g + gamma_d", res, 1e-9)


def check_unconventional():
    res = _max(abs(d.unconventional_residual) for d in _decompositions())
    return Check("gamma_d = [xi(0) - xi(tau)] - gamma_g", res, 1e-6)


def check_propagated_gate(opts=None):
    res = []
    for c in CASES:
        p = synth_single_qubit_toc(*c)
        u = propagate_unitary(two_level_hamiltonian(p), p.tau, opts)
        res.append(phase_distance(p.geometric_gate(), u))
    return Check("propagated U(tau) equals the latitude-path gate", _max(res), 1e-6)


def check_dynamical_composition(opts=None):
    res = []
    for axis, theta, om in CASES:
        seq = synth_dynamical(axis, theta, om)
        res.append(phase_distance(seq.target(), seq.ideal()))
        u = np.eye(2, dtype=complex)
        for seg in seq.segments:
            u = propagate_unitary(two_level_hamiltonian(seg), seg.tau, opts) @ u
        res.append(phase_distance(seq.target(), u))
    return Check("dynamical composition equals R_axis(theta)", _max(res), 1e-6)


def _lindblad_case(steps):
    pulse = synth_single_qubit_toc("X", np.pi / 2, 45 * MHZ)
    drag = DragCorrection()
    params = TransmonParams(drag.alpha1, 4 * KHZ, 4 * KHZ)
    h = single_transmon_hamiltonian(pulse, drag)
    rho0 = pure_density(np.array([1.0, 1.0, 0.0]) / np.sqrt(2))
    return evolve_lindblad(h, collapse_operators(1, params), rho0, pulse.tau, IntegratorOptions(steps=steps))


def check_lindblad_trace():
    rho = _lindblad_case(4000)
    return Check("Lindblad trace drift", abs(np.trace(rho).real - 1.0), 1e-8)


def check_lindblad_halving():
    a, b = _lindblad_case(4000), _lindblad_case(8000)
    return Check("Lindblad step-halving agreement", float(np.max(np.abs(a - b))), 1e-8)


def check_gauge_invariance():
    res = []
    for c in CASES:
        p = synth_single_qubit_toc(*c)
        path = p.dressed_path()
        h = two_level_hamiltonian(p)
        state = propagate_unitary(h, p.tau) @ path.states(+1)[0]
        base = pancharatnam_phase(path, h, state)
        for gauge in (lambda t: 0.7 * np.sin(0.3 * t), lambda t: 1.3 + 0.05 * t**2):
            other = pancharatnam_phase(path, h, state, gauge=gauge)
            res.append(abs(np.angle(np.exp(1j * (other - base)))))
    return Check("Pancharatnam phase gauge invariance", _max(res), 1e-8)


CHECKS = (
    check_invariant,
    check_phase_sum,
    check_unconventional,
    check_propagated_gate,
    check_dynamical_composition,
    check_lindblad_trace,
    check_lindblad_halving,
    check_gauge_invariance,
)


def run_all(stream=None):
    """Run every check, print one line each, return the list of results."""
    out = []
    for check in CHECKS:
        result = check()
        out.append(result)
        if stream is not None:
            print(result.line(), file=stream)
    return out
