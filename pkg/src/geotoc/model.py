"""Hamiltonians, Bessel J1 and Lindblad channels for one and two transmons.

Every builder is vectorised in time: passing an array of ``n`` times returns
an ``(n, d, d)`` stack. Frequencies are rad/ns throughout.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InvalidInputError, RangeError
from .linalg import projector
from .synthesis import drag_fields

MHZ = 2 * np.pi * 1e-3  # linear MHz -> rad/ns
KHZ = 2 * np.pi * 1e-6  # linear kHz -> rad/ns

# 3-level spin operators of the driven transmon
S_X = np.zeros((3, 3), dtype=complex)
S_Y = np.zeros((3, 3), dtype=complex)
for _m in (0, 1):
    S_X[_m + 1, _m] = S_X[_m, _m + 1] = np.sqrt(_m + 1)
    S_Y[_m + 1, _m] = 1j * np.sqrt(_m + 1)
    S_Y[_m, _m + 1] = -1j * np.sqrt(_m + 1)
S_Z = np.diag([1.0, -1.0, -3.0]).astype(complex)
del _m

LOWERING = np.array([[0, 1, 0], [0, 0, np.sqrt(2)], [0, 0, 0]], dtype=complex)
NUMBER = np.diag([0.0, 1.0, 2.0]).astype(complex)


@dataclass(frozen=True)
class TransmonParams:
    alpha: float
    kappa_minus: float = 0.0
    kappa_z: float = 0.0
    levels: int = 3

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidInputError("anharmonicity must be positive")
        if self.kappa_minus < 0 or self.kappa_z < 0:
            raise InvalidInputError("decoherence rates must be non-negative")
        if self.levels != 3:
            raise InvalidInputError("only 3-level transmons are supported")

    def scaled(self, factor):
        """Copy with both decoherence rates multiplied by ``factor``."""
        return TransmonParams(self.alpha, self.kappa_minus * factor, self.kappa_z * factor)


@dataclass(frozen=True)
class CoupledSystemParams:
    g12: float
    delta1: float
    q1: TransmonParams
    q2: TransmonParams

    def __post_init__(self):
        if not self.g12 > 0:
            raise InvalidInputError("coupling g12 must be positive")
        if abs(self.delta1) < 10 * self.g12:
            warnings.warn("qubit detuning is not much larger than the coupling", stacklevel=2)

    def scaled(self, factor):
        return CoupledSystemParams(self.g12, self.delta1, self.q1.scaled(factor), self.q2.scaled(factor))


@dataclass(frozen=True)
class TimeDependentHamiltonian:
    """Vectorised ``t -> H(t)`` together with its support and step bound.

    ``max_dt`` is the largest step an integrator may take and still resolve
    the fastest oscillation in ``func``.
    """

    func: Callable
    dim: int
    duration: float
    max_dt: Optional[float] = None

    def __call__(self, t):
        return self.func(t)


def bessel_j1(x):
    """Bessel function of the first kind, order one, by its power series.

    ``J1(x) = sum_k (-1)^k (x/2)^(2k+1) / (k! (k+1)!)``; valid for ``0 <= x <= 10``.
    """
    x = float(x)
    if not (0.0 <= x <= 10.0):
        raise RangeError(f"bessel_j1 argument {x!r} outside [0, 10]")
    half = 0.5 * x
    q = -half * half
    term = half
    terms = [term]
    k = 0
    while abs(term) > 1e-18 * max(1.0, abs(half)) or k < 2:
        k += 1
        term *= q / (k * (k + 1))
        terms.append(term)
        if k > 200:
            break
    return math.fsum(terms)


def two_level_matrix(omega, delta, phi):
    """``(1/2) [[-delta, omega e^{-i phi}], [omega e^{i phi}, delta]]`` over broadcast inputs."""
    omega, delta, phi = np.broadcast_arrays(
        np.asarray(omega, dtype=float), np.asarray(delta, dtype=float), np.asarray(phi, dtype=float)
    )
    h = np.empty(omega.shape + (2, 2), dtype=complex)
    h[..., 0, 0] = -0.5 * delta
    h[..., 1, 1] = 0.5 * delta
    h[..., 0, 1] = 0.5 * omega * np.exp(-1j * phi)
    h[..., 1, 0] = 0.5 * omega * np.exp(1j * phi)
    return h


def h_two_level(pulse, t):
    """Driven two-level Hamiltonian of a pulse (TOC pulse or dynamical segment)."""
    return two_level_matrix(pulse.omega(t), pulse.detuning(t), pulse.phase(t))


def _pulse_duration(pulse):
    return pulse.tau if hasattr(pulse, "tau") else pulse.duration


def two_level_hamiltonian(pulse):
    return TimeDependentHamiltonian(lambda t: h_two_level(pulse, t), 2, _pulse_duration(pulse))


def perturbed_two_level_hamiltonian(pulse, delta_shift, omega_shift):
    """Two-level Hamiltonian with ``Delta -> Delta + delta_shift`` and
    ``Omega(t) -> Omega(t) + omega_shift``; the phase trajectory is untouched."""

    def func(t):
        return two_level_matrix(
            pulse.omega(t) + omega_shift, pulse.detuning(t) + delta_shift, pulse.phase(t)
        )

    return TimeDependentHamiltonian(func, 2, _pulse_duration(pulse))


def h_single_transmon_3lvl(pulse, drag, t):
    """Three-level transmon Hamiltonian ``(1/2) B.S - alpha1 |2><2|``."""
    t = np.asarray(t, dtype=float)
    if drag.enabled:
        b, _ = drag_fields(pulse, drag.alpha1, t)
    else:
        phi = pulse.phase(t)
        omega = pulse.omega(t)
        b = np.stack([omega * np.cos(phi), omega * np.sin(phi), -pulse.delta * np.ones_like(t)], axis=-1)
    h = 0.5 * (b[..., 0, None, None] * S_X + b[..., 1, None, None] * S_Y + b[..., 2, None, None] * S_Z)
    h[..., 2, 2] -= drag.alpha1
    return h


def single_transmon_hamiltonian(pulse, drag):
    return TimeDependentHamiltonian(lambda t: h_single_transmon_3lvl(pulse, drag, t), 3, pulse.tau)


def _index(m, n):
    return 3 * m + n


def h_coupled_transmons(drive, params, t):
    """Interaction-picture Hamiltonian of two parametrically coupled transmons.

    Basis ``|m>_1 |n>_2`` with index ``3m + n``. Only the ``|01>-|10>``,
    ``|11>-|20>`` and ``|02>-|11>`` exchange terms are present.
    """
    t = np.asarray(t, dtype=float)
    g, d1 = params.g12, params.delta1
    a1, a2 = params.q1.alpha, params.q2.alpha
    mod = np.exp(-1j * drive.beta * np.sin(drive.nu * t + drive.phase(t)))
    h = np.zeros(t.shape + (9, 9), dtype=complex)
    couplings = (
        (_index(0, 1), _index(1, 0), 1.0, d1),
        (_index(1, 1), _index(2, 0), np.sqrt(2), d1 + a1),
        (_index(0, 2), _index(1, 1), np.sqrt(2), d1 - a2),
    )
    for row, col, weight, freq in couplings:
        amp = g * weight * np.exp(1j * freq * t) * mod
        h[..., row, col] = amp
        h[..., col, row] = amp.conj()
    return h


def coupled_transmon_hamiltonian(drive, params):
    # the modulation carrier must be resolved: dt <= 2 pi / (40 nu)
    max_dt = 2 * np.pi / (40 * abs(drive.nu)) if drive.nu else None
    return TimeDependentHamiltonian(
        lambda t: h_coupled_transmons(drive, params, t), 9, drive.duration, max_dt
    )


def h_effective_two_qubit(drive, t):
    """Effective two-level Hamiltonian on ``{|01>, |10>}``."""
    t = np.asarray(t, dtype=float)
    return two_level_matrix(drive.g_eff * np.ones_like(t), drive.delta_t, drive.phase(t))


def effective_two_qubit_hamiltonian(drive):
    return TimeDependentHamiltonian(lambda t: h_effective_two_qubit(drive, t), 2, drive.duration)


def effective_frame(drive, t):
    """Diagonal 9x9 frame change from the interaction picture to the effective one.

    ``R(t) = exp(i delta_t t (n1 - n2) / 2)``; in the ``{|01>, |10>}`` block it
    removes the ``e^{-i delta_t t}`` sideband carrier and leaves ``|00>`` and
    ``|11>`` untouched. ``rho_eff = R(t)^dagger rho R(t)``.
    """
    n1 = np.repeat(np.arange(3), 3)
    n2 = np.tile(np.arange(3), 3)
    return np.diag(np.exp(0.5j * drive.delta_t * float(t) * (n1 - n2)))


def collapse_operators(n_qubits, params):
    """Lindblad channels as ``(operator, rate)`` pairs with rate ``kappa/2``.

    Parameters
    ----------
    n_qubits : {1, 2}
    params : TransmonParams, CoupledSystemParams or sequence of TransmonParams
    """
    if isinstance(params, CoupledSystemParams):
        qubits = [params.q1, params.q2]
    elif isinstance(params, TransmonParams):
        qubits = [params]
    else:
        qubits = list(params)
    if n_qubits not in (1, 2) or len(qubits) != n_qubits:
        raise InvalidInputError("need one TransmonParams per transmon (1 or 2 transmons)")
    eye = np.eye(3, dtype=complex)
    out = []
    for i, q in enumerate(qubits):
        for op, rate in ((LOWERING, q.kappa_minus), (NUMBER, q.kappa_z)):
            if n_qubits == 2:
                op = np.kron(op, eye) if i == 0 else np.kron(eye, op)
            out.append((op.copy(), 0.5 * rate))
    return out


def embed_qubit_state(state, levels=3):
    """Pad a two-level state vector with zeros for the higher levels."""
    v = np.zeros(levels, dtype=complex)
    v[:2] = state
    return v


COMPUTATIONAL_1Q = [0, 1]
COMPUTATIONAL_2Q = [_index(0, 0), _index(0, 1), _index(1, 0), _index(1, 1)]


def leakage_projector(dim, computational):
    p = np.zeros((dim, dim), dtype=complex)
    for i in computational:
        p += projector(dim, i)
    return np.eye(dim) - p
