"""Figures of merit: trace fidelity, state-averaged gate fidelity, leakage."""

import math
from dataclasses import dataclass, field

import numpy as np

from . import model
from .dynamics import (
    IntegratorOptions,
    exponential_nodes,
    exponential_product,
    lindblad_map,
    propagate_unitary,
    time_grid,
)
from .errors import InvalidInputError
from .linalg import as_matrix
from .synthesis import DynamicalPulseSequence, TocSingleQubitPulse

FIDELITY_KINDS = ("trace", "averaged-1q", "averaged-2q")


@dataclass(frozen=True)
class FidelityReport:
    value: float
    kind: str
    n_states: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FIDELITY_KINDS:
            raise InvalidInputError(f"unknown fidelity kind {self.kind!r}")
        if not (-1e-9 <= self.value <= 1 + 1e-9):
            raise InvalidInputError(f"fidelity {self.value!r} outside [0, 1]")


@dataclass(frozen=True)
class RobustnessGrid:
    """Trace fidelity on a ``delta x epsilon`` perturbation grid.

    ``values[i, j]`` belongs to ``delta_axis[i]`` and ``epsilon_axis[j]``.
    """

    delta_axis: np.ndarray
    epsilon_axis: np.ndarray
    values: np.ndarray
    gate_kind: str
    axis: str
    angle: float

    def __post_init__(self):
        if np.shape(self.values) != (len(self.delta_axis), len(self.epsilon_axis)):
            raise InvalidInputError("grid values do not match the axes")

    def mean(self):
        return float(np.mean(self.values))

    def at(self, delta, epsilon):
        i = int(np.argmin(np.abs(np.asarray(self.delta_axis) - delta)))
        j = int(np.argmin(np.abs(np.asarray(self.epsilon_axis) - epsilon)))
        return float(self.values[i, j])


def trace_fidelity(ideal, actual):
    """``|Tr(ideal^+ actual)| / Tr(ideal^+ ideal)``."""
    ideal = as_matrix(ideal)
    actual = as_matrix(actual)
    if ideal.shape != actual.shape:
        raise InvalidInputError(f"dimension mismatch: {ideal.shape} vs {actual.shape}")
    return float(abs(np.trace(ideal.conj().T @ actual)) / np.trace(ideal.conj().T @ ideal).real)


def perturbed_gate(pulse, delta, epsilon, opts=None):
    """Two-level gate with ``Delta + delta*Om`` and ``Omega(t) + epsilon*Om``.

    ``Om`` is the pulse's peak Rabi frequency. For a dynamical sequence the
    same shifts apply to every segment.
    """
    if abs(delta) > 0.2 or abs(epsilon) > 0.2:
        raise InvalidInputError("perturbations are limited to |delta|, |epsilon| <= 0.2")
    om = pulse.omega_max
    segments = pulse.segments if isinstance(pulse, DynamicalPulseSequence) else (pulse,)
    u = np.eye(2, dtype=complex)
    for seg in segments:
        h = model.perturbed_two_level_hamiltonian(seg, delta * om, epsilon * om)
        u = propagate_unitary(h, seg.tau, opts) @ u
    return u


def perturbed_gate_grid(pulse, deltas, epsilons, opts=None):
    """:func:`perturbed_gate` over a ``deltas x epsilons`` grid, one row at a time.

    Uses the same time grid and scheme as :func:`geotoc.dynamics.propagate_unitary`.

    Returns an array of shape ``(len(deltas), len(epsilons), 2, 2)``.
    """
    opts = opts or IntegratorOptions()
    deltas = np.asarray(deltas, dtype=float)
    epsilons = np.asarray(epsilons, dtype=float)
    if np.max(np.abs(deltas), initial=0) > 0.2 or np.max(np.abs(epsilons), initial=0) > 0.2:
        raise InvalidInputError("perturbations are limited to |delta|, |epsilon| <= 0.2")
    om = pulse.omega_max
    segments = pulse.segments if isinstance(pulse, DynamicalPulseSequence) else (pulse,)
    out = np.empty((deltas.size, epsilons.size, 2, 2), dtype=complex)
    for i, d in enumerate(deltas):
        u = np.broadcast_to(np.eye(2, dtype=complex), (epsilons.size, 2, 2))
        for seg in segments:
            n, dt = time_grid(seg, seg.tau, opts)
            nodes = exponential_nodes(n, dt)[..., None]
            h = model.two_level_matrix(
                seg.omega(nodes) + epsilons * om,
                seg.detuning(nodes) + d * om,
                seg.phase(nodes),
            )
            u = exponential_product(h[:, 0], h[:, 1], dt) @ u
        out[i] = u
    return out


def _report_value(values):
    # exactly rounded sum: independent of ordering and of how states were batched
    values = np.asarray(values, dtype=float).ravel()
    return math.fsum(values) / values.size


def single_qubit_inputs(n_states):
    """Input angles and states ``cos a |0> + sin a |1>`` on a closed uniform grid."""
    if n_states < 2:
        raise InvalidInputError("need at least 2 input states")
    angles = np.linspace(0.0, 2 * np.pi, n_states)
    return angles, np.stack([np.cos(angles), np.sin(angles)], axis=-1)


def _matrix_units(dim, indices):
    k = len(indices)
    units = np.zeros((k * k, dim, dim), dtype=complex)
    for a, i in enumerate(indices):
        for b, j in enumerate(indices):
            units[a * k + b, i, j] = 1.0
    return units


def _apply_channel(images, coeffs):
    """``rho(psi) = sum_ab c_a c_b^* Phi(|a><b|)`` for a batch of coefficient vectors."""
    k = coeffs.shape[-1]
    tensor = images.reshape(k, k, *images.shape[1:])
    return np.einsum("sa,sb,abij->sij", coeffs, coeffs.conj(), tensor)


def avg_gate_fidelity_1q(pulse, drag, params, n_states=1001, opts=None):
    """State-averaged fidelity of a TOC gate on a decohering three-level transmon.

    Each input ``cos a |0> + sin a |1>`` is compared against the ideal
    latitude-path gate applied to it; the average is over ``n_states``
    equally spaced ``a`` in ``[0, 2 pi]``.
    """
    if not isinstance(pulse, TocSingleQubitPulse):
        raise InvalidInputError("avg_gate_fidelity_1q expects a TocSingleQubitPulse")
    h = model.single_transmon_hamiltonian(pulse, drag)
    ops = model.collapse_operators(1, params)
    images = lindblad_map(h, ops, _matrix_units(3, model.COMPUTATIONAL_1Q), pulse.tau, opts)
    angles, coeffs = single_qubit_inputs(n_states)
    rho = _apply_channel(images, coeffs)
    ideal = np.zeros((n_states, 3), dtype=complex)
    ideal[:, :2] = coeffs @ pulse.geometric_gate().T
    overlaps = np.einsum("si,sij,sj->s", ideal.conj(), rho, ideal).real
    leak = np.real(rho[:, 2, 2])
    return FidelityReport(
        value=_report_value(overlaps),
        kind="averaged-1q",
        n_states=n_states,
        metadata={
            "axis": pulse.axis,
            "theta": pulse.theta,
            "omega_max": pulse.omega_max,
            "delta": pulse.delta,
            "tau": pulse.tau,
            "alpha1": drag.alpha1,
            "drag": drag.enabled,
            "kappa_minus": params.kappa_minus,
            "kappa_z": params.kappa_z,
            "leakage_mean": _report_value(leak),
            "leakage_max": float(np.max(leak)),
        },
    )


def state_grid_size(n_states):
    """Side of the square product grid used for ``n_states`` two-qubit inputs."""
    return int(np.ceil(np.sqrt(n_states) - 1e-9))


def avg_gate_fidelity_2q(drive, params, n_states=10001, opts=None, grid=None):
    """State-averaged fidelity of the two-qubit gate under the full coupled model.

    Product inputs ``(cos a|0> + sin a|1>) (cos b|0> + sin b|1>)`` use a
    ``g x g`` closed grid with ``g = ceil(sqrt(n_states))`` (``grid``
    overrides). The simulated state is moved into the effective frame before
    it is compared with the ideal gate.
    """
    g = grid if grid is not None else state_grid_size(n_states)
    if g < 2:
        raise InvalidInputError("state grid needs at least 2 points per qubit")
    h = model.coupled_transmon_hamiltonian(drive, params)
    ops = model.collapse_operators(2, params)
    comp = model.COMPUTATIONAL_2Q
    images = lindblad_map(h, ops, _matrix_units(9, comp), drive.duration, opts)
    frame = model.effective_frame(drive, drive.duration)
    images = frame.conj().T @ images @ frame
    angles = np.linspace(0.0, 2 * np.pi, g)
    single = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    coeffs = np.einsum("ia,jb->ijab", single, single).reshape(-1, 4)
    ideal = coeffs @ drive.target().T
    # only the computational block of rho enters the overlap
    rho = _apply_channel(images[:, comp][:, :, comp], coeffs)
    overlaps = np.einsum("si,sij,sj->s", ideal.conj(), rho, ideal).real
    full = _apply_channel(images, coeffs)
    leak = 1.0 - np.real(np.trace(full[:, comp][:, :, comp], axis1=-2, axis2=-1))
    return FidelityReport(
        value=_report_value(overlaps),
        kind="averaged-2q",
        n_states=g * g,
        metadata={
            "grid": g,
            "vartheta": drive.vartheta,
            "varphi0": drive.varphi0,
            "beta": drive.beta,
            "nu": drive.nu,
            "eta": drive.eta,
            "delta_t": drive.delta_t,
            "g_eff": drive.g_eff,
            "duration": drive.duration,
            "g12": params.g12,
            "delta1": params.delta1,
            "alpha1": params.q1.alpha,
            "alpha2": params.q2.alpha,
            "leakage_mean": _report_value(leak),
        },
    )


def leakage(rho, computational_indices):
    """Population outside the computational subspace, ``1 - sum_i rho_ii``."""
    rho = as_matrix(rho)
    idx = list(computational_indices)
    if any(i < 0 or i >= rho.shape[0] for i in idx):
        raise InvalidInputError("computational index out of range")
    return float(1.0 - np.real(sum(rho[i, i] for i in idx)))
