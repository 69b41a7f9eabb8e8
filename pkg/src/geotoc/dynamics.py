"""Time-ordered unitary propagation and Lindblad master-equation integration.

Conventions: ``i d/dt psi = H psi`` and
``d rho/dt = -i[H, rho] + sum_k r_k (2 A rho A^+ - A^+A rho - rho A^+A)``
with ``(A_k, r_k)`` pairs from :func:`geotoc.model.collapse_operators`.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ConvergenceError, InvalidInputError, ModelError
from .linalg import expm_hermitian_stack, ordered_product, validate_density_matrix

METHODS = ("piecewise-exponential", "rk4")
TRACE_DRIFT_MAX = 1e-6


@dataclass(frozen=True)
class IntegratorOptions:
    """Step control for the propagators.

    Attributes
    ----------
    dt : float, optional
        Requested step in ns; default is ``duration / steps``.
    method : str, optional
        ``"piecewise-exponential"`` or ``"rk4"``. ``None`` picks the default
        for the operation (exponential for unitaries, RK4 for Lindblad).
    convergence_check : bool
        Re-run at ``dt/2`` and raise :class:`ConvergenceError` if any result
        moves by more than ``convergence_tol``.
    steps : int
        Default number of steps per gate.
    """

    dt: Optional[float] = None
    method: Optional[str] = None
    convergence_check: bool = False
    steps: int = 4000
    convergence_tol: float = 1e-8

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0:
            raise InvalidInputError("dt must be positive")
        if self.method is not None and self.method not in METHODS:
            raise InvalidInputError(f"unknown integrator {self.method!r}")
        if self.steps < 1:
            raise InvalidInputError("steps must be >= 1")

    def halved(self, duration):
        dt = self.dt if self.dt is not None else duration / self.steps
        return replace(self, dt=dt / 2, convergence_check=False)


def time_grid(h, duration, opts):
    """Number of uniform steps and the step size actually used."""
    if not duration > 0:
        raise InvalidInputError("duration must be positive")
    dt = opts.dt if opts.dt is not None else duration / opts.steps
    max_dt = getattr(h, "max_dt", None)
    if max_dt:
        dt = min(dt, max_dt)
    n = int(np.ceil(duration / dt * (1 - 1e-12)))
    return n, duration / n


def sample_hamiltonian(h, times, dim=None):
    """Evaluate ``h`` on ``times``; falls back to a loop for scalar-only callables."""
    times = np.asarray(times, dtype=float)
    try:
        out = np.asarray(h(times), dtype=complex)
    except (TypeError, ValueError):
        out = np.empty((0,))
    if out.ndim != 3 or out.shape[0] != times.size:
        out = np.stack([np.asarray(h(float(t)), dtype=complex) for t in times])
    if dim is not None and out.shape[1:] != (dim, dim):
        raise ModelError(f"Hamiltonian has shape {out.shape[1:]}, expected {(dim, dim)}")
    scale = max(1.0, float(np.max(np.abs(out))))
    if np.max(np.abs(out - out.conj().swapaxes(-1, -2))) > 1e-12 * scale:
        raise ModelError("non-Hermitian Hamiltonian sample")
    return out


# fourth-order commutator-free scheme: two exponentials per step, Gauss nodes
_GAUSS = np.array([0.5 - np.sqrt(3) / 6, 0.5 + np.sqrt(3) / 6])
_CF4 = (0.25 + np.sqrt(3) / 6, 0.25 - np.sqrt(3) / 6)


def exponential_nodes(n, dt):
    """Sample times ``(n, 2)`` used by the piecewise-exponential scheme."""
    return (np.arange(n)[:, None] + _GAUSS[None, :]) * dt


def exponential_product(h1, h2, dt):
    """Ordered product of per-step factor pairs from Gauss-node samples ``h1``, ``h2``.

    Each step applies ``exp(-i dt (a H1 + b H2))`` then ``exp(-i dt (b H1 + a H2))``.
    Leading axis is time; any further batch axes are carried along.
    """
    a, b = _CF4
    first = expm_hermitian_stack(a * h1 + b * h2, dt)
    second = expm_hermitian_stack(b * h1 + a * h2, dt)
    stack = np.stack([first, second], axis=1).reshape((-1,) + first.shape[1:])
    return ordered_product(stack)


def _propagate(h, duration, n, dt, method):
    if method == "piecewise-exponential":
        hs = sample_hamiltonian(h, exponential_nodes(n, dt).ravel())
        hs = hs.reshape(n, 2, *hs.shape[1:])
        return exponential_product(hs[:, 0], hs[:, 1], dt)
    hs = sample_hamiltonian(h, np.arange(2 * n + 1) * (dt / 2))
    u = np.eye(hs.shape[-1], dtype=complex)
    for k in range(n):
        h0, hm, h1 = hs[2 * k], hs[2 * k + 1], hs[2 * k + 2]
        k1 = -1j * h0 @ u
        k2 = -1j * hm @ (u + 0.5 * dt * k1)
        k3 = -1j * hm @ (u + 0.5 * dt * k2)
        k4 = -1j * h1 @ (u + dt * k3)
        u = u + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return u


def propagate_unitary(h, duration=None, opts=None):
    """Time-ordered propagator ``U(duration)`` of ``i dU/dt = H(t) U``.

    The default scheme is a product of exponentials, two per step, built from
    ``H`` at the Gauss nodes of each step (fourth order, commutator free). It
    is unitary to rounding error.

    Raises
    ------
    ModelError
        If a Hamiltonian sample is not Hermitian.
    ConvergenceError
        In ``convergence_check`` mode, if halving the step moves any entry by
        more than ``opts.convergence_tol``.
    """
    opts = opts or IntegratorOptions()
    duration = h.duration if duration is None else duration
    method = opts.method or "piecewise-exponential"
    n, dt = time_grid(h, duration, opts)
    u = _propagate(h, duration, n, dt, method)
    if opts.convergence_check:
        u2 = _propagate(h, duration, 2 * n, dt / 2, method)
        diff = float(np.max(np.abs(u - u2)))
        if diff > opts.convergence_tol:
            raise ConvergenceError(f"step halving changed U by {diff:.3e}; reduce dt")
        u = u2
    return u


def _jump_terms(collapses, dim):
    if not collapses:
        return None, np.zeros((dim, dim), dtype=complex)
    ops = np.array([np.asarray(a, dtype=complex) for a, _ in collapses])
    rates = np.array([float(r) for _, r in collapses])
    if ops.shape[1:] != (dim, dim):
        raise InvalidInputError("collapse operator dimension does not match the Hamiltonian")
    decay = np.einsum("k,kji,kjl->il", rates, ops.conj(), ops)
    keep = rates > 0
    if not np.any(keep):
        return None, decay
    # sqrt(2 r) A  so that the jump term is sum_k B rho B^+
    scaled = np.sqrt(2 * rates[keep])[:, None, None] * ops[keep]
    return scaled, decay


def _rk4_lindblad(hs, jumps, decay, r, n, dt, record=()):
    """Integrate a batch ``r[..., d, d]`` of operators; ``hs`` on the half-step grid."""
    jd = None if jumps is None else jumps.conj().swapaxes(-1, -2)
    snaps = []

    def rhs(x, h):
        heff = h - 1j * decay
        out = -1j * (heff @ x - x @ heff.conj().T)
        if jumps is not None:
            out = out + np.sum(jumps[:, None] @ x[None] @ jd[:, None], axis=0)
        return out

    record = set(record)
    for k in range(n):
        h0, hm, h1 = hs[2 * k], hs[2 * k + 1], hs[2 * k + 2]
        k1 = rhs(r, h0)
        k2 = rhs(r + 0.5 * dt * k1, hm)
        k3 = rhs(r + 0.5 * dt * k2, hm)
        k4 = rhs(r + dt * k3, h1)
        r = r + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if k + 1 in record:
            snaps.append(r)
    return r, snaps


def lindblad_map(h, collapses, inputs, duration=None, opts=None):
    """Evolve a batch of operators ``inputs[k]`` (not necessarily states).

    Because the master equation is linear, evolving the matrix units of the
    computational block yields the channel on every input state at once.
    """
    opts = opts or IntegratorOptions()
    duration = h.duration if duration is None else duration
    r0 = np.asarray(inputs, dtype=complex)
    dim = r0.shape[-1]
    out = _lindblad_run(h, collapses, r0, duration, opts, dim)
    if opts.convergence_check:
        fine = _lindblad_run(h, collapses, r0, duration, opts.halved(duration), dim)
        diag = np.abs(np.diagonal(out, axis1=-2, axis2=-1) - np.diagonal(fine, axis1=-2, axis2=-1))
        diff = float(np.max(diag))
        if diff > opts.convergence_tol:
            raise ConvergenceError(f"step halving changed populations by {diff:.3e}; reduce dt")
        out = fine
    return out


def _lindblad_run(h, collapses, r0, duration, opts, dim, record=()):
    n, dt = time_grid(h, duration, opts)
    hs = sample_hamiltonian(h, np.arange(2 * n + 1) * (dt / 2), dim)
    jumps, decay = _jump_terms(collapses, dim)
    out, snaps = _rk4_lindblad(hs, jumps, decay, r0, n, dt, record)
    drift = np.max(np.abs(np.trace(out, axis1=-2, axis2=-1) - np.trace(r0, axis1=-2, axis2=-1)))
    if not drift <= TRACE_DRIFT_MAX:
        raise ConvergenceError(f"trace drifted by {drift:.3e}; reduce dt")
    if record:
        return out, n, dt, snaps
    return out


def evolve_lindblad(h, collapses, rho0, duration=None, opts=None):
    """Integrate the master equation from the density matrix ``rho0`` with RK4."""
    rho0 = validate_density_matrix(rho0)
    out = lindblad_map(h, collapses, rho0[None], duration, opts)[0]
    return 0.5 * (out + out.conj().T)


def lindblad_snapshots(h, collapses, rho0, duration=None, opts=None, count=10):
    """States at ``count`` evenly spaced step indices (last one is the final state).

    Returns
    -------
    times : ndarray
    states : ndarray, shape ``(count, d, d)``
    """
    opts = opts or IntegratorOptions()
    duration = h.duration if duration is None else duration
    rho0 = validate_density_matrix(rho0)
    n, dt = time_grid(h, duration, opts)
    marks = sorted({max(1, int(round(n * (j + 1) / count))) for j in range(count)})
    _, _, _, snaps = _lindblad_run(h, collapses, rho0[None], duration, opts, rho0.shape[0], marks)
    return np.array(marks) * dt, np.array(snaps)[:, 0]
