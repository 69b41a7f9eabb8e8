"""Invariant-based geometric framework on the Bloch sphere.

A dressed path is the trajectory ``(chi(t), xi(t))`` of the eigenvectors of
the Lewis-Riesenfeld invariant of a driven two-level Hamiltonian. This module
turns such paths into phases (geometric, dynamical, Pancharatnam) and builds
the resulting latitude-path gate.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, SingularPathError, UndefinedPhaseError

PHASE_TOL = 1e-9
COS_CHI_MIN = 1e-6


def _trapezoid(y, x):
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


@dataclass(frozen=True)
class DressedPath:
    """Sampled dressed-state trajectory on a uniform time grid.

    Attributes
    ----------
    t : ndarray
        Sample times in ns, starting at 0.
    chi : ndarray
        Polar angle, strictly inside ``(0, pi)``.
    xi : ndarray
        Azimuthal angle (unwrapped).
    """

    t: np.ndarray
    chi: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        chi = np.broadcast_to(np.asarray(self.chi, dtype=float), t.shape).copy()
        xi = np.broadcast_to(np.asarray(self.xi, dtype=float), t.shape).copy()
        if t.ndim != 1 or t.size < 2:
            raise InvalidInputError("a dressed path needs at least 2 samples")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise InvalidInputError("path times must start at 0 and increase strictly")
        steps = np.diff(t)
        if np.max(np.abs(steps - steps.mean())) > 1e-9 * max(1.0, t[-1]):
            raise InvalidInputError("path time grid must be uniform")
        if not (np.all(np.isfinite(chi)) and np.all(np.isfinite(xi))):
            raise InvalidInputError("path angles must be finite")
        if np.any(chi <= 0.0) or np.any(chi >= np.pi):
            raise InvalidInputError("polar angle must lie strictly inside (0, pi)")
        for name, value in (("t", t), ("chi", chi), ("xi", xi)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @classmethod
    def latitude(cls, chi, xi_start, xi_stop, duration=1.0, n_samples=2001):
        """Constant-``chi`` path with ``xi`` moving linearly in time."""
        t = np.linspace(0.0, duration, n_samples)
        return cls(t, np.full_like(t, chi), np.linspace(xi_start, xi_stop, n_samples))

    @property
    def duration(self):
        return float(self.t[-1])

    def xi_rate(self):
        """Central-difference ``d xi / dt`` (one-sided at the endpoints)."""
        return np.gradient(self.xi, self.t)

    def states(self, sign=+1):
        """Dressed states ``|psi_+(t)>`` (or ``|psi_-(t)>``) as rows."""
        return dressed_state_array(self.chi, self.xi, sign)


@dataclass(frozen=True)
class PhaseDecomposition:
    gamma: float
    gamma_g: float
    gamma_d: float
    alpha_g: float
    ell: float = -1.0

    def __post_init__(self):
        if abs(self.gamma - (self.gamma_g + self.gamma_d)) > PHASE_TOL:
            raise InvalidInputError("gamma must equal gamma_g + gamma_d")

    @property
    def unconventional_residual(self):
        """``gamma_d - (alpha_g + ell * gamma_g)``; zero on an unconventional path."""
        return self.gamma_d - (self.alpha_g + self.ell * self.gamma_g)


@dataclass(frozen=True)
class GateAngles:
    """Boundary angles that fix the latitude-path gate.

    ``xi_plus``/``xi_minus`` are the half sum/difference of the final and
    initial azimuth; ``gamma_prime`` must equal ``-xi_minus``.
    """

    xi_plus: float
    xi_minus: float
    chi: float
    gamma_prime: float

    def __post_init__(self):
        if abs(self.gamma_prime + self.xi_minus) > PHASE_TOL:
            raise InvalidInputError("gamma_prime must equal -xi_minus")

    @classmethod
    def from_boundary(cls, chi, xi_start, xi_stop):
        xi_minus = 0.5 * (xi_stop - xi_start)
        return cls(0.5 * (xi_stop + xi_start), xi_minus, chi, -xi_minus)


def dressed_state_array(chi, xi, sign=+1):
    chi = np.asarray(chi, dtype=float)
    xi = np.asarray(xi, dtype=float)
    c, s = np.cos(chi / 2), np.sin(chi / 2)
    if sign > 0:
        return np.stack([c + 0j, s * np.exp(1j * xi)], axis=-1)
    return np.stack([s * np.exp(-1j * xi), -c + 0j], axis=-1)


def dressed_states(chi, xi):
    """Eigenvectors ``(|psi_+>, |psi_->)`` of the invariant at ``(chi, xi)``."""
    return dressed_state_array(chi, xi, +1), dressed_state_array(chi, xi, -1)


def invariant_matrix(chi, xi, mu=1.0):
    """Lewis-Riesenfeld invariant ``(mu/2) [[cos chi, sin chi e^{-i xi}], [.., -cos chi]]``.

    Vectorised over ``chi``/``xi``; returns shape ``(..., 2, 2)``.
    """
    chi = np.asarray(chi, dtype=float)
    xi = np.asarray(xi, dtype=float)
    c, s = np.cos(chi), np.sin(chi)
    out = np.empty(np.broadcast(chi, xi).shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 0, 1] = s * np.exp(-1j * xi)
    out[..., 1, 0] = s * np.exp(1j * xi)
    out[..., 1, 1] = -c
    return 0.5 * mu * out


def geometric_phase(path):
    """Global geometric phase ``-(1/2) int xi_dot (1 - cos chi) dt``."""
    if not isinstance(path, DressedPath):
        raise InvalidInputError("geometric_phase expects a DressedPath")
    integrand = path.xi_rate() * (1.0 - np.cos(path.chi))
    return -0.5 * _trapezoid(integrand, path.t)


def _sample(func_or_value, t):
    if callable(func_or_value):
        return np.broadcast_to(np.asarray(func_or_value(t), dtype=float), t.shape)
    return np.full_like(t, float(func_or_value))


def dynamical_phase(path, delta):
    """Dynamical phase ``(1/2) int [xi_dot sin^2 chi + Delta] / cos chi dt``.

    Parameters
    ----------
    path : DressedPath
    delta : callable or float
        Detuning ``Delta(t)`` in rad/ns.

    Raises
    ------
    SingularPathError
        If ``|cos chi| <= 1e-6`` anywhere; the integrand diverges on the equator.
    """
    cos_chi = np.cos(path.chi)
    if np.any(np.abs(cos_chi) <= COS_CHI_MIN):
        raise SingularPathError("dynamical phase is singular where cos(chi) ~ 0")
    integrand = (path.xi_rate() * np.sin(path.chi) ** 2 + _sample(delta, path.t)) / cos_chi
    return 0.5 * _trapezoid(integrand, path.t)


def decompose_phase(path, delta):
    """Split the Lewis-Riesenfeld phase of ``path`` into its two parts."""
    g = geometric_phase(path)
    d = dynamical_phase(path, delta)
    return PhaseDecomposition(
        gamma=g + d, gamma_g=g, gamma_d=d, alpha_g=float(path.xi[0] - path.xi[-1])
    )


def geometric_unitary(angles):
    """Two-level gate generated by a latitude path with the given boundary angles."""
    if not isinstance(angles, GateAngles):
        raise InvalidInputError("geometric_unitary expects GateAngles")
    gp, chi = angles.gamma_prime, angles.chi
    cg, sg = np.cos(gp), np.sin(gp)
    cc, sc = np.cos(chi), np.sin(chi)
    xp, xm = angles.xi_plus, angles.xi_minus
    return np.array(
        [
            [(cg + 1j * sg * cc) * np.exp(-1j * xm), 1j * sg * sc * np.exp(-1j * xp)],
            [1j * sg * sc * np.exp(1j * xp), (cg - 1j * sg * cc) * np.exp(1j * xm)],
        ]
    )


def pancharatnam_phase(path, hamiltonian, propagated_state, gauge=None):
    """Pancharatnam phase of the open path traced by ``|psi_+(t)>``.

    Returns ``arg<psi_+(0)|U|psi_+(0)> + int <psi_+|H|psi_+> dt``.

    Parameters
    ----------
    path : DressedPath
    hamiltonian : callable
        ``t -> H(t)``; called with the whole time grid if it vectorises,
        otherwise sample by sample.
    propagated_state : array_like
        ``U(tau) |psi_+(0)>`` obtained from an actual propagation.
    gauge : callable, optional
        Phase function ``t -> varsigma(t)`` applied to the dressed state.
    """
    psi = path.states(+1)
    if gauge is not None:
        psi = psi * np.exp(1j * _sample(gauge, path.t))[:, None]
    out = np.asarray(propagated_state, dtype=complex)
    if gauge is not None:
        # U acts on the re-gauged initial state
        out = out * np.exp(1j * float(_sample(gauge, path.t[:1])[0]))
    overlap = np.vdot(psi[0], out)
    if abs(overlap) < 1e-12:
        raise UndefinedPhaseError("initial and propagated dressed states are orthogonal")
    h = _hamiltonian_samples(hamiltonian, path.t)
    energy = np.einsum("ti,tij,tj->t", psi.conj(), h, psi).real
    return float(np.angle(overlap)) + _trapezoid(energy, path.t)


def geodesic_closure_phase(path):
    """Pancharatnam phase of the geodesic return from the end point to the start.

    For a geodesic the connection term vanishes, leaving only the overlap
    phase ``arg<psi_+(tau)|psi_+(0)>``.
    """
    psi = path.states(+1)
    overlap = np.vdot(psi[-1], psi[0])
    if abs(overlap) < 1e-12:
        raise UndefinedPhaseError("end points are antipodal; geodesic is not unique")
    return float(np.angle(overlap))


def solid_angle(closed_path):
    """Half the signed solid angle enclosed by the path.

    Open paths are closed by a constant-``xi`` return, which contributes
    nothing to ``-(1/2) oint (1 - cos chi) d xi``.
    """
    chi, xi = closed_path.chi, closed_path.xi
    if np.ptp(chi) == 0.0 and np.ptp(xi) == 0.0:
        return 0.0
    # trapezoid in the path parameter; exact for piecewise-linear segments
    return -0.5 * float(np.sum(0.5 * ((1 - np.cos(chi[1:])) + (1 - np.cos(chi[:-1]))) * np.diff(xi)))


def wrap_phase(x):
    """Map an angle into ``(-pi, pi]``."""
    y = np.mod(np.asarray(x, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.where(y == -np.pi, np.pi, y)


def _hamiltonian_samples(hamiltonian, t):
    h = np.asarray(hamiltonian(t), dtype=complex)
    if h.shape == (t.size, 2, 2):
        return h
    return np.stack([np.asarray(hamiltonian(tk), dtype=complex) for tk in t])
