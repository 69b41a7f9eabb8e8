"""Control-field synthesis.

Builds time-optimal geometric single-qubit pulses, the two-qubit parametric
drive, DRAG correction fields, dynamical reference gates and the
conventional-gate timing baseline. All angular frequencies are rad/ns and
all times ns.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGateError, InvalidInputError, InvalidModulationError, RangeError
from .geometry import DressedPath, GateAngles, geometric_unitary
from .linalg import rx, ry

AXES = ("X", "Y")
PHI0 = {"X": -np.pi / 2, "Y": 0.0}


def _axis(axis):
    a = str(axis).upper()
    if a not in AXES:
        raise InvalidInputError(f"axis must be X or Y, got {axis!r}")
    return a


def _cot(x):
    return np.cos(x) / np.sin(x)


@dataclass(frozen=True)
class PulseEnvelope:
    """Sine envelope ``Omega(t) = omega_max sin(pi t / tau)`` on ``[0, tau]``."""

    omega_max: float
    tau: float
    shape: str = "sine"

    def __post_init__(self):
        if self.shape != "sine":
            raise InvalidInputError(f"unknown envelope shape {self.shape!r}")
        if not (self.tau > 0 and np.isfinite(self.tau)):
            raise InvalidInputError("envelope duration must be positive")
        if not np.isfinite(self.omega_max):
            raise InvalidInputError("envelope amplitude must be finite")

    def __call__(self, t):
        return self.omega_max * np.sin(np.pi * np.asarray(t, dtype=float) / self.tau)

    def derivative(self, t):
        w = np.pi / self.tau
        return self.omega_max * w * np.cos(w * np.asarray(t, dtype=float))

    def integral(self, t):
        """``int_0^t Omega dt'``."""
        w = np.pi / self.tau
        return self.omega_max * (1.0 - np.cos(w * np.asarray(t, dtype=float))) / w

    @property
    def area(self):
        """Full integral ``int_0^tau Omega dt = 2 omega_max tau / pi``."""
        return 2.0 * self.omega_max * self.tau / np.pi


@dataclass(frozen=True)
class TocSingleQubitPulse:
    """Time-optimal geometric X/Y rotation.

    The drive phase follows ``phi(t) = phi0 + int_0^t [c0 Omega - delta] dt'``
    with ``c0 = cot(theta/2)`` and ends at ``phi1(tau) = -pi``.
    """

    envelope: PulseEnvelope
    theta: float
    axis: str
    phi0: float
    c0: float
    delta: float

    @property
    def tau(self):
        return self.envelope.tau

    @property
    def omega_max(self):
        return self.envelope.omega_max

    def omega(self, t):
        return self.envelope(t)

    def detuning(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.delta)

    def phase(self, t):
        t = np.asarray(t, dtype=float)
        return self.phi0 + self.c0 * self.envelope.integral(t) - self.delta * t

    def phase_rate(self, t):
        return self.c0 * self.envelope(t) - self.delta

    @property
    def chi(self):
        """Constant polar angle of the dressed path, ``atan2(1, c0)``."""
        return float(np.arctan2(1.0, self.c0))

    @property
    def pulse_area(self):
        """``(1/2) int Omega dt``."""
        return 0.5 * self.envelope.area

    def dressed_path(self, n_samples=4001):
        t = np.linspace(0.0, self.tau, n_samples)
        return DressedPath(t, np.full_like(t, self.chi), self.phase(t) + np.pi)

    def gate_angles(self):
        xi0 = self.phi0 + np.pi
        xi1 = float(self.phase(self.tau)) + np.pi
        return GateAngles.from_boundary(self.chi, xi0, xi1)

    def geometric_gate(self):
        return geometric_unitary(self.gate_angles())

    def target(self):
        return rx(self.theta) if self.axis == "X" else ry(self.theta)


def synth_single_qubit_toc(axis, theta, omega_max):
    """Synthesize the time-optimal geometric rotation ``R_axis(theta)``.

    Parameters
    ----------
    axis : {"X", "Y"}
    theta : float
        Rotation angle, ``0 < |theta| <= pi``.
    omega_max : float
        Peak Rabi frequency of the sine envelope (rad/ns).

    Notes
    -----
    The envelope area is ``pi |sin(theta/2)|`` so the duration is
    ``pi^2 |sin(theta/2)| / (2 omega_max)``; the detuning then closes the phase
    winding, ``delta = (pi + c0 * area) / tau``.
    """
    axis = _axis(axis)
    theta = float(theta)
    if not np.isfinite(theta) or theta <= -np.pi or theta > np.pi:
        raise RangeError(f"rotation angle {theta!r} outside (-pi, pi]")
    if theta == 0.0:
        raise DegenerateGateError("zero rotation needs no pulse")
    if not omega_max > 0:
        raise InvalidInputError("omega_max must be positive")
    half_sin = abs(np.sin(theta / 2))
    tau = np.pi**2 * half_sin / (2.0 * omega_max)
    envelope = PulseEnvelope(float(omega_max), float(tau))
    c0 = float(_cot(theta / 2))
    delta = (np.pi + c0 * envelope.area) / tau
    return TocSingleQubitPulse(envelope, theta, axis, PHI0[axis], c0, float(delta))


def phase_trajectory(pulse, t):
    """Drive phase ``phi0 + phi1(t)`` of a TOC pulse."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > pulse.tau * (1 + 1e-12)):
        raise RangeError(f"time outside [0, {pulse.tau}]")
    out = pulse.phase(t_arr)
    return float(out) if out.ndim == 0 else out


def conventional_gate_time(theta, omega_max):
    """Duration of a conventional geometric gate (sine area ``pi``), any angle."""
    if not omega_max > 0:
        raise InvalidInputError("omega_max must be positive")
    return np.pi**2 / omega_max


def drag_fields(pulse, alpha1, t):
    """Total drive field ``B = B0 + Bd`` and its DRAG part ``Bd``.

    ``B0 = (Omega cos phi, Omega sin phi, -delta)`` and the first-order DRAG
    term is ``Bd = (1/(2 alpha1)) (-dBy + Bz Bx, dBx + Bz By, 0)`` for a
    level-2 energy of ``-alpha1`` in the drive frame.

    Returns
    -------
    (B, Bd) : tuple of ndarray
        Each has shape ``t.shape + (3,)``.
    """
    if not alpha1 > 0:
        raise InvalidInputError("anharmonicity must be positive")
    t = np.asarray(t, dtype=float)
    omega = pulse.omega(t)
    d_omega = pulse.envelope.derivative(t)
    phi = pulse.phase(t)
    d_phi = pulse.phase_rate(t)
    bx = omega * np.cos(phi)
    by = omega * np.sin(phi)
    bz = -pulse.delta * np.ones_like(t)
    dbx = d_omega * np.cos(phi) - omega * np.sin(phi) * d_phi
    dby = d_omega * np.sin(phi) + omega * np.cos(phi) * d_phi
    scale = 1.0 / (2.0 * alpha1)
    bd = np.stack([scale * (-dby + bz * bx), scale * (dbx + bz * by), np.zeros_like(t)], axis=-1)
    b0 = np.stack([bx, by, bz], axis=-1)
    return b0 + bd, bd


@dataclass(frozen=True)
class DragCorrection:
    enabled: bool = True
    alpha1: float = 2 * np.pi * 0.220

    def __post_init__(self):
        if not self.alpha1 > 0:
            raise InvalidInputError("anharmonicity must be positive")


@dataclass(frozen=True)
class TocTwoQubitDrive:
    """Time-optimal parametric drive for the ``{|01>, |10>}`` exchange gate."""

    vartheta: float
    varphi0: float
    beta: float
    nu: float
    eta: float
    delta_t: float
    g_eff: float
    duration: float

    def phase(self, t):
        return self.varphi0 + self.eta * np.asarray(t, dtype=float)

    def target(self):
        """Ideal 4x4 gate on ``|00>, |01>, |10>, |11>``."""
        c, s = np.cos(self.vartheta / 2), np.sin(self.vartheta / 2)
        e = np.exp(1j * self.varphi0)
        return np.array(
            [[1, 0, 0, 0], [0, -c, s / e, 0], [0, -s * e, -c, 0], [0, 0, 0, 1]], dtype=complex
        )

    def conventional_duration(self):
        return 2 * np.pi / self.g_eff


def _effective_coupling(g12, beta):
    from .model import bessel_j1

    j1 = bessel_j1(beta)
    if j1 <= 0:
        raise InvalidModulationError(f"J1({beta}) <= 0; modulation index past the first zero")
    return 2.0 * j1 * g12


def synth_two_qubit_toc(vartheta, varphi0, g12, beta, delta1):
    """Two-qubit drive whose modulation frequency satisfies the TOC condition.

    ``g' = 2 J1(beta) g12``, ``T = pi |sin(vartheta/2)| / g'``, ``eta = -pi/T``,
    ``delta_t = cot(vartheta/2) g' - eta`` and ``nu = delta1 + delta_t``.
    """
    if not (0 < vartheta <= np.pi):
        raise RangeError("vartheta must lie in (0, pi]")
    if not g12 > 0 or not beta > 0:
        raise InvalidInputError("g12 and beta must be positive")
    g_eff = _effective_coupling(g12, beta)
    duration = np.pi * abs(np.sin(vartheta / 2)) / g_eff
    eta = -np.pi / duration
    delta_t = _cot(vartheta / 2) * g_eff - eta
    return TocTwoQubitDrive(
        float(vartheta), float(varphi0), float(beta), float(delta1 + delta_t),
        float(eta), float(delta_t), float(g_eff), float(duration),
    )


def two_qubit_drive_from_modulation(vartheta, varphi0, g12, beta, nu, delta1):
    """Drive for an externally chosen ``(beta, nu)`` pair.

    The phase rate follows from the TOC condition with the actual coupling,
    ``eta = cot(vartheta/2) g' - (nu - delta1)``, and ``T = -pi/eta``.

    Raises
    ------
    InvalidModulationError
        If ``eta >= 0`` (no ``-pi`` winding is possible) or ``J1(beta) <= 0``.
    """
    g_eff = _effective_coupling(g12, beta)
    delta_t = nu - delta1
    eta = _cot(vartheta / 2) * g_eff - delta_t
    if eta >= 0:
        raise InvalidModulationError(f"phase rate {eta!r} >= 0 for nu={nu!r}")
    return TocTwoQubitDrive(
        float(vartheta), float(varphi0), float(beta), float(nu),
        float(eta), float(delta_t), float(g_eff), float(-np.pi / eta),
    )


@dataclass(frozen=True)
class DynamicalSegment:
    """Constant-axis segment with ``Omega = E sin(theta_d/2)``, ``Delta = E cos(theta_d/2)``.

    ``envelope`` is the magnitude ``E(t) = sqrt(Omega^2 + Delta^2)``; its area is
    the rotation angle ``lam``.
    """

    envelope: PulseEnvelope
    theta_d: float
    phi0: float

    @property
    def tau(self):
        return self.envelope.tau

    @property
    def lam(self):
        return self.envelope.area

    @property
    def detuning_ratio(self):
        s = np.sin(self.theta_d / 2)
        return np.inf if abs(s) < 1e-15 else float(np.cos(self.theta_d / 2) / s)

    def omega(self, t):
        s = np.sin(self.theta_d / 2)
        return self.envelope(t) * (0.0 if abs(s) < 1e-15 else s)

    def detuning(self, t):
        return self.envelope(t) * np.cos(self.theta_d / 2)

    def phase(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.phi0)

    def ideal(self):
        """Closed-form segment unitary ``cos(lam/2) - i sin(lam/2) M``."""
        return dynamical_unitary(self.lam, self.theta_d, self.phi0)


@dataclass(frozen=True)
class DynamicalPulseSequence:
    segments: tuple
    axis: str
    theta: float
    omega_max: float

    @property
    def duration(self):
        return sum(s.tau for s in self.segments)

    def ideal(self):
        u = np.eye(2, dtype=complex)
        for seg in self.segments:
            u = seg.ideal() @ u
        return u

    def target(self):
        return rx(self.theta) if self.axis == "X" else ry(self.theta)


def dynamical_unitary(lam, theta_d, phi0):
    c, s = np.cos(theta_d / 2), np.sin(theta_d / 2)
    m = np.array([[-c, s * np.exp(-1j * phi0)], [s * np.exp(1j * phi0), c]])
    return np.cos(lam / 2) * np.eye(2) - 1j * np.sin(lam / 2) * m


def _segment(lam, theta_d, phi0, peak):
    if theta_d == 0.0 and lam != 0.0:
        raise DegenerateGateError("theta_d = 0 segment cannot produce a rotation")
    tau = np.pi * lam / (2.0 * peak)
    return DynamicalSegment(PulseEnvelope(float(peak), float(tau)), float(theta_d), float(phi0))


def synth_dynamical(axis, theta, omega_max):
    """Two-segment dynamical rotation ``U_d(pi, 2pi, 0) U_d(pi, theta, phi0)``.

    The first segment keeps the peak Rabi frequency at ``omega_max``; the
    second (pure detuning) segment uses ``omega_max`` as its peak detuning.
    Negative angles are realised with ``|theta|`` and ``phi0 + pi``.
    """
    axis = _axis(axis)
    theta = float(theta)
    if not np.isfinite(theta) or theta <= -np.pi or theta > np.pi:
        raise RangeError(f"rotation angle {theta!r} outside (-pi, pi]")
    if not omega_max > 0:
        raise InvalidInputError("omega_max must be positive")
    theta_d = abs(theta)
    phi0 = PHI0[axis] + (np.pi if theta < 0 else 0.0)
    if theta_d == 0.0:
        raise DegenerateGateError("theta_d = 0 segment cannot produce a rotation")
    first = _segment(np.pi, theta_d, phi0, omega_max / np.sin(theta_d / 2))
    second = _segment(np.pi, 2 * np.pi, 0.0, omega_max)
    return DynamicalPulseSequence((first, second), axis, theta, float(omega_max))
