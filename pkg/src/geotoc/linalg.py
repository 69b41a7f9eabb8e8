"""Small dense complex linear algebra.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``. All
functions here are pure and never modify their arguments.
"""

import numpy as np
import scipy.linalg

from .errors import InvalidInputError

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

HERMITIAN_TOL = 1e-12


def as_matrix(a):
    """Return ``a`` as a finite complex square matrix or raise."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise InvalidInputError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError("matrix has non-finite entries")
    return m


def is_hermitian(a, tol=HERMITIAN_TOL):
    a = np.asarray(a)
    return bool(np.max(np.abs(a - a.conj().swapaxes(-1, -2)), initial=0.0) < tol)


def is_unitary(u, tol=1e-10):
    u = np.asarray(u)
    eye = np.eye(u.shape[-1])
    return bool(np.max(np.abs(u.conj().swapaxes(-1, -2) @ u - eye)) < tol)


def _is_skew_hermitian(a):
    scale = max(1.0, float(np.max(np.abs(a))))
    return np.max(np.abs(a + a.conj().T)) < 1e-14 * scale


def mat_exp(a):
    """Matrix exponential ``exp(A)``.

    Skew-Hermitian arguments (the ``-i dt H`` case) go through a Hermitian
    eigendecomposition, which keeps the result unitary to machine precision.
    Anything else falls back to scaling and squaring with Pade approximants.
    """
    a = as_matrix(a)
    if _is_skew_hermitian(a):
        # A = -iH  ->  exp(A) = V exp(-i w) V^dagger
        h = 1j * a
        h = 0.5 * (h + h.conj().T)
        w, v = np.linalg.eigh(h)
        return (v * np.exp(-1j * w)) @ v.conj().T
    return scipy.linalg.expm(a)


def expm_hermitian_stack(h, dt):
    """``exp(-i dt H_k)`` for a stack of Hermitian matrices ``h[k]``."""
    h = np.asarray(h, dtype=complex)
    h = 0.5 * (h + h.conj().swapaxes(-1, -2))
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * dt * w)[..., None, :]) @ v.conj().swapaxes(-1, -2)


def ordered_product(stack):
    """Time-ordered product ``M[n-1] @ ... @ M[1] @ M[0]``.

    Uses a pairwise tree so the cost is a handful of batched matmuls; the
    reduction order is fixed, so results are bit-stable.
    """
    m = np.asarray(stack)
    if m.shape[0] == 0:
        raise InvalidInputError("empty product")
    while m.shape[0] > 1:
        if m.shape[0] % 2:
            m = np.concatenate([m, np.broadcast_to(np.eye(m.shape[-1], dtype=m.dtype), (1,) + m.shape[1:])])
        m = m[1::2] @ m[0::2]
    return m[0]


def kron(a, b):
    """Kronecker product with index layout ``(i*dB + k, j*dB + l)``."""
    return np.kron(as_matrix(a), as_matrix(b))


def commutator(a, b):
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise InvalidInputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def projector(dim, i, j=None):
    """Matrix unit ``|i><j|`` (``|i><i|`` when ``j`` is omitted)."""
    m = np.zeros((dim, dim), dtype=complex)
    m[i, i if j is None else j] = 1.0
    return m


def basis_state(dim, index):
    if not 0 <= index < dim:
        raise InvalidInputError(f"basis index {index} outside [0, {dim})")
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def normalize(state):
    v = np.asarray(state, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0 or not np.isfinite(norm):
        raise InvalidInputError("cannot normalize a zero or non-finite vector")
    return v / norm


def validate_density_matrix(rho, herm_tol=1e-10, trace_tol=1e-8, eig_tol=1e-8):
    """Check density-matrix structure and return ``rho`` as an array."""
    rho = as_matrix(rho)
    if not is_hermitian(rho, herm_tol):
        raise InvalidInputError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise InvalidInputError(f"density matrix trace {tr!r} != 1")
    if np.linalg.eigvalsh(rho).min() < -eig_tol:
        raise InvalidInputError("density matrix has negative eigenvalues")
    return rho


def pure_density(state):
    v = np.asarray(state, dtype=complex)
    return np.outer(v, v.conj())


def align_global_phase(u, reference=None):
    """Remove a global phase from ``u``.

    The phase is read off the entry of largest modulus in ``reference``
    (``u`` itself by default), so that two nearly equal matrices are always
    aligned on the same entry.
    """
    u = np.asarray(u, dtype=complex)
    ref = u if reference is None else np.asarray(reference, dtype=complex)
    k = np.argmax(np.abs(ref))
    return u * np.exp(-1j * np.angle(u.flat[k]))


def phase_distance(reference, other):
    """Max-norm distance between two matrices modulo a global phase."""
    a = align_global_phase(reference)
    b = align_global_phase(other, reference)
    return float(np.max(np.abs(a - b)))


def rx(theta):
    return np.cos(theta / 2) * IDENTITY_2 - 1j * np.sin(theta / 2) * SIGMA_X


def ry(theta):
    return np.cos(theta / 2) * IDENTITY_2 - 1j * np.sin(theta / 2) * SIGMA_Y
