"""Dense Hermitian linear algebra: eigendecomposition and spectral matrix functions.

Every matrix function here goes through ``numpy.linalg.eigh``; logarithms are
natural and are taken only on the support of the argument.
"""

from typing import NamedTuple

import numpy as np

from .errors import DimensionError, InvalidMatrix, NotPSD, OverflowRisk

SUPPORT_TOL = 1e-12
EXP_LIMIT = 700.0
HERMITIAN_TOL = 1e-10


class EigenSystem(NamedTuple):
    eigenvalues: np.ndarray  # ascending, real
    eigenvectors: np.ndarray  # unitary, columns

    def reconstruct(self):
        v, w = self.eigenvectors, self.eigenvalues
        return (v * w) @ v.conj().T


def hermitian(m, check=True):
    """Return ``(m + m^dagger)/2`` as a complex array.

    With ``check`` the input must already be Hermitian up to
    ``1e-10 * max(1, ||m||_F)``.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidMatrix("matrix has non-finite entries")
    if check:
        scale = max(1.0, np.linalg.norm(m))
        asym = np.linalg.norm(m - m.conj().T)
        if asym > HERMITIAN_TOL * scale:
            raise InvalidMatrix(f"matrix is not Hermitian (residual {asym:.3g})")
    return 0.5 * (m + m.conj().T)


def eig_hermitian(m):
    m = np.asarray(m, dtype=complex)
    if not np.all(np.isfinite(m)):
        raise InvalidMatrix("matrix has non-finite entries")
    w, v = np.linalg.eigh(m)
    return EigenSystem(w, v)


def apply_spectral(es, fn):
    """Rebuild ``V diag(fn(w)) V^dagger`` from an eigensystem."""
    v = es.eigenvectors
    return (v * fn(es.eigenvalues)) @ v.conj().T


def matrix_exp(m):
    es = eig_hermitian(m)
    if es.eigenvalues.size and es.eigenvalues[-1] > EXP_LIMIT:
        raise OverflowRisk(
            f"largest eigenvalue {es.eigenvalues[-1]:.6g} exceeds {EXP_LIMIT}; shift the spectrum first"
        )
    return apply_spectral(es, np.exp)


def matrix_log_support(m, tol=SUPPORT_TOL):
    """Natural log of a PSD matrix restricted to its support.

    Returns ``(log_m, projector)`` where eigenvalues ``<= tol`` are treated as
    zero: they contribute 0 to ``log_m`` and are excluded from ``projector``.
    """
    es = eig_hermitian(m)
    w, v = es
    if w.size and w[0] < -tol:
        raise NotPSD(f"matrix has eigenvalue {w[0]:.3g} < -{tol:g}")
    on = w > tol
    logw = np.zeros_like(w)
    logw[on] = np.log(w[on])
    log_m = (v * logw) @ v.conj().T
    vs = v[:, on]
    return log_m, vs @ vs.conj().T


def log_support(m, tol=SUPPORT_TOL):
    return matrix_log_support(m, tol)[0]


def trace_product(a, b):
    """``Re Tr(ab)`` for Hermitian ``a``, ``b``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 2:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    val = np.sum(a * b.T)
    bound = 1e-9 * max(1.0, np.linalg.norm(a) * np.linalg.norm(b))
    assert abs(val.imag) <= bound, f"trace of Hermitian product has imaginary part {val.imag:.3g}"
    return float(val.real)


def random_unitary(dim, rng):
    """Haar-ish unitary from QR of a complex Gaussian matrix (phases fixed)."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(dim, rng, scale=1.0):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * 0.5 * (g + g.conj().T)
