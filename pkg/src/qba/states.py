"""Density operators, probability vectors and entropy functionals (nats)."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InvalidParameter, NotPSD, OverflowRisk
from .linalg import (
    EXP_LIMIT,
    SUPPORT_TOL,
    eig_hermitian,
    hermitian,
    log_support,
    matrix_log_support,
    trace_product,
)

PSD_TOL = 1e-10
TRACE_TOL = 1e-10
SUPPORT_RESIDUAL_TOL = 1e-10


def density(rho, atol=PSD_TOL):
    """Validate ``rho`` as a density operator and return it re-symmetrized.

    Eigenvalues in ``[-atol, 0)`` are clamped to zero.
    """
    rho = hermitian(rho, check=True)
    w, v = eig_hermitian(rho)
    if w[0] < -atol:
        raise NotPSD(f"state has eigenvalue {w[0]:.3g}")
    tr = float(np.sum(w))
    if abs(tr - 1.0) > atol:
        raise InvalidParameter(f"state trace is {tr!r}, expected 1")
    if w[0] < 0:
        w = np.clip(w, 0.0, None)
        rho = (v * w) @ v.conj().T
    return rho


def probability_vector(weights, atol=TRACE_TOL):
    lam = np.asarray(weights, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise DimensionError(f"probability vector must be 1-D, got shape {lam.shape}")
    if np.any(lam < -1e-12):
        raise InvalidParameter(f"negative probability {lam.min():.3g}")
    if abs(lam.sum() - 1.0) > atol:
        raise InvalidParameter(f"probabilities sum to {lam.sum()!r}")
    return np.clip(lam, 0.0, None)


def diag_state(lam):
    """Embed a probability vector as a diagonal density operator."""
    return np.diag(np.asarray(lam, dtype=float)).astype(complex)


def maximally_mixed(dim):
    return np.eye(dim, dtype=complex) / dim


def random_density(dim, rng, rank=None):
    """Normalized ``G G^dagger`` for a complex Gaussian ``dim x rank`` matrix ``G``."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def entropy_vector(w):
    w = np.asarray(w, dtype=float)
    w = w[w > SUPPORT_TOL]
    return float(-np.sum(w * np.log(w)))


def von_neumann_entropy(rho):
    w = np.linalg.eigvalsh(np.asarray(rho, dtype=complex))
    return entropy_vector(w)


def shannon_entropy(p):
    return entropy_vector(p)


def relative_entropy(rho, sigma, tol=SUPPORT_TOL):
    """Quantum relative entropy ``Tr rho (log rho - log sigma)`` in nats.

    Returns ``math.inf`` when the support of ``rho`` is not contained in the
    support of ``sigma``.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise DimensionError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    log_sigma, proj = matrix_log_support(sigma, tol)
    outside = np.eye(proj.shape[0]) - proj
    if np.linalg.norm(outside @ rho @ outside) > SUPPORT_RESIDUAL_TOL:
        return math.inf
    log_rho = log_support(rho, tol)
    return trace_product(rho, log_rho - log_sigma)


def kl_divergence(p, q):
    """Classical relative entropy in nats, ``inf`` if ``p`` is not dominated by ``q``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimensionError(f"shape mismatch {p.shape} vs {q.shape}")
    on = p > 0
    if np.any(q[on] <= 0):
        return math.inf
    return float(np.sum(p[on] * np.log(p[on] / q[on])))


def log_trace_exp(h):
    """``log Tr exp(h)`` with the spectrum shifted by its maximum."""
    w = np.linalg.eigvalsh(np.asarray(h, dtype=complex))
    top = w[-1]
    return float(top + np.log(np.sum(np.exp(w - top))))


def gibbs_state(h):
    w, v = eig_hermitian(h)
    e = np.exp(w - w[-1])
    return (v * (e / e.sum())) @ v.conj().T


def gibbs_gap(omega, h):
    """Slack in Gibbs' variational principle.

    ``log Tr exp(h) - (Tr omega h + S(omega))``; nonnegative, and zero
    exactly at ``omega = exp(h) / Tr exp(h)``.
    """
    omega = np.asarray(omega, dtype=complex)
    h = hermitian(h, check=False)
    if omega.shape != h.shape:
        raise DimensionError(f"shape mismatch {omega.shape} vs {h.shape}")
    w = np.linalg.eigvalsh(h)
    if not np.all(np.isfinite(w)):
        raise OverflowRisk("non-finite spectrum")
    return log_trace_exp(h) - (trace_product(omega, h) + von_neumann_entropy(omega))


@dataclass(frozen=True)
class GibbsSpec:
    """Strictly positive reference operators for the thermodynamic capacity."""

    gamma_A: np.ndarray
    gamma_B: np.ndarray

    def __post_init__(self):
        for name in ("gamma_A", "gamma_B"):
            g = hermitian(getattr(self, name), check=True)
            if np.linalg.eigvalsh(g)[0] <= 0:
                raise InvalidParameter(f"{name} must be positive definite")
            object.__setattr__(self, name, g)

    @classmethod
    def identity(cls, dim_a, dim_b):
        return cls(np.eye(dim_a), np.eye(dim_b))

    @classmethod
    def from_hamiltonians(cls, h_a, h_b, beta):
        """``Gamma = exp(-H / beta)``; ``beta = inf`` gives the identity."""
        if not beta > 0:
            raise InvalidParameter(f"beta must be > 0 (or inf), got {beta!r}")
        return cls(_thermal_operator(h_a, beta), _thermal_operator(h_b, beta))

    @property
    def log_gamma_A(self):
        return log_support(self.gamma_A)

    @property
    def log_gamma_B(self):
        return log_support(self.gamma_B)


def _thermal_operator(h, beta):
    h = hermitian(h, check=True)
    if math.isinf(beta):
        return np.eye(h.shape[0], dtype=complex)
    w, v = eig_hermitian(-h / beta)
    if w[-1] > EXP_LIMIT or w[0] < -EXP_LIMIT:
        raise OverflowRisk("Hamiltonian spectrum too wide for the given beta")
    return (v * np.exp(w)) @ v.conj().T


def trace_distance(a, b):
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(np.asarray(a) - np.asarray(b)))))
