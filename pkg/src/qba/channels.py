"""Quantum channels in Kraus form, cq channels, and a small builtin library.

A :class:`KrausChannel` eagerly builds lookup tables for the channel, its
adjoint and its complementary channel, so that applying any of them is a single
tensor contraction against the input matrix entries.
"""

from functools import cached_property

import numpy as np

from .errors import DimensionError, InvalidParameter, ValidationError
from .states import density, random_density

COMPLETENESS_TOL = 1e-10


def _unit_table(kraus, dim_in):
    """``table[i, j] = sum_k A_k |i><j| A_k^dagger``, shape (A, A, B, B)."""
    # A_k |i> is column i of A_k
    return np.einsum("kbi,kcj->ijbc", kraus, kraus.conj())


class KrausChannel:
    """Channel ``rho -> sum_k A_k rho A_k^dagger`` with ``A_k`` of shape (dim_out, dim_in)."""

    def __init__(self, kraus_ops, atol=COMPLETENESS_TOL, check_rank=True):
        ops = np.asarray(kraus_ops, dtype=complex)
        if ops.ndim == 2:
            ops = ops[None]
        if ops.ndim != 3 or ops.shape[0] == 0:
            raise DimensionError(f"Kraus operators must form a (K, out, in) array, got {ops.shape}")
        if not np.all(np.isfinite(ops)):
            raise ValidationError("non-finite Kraus entries", invariant="finite")
        self.kraus_ops = ops
        self.kraus_rank, self.dim_out, self.dim_in = ops.shape
        if check_rank and self.kraus_rank > self.dim_in * self.dim_out:
            raise ValidationError(
                f"Kraus rank {self.kraus_rank} exceeds |A||B| = {self.dim_in * self.dim_out}",
                invariant="kraus_rank",
            )
        resid = completeness_residual(ops)
        if resid > atol:
            raise ValidationError(
                f"completeness residual {resid:.6g}", invariant="completeness", residual=resid
            )
        self.table = _unit_table(ops, self.dim_in)
        self.table.setflags(write=False)

    def __repr__(self):
        return f"KrausChannel(dim_in={self.dim_in}, dim_out={self.dim_out}, K={self.kraus_rank})"

    @cached_property
    def adjoint_table(self):
        """``adjoint_table[k, l] = E^dagger(|k><l|)``, shape (B, B, A, A)."""
        # E^dagger(|b><c|) = sum_k A_k^dagger |b><c| A_k
        t = np.einsum("kbi,kcj->bcij", self.kraus_ops.conj(), self.kraus_ops)
        t.setflags(write=False)
        return t

    @cached_property
    def _complementary(self):
        return complementary(self)

    def apply(self, rho):
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim_in, self.dim_in):
            raise DimensionError(f"input shape {rho.shape}, channel expects {self.dim_in}")
        out = np.einsum("ij,ijbc->bc", rho, self.table)
        return 0.5 * (out + out.conj().T)

    def apply_kraus(self, rho):
        """Direct Kraus sum, the reference path for :meth:`apply`."""
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim_in, self.dim_in):
            raise DimensionError(f"input shape {rho.shape}, channel expects {self.dim_in}")
        a = self.kraus_ops
        return np.einsum("kbi,ij,kcj->bc", a, rho, a.conj())

    def apply_adjoint(self, x):
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.dim_out, self.dim_out):
            raise DimensionError(f"observable shape {x.shape}, channel output is {self.dim_out}")
        out = np.einsum("bc,bcij->ij", x, self.adjoint_table)
        return 0.5 * (out + out.conj().T)

    @property
    def complementary(self):
        return self._complementary

    def choi(self):
        a, b = self.dim_in, self.dim_out
        return self.table.transpose(0, 2, 1, 3).reshape(a * b, a * b)


def completeness_residual(ops, ord="fro"):
    ops = np.asarray(ops, dtype=complex)
    s = np.einsum("kbi,kbj->ij", ops.conj(), ops)
    return float(np.linalg.norm(s - np.eye(s.shape[0]), ord))


def stinespring(ch):
    """Isometry ``V = sum_k A_k (x) |k>_E`` as a (B*K, A) matrix, environment last."""
    return ch.kraus_ops.transpose(1, 0, 2).reshape(ch.dim_out * ch.kraus_rank, ch.dim_in)


def complementary(ch):
    """Complementary channel ``A -> E`` with ``dim E = K``.

    Matrix elements ``<k|E_c(rho)|l> = Tr(A_k rho A_l^dagger)``; Kraus operator
    ``b`` has rows ``(A_k)_{b, .}``.
    """
    ops = ch.kraus_ops.transpose(1, 0, 2)  # (B, K, A)
    # B operators may exceed A*K (e.g. isometries); that set is valid, just not minimal
    tol = max(COMPLETENESS_TOL, 10 * completeness_residual(ch.kraus_ops))
    comp = KrausChannel(ops, atol=tol, check_rank=False)
    # cross-check against the explicit dilation on a fixed full-rank input
    rho = np.diag(np.arange(1, ch.dim_in + 1, dtype=float)).astype(complex)
    if ch.dim_in > 1:
        rho[0, -1] = rho[-1, 0] = 0.25
    rho /= np.trace(rho).real
    v = stinespring(ch)
    joint = (v @ rho @ v.conj().T).reshape(ch.dim_out, ch.kraus_rank, ch.dim_out, ch.kraus_rank)
    via_dilation = np.einsum("bkbl->kl", joint)
    assert np.linalg.norm(via_dilation - comp.apply(rho)) <= 1e-9
    return comp


class CqChannel:
    """Classical-quantum channel given by its output states ``tau_x``."""

    def __init__(self, outputs, atol=1e-10):
        outs = [density(t, atol=atol) for t in outputs]
        if not outs:
            raise DimensionError("cq channel needs at least one output")
        dims = {t.shape[0] for t in outs}
        if len(dims) != 1:
            raise DimensionError(f"outputs have inconsistent dimensions {sorted(dims)}")
        self.outputs = np.stack(outs)
        self.outputs.setflags(write=False)
        self.dim_in = len(outs)
        self.dim_out = dims.pop()

    def __repr__(self):
        return f"CqChannel(dim_in={self.dim_in}, dim_out={self.dim_out})"

    def apply(self, lam):
        lam = np.asarray(lam, dtype=float)
        if lam.shape != (self.dim_in,):
            raise DimensionError(f"expected {self.dim_in} weights, got shape {lam.shape}")
        return np.tensordot(lam, self.outputs, axes=1)

    @cached_property
    def is_diagonal(self):
        d = self.outputs
        off = d - np.einsum("xii->xi", d)[:, :, None] * np.eye(self.dim_out)
        return bool(np.abs(off).max() == 0.0)


def cq_apply(ch, lam):
    return ch.apply(lam)


def identity_channel(dim):
    return KrausChannel(np.eye(dim)[None])


def unitary_channel(u):
    return KrausChannel(np.asarray(u)[None])


def amplitude_damping(p):
    if not 0.0 <= p <= 1.0:
        raise InvalidParameter(f"damping probability must lie in [0, 1], got {p!r}")
    a0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - p)]])
    a1 = np.array([[0.0, np.sqrt(p)], [0.0, 0.0]])
    if p == 0.0:
        return KrausChannel([a0])
    return KrausChannel([a0, a1])


def depolarizing(q, dim=2):
    """``rho -> (1 - q) rho + q Tr(rho) 1/dim`` via the Weyl (clock/shift) basis."""
    if not 0.0 <= q <= 1.0:
        raise InvalidParameter(f"depolarizing parameter must lie in [0, 1], got {q!r}")
    if dim < 1:
        raise InvalidParameter("dimension must be positive")
    shift = np.roll(np.eye(dim), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(dim) / dim))
    ops = []
    for a in range(dim):
        for b in range(dim):
            w = np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b)
            c = q / dim**2 + (1.0 - q if a == b == 0 else 0.0)
            if c > 0:
                ops.append(np.sqrt(c) * w)
    return KrausChannel(ops)


def classical_channel(q, atol=1e-10):
    """Embed a column-stochastic matrix ``Q[y, x] = P(y|x)`` as a diagonal cq channel."""
    q = check_stochastic(q, atol)
    return CqChannel([np.diag(q[:, x]) for x in range(q.shape[1])], atol=atol)


def check_stochastic(q, atol=1e-10):
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or q.size == 0:
        raise InvalidParameter(f"stochastic matrix must be 2-D, got shape {q.shape}")
    if not np.all(np.isfinite(q)) or np.any(q < -atol):
        raise InvalidParameter("stochastic matrix has negative or non-finite entries")
    resid = float(np.max(np.abs(q.sum(axis=0) - 1.0)))
    if resid > atol:
        raise InvalidParameter(f"columns of stochastic matrix do not sum to 1 (residual {resid:.3g})")
    return np.clip(q, 0.0, None)


def random_cq(n_inputs, dim_out, seed):
    """Random cq channel with outputs ``G G^dagger / Tr`` (complex Gaussian ``G``, square)."""
    rng = np.random.default_rng(seed)
    return CqChannel([random_density(dim_out, rng) for _ in range(n_inputs)])


def random_kraus_channel(dim_in, dim_out, kraus_rank, rng):
    """Random channel from the first ``dim_in`` columns of a random isometry."""
    if kraus_rank > dim_in * dim_out:
        raise InvalidParameter("Kraus rank exceeds |A||B|")
    n = dim_out * kraus_rank
    if n < dim_in:
        raise InvalidParameter("need dim_out * kraus_rank >= dim_in for an isometry")
    g = rng.standard_normal((n, dim_in)) + 1j * rng.standard_normal((n, dim_in))
    v, _ = np.linalg.qr(g)
    ops = v.reshape(kraus_rank, dim_out, dim_in)
    return KrausChannel(ops)


def cq_from_channel(ch):
    """Restrict a Kraus channel to computational-basis inputs."""
    return CqChannel([ch.table[i, i] for i in range(ch.dim_in)])
