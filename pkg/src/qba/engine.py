"""Generic quantum Blahut-Arimoto iteration.

An objective is described by a Hermitian-valued map ``F`` on states.  Each
step replaces ``rho`` by the Gibbs state of ``log rho + F(rho)/gamma``; the
capacity estimate after the step is ``gamma * log Z`` and the largest
eigenvalue of ``F(rho)`` is a certified upper bound on the capacity.

Objectives flagged ``diagonal_only`` work on probability vectors: ``F``
returns a real vector and every matrix function reduces to elementwise
operations.
"""

import enum
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidParameter, NonMonotone, RankDeficientIterate
from .linalg import SUPPORT_TOL, eig_hermitian, trace_product
from .states import kl_divergence, relative_entropy

ADAPTIVE_GAMMA_FLOOR = 1e-6
DEGENERATE_STEP = 1e-12
MONOTONE_SLACK = 1e-8


class Mode(str, enum.Enum):
    STANDARD = "standard"
    FIXED_GAMMA = "fixed-gamma"
    ADAPTIVE = "adaptive"


class Termination(str, enum.Enum):
    POSTERIOR_GAP = "PosteriorGap"
    ITERATION_BUDGET = "IterationBudget"


@dataclass(frozen=True)
class ObjectiveSpec:
    """One capacity problem in Blahut-Arimoto form.

    ``gamma_min`` is the provable lower end of the acceleration interval; it
    depends on channel coefficients that are generally not computable, so it
    may be ``None``.  ``identity_rhs(rho, sigma)`` evaluates the closed form of
    ``Tr rho (F(sigma) - F(rho))`` in terms of relative entropies.
    """

    name: str
    dim_in: int
    f_map: Callable
    objective_eval: Callable
    gamma_default: float
    gamma_max: float
    gamma_min: Optional[float] = None
    diagonal_only: bool = False
    identity_rhs: Optional[Callable] = None
    certified: bool = True
    channel: object = None

    def __post_init__(self):
        lo = 0.0 if self.gamma_min is None else self.gamma_min
        if not (lo <= self.gamma_default <= self.gamma_max and self.gamma_default > 0):
            raise InvalidParameter(
                f"default gamma {self.gamma_default} outside ({lo}, {self.gamma_max}]"
            )

    def initial_state(self):
        if self.diagonal_only:
            return np.full(self.dim_in, 1.0 / self.dim_in)
        return np.eye(self.dim_in, dtype=complex) / self.dim_in

    def divergence(self, rho, sigma):
        if self.diagonal_only:
            return kl_divergence(rho, sigma)
        return relative_entropy(rho, sigma)

    def pairing(self, rho, f):
        """``Tr rho F`` for a state and an ``F`` value."""
        if self.diagonal_only:
            return float(np.dot(rho, f))
        return trace_product(rho, f)

    def top_eigenvalue(self, f):
        if self.diagonal_only:
            return float(np.max(f))
        return float(np.linalg.eigvalsh(f)[-1])


@dataclass
class SolverConfig:
    epsilon: float = 1e-6
    max_iterations: Optional[int] = None
    mode: Mode = Mode.STANDARD
    gamma: Optional[float] = None  # required for FIXED_GAMMA
    support_tol: float = SUPPORT_TOL
    eig_tol: float = 1e-12
    trace_every: int = 1

    def __post_init__(self):
        self.mode = Mode(self.mode)
        if not self.epsilon > 0:
            raise InvalidParameter("epsilon must be positive")
        if self.mode is Mode.FIXED_GAMMA and not (self.gamma is not None and self.gamma > 0):
            raise InvalidParameter("fixed-gamma mode needs gamma > 0")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise InvalidParameter("max_iterations must be positive")
        if self.trace_every < 1:
            raise InvalidParameter("trace_every must be positive")


@dataclass
class IterationTrace:
    t: list = field(default_factory=list)
    capacity_estimate: list = field(default_factory=list)
    posterior_gap: list = field(default_factory=list)
    gamma: list = field(default_factory=list)
    log_z: list = field(default_factory=list)
    elapsed: list = field(default_factory=list)  # seconds since solve start

    def append(self, t, c, gap, gamma, log_z, elapsed):
        self.t.append(t)
        self.capacity_estimate.append(c)
        self.posterior_gap.append(gap)
        self.gamma.append(gamma)
        self.log_z.append(log_z)
        self.elapsed.append(elapsed)

    def __len__(self):
        return len(self.t)

    def rows(self):
        return zip(self.t, self.capacity_estimate, self.posterior_gap, self.gamma, self.log_z, self.elapsed)


@dataclass
class CapacityResult:
    capacity: float
    final_state: np.ndarray
    iterations: int
    terminated_by: Termination
    posterior_gap: float
    trace: IterationTrace
    objective: str = ""
    mode: Mode = Mode.STANDARD
    certified: bool = True

    @property
    def upper_bound(self):
        return self.capacity + self.posterior_gap


def a_priori_iterations(gamma, epsilon, dim):
    """Iterations after which the standard scheme is ``epsilon``-accurate from the uniform start."""
    if not epsilon > 0:
        raise InvalidParameter("epsilon must be positive")
    return math.ceil(gamma * math.log(dim) / epsilon)


def capacity_estimate_from_logZ(gamma, log_z):
    return gamma * log_z


def _check_full_rank(rho, spec, eig_tol):
    if spec.diagonal_only:
        low = float(np.min(rho))
    else:
        low = float(np.linalg.eigvalsh(rho)[0])
    if not low > eig_tol:
        raise RankDeficientIterate(f"iterate has smallest eigenvalue {low:.3g}")


def _update(rho, gamma, spec, f, eig_tol):
    if spec.diagonal_only:
        if not np.min(rho) > 0:
            raise RankDeficientIterate("probability vector lost full support")
        a = np.asarray(f, dtype=float) / gamma
        top = float(np.max(a))
        w = rho * np.exp(a - top)
        s = float(w.sum())
        return w / s, top + math.log(s)
    w, v = eig_hermitian(rho)
    if not w[0] > eig_tol:
        raise RankDeficientIterate(f"iterate has smallest eigenvalue {w[0]:.3g}")
    log_rho = (v * np.log(w)) @ v.conj().T
    h, u = eig_hermitian(log_rho + f / gamma)
    top = h[-1]
    e = np.exp(h - top)
    s = float(e.sum())
    nxt = (u * (e / s)) @ u.conj().T
    return 0.5 * (nxt + nxt.conj().T), float(top + math.log(s))


def ba_update(rho, gamma, spec, eig_tol=1e-12):
    """One Blahut-Arimoto step; returns ``(rho_next, log_Z)``."""
    if not gamma > 0:
        raise InvalidParameter("gamma must be positive")
    return _update(rho, gamma, spec, spec.f_map(rho), eig_tol)


def two_variable_objective(spec, rho, sigma, gamma):
    """``J_gamma(rho, sigma) = -gamma D(rho||sigma) + Tr rho F(sigma)``."""
    return -gamma * spec.divergence(rho, sigma) + spec.pairing(rho, spec.f_map(sigma))


def posterior_gap(rho, c_t, spec):
    return spec.top_eigenvalue(spec.f_map(rho)) - c_t


def adaptive_gamma(rho_t, rho_prev, spec, gamma_prev, f_t=None, f_prev=None):
    """Ratio of the bounding term to the step's relative entropy, clamped to ``[1e-6, gamma_max]``."""
    d = spec.divergence(rho_t, rho_prev)
    if not d >= DEGENERATE_STEP or not math.isfinite(d):
        return gamma_prev
    f_t = spec.f_map(rho_t) if f_t is None else f_t
    f_prev = spec.f_map(rho_prev) if f_prev is None else f_prev
    num = spec.pairing(rho_t, f_prev - f_t)
    return min(max(num / d, ADAPTIVE_GAMMA_FLOOR), spec.gamma_max)


def solve(spec, config=None, initial=None, callback=None):
    """Iterate until the a-posteriori gap drops below ``config.epsilon``.

    ``callback(t, c, gap, gamma, log_z, elapsed)`` is invoked after every
    iteration (used by the CLI to stream the trace).
    """
    config = SolverConfig() if config is None else config
    mode = config.mode
    if mode is Mode.FIXED_GAMMA:
        gamma = float(config.gamma)
    else:
        gamma = spec.gamma_default
    n = config.max_iterations
    if n is None:
        n = max(1, a_priori_iterations(spec.gamma_default, config.epsilon, spec.dim_in))

    rho = spec.initial_state() if initial is None else np.array(initial, dtype=float if spec.diagonal_only else complex)
    _check_full_rank(rho, spec, config.eig_tol)

    trace = IterationTrace()
    start = time.perf_counter()
    prev_rho = prev_f = None
    prev_c = -math.inf
    c = gap = math.nan
    terminated = Termination.ITERATION_BUDGET
    t = 0
    for t in range(1, n + 1):
        f = spec.f_map(rho)
        if mode is Mode.ADAPTIVE and prev_rho is not None:
            gamma = adaptive_gamma(rho, prev_rho, spec, gamma, f_t=f, f_prev=prev_f)
        nxt, log_z = _update(rho, gamma, spec, f, config.eig_tol)
        c = capacity_estimate_from_logZ(gamma, log_z)
        gap = spec.top_eigenvalue(f) - c
        elapsed = time.perf_counter() - start
        if t % config.trace_every == 0 or t == n or gap <= config.epsilon:
            trace.append(t, c, gap, gamma, log_z, elapsed)
        if callback is not None:
            callback(t, c, gap, gamma, log_z, elapsed)
        if mode is Mode.STANDARD and spec.certified and c < prev_c - MONOTONE_SLACK:
            raise NonMonotone(f"{spec.name}: estimate fell from {prev_c!r} to {c!r} at t={t}")
        prev_c = c
        prev_rho, prev_f, rho = rho, f, nxt
        if math.isfinite(gap) and gap <= config.epsilon:
            terminated = Termination.POSTERIOR_GAP
            break

    return CapacityResult(
        capacity=c,
        final_state=rho,
        iterations=t,
        terminated_by=terminated,
        posterior_gap=gap,
        trace=trace,
        objective=spec.name,
        mode=mode,
        certified=spec.certified,
    )


def exponential_rate_diagnostic(trace, epsilon=1e-6):
    """Least-squares decay rate of ``C_final - C(t)``.

    Fits ``log(C_final - C(t)) ~ b + t log(1 - delta)`` over iterations whose
    gap exceeds ``10 * epsilon`` and returns ``delta``, or ``None`` with fewer
    than four usable points.
    """
    c = np.asarray(getattr(trace, "capacity_estimate", trace), dtype=float)
    t = np.asarray(getattr(trace, "t", np.arange(1, len(c) + 1)), dtype=float)
    if c.size < 2:
        return None
    gaps = c[-1] - c
    use = gaps > 10 * epsilon
    if np.count_nonzero(use) < 4:
        return None
    slope, _ = np.polyfit(t[use], np.log(gaps[use]), 1)
    return float(1.0 - math.exp(slope))
