"""Independent baselines for validating solver output at small scale.

Nothing here is used by :func:`qba.engine.solve`.
"""

import math
from typing import NamedTuple

import numpy as np

from .channels import check_stochastic
from .errors import InvalidParameter, OverflowRisk, Unsupported

THERMO_GAMMA1 = "thermo"
COHERENT_INFO = "coherent"
MUTUAL_INFO = "mutual"
OBJECTIVES = (THERMO_GAMMA1, COHERENT_INFO, MUTUAL_INFO)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _xlogx(p):
    out = np.zeros_like(p, dtype=float)
    on = p > 0
    out[on] = p[on] * np.log(p[on])
    return out


class ClassicalBAResult(NamedTuple):
    capacity: float
    distribution: np.ndarray
    iterates: list  # iterates[t] is the input distribution before step t + 1
    history: list  # per step: (capacity_estimate, posterior_gap, log_z)
    converged: bool


def classical_ba(q, epsilon=1e-9, gamma=1.0, max_iter=100000, iterations=None, callback=None):
    """Blahut-Arimoto on a column-stochastic ``Q[y, x]`` using vectors only.

    Stops when ``max_x D(Q_x||Q lam) - C <= epsilon`` unless ``iterations``
    fixes the step count.  ``callback(t, c, gap, log_z)`` runs after each step.
    """
    q = check_stochastic(q)
    nx = q.shape[1]
    neg_h = _xlogx(q).sum(axis=0)  # sum_y Q log Q per input
    lam = np.full(nx, 1.0 / nx)
    iterates = [lam]
    history = []
    budget = max_iter if iterations is None else iterations
    c = math.nan
    converged = False
    for _ in range(budget):
        out = q @ lam
        logout = np.zeros_like(out)
        logout[out > 0] = np.log(out[out > 0])
        d = neg_h - logout @ q
        a = d / gamma
        top = a.max()
        w = lam * np.exp(a - top)
        s = w.sum()
        log_z = top + math.log(s)
        c = gamma * log_z
        lam = w / s
        iterates.append(lam)
        history.append((c, d.max() - c, log_z))
        if callback is not None:
            callback(len(history), c, d.max() - c, log_z)
        if iterations is None and d.max() - c <= epsilon:
            converged = True
            break
    return ClassicalBAResult(c, lam, iterates, history, converged)


def classical_ba_capacity(q, epsilon=1e-9):
    return classical_ba(q, epsilon).capacity


def binary_entropy(p):
    p = np.asarray(p, dtype=float)
    return -(_xlogx(p) + _xlogx(1.0 - p))


def _qubit_states(r, theta, phi):
    """Density matrices for Bloch coordinates, broadcast to shape (..., 2, 2)."""
    x = r * np.sin(theta) * np.cos(phi)
    y = r * np.sin(theta) * np.sin(phi)
    z = r * np.cos(theta)
    rho = np.empty(np.shape(x) + (2, 2), dtype=complex)
    rho[..., 0, 0] = 0.5 * (1 + z)
    rho[..., 1, 1] = 0.5 * (1 - z)
    rho[..., 0, 1] = 0.5 * (x - 1j * y)
    rho[..., 1, 0] = 0.5 * (x + 1j * y)
    return rho


def _entropies(mats):
    w = np.linalg.eigvalsh(mats)
    return -_xlogx(np.clip(w, 0.0, None)).sum(axis=-1)


def _objective_values(ch, objective, rho):
    out = np.einsum("...ij,ijbc->...bc", rho, ch.table)
    if objective == THERMO_GAMMA1:
        return _entropies(rho) - _entropies(out)
    env = np.einsum("...ij,ijbc->...bc", rho, ch.complementary.table)
    if objective == COHERENT_INFO:
        return _entropies(out) - _entropies(env)
    return _entropies(rho) + _entropies(out) - _entropies(env)


def _golden_max(fn, lo, hi, iters=60):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
    x = c if fc >= fd else d
    return x, max(fc, fd)


def bloch_grid_oracle(ch, objective, resolution=40, chunk=200_000):
    """Maximize a single-qubit objective over a Bloch-ball grid, then refine.

    The grid has ``resolution`` points in each of ``r in [0, 1]``,
    ``theta in [0, pi]`` and ``phi in [0, 2 pi)``.  Refinement is one
    golden-section line search per coordinate, starting from the best grid
    point.  Every returned value is attained by an actual state, so the result
    is a lower bound on the true maximum.
    """
    if ch.dim_in != 2:
        raise Unsupported(f"Bloch-grid oracle needs a qubit input, got dim {ch.dim_in}")
    if objective not in OBJECTIVES:
        raise InvalidParameter(f"unknown objective {objective!r}")
    rs = np.linspace(0.0, 1.0, resolution)
    ths = np.linspace(0.0, np.pi, resolution)
    phs = np.linspace(0.0, 2 * np.pi, resolution, endpoint=False)
    grid = np.stack(np.meshgrid(rs, ths, phs, indexing="ij"), axis=-1).reshape(-1, 3)

    best_val, best_idx = -np.inf, 0
    for start in range(0, len(grid), chunk):
        g = grid[start : start + chunk]
        vals = _objective_values(ch, objective, _qubit_states(g[:, 0], g[:, 1], g[:, 2]))
        i = int(np.argmax(vals))  # first maximal index: lexicographic tie-break
        if vals[i] > best_val:
            best_val, best_idx = float(vals[i]), start + i

    point = grid[best_idx].copy()

    def at(p):
        return float(_objective_values(ch, objective, _qubit_states(*p)))

    steps = (rs[1] - rs[0], ths[1] - ths[0], phs[1] - phs[0])
    bounds = ((0.0, 1.0), (0.0, np.pi), (-np.inf, np.inf))
    for axis in range(3):
        lo = max(bounds[axis][0], point[axis] - steps[axis])
        hi = min(bounds[axis][1], point[axis] + steps[axis])

        def line(x, axis=axis):
            p = point.copy()
            p[axis] = x
            return at(p)

        x, val = _golden_max(line, lo, hi)
        if val > best_val:
            best_val = val
            point[axis] = x
    return best_val


def diagonal_scan_coherent_ad(p, points=1_000_001):
    """``max_q h((1-p) q) - h(p q)`` by dense scan over the excited population ``q``."""
    q = np.linspace(0.0, 1.0, points)
    vals = binary_entropy((1 - p) * q) - binary_entropy(p * q)
    i = int(np.argmax(vals))
    return float(vals[i]), float(q[i])


def independent_expm(m, max_norm=700.0):
    """Matrix exponential by scaling and squaring of a Taylor series; no eigensolver."""
    m = np.asarray(m, dtype=complex)
    norm = np.linalg.norm(m, 1)
    if not np.isfinite(norm) or norm > max_norm:
        raise OverflowRisk(f"norm {norm:.3g} too large for the Taylor path")
    s = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0.5 else 0
    a = m / 2.0**s
    result = np.eye(m.shape[0], dtype=complex)
    term = np.eye(m.shape[0], dtype=complex)
    for k in range(1, 30):
        term = term @ a / k
        result = result + term
        if np.linalg.norm(term, 1) < 1e-18 * np.linalg.norm(result, 1):
            break
    for _ in range(s):
        result = result @ result
    return result


def gibbs_update_independent(rho, f, gamma):
    """The Gibbs-form update evaluated with :func:`independent_expm` and a Taylor matrix log."""
    log_rho = _log_via_series(rho)
    h = log_rho + f / gamma
    shift = np.trace(h).real / h.shape[0]
    e = independent_expm(h - shift * np.eye(h.shape[0]))
    z = np.trace(e).real
    return e / z, shift + math.log(z)


def _log_via_series(rho, squarings=20):
    """Matrix log by inverse scaling and squaring (Denman-Beavers roots, Mercator series)."""
    x = np.asarray(rho, dtype=complex)
    n = x.shape[0]
    eye = np.eye(n)
    k = 0
    while np.linalg.norm(x - eye, 1) > 0.1 and k < squarings:
        y, z = x, eye.astype(complex)
        for _ in range(50):
            y, z = 0.5 * (y + np.linalg.inv(z)), 0.5 * (z + np.linalg.inv(y))
        x = y
        k += 1
    e = x - eye
    result = np.zeros_like(e)
    term = eye.astype(complex)
    for j in range(1, 60):
        term = term @ e
        result = result + ((-1) ** (j + 1)) * term / j
    return result * 2.0**k
