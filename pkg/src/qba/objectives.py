"""The four capacity objectives (Holevo, thermodynamic, coherent, mutual) and
their derived quantities and sampling diagnostics."""

from dataclasses import dataclass, field

import numpy as np

from .channels import CqChannel, KrausChannel, classical_channel
from .engine import ObjectiveSpec, solve
from .errors import DimensionError, InvalidParameter
from .linalg import log_support
from .states import (
    GibbsSpec,
    random_density,
    relative_entropy,
    von_neumann_entropy,
)

LESS_NOISY_TOL = 1e-9
MIN_PAIR_DIVERGENCE = 1e-8


def holevo_objective(ch: CqChannel) -> ObjectiveSpec:
    """Holevo quantity of a cq channel; iterates are probability vectors.

    ``F(mu)_i = D(tau_i || sum_x mu_x tau_x)``.
    """
    taus = ch.outputs
    neg_entropies = np.array([-von_neumann_entropy(t) for t in taus])

    def f_map(lam):
        log_out = log_support(ch.apply(lam))
        # Tr(tau_i L) for every i at once
        cross = np.einsum("xij,ji->x", taus, log_out).real
        return neg_entropies - cross

    def objective_eval(lam):
        lam = np.asarray(lam, dtype=float)
        return von_neumann_entropy(ch.apply(lam)) + float(np.dot(lam, neg_entropies))

    def identity_rhs(lam, mu):
        return relative_entropy(ch.apply(lam), ch.apply(mu))

    return ObjectiveSpec(
        name="holevo",
        dim_in=ch.dim_in,
        f_map=f_map,
        objective_eval=objective_eval,
        gamma_default=1.0,
        gamma_max=1.0,
        diagonal_only=True,
        identity_rhs=identity_rhs,
        channel=ch,
    )


def thermo_objective(ch: KrausChannel, gibbs: GibbsSpec = None) -> ObjectiveSpec:
    """Thermodynamic capacity ``max D(E(rho)||Gamma_B) - D(rho||Gamma_A)``."""
    if gibbs is None:
        gibbs = GibbsSpec.identity(ch.dim_in, ch.dim_out)
    if gibbs.gamma_A.shape[0] != ch.dim_in or gibbs.gamma_B.shape[0] != ch.dim_out:
        raise DimensionError("Gibbs operators do not match the channel dimensions")
    offset = gibbs.log_gamma_A - ch.apply_adjoint(gibbs.log_gamma_B)

    def f_map(sigma):
        return -log_support(sigma) + ch.apply_adjoint(log_support(ch.apply(sigma))) + offset

    def objective_eval(rho):
        return (
            von_neumann_entropy(rho)
            - von_neumann_entropy(ch.apply(rho))
            + float(np.real(np.trace(rho @ offset)))
        )

    def identity_rhs(rho, sigma):
        return relative_entropy(rho, sigma) - relative_entropy(ch.apply(rho), ch.apply(sigma))

    return ObjectiveSpec(
        name="thermo",
        dim_in=ch.dim_in,
        f_map=f_map,
        objective_eval=objective_eval,
        gamma_default=1.0,
        gamma_max=1.0,
        identity_rhs=identity_rhs,
        channel=ch,
    )


def entropy_gain(ch, config=None):
    """Minimal entropy gain ``min S(E(rho)) - S(rho)``."""
    return -solve(thermo_objective(ch), config).capacity


def cb_min_conditional_entropy(ch, config=None):
    return -solve(thermo_objective(ch.complementary), config).capacity


def coherent_info_objective(ch: KrausChannel, check_samples=200, seed=0) -> ObjectiveSpec:
    """Coherent information ``max S(E(rho)) - S(E_c(rho))``.

    Only certified for less noisy channels; the sampled check runs with
    ``check_samples`` pairs (``0`` skips it and assumes certification).
    """
    comp = ch.complementary

    def f_map(sigma):
        return comp.apply_adjoint(log_support(comp.apply(sigma))) - ch.apply_adjoint(
            log_support(ch.apply(sigma))
        )

    def objective_eval(rho):
        return von_neumann_entropy(ch.apply(rho)) - von_neumann_entropy(comp.apply(rho))

    def identity_rhs(rho, sigma):
        return relative_entropy(ch.apply(rho), ch.apply(sigma)) - relative_entropy(
            comp.apply(rho), comp.apply(sigma)
        )

    certified = True
    if check_samples:
        certified, _ = less_noisy_check(ch, check_samples, seed)
    return ObjectiveSpec(
        name="coherent",
        dim_in=ch.dim_in,
        f_map=f_map,
        objective_eval=objective_eval,
        gamma_default=1.0,
        gamma_max=1.0,
        identity_rhs=identity_rhs,
        certified=certified,
        channel=ch,
    )


def mutual_info_objective(ch: KrausChannel) -> ObjectiveSpec:
    """Channel mutual information ``max S(rho) + S(E(rho)) - S(E_c(rho))``; standard gamma is 2."""
    comp = ch.complementary

    def f_map(sigma):
        return (
            -log_support(sigma)
            + comp.apply_adjoint(log_support(comp.apply(sigma)))
            - ch.apply_adjoint(log_support(ch.apply(sigma)))
        )

    def objective_eval(rho):
        return (
            von_neumann_entropy(rho)
            + von_neumann_entropy(ch.apply(rho))
            - von_neumann_entropy(comp.apply(rho))
        )

    def identity_rhs(rho, sigma):
        return (
            relative_entropy(rho, sigma)
            + relative_entropy(ch.apply(rho), ch.apply(sigma))
            - relative_entropy(comp.apply(rho), comp.apply(sigma))
        )

    return ObjectiveSpec(
        name="mutual",
        dim_in=ch.dim_in,
        f_map=f_map,
        objective_eval=objective_eval,
        gamma_default=2.0,
        gamma_max=2.0,
        identity_rhs=identity_rhs,
        channel=ch,
    )


def identity_check(spec, rho, sigma):
    """``|Tr rho (F(sigma) - F(rho)) - rhs|`` for the objective's closed-form identity."""
    lhs = spec.pairing(rho, spec.f_map(sigma) - spec.f_map(rho))
    return abs(lhs - spec.identity_rhs(rho, sigma))


def _sample_pairs(dim, samples, seed):
    rng = np.random.default_rng(seed)
    drawn = 0
    while drawn < samples:
        rho = random_density(dim, rng)
        sigma = random_density(dim, rng)
        d = relative_entropy(rho, sigma)
        if d < MIN_PAIR_DIVERGENCE:
            continue
        drawn += 1
        yield rho, sigma, d


def less_noisy_check(ch: KrausChannel, samples=1000, seed=0):
    """Sampled test of ``D(E(rho)||E(sigma)) >= D(E_c(rho)||E_c(sigma))``.

    Returns ``(passed, worst_margin)``.
    """
    if samples < 1:
        raise InvalidParameter("samples must be >= 1")
    comp = ch.complementary
    worst = np.inf
    for rho, sigma, _ in _sample_pairs(ch.dim_in, samples, seed):
        margin = relative_entropy(ch.apply(rho), ch.apply(sigma)) - relative_entropy(
            comp.apply(rho), comp.apply(sigma)
        )
        worst = min(worst, margin)
    return bool(worst >= -LESS_NOISY_TOL), float(worst)


@dataclass
class CoefficientEstimates:
    """Monte-Carlo extrema of relative-entropy ratios under a channel.

    Sampled suprema (``*_lb``) bound the true supremum from below; sampled
    infima (``*_ub``) bound the true infimum from above.
    """

    eta_con_lb: float
    eta_exp_ub: float
    zeta_con_lb: float
    zeta_exp_ub: float
    samples: int
    method: str = "MonteCarlo"
    bound_direction: dict = field(
        default_factory=lambda: {
            "eta_con_lb": "lower",
            "eta_exp_ub": "upper",
            "zeta_con_lb": "lower",
            "zeta_exp_ub": "upper",
        }
    )


def estimate_coefficients(ch: KrausChannel, samples=1000, seed=0):
    if samples < 1:
        raise InvalidParameter("samples must be >= 1")
    comp = ch.complementary
    eta, zeta = [], []
    for rho, sigma, d in _sample_pairs(ch.dim_in, samples, seed):
        d_out = relative_entropy(ch.apply(rho), ch.apply(sigma))
        d_env = relative_entropy(comp.apply(rho), comp.apply(sigma))
        eta.append(d_out / d)
        zeta.append((d_out - d_env) / d)
    return CoefficientEstimates(
        eta_con_lb=max(eta),
        eta_exp_ub=min(eta),
        zeta_con_lb=max(zeta),
        zeta_exp_ub=min(zeta),
        samples=samples,
    )


def classical_capacity_objective(q):
    """Holevo objective on a stochastic matrix embedded as a diagonal cq channel."""
    return holevo_objective(classical_channel(q))
