import math

import numpy as np
import pytest
import scipy.linalg

from qba.channels import amplitude_damping, classical_channel, depolarizing, identity_channel
from qba.engine import SolverConfig, ba_update, solve
from qba.errors import InvalidParameter, OverflowRisk, Unsupported
from qba.linalg import matrix_exp, random_hermitian
from qba.objectives import classical_capacity_objective, coherent_info_objective, holevo_objective
from qba.oracles import (
    binary_entropy,
    bloch_grid_oracle,
    classical_ba,
    classical_ba_capacity,
    diagonal_scan_coherent_ad,
    gibbs_update_independent,
    independent_expm,
)

BSC = np.array([[0.9, 0.1], [0.1, 0.9]])
NONCONCAVE_Q = np.array([[0.5, 1.0, 0.0], [0.5, 0.0, 1.0], [0.0, 0.0, 0.0]])


def test_noiseless_channel():
    assert abs(classical_ba_capacity(np.eye(4)) - math.log(4)) <= 1e-12


def test_bsc_closed_form():
    expected = math.log(2) - float(binary_entropy(0.1))
    assert abs(classical_ba_capacity(BSC, epsilon=1e-10) - expected) <= 1e-10


def test_binary_entropy_edges():
    assert binary_entropy(0.0) == 0.0
    assert abs(binary_entropy(0.5) - math.log(2)) <= 1e-15


def test_nonconcave_channel_cross_path():
    res = solve(classical_capacity_objective(NONCONCAVE_Q), SolverConfig(epsilon=1e-10))
    assert abs(classical_ba_capacity(NONCONCAVE_Q, epsilon=1e-10) - res.capacity) <= 1e-8


@pytest.mark.parametrize("q", [BSC, NONCONCAVE_Q, np.array([[0.7, 0.2, 0.1], [0.2, 0.5, 0.3], [0.1, 0.3, 0.6]])])
def test_holevo_iterates_match_classical(q):
    n = 15
    ref = classical_ba(q, iterations=n)
    spec = holevo_objective(classical_channel(q))
    lam = spec.initial_state()
    for t in range(n):
        lam, log_z = ba_update(lam, 1.0, spec)
        assert np.abs(lam - ref.iterates[t + 1]).max() <= 1e-10
        assert abs(log_z - ref.history[t][2]) <= 1e-10


def test_classical_ba_fixed_iterations():
    res = classical_ba(BSC, iterations=3)
    assert len(res.history) == 3
    assert not res.converged


def test_classical_ba_rejects_bad_matrix():
    with pytest.raises(InvalidParameter):
        classical_ba(np.array([[0.5, 0.5], [0.4, 0.5]]))


@pytest.mark.slow
def test_grid_identity_mutual_full_resolution():
    assert abs(bloch_grid_oracle(identity_channel(2), "mutual", resolution=200) - 2 * math.log(2)) <= 1e-6


def test_grid_coherent_ad_vs_solver_and_scan():
    ch = amplitude_damping(0.3)
    grid = bloch_grid_oracle(ch, "coherent")
    scan, q = diagonal_scan_coherent_ad(0.3)
    res = solve(coherent_info_objective(ch))
    assert abs(grid - res.capacity) <= 1e-4
    assert abs(scan - res.capacity) <= 1e-5
    assert 0.4 < q < 0.5


def test_grid_depolarizing_thermo():
    assert abs(bloch_grid_oracle(depolarizing(0.5), "thermo")) <= 1e-6


def test_grid_errors():
    with pytest.raises(Unsupported):
        bloch_grid_oracle(identity_channel(3), "mutual")
    with pytest.raises(InvalidParameter):
        bloch_grid_oracle(identity_channel(2), "holevo")


def test_expm_examples():
    assert np.allclose(independent_expm(np.zeros((3, 3))), np.eye(3), atol=1e-15)
    assert np.abs(independent_expm(np.diag([0.0, 1.0])) - np.diag([1.0, math.e])).max() <= 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_expm_cross_path(seed):
    rng = np.random.default_rng(seed)
    m = random_hermitian(6, rng, scale=3.0) + 5.0 * np.eye(6)
    ours = independent_expm(m)
    assert np.linalg.norm(ours - matrix_exp(m)) <= 1e-8 * np.linalg.norm(ours)
    assert np.linalg.norm(ours - scipy.linalg.expm(m)) <= 1e-8 * np.linalg.norm(ours)


def test_expm_overflow_guard():
    with pytest.raises(OverflowRisk):
        independent_expm(np.diag([800.0, 0.0]))


def test_gibbs_update_independent_normalized(rng):
    rho = np.diag([0.3, 0.7]).astype(complex)
    f = random_hermitian(2, rng)
    nxt, _ = gibbs_update_independent(rho, f, 1.0)
    assert abs(np.trace(nxt) - 1) <= 1e-12
    assert np.allclose(nxt, nxt.conj().T)
