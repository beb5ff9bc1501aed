import math

import numpy as np
import pytest

from epichaos import DiscKernel
from epichaos.oracles import (direct_convolution, label_chain_matrix, label_states,
                              master_equation_solve, sir_ode_solve, state_index)


def test_chain_matrix_row_sums_and_signs():
    q = label_chain_matrix(3, 1.3, 0.7)
    assert np.allclose(q.sum(axis=1), 0.0, atol=1e-12)
    off = q - np.diag(np.diag(q))
    assert np.all(off >= 0)


def test_chain_transitions_only_s_to_i_and_i_to_r():
    q = label_chain_matrix(2, 1.0, 1.0)
    states = label_states(2)
    for s, row in enumerate(q):
        for t in np.nonzero(row > 0)[0]:
            if t == s:
                continue
            diff = [(a, b) for a, b in zip(states[s], states[t]) if a != b]
            assert len(diff) == 1
            assert tuple(diff[0]) in ((0, 1), (1, 2))  # S->I or I->R


def test_master_equation_two_agent_infection_law():
    lam = 1.0
    p0 = np.zeros(9)
    p0[state_index([0, 1])] = 1.0
    for t in (0.3, 1.0, 2.5):
        pt = master_equation_solve(2, lam, 0.0, p0, t)
        assert pt[state_index([1, 1])] == pytest.approx(1.0 - math.exp(-lam * t / 2),
                                                        abs=1e-10)
        assert pt.sum() == pytest.approx(1.0, abs=1e-10)
        assert np.all(pt >= -1e-12)


def test_master_equation_single_agent_recovery():
    gamma = 0.8
    p0 = np.zeros(3)
    p0[state_index([1])] = 1.0
    pt = master_equation_solve(1, 0.0, gamma, p0, 1.7)
    assert pt[state_index([2])] == pytest.approx(1.0 - math.exp(-gamma * 1.7), abs=1e-10)


def test_master_equation_factorizes_without_interaction():
    # lambda = 0: each agent's label evolves independently
    gamma = 0.6
    p0 = np.zeros(9)
    p0[state_index([1, 1])] = 1.0
    pt = master_equation_solve(2, 0.0, gamma, p0, 0.9)
    p_single = master_equation_solve(1, 0.0, gamma, np.array([0.0, 1.0, 0.0]), 0.9)
    expected = np.kron(p_single, p_single)
    assert np.allclose(pt, expected, atol=1e-10)


def test_master_equation_guards_state_space():
    with pytest.raises(ValueError):
        master_equation_solve(6, 1.0, 1.0, np.zeros(3 ** 6), 1.0)


def test_sir_ode_constant_without_infected():
    _, m = sir_ode_solve(2.0, 1.0, (0.7, 0.0, 0.3), 3.0, 1e-2)
    assert np.allclose(m, m[0], atol=1e-14)


def test_sir_ode_exponential_decay_without_infection():
    t, m = sir_ode_solve(0.0, 0.9, (0.2, 0.8, 0.0), 2.0, 1e-3)
    assert np.allclose(m[:, 1], 0.8 * np.exp(-0.9 * t), atol=1e-10)
    assert np.allclose(m.sum(axis=1), 1.0, atol=1e-12)


def test_sir_ode_is_fourth_order():
    def err(dt):
        _, coarse = sir_ode_solve(3.0, 1.0, (0.6, 0.4, 0.0), 5.0, dt)
        _, fine = sir_ode_solve(3.0, 1.0, (0.6, 0.4, 0.0), 5.0, dt / 2)
        return np.abs(coarse[-1] - fine[-1]).max()

    ratio = err(0.05) / err(0.025)
    assert 10.0 < ratio < 22.0


def test_direct_convolution_delta_and_uniform():
    m, side, r0 = 16, 1.0, 0.2
    h = side / m
    rho = np.zeros((m, m))
    rho[3, 5] = 2.0
    out = direct_convolution(rho, r0, side)
    kern = DiscKernel(m, side, r0)
    expected = np.roll(kern.mask.astype(float), (3, 5), axis=(0, 1)) * 2.0 * h * h
    assert np.array_equal(out, expected)

    flat = np.full((m, m), 1.3)
    out = direct_convolution(flat, r0, side)
    assert np.allclose(out, out[0, 0])
    assert out[0, 0] == pytest.approx(1.3 * kern.mask.sum() * h * h, rel=1e-12)


def test_direct_convolution_matches_spectral():
    rng = np.random.default_rng(4)
    m, side, r0 = 32, 1.0, 0.13
    kern = DiscKernel(m, side, r0)
    for _ in range(5):
        rho = rng.random((m, m))
        ref = direct_convolution(rho, r0, side)
        assert np.abs(kern.spectral(rho) - ref).max() < 1e-10
        assert np.abs(kern.direct(rho) - ref).max() < 1e-10
