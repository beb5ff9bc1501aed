"""Brute-force references used by the test suite.

Everything here is an independent code path: a dense master equation for
the label dynamics of a handful of agents when every pair is always in
range, a Runge-Kutta integration of the homogeneous SIR system, and a
literal double-sum convolution.  None of it shares stepping logic with the
production simulators it is used to check.
"""

import math

import numpy as np

from .core import Label

MAX_CHAIN_AGENTS = 5


def label_states(n: int) -> np.ndarray:
    """All 3**n label vectors in lexicographic order, shape (3**n, n)."""
    states = np.indices((3,) * n).reshape(n, -1).T
    return states.astype(np.int8)


def label_chain_matrix(n: int, infection_rate: float, recovery_rate: float) -> np.ndarray:
    """Dense generator of the label-only chain with every pair in range.

    Transitions: each S agent flips to I at rate (infection_rate / n) per
    infected other agent; each I agent flips to R at rate recovery_rate.
    Rows sum to zero.
    """
    if n > MAX_CHAIN_AGENTS:
        raise ValueError(f"dense label chain supports at most {MAX_CHAIN_AGENTS} agents")
    states = label_states(n)
    size = states.shape[0]
    q = np.zeros((size, size))
    pow3 = 3 ** np.arange(n - 1, -1, -1)
    for s in range(size):
        a = states[s]
        n_inf = int(np.sum(a == Label.I))
        for i in range(n):
            if a[i] == Label.S and n_inf > 0:
                rate = infection_rate * n_inf / n
                t = s + (Label.I - Label.S) * pow3[i]
                q[s, t] += rate
                q[s, s] -= rate
            elif a[i] == Label.I:
                t = s + (Label.R - Label.I) * pow3[i]
                q[s, t] += recovery_rate
                q[s, s] -= recovery_rate
    return q


def master_equation_solve(n: int, infection_rate: float, recovery_rate: float,
                          p0: np.ndarray, t: float) -> np.ndarray:
    """Distribution over label vectors at time t, by uniformization.

    ``p0`` is a probability vector over the 3**n states of
    ``label_states(n)``.  The all-pairs-in-range regime is assumed, which
    is what makes the label marginal a closed finite chain.
    """
    q = label_chain_matrix(n, infection_rate, recovery_rate)
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (q.shape[0],):
        raise ValueError("p0 has the wrong length for this chain")
    rate = float(np.max(-np.diag(q)))
    if rate == 0.0 or t == 0.0:
        return p0.copy()
    pmat = np.eye(q.shape[0]) + q / rate
    mu = rate * t
    # Poisson-weighted power series, truncated at negligible tail mass.
    k_max = int(mu + 12.0 * math.sqrt(mu) + 30)
    term = math.exp(-mu)
    out = p0 * term
    vec = p0.copy()
    for k in range(1, k_max + 1):
        vec = vec @ pmat
        term *= mu / k
        out = out + term * vec
    return out


def state_index(labels) -> int:
    """Index of a label vector within label_states ordering."""
    labels = np.asarray(labels, dtype=int)
    n = labels.shape[0]
    pow3 = 3 ** np.arange(n - 1, -1, -1)
    return int(np.dot(labels, pow3))


def sir_ode_solve(beta: float, gamma: float, masses0, t_max: float, dt: float):
    """Classic RK4 integration of S' = -b S I, I' = b S I - g I, R' = g I.

    Returns (times, masses) with masses of shape (steps + 1, 3); the total
    mass is conserved by the vector field, and RK4 preserves it to
    rounding.
    """
    s, i, r = (float(v) for v in masses0)
    if min(s, i, r) < 0:
        raise ValueError("initial masses must be nonnegative")
    steps = int(round(t_max / dt))

    def rhs(y):
        s, i, r = y
        inf = beta * s * i
        return np.array([-inf, inf - gamma * i, gamma * i])

    out = np.empty((steps + 1, 3))
    y = np.array([s, i, r])
    out[0] = y
    for k in range(steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dt * k1)
        k3 = rhs(y + 0.5 * dt * k2)
        k4 = rhs(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[k + 1] = y
    times = np.arange(steps + 1) * dt
    return times, out


def direct_convolution(density: np.ndarray, r0: float, side: float) -> np.ndarray:
    """Literal double sum of the disc-indicator convolution on the torus.

    For every target cell the full grid is swept and each source cell
    contributes its mass when the wrapped center-to-center distance is
    strictly below r0 (the same membership rule the solver uses).  O(m^4),
    test use only.
    """
    density = np.asarray(density, dtype=float)
    m = density.shape[0]
    h = side / m
    idx = np.arange(m)
    diff = np.abs(idx[:, None] - idx[None, :])
    wrapped = np.minimum(diff, m - diff) * h
    d2 = wrapped[:, None, :, None] ** 2 + wrapped[None, :, None, :] ** 2
    indicator = (d2 < r0 * r0).reshape(m * m, m * m)
    out = indicator @ (density.reshape(m * m) * h * h)
    return out.reshape(m, m)
