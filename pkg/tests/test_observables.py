import math

import numpy as np
import pytest

from epichaos import (EnsembleState, GridMismatchError, GridSpec, KineticField,
                      Label, ModelParams, SeedSpec, constant_oracle,
                      discrete_transport_cost, empirical_marginal,
                      ensemble_aggregate, field_from_initial, l1_distance,
                      pair_factorization_gap, run_coupled,
                      sample_coupled_initial, sample_initial, uniform_sir,
                      wasserstein_discrete_upper)
from epichaos.core import TWO_PI

SIDE = 1.0


def test_marginal_single_cell_mass():
    x = np.full((50, 2), 0.1)
    state = EnsembleState(x, np.full(50, 0.2), np.full(50, Label.I, dtype=np.int8))
    marg = empirical_marginal(state, 4, 4, SIDE)
    assert marg.mass() == pytest.approx(1.0)
    assert marg.counts[1, 0, 0, 0] == 50
    assert marg.counts.sum() == 50


def test_marginal_uniform_sample_is_uniform():
    n = 1_000_000
    state = sample_initial(uniform_sir(SIDE, 1.0, 0.0, 0.0), n, SeedSpec(1).rng())
    marg = empirical_marginal(state, 4, 4, SIDE)
    counts = marg.counts[0]
    p = 1.0 / counts.size
    sd = math.sqrt(n * p * (1 - p))
    assert np.abs(counts - n * p).max() < 5 * sd


def test_marginal_density_sums_to_one():
    state = sample_initial(uniform_sir(SIDE, 0.5, 0.3, 0.2), 5000, SeedSpec(2).rng())
    marg = empirical_marginal(state, 8, 4, SIDE)
    total = marg.density().sum() * marg.cell_measure
    assert total == pytest.approx(1.0, abs=1e-12)


def test_l1_distance_basic_properties():
    state = sample_initial(uniform_sir(SIDE, 0.6, 0.4, 0.0), 2000, SeedSpec(3).rng())
    m1 = empirical_marginal(state, 4, 4, SIDE)
    assert l1_distance(m1, m1) == 0.0

    # disjointly supported unit masses
    a = np.zeros((3, 4, 4, 4))
    b = np.zeros((3, 4, 4, 4))
    measure = (SIDE / 4) ** 2 * (TWO_PI / 4)
    a[0, 0, 0, 0] = 1.0 / measure
    b[1, 2, 2, 1] = 1.0 / measure
    fa = KineticField(a, SIDE, 0.0)
    fb = KineticField(b, SIDE, 0.0)
    assert l1_distance(fa, fb) == pytest.approx(2.0)
    assert l1_distance(fa, fb) == l1_distance(fb, fa)


def test_l1_distance_rejects_grid_mismatch():
    state = sample_initial(uniform_sir(SIDE, 1.0, 0.0, 0.0), 100, SeedSpec(4).rng())
    m1 = empirical_marginal(state, 4, 4, SIDE)
    m2 = empirical_marginal(state, 8, 4, SIDE)
    with pytest.raises(GridMismatchError):
        l1_distance(m1, m2)


def test_l1_marginal_vs_field_shrinks_with_n():
    ic = uniform_sir(SIDE, 0.7, 0.3, 0.0)
    grid = GridSpec(m=8, k=4, dt=1e-2, side=SIDE)
    fld = field_from_initial(ic, grid)
    dists = []
    for n in (1000, 10_000, 100_000):
        state = sample_initial(ic, n, SeedSpec(5, (n,)).rng())
        marg = empirical_marginal(state, 8, 4, SIDE)
        dists.append(l1_distance(marg, fld))
    assert dists[0] > dists[1] > dists[2]


def test_transport_cost_equals_mismatch():
    rng = np.random.default_rng(6)
    a = rng.integers(0, 3, 500).astype(np.int8)
    b = rng.integers(0, 3, 500).astype(np.int8)
    assert discrete_transport_cost(a, b) == pytest.approx(np.mean(a != b))
    assert discrete_transport_cost(a, a) == 0.0


def test_wasserstein_upper_bound_sequence():
    params = ModelParams(n=40, side=SIDE, radius=0.1, infection_rate=0.0,
                         recovery_rate=0.5)
    orc = constant_oracle(SIDE, 0.0, 1.0)
    state = sample_coupled_initial(uniform_sir(SIDE, 0.5, 0.5, 0.0), 40,
                                   SeedSpec(7).rng())
    traj = run_coupled(state, params, orc, 1.0, [0.0, 0.5, 1.0], SeedSpec(8))
    bounds = wasserstein_discrete_upper(traj)
    assert bounds[0] == 0.0
    assert np.all((bounds >= 0) & (bounds <= 1))
    assert np.all(bounds == 0.0)  # no infection channel, shared recoveries
    # the recorded sequence is exactly the transport cost of the coupled pair
    assert bounds[-1] == discrete_transport_cost(traj.final.a, traj.final.b)


def test_pair_gap_iid_matches_control():
    rng = SeedSpec(9).rng()
    ic = uniform_sir(SIDE, 0.6, 0.4, 0.0)
    n, reps = 400, 30

    def gap_of(sample_rng):
        batches = []
        for _ in range(reps):
            x, _, labels = ic.sample(n, sample_rng)
            batches.append((x, labels))
        return pair_factorization_gap(batches, SIDE)

    measured = gap_of(rng)
    controls = np.array([gap_of(SeedSpec(10, (c,)).rng()) for c in range(20)])
    assert measured < controls.mean() + 3 * controls.std(ddof=1) + 1e-12


def test_pair_gap_detects_shared_label():
    rng = SeedSpec(11).rng()
    batches = []
    for _ in range(40):
        x = rng.random((200, 2))
        shared = rng.integers(0, 2)  # one common label per replica
        labels = np.full(200, shared, dtype=np.int8)
        batches.append((x, labels))
    gap = pair_factorization_gap(batches, SIDE)
    assert gap > 0.3


def test_pair_gap_shrinks_with_population():
    from epichaos import run
    params = ModelParams(n=200, side=SIDE, radius=0.1, infection_rate=2.0,
                         recovery_rate=0.5)
    ic = uniform_sir(SIDE, 0.8, 0.2, 0.0)
    gaps = []
    for n in (200, 800):
        batches = []
        for r in range(30):
            seed = SeedSpec(13, (n, r))
            state = sample_initial(ic, n, seed.child(0).rng())
            traj = run(state, ModelParams(n=n, side=SIDE, radius=0.1,
                                          infection_rate=2.0, recovery_rate=0.5),
                       1.0, [1.0], seed.child(1))
            batches.append((traj.final.x, traj.final.labels))
        gaps.append(pair_factorization_gap(batches, SIDE))
    assert gaps[1] < gaps[0]


def test_pair_gap_needs_two_agents():
    with pytest.raises(ValueError):
        pair_factorization_gap([(np.zeros((1, 2)), np.zeros(1, dtype=np.int8))], SIDE)


def test_ensemble_aggregate_basics():
    mean, half, r = ensemble_aggregate(np.array([[0.0], [1.0]]))
    assert mean[0] == 0.5 and r == 2
    mean, half, _ = ensemble_aggregate(np.array([[2.0, 3.0]] * 5))
    assert np.all(mean == [2.0, 3.0])
    assert np.all(half == 0.0)
    with pytest.raises(ValueError):
        ensemble_aggregate(np.array([[1.0]]))
    with pytest.raises(ValueError):
        ensemble_aggregate(np.zeros((3, 2)), sample_times=[[0, 1], [0, 1], [0, 2]])


def test_ensemble_aggregate_ci_shrinks_like_sqrt_replicas():
    rng = SeedSpec(12).rng()
    noise = rng.standard_normal(6400)
    _, half_small, _ = ensemble_aggregate(noise[:100])
    _, half_big, _ = ensemble_aggregate(noise)
    ratio = half_small[0] / half_big[0]
    assert 0.6 * 8 < ratio < 1.4 * 8
