import math

import numpy as np
import pytest
from scipy import stats

from epichaos import (ConfigError, EnsembleState, Label, ModelParams, SeedSpec,
                      apply_directed_infection, apply_pair_infection, apply_recovery,
                      run, sample_event, sample_initial, step, total_event_rate,
                      uniform_sir)
from epichaos.core import TWO_PI
from epichaos.oracles import master_equation_solve, state_index


def make_params(n, lam=1.0, gamma=0.5, radius=0.1, side=1.0):
    return ModelParams(n=n, side=side, radius=radius,
                       infection_rate=lam, recovery_rate=gamma)


def make_state(labels, seed=0, side=1.0):
    labels = np.asarray(labels, dtype=np.int8)
    rng = SeedSpec(seed).rng()
    n = labels.shape[0]
    return EnsembleState(rng.random((n, 2)) * side, rng.random(n) * TWO_PI, labels)


def test_total_event_rate_examples():
    assert total_event_rate(make_params(1, gamma=2.0)) == 3.0
    assert total_event_rate(make_params(2, lam=1.0, gamma=1.0)) == 4.5
    assert total_event_rate(make_params(1000, lam=1.0, gamma=0.5)) == 1999.5
    assert total_event_rate(make_params(100, lam=1.0, gamma=0.5),
                            interaction="per_agent") == 250.0


def test_sample_event_category_probabilities():
    params = make_params(2, lam=1.0, gamma=1.0)
    rng = SeedSpec(1).rng()
    state = make_state([0, 1])
    kinds = {"velocity": 0, "recovery": 0, "pair": 0}
    draws = 30_000
    taus = np.empty(draws)
    for d in range(draws):
        tau, ev = sample_event(state, params, rng)
        kinds[ev.kind] += 1
        taus[d] = tau
    p_pair = kinds["pair"] / draws
    assert abs(p_pair - 1 / 9) < 4 * math.sqrt((1 / 9) * (8 / 9) / draws)
    # mean holding time must match the total rate
    assert abs(taus.mean() - 1 / 4.5) < 4 * taus.std() / math.sqrt(draws)


def test_sample_event_no_pairs_for_single_agent():
    params = make_params(1, lam=5.0, gamma=1.0)
    rng = SeedSpec(2).rng()
    state = make_state([1])
    for _ in range(2000):
        _, ev = sample_event(state, params, rng)
        assert ev.kind in ("velocity", "recovery")


def test_apply_recovery_rules():
    state = make_state([1, 0, 2])
    apply_recovery(state, 0)
    assert state.labels[0] == Label.R
    apply_recovery(state, 1)
    assert state.labels[1] == Label.S
    apply_recovery(state, 2)
    assert state.labels[2] == Label.R
    assert state.counters.recoveries == 1


def test_apply_pair_infection_rules():
    params = make_params(2, radius=2.0)  # radius beyond the diameter: always in range
    for before, after in [((0, 1), (1, 1)), ((1, 0), (1, 1)), ((0, 0), (0, 0)),
                          ((1, 1), (1, 1)), ((2, 1), (2, 1)), ((0, 2), (0, 2))]:
        state = make_state(before)
        apply_pair_infection(state, 0, 1, params)
        assert tuple(state.labels) == after

    # out of range: put the pair at opposite corners with a small radius
    state = make_state([0, 1])
    state.x = np.array([[0.0, 0.0], [0.5, 0.5]])
    apply_pair_infection(state, 0, 1, make_params(2, radius=0.1))
    assert tuple(state.labels) == (0, 1)


def test_apply_directed_infection_only_flips_target():
    params = make_params(2, radius=2.0)
    state = make_state([1, 0])
    apply_directed_infection(state, 0, 1, params)  # target already infected
    assert tuple(state.labels) == (1, 0)
    apply_directed_infection(state, 1, 0, params)
    assert tuple(state.labels) == (1, 1)
    state = make_state([0, 0])
    apply_directed_infection(state, 0, 0, params)  # self-pick no-op
    assert tuple(state.labels) == (0, 0)


def test_step_freezes_labels_without_reactions():
    params = make_params(30, lam=0.0, gamma=0.0)
    state = sample_initial(uniform_sir(1.0, 0.5, 0.3, 0.2), 30, SeedSpec(3).rng())
    before = state.labels.copy()
    rng = SeedSpec(4).rng()
    for _ in range(200):
        step(state, params, rng)
    assert np.array_equal(state.labels, before)
    assert state.t > 0


def test_step_keeps_all_recovered_frozen():
    params = make_params(20, lam=2.0, gamma=2.0, radius=2.0)
    state = make_state([2] * 20)
    rng = SeedSpec(5).rng()
    for _ in range(300):
        step(state, params, rng)
    assert np.all(state.labels == Label.R)


def test_run_sample_time_contract():
    params = make_params(5)
    state = make_state([0, 0, 1, 1, 2])
    traj = run(state, params, 0.0, [0.0], SeedSpec(6))
    assert traj.times.tolist() == [0.0]
    assert traj.counts.tolist() == [[2, 2, 1]]

    traj = run(state, params, 1.0, [0.0, 0.5, 1.0], SeedSpec(6))
    assert traj.times.tolist() == [0.0, 0.5, 1.0]
    assert traj.counts.shape == (3, 3)
    assert np.all(traj.counts.sum(axis=1) == 5)

    with pytest.raises(ConfigError):
        run(state, params, 1.0, [-0.1], SeedSpec(6))
    with pytest.raises(ConfigError):
        run(state, params, 1.0, [0.0, 2.0], SeedSpec(6))


def test_run_recovery_decay_matches_exponential():
    n = 20_000
    params = make_params(n, lam=0.0, gamma=0.8)
    state = sample_initial(uniform_sir(1.0, 0.0, 1.0, 0.0), n, SeedSpec(7).rng())
    traj = run(state, params, 1.5, [0.5, 1.0, 1.5], SeedSpec(8))
    for t, row in zip(traj.times, traj.counts):
        p = math.exp(-0.8 * t)
        assert abs(row[1] / n - p) < 3 * math.sqrt(p * (1 - p) / n)


def test_run_counts_match_monotonicity():
    params = make_params(300, lam=2.0, gamma=1.0)
    state = sample_initial(uniform_sir(1.0, 0.7, 0.3, 0.0), 300, SeedSpec(9).rng())
    traj = run(state, params, 2.0, np.linspace(0, 2, 21), SeedSpec(10),
               check_invariants=True)
    s, r = traj.counts[:, 0], traj.counts[:, 2]
    assert np.all(np.diff(s) <= 0)
    assert np.all(np.diff(r) >= 0)
    assert np.all(traj.counts.sum(axis=1) == 300)


def test_run_velocity_distribution_uniform():
    n = 100_000
    params = make_params(n, lam=0.0, gamma=0.0)
    state = sample_initial(
        uniform_sir(1.0, 1.0, 0.0, 0.0), n, SeedSpec(11).rng())
    state.theta[:] = 0.25  # start concentrated; jumps must re-randomize
    traj = run(state, params, 5.0, [5.0], SeedSpec(12))
    th = np.mod(traj.final.theta, TWO_PI)
    hist = np.bincount((th / (TWO_PI / 36)).astype(int), minlength=36)
    # a few agents have never jumped; their heading is still 0.25
    hist[int(0.25 / (TWO_PI / 36))] -= int(round(n * math.exp(-5.0)))
    chi2 = ((hist - n / 36) ** 2 / (n / 36)).sum()
    assert stats.chi2.sf(chi2, 35) > 0.001


def test_run_is_deterministic():
    params = make_params(50)
    state = sample_initial(uniform_sir(1.0, 0.9, 0.1, 0.0), 50, SeedSpec(13).rng())
    a = run(state, params, 1.0, [0.25, 0.5, 1.0], SeedSpec(14))
    b = run(state, params, 1.0, [0.25, 0.5, 1.0], SeedSpec(14))
    assert np.array_equal(a.counts, b.counts)
    assert np.array_equal(a.final.x, b.final.x)
    assert np.array_equal(a.final.theta, b.final.theta)
    assert np.array_equal(a.final.labels, b.final.labels)


def test_small_system_matches_master_equation():
    # all pairs always in range; labels then form an exact finite chain
    n, lam, gamma = 3, 1.0, 1.0
    params = make_params(n, lam=lam, gamma=gamma, radius=1.0)
    reps = 20_000
    t_obs = [0.7]
    counts = np.zeros(27)
    base = SeedSpec(15)
    for r in range(reps):
        state = make_state([0, 0, 1], seed=1000 + r)
        traj = run(state, params, t_obs[-1], t_obs, base.child(r),
                   observer=lambda s: s.labels.copy())
        counts[state_index(traj.extras[0])] += 1
    p0 = np.zeros(27)
    p0[state_index([0, 0, 1])] = 1.0
    exact = master_equation_solve(n, lam, gamma, p0, t_obs[0])
    tv = 0.5 * np.abs(counts / reps - exact).sum()
    noise = 0.5 * np.sqrt(exact * (1 - exact) / reps).sum()
    assert tv < 3.0 * noise


def test_pair_and_per_agent_schemes_agree():
    n, reps = 40, 4000
    params = make_params(n, lam=2.0, gamma=0.5, radius=0.3)
    ic = uniform_sir(1.0, 0.8, 0.2, 0.0)
    base = SeedSpec(16)
    counts = {"pair": [], "per_agent": []}
    for scheme_idx, scheme in enumerate(("pair", "per_agent")):
        for r in range(reps):
            seed = base.child(scheme_idx, r)
            state = sample_initial(ic, n, seed.child(0).rng())
            traj = run(state, params, 1.0, [1.0], seed.child(1), interaction=scheme)
            counts[scheme].append(traj.counts[-1][1])
    ks = stats.ks_2samp(counts["pair"], counts["per_agent"])
    assert ks.pvalue > 0.01


def test_sample_initial_fractions_and_reproducibility():
    ic = uniform_sir(1.0, 0.9, 0.1, 0.0)
    n = 100_000
    state = sample_initial(ic, n, SeedSpec(17).rng())
    assert state.n == n
    frac_i = state.counts()[1] / n
    assert abs(frac_i - 0.1) < 3 * math.sqrt(0.1 * 0.9 / n)
    again = sample_initial(ic, n, SeedSpec(17).rng())
    assert np.array_equal(state.x, again.x)
    assert np.array_equal(state.labels, again.labels)
