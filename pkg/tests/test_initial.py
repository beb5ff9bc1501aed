import numpy as np
import pytest

from epichaos import InitialCondition, InitialConditionError, SeedSpec, uniform_sir


def test_rejects_bad_fractions():
    with pytest.raises(InitialConditionError):
        InitialCondition(side=1.0, fractions=(0.9, 0.2, 0.0))
    with pytest.raises(InitialConditionError):
        InitialCondition(side=1.0, fractions=(0.9, -0.1, 0.2))
    # just inside the normalization tolerance is fine
    InitialCondition(side=1.0, fractions=(0.9, 0.1 + 5e-10, 0.0))


def test_rejects_bad_weights():
    with pytest.raises(InitialConditionError):
        InitialCondition(side=1.0, weights=[[1.0, -1.0], [1.0, 1.0]])
    with pytest.raises(InitialConditionError):
        InitialCondition(side=1.0, weights=[[0.0, 0.0], [0.0, 0.0]])


def test_label_fraction_sampling():
    ic = uniform_sir(1.0, 0.9, 0.1, 0.0)
    n = 1_000_000
    _, _, labels = ic.sample(n, SeedSpec(3).rng())
    frac_i = np.mean(labels == 1)
    assert abs(frac_i - 0.1) < 3 * np.sqrt(0.1 * 0.9 / n)
    assert not np.any(labels == 2)


def test_concentrated_cell():
    w = np.zeros((4, 4))
    w[2, 1] = 1.0
    ic = InitialCondition(side=2.0, fractions=(0.0, 1.0, 0.0), weights=w)
    x, theta, labels = ic.sample(5000, SeedSpec(4).rng())
    h = 2.0 / 4
    assert np.all((x[:, 0] >= 2 * h) & (x[:, 0] < 3 * h))
    assert np.all((x[:, 1] >= 1 * h) & (x[:, 1] < 2 * h))
    assert np.all(labels == 1)


def test_delta_velocity():
    ic = InitialCondition(side=1.0, fractions=(1.0, 0.0, 0.0), velocity=0.75)
    _, theta, _ = ic.sample(100, SeedSpec(5).rng())
    assert np.all(theta == 0.75)


def test_field_projection_masses_match():
    w = np.array([[1.0, 2.0], [3.0, 4.0]])
    ic = InitialCondition(side=1.0, fractions=(0.6, 0.4, 0.0), weights=w)
    vals = ic.field_values(8, 4)
    measure = (1.0 / 8) ** 2 * (2 * np.pi / 4)
    masses = vals.sum(axis=(1, 2, 3)) * measure
    assert np.allclose(masses, ic.label_masses(), atol=1e-12)
    assert np.allclose(masses, (0.6, 0.4, 0.0), atol=1e-12)
    assert vals.sum() * measure == pytest.approx(1.0, abs=1e-12)


def test_field_projection_requires_divisible_grid():
    ic = InitialCondition(side=1.0, weights=np.ones((3, 3)))
    with pytest.raises(InitialConditionError):
        ic.field_values(8, 4)


def test_per_cell_fractions():
    fr = np.zeros((2, 2, 3))
    fr[:, :, 0] = 1.0
    fr[0, 0] = (0.0, 1.0, 0.0)
    ic = InitialCondition(side=1.0, fractions=fr)
    x, _, labels = ic.sample(20000, SeedSpec(6).rng())
    in_cell = (x[:, 0] < 0.5) & (x[:, 1] < 0.5)
    assert np.all(labels[in_cell] == 1)
    assert np.all(labels[~in_cell] == 0)


def test_independent_streams_give_uncorrelated_ensembles():
    ic = uniform_sir(1.0, 0.5, 0.5, 0.0)
    pairs = 800
    n = 50
    counts = np.empty((pairs, 2))
    for r in range(pairs):
        _, _, la = ic.sample(n, SeedSpec(7, (r, 0)).rng())
        _, _, lb = ic.sample(n, SeedSpec(7, (r, 1)).rng())
        counts[r] = [(la == 1).sum(), (lb == 1).sum()]
    corr = np.corrcoef(counts[:, 0], counts[:, 1])[0, 1]
    assert abs(corr) < 3.0 / np.sqrt(pairs)
