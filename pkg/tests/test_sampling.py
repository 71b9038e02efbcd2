import numpy as np
import pytest

from unimix_lt.data import Dataset, gen_lt_gaussians
from unimix_lt.sampling import draw_batch, draw_class, draw_classes, inverse_prior
from unimix_lt.streams import derive_rng


def test_inverse_prior_identity_at_tau_one():
    p = np.array([0.7, 0.2, 0.1])
    np.testing.assert_array_equal(inverse_prior(p, 1.0), p)


def test_inverse_prior_uniform_at_tau_zero():
    p = np.array([0.7, 0.2, 0.1])
    np.testing.assert_allclose(inverse_prior(p, 0.0), np.full(3, 1 / 3), atol=1e-15)


def test_inverse_prior_flips_two_class():
    np.testing.assert_allclose(inverse_prior(np.array([0.8, 0.2]), -1.0),
                               [0.2, 0.8], atol=1e-12)


@pytest.mark.parametrize("tau", [-2.0, -1.0, -0.5, 0.5, 2.0])
def test_inverse_prior_round_trip(tau):
    rng = np.random.default_rng(5)
    for _ in range(20):
        p = rng.dirichlet(np.ones(8) * 2)
        back = inverse_prior(inverse_prior(p, tau), 1.0 / tau)
        np.testing.assert_allclose(back, p, atol=1e-10)
        assert abs(inverse_prior(p, tau).sum() - 1.0) <= 1e-12


def test_inverse_prior_zero_entry_negative_tau():
    with pytest.raises(ValueError):
        inverse_prior(np.array([1.0, 0.0]), -1.0)


def test_draw_class_degenerate_prior():
    rng = derive_rng(0, "t")
    assert all(draw_class(np.array([1.0, 0.0]), rng) == 0 for _ in range(100))


def test_draw_class_uniform_frequencies():
    rng = derive_rng(1, "t")
    c, n = 10, 1_000_000
    draws = draw_classes(np.full(c, 0.1), n, rng)
    freq = np.bincount(draws, minlength=c) / n
    sigma = np.sqrt(0.1 * 0.9 / n)
    assert np.all(np.abs(freq - 0.1) < 3 * sigma + 1e-12)


def test_draw_class_deterministic():
    a = draw_classes(np.array([0.3, 0.7]), 50, derive_rng(3, "t"))
    b = draw_classes(np.array([0.3, 0.7]), 50, derive_rng(3, "t"))
    np.testing.assert_array_equal(a, b)


def test_draw_batch_empty():
    ds = gen_lt_gaussians(4, 10.0, 40, 3, seed=0)
    x, y = draw_batch(ds, np.full(4, 0.25), 0, derive_rng(0, "t"))
    assert x.shape == (0, 3) and y.shape == (0,)


def test_draw_batch_inverse_prior_tail_frequency():
    # two classes with prior (0.8, 0.2); the inverted sampler hits the
    # tail with probability 0.8
    features = np.zeros((100, 2))
    labels = np.array([0] * 80 + [1] * 20)
    ds = Dataset(features, labels, np.array([80, 20]))
    prior = inverse_prior(np.array([0.8, 0.2]), -1.0)
    n = 100_000
    _, y = draw_batch(ds, prior, n, derive_rng(11, "t"))
    freq = (y == 1).mean()
    sigma = np.sqrt(0.8 * 0.2 / n)
    assert abs(freq - 0.8) < 3 * sigma


def test_draw_batch_instance_marginal_uniform():
    # class prob x within-class uniform = count/N * 1/count = 1/N per instance
    ds = gen_lt_gaussians(4, 8.0, 24, 2, seed=1)
    n_inst = ds.num_samples
    prior = ds.class_counts / n_inst
    n = 200_000
    x, _ = draw_batch(ds, prior, n, derive_rng(2, "t"))
    # identify instances by matching features
    idx = {tuple(row): k for k, row in enumerate(ds.features)}
    hits = np.bincount([idx[tuple(row)] for row in x], minlength=n_inst)
    target = 1.0 / n_inst
    sigma = np.sqrt(target * (1 - target) / n)
    assert np.all(np.abs(hits / n - target) < 4 * sigma)


def test_draw_batch_mass_on_empty_class():
    ds = Dataset(np.zeros((3, 2)), np.array([0, 0, 2]), np.array([2, 0, 1]))
    with pytest.raises(ValueError, match="empty"):
        draw_batch(ds, np.array([0.5, 0.25, 0.25]), 4, derive_rng(0, "t"))


def test_draw_batch_deterministic():
    ds = gen_lt_gaussians(4, 10.0, 40, 3, seed=0)
    prior = ds.class_counts / ds.num_samples
    xa, ya = draw_batch(ds, prior, 32, derive_rng(4, "t"))
    xb, yb = draw_batch(ds, prior, 32, derive_rng(4, "t"))
    np.testing.assert_array_equal(xa, xb)
    np.testing.assert_array_equal(ya, yb)
