import numpy as np
import pytest
from scipy import integrate

from sgmgt.errors import DataError
from sgmgt.potentials import (
    MultiwellSpec,
    blr_potential,
    gaussian_potential,
    load_dataset,
    load_saved_dataset,
    multiwell_potential,
    noisy_gradient,
    save_dataset,
)
from oracles import central_difference


def fd_grad(model, theta, step=1e-5):
    theta = np.asarray(theta, dtype=float)
    out = np.empty_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = step * max(1.0, abs(theta[i]))
        out[i] = (model.energy(theta + e) - model.energy(theta - e)) / (2 * e[i])
    return out


def write_csv(path, header, rows):
    path.write_text(",".join(header) + "\n" + "\n".join(",".join(map(str, r)) for r in rows) + "\n")
    return path


@pytest.fixture(scope="module")
def pima():
    return load_dataset("pima", test_fraction=0.2, seed=0)


def test_gaussian_examples():
    m = gaussian_potential([0.0], 1.0)
    assert m.energy([0.0]) == 0.0 and m.grad([0.0])[0] == 0.0
    assert m.energy([2.0]) == 2.0
    np.testing.assert_array_equal(m.grad([2.0]), [2.0])
    m2 = gaussian_potential([0.0, 0.0], 2.0)
    assert m2.energy([1.0, 1.0]) == pytest.approx(0.5)
    np.testing.assert_allclose(m2.grad([1.0, 1.0]), [0.5, 0.5])
    assert np.array_equal(m2.stoch_grad(np.ones(2), np.random.default_rng(0)), m2.grad(np.ones(2)))


def test_multiwell_center_gradient_vanishes():
    m = multiwell_potential()
    assert abs(m.grad([0.0])[0]) < 1e-12
    assert abs(fd_grad(m, [0.0])[0]) < 1e-6


@pytest.mark.parametrize("center", [-8.0, -4.0, 0.0, 4.0, 8.0])
def test_multiwell_restoring_near_modes(center):
    m = multiwell_potential()
    assert m.grad([center + 1e-3])[0] > 0
    assert m.grad([center - 1e-3])[0] < 0


def test_multiwell_noise_variance():
    m = multiwell_potential(MultiwellSpec(noise_B=1.0))
    rng = np.random.default_rng(0)
    g = np.array([m.stoch_grad([1.3], rng)[0] for _ in range(100_000)])
    assert 1.96 <= g.var() <= 2.04


def test_multiwell_normalizable():
    m = multiwell_potential()
    dens = lambda x: np.exp(-m.energy([x]))
    inside, _ = integrate.quad(dens, -20, 20, points=[-8, -4, 0, 4, 8], limit=200)
    outside = integrate.quad(dens, 20, np.inf)[0] + integrate.quad(dens, -np.inf, -20)[0]
    assert np.isfinite(inside) and inside > 0
    assert outside < 1e-10


@pytest.mark.parametrize("spec", [dict(centers=(1.0, 0.0)), dict(width=0.0), dict(noise_B=-1.0)])
def test_multiwell_spec_invalid(spec):
    with pytest.raises(ValueError):
        MultiwellSpec(**spec)


def test_noisy_gradient_zero_noise_is_exact():
    base = gaussian_potential([1.0, -1.0], 1.0)
    m = noisy_gradient(base, 0.0)
    rng = np.random.default_rng(0)
    np.testing.assert_array_equal(m.stoch_grad(np.zeros(2), rng), base.grad(np.zeros(2)))


def test_noisy_gradient_moments():
    base = gaussian_potential([0.0, 0.0, 0.0], 1.0)
    m = noisy_gradient(base, 1.0)
    rng = np.random.default_rng(5)
    theta = np.array([0.3, -1.0, 2.0])
    g = np.array([m.stoch_grad(theta, rng) for _ in range(100_000)])
    np.testing.assert_allclose(g.var(axis=0), 2.0, rtol=0.02)
    se = g.std(axis=0) / np.sqrt(len(g))
    assert np.all(np.abs(g.mean(axis=0) - base.grad(theta)) < 3 * se)


def test_split_arithmetic(tmp_path):
    rows = [[i, i % 3, i % 2] for i in range(10)]
    path = write_csv(tmp_path / "d.csv", ["a", "b", "y"], rows)
    data = load_dataset(path, "y", test_fraction=0.2, seed=1)
    assert (~data.is_test).sum() == 8 and data.is_test.sum() == 2
    assert data.dim == 3  # two features + intercept


def test_split_is_seeded(tmp_path):
    rows = [[i, (i * 7) % 5, i % 2] for i in range(30)]
    path = write_csv(tmp_path / "d.csv", ["a", "b", "y"], rows)
    a = load_dataset(path, "y", seed=4)
    b = load_dataset(path, "y", seed=4)
    c = load_dataset(path, "y", seed=5)
    np.testing.assert_array_equal(a.is_test, b.is_test)
    assert not np.array_equal(a.is_test, c.is_test)


def test_standardized_on_train(pima):
    x, _ = pima.train()
    z = x[:, :-1]
    assert np.all(np.abs(z.mean(axis=0)) < 1e-10)
    assert np.all(np.abs(z.var(axis=0) - 1) < 1e-10)
    assert np.all(pima.features[:, -1] == 1.0)


def test_bundled_dimensions(pima):
    assert pima.dim == 8
    assert load_dataset("heart").dim == 14
    assert set(np.unique(pima.labels)) == {0, 1}


def test_malformed_row_names_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,y\n1,2,0\n3,oops,1\n")
    with pytest.raises(DataError, match=":3:"):
        load_dataset(path, "y")
    path.write_text("a,b,y\n1,2,0\n3,1\n")
    with pytest.raises(DataError, match=":3:"):
        load_dataset(path, "y")


def test_non_binary_label(tmp_path):
    path = write_csv(tmp_path / "d.csv", ["a", "y"], [[1, 0], [2, 1], [3, 2]])
    with pytest.raises(DataError, match="binary"):
        load_dataset(path, "y", test_fraction=0.0)


def test_signed_labels_mapped(tmp_path):
    path = write_csv(tmp_path / "d.csv", ["a", "y"], [[1, -1], [2, 1], [3, 1], [0, -1]])
    data = load_dataset(path, "y", test_fraction=0.0)
    assert set(data.labels.tolist()) == {0, 1}


def test_cache_round_trip(tmp_path, pima):
    save_dataset(pima, tmp_path / "cache")
    back = load_saved_dataset(tmp_path / "cache")
    np.testing.assert_array_equal(back.features, pima.features)
    np.testing.assert_array_equal(back.labels, pima.labels)
    np.testing.assert_array_equal(back.is_test, pima.is_test)
    assert back.columns == pima.columns


def test_blr_at_zero(pima):
    m = blr_potential(pima, 1.0, 16)
    np.testing.assert_allclose(m.log_likelihood_terms(np.zeros(m.dim)), -np.log(2))
    assert m.energy(np.zeros(m.dim)) == pytest.approx(m.n * np.log(2))


def test_blr_full_batch_degenerates(pima):
    m = blr_potential(pima, 1.0, int((~pima.is_test).sum()))
    theta = np.linspace(-0.5, 0.5, m.dim)
    np.testing.assert_array_equal(m.stoch_grad(theta, np.random.default_rng(0)), m.grad(theta))


def test_blr_minibatch_too_large(pima):
    with pytest.raises(ValueError):
        blr_potential(pima, 1.0, 10_000)


def test_blr_stochastic_gradient_unbiased(pima):
    m = blr_potential(pima, 1.0, 16)
    rng = np.random.default_rng(2)
    theta = np.linspace(-0.4, 0.6, m.dim)
    g = np.array([m.stoch_grad(theta, rng) for _ in range(100_000)])
    se = g.std(axis=0) / np.sqrt(len(g))
    assert np.all(np.abs(g.mean(axis=0) - m.grad(theta)) < 3 * se)


def all_models():
    data = load_dataset("synthetic", test_fraction=0.25, seed=0)
    return {
        "gaussian": gaussian_potential([0.5, -1.0], 1.5),
        "noisy": noisy_gradient(gaussian_potential([0.5, -1.0], 1.5), 1.0),
        "multiwell": multiwell_potential(),
        "blr": blr_potential(data, 2.0, 8),
    }


@pytest.mark.parametrize("name", ["gaussian", "noisy", "multiwell", "blr"])
def test_gradient_consistency(name):
    model = all_models()[name]
    rng = np.random.default_rng(9)
    for _ in range(5):
        theta = rng.uniform(-3, 3, model.dim)
        np.testing.assert_allclose(model.grad(theta), fd_grad(model, theta), rtol=1e-5, atol=1e-8)


@pytest.mark.parametrize("name", ["noisy", "multiwell", "blr"])
def test_unbiasedness_at_random_points(name):
    model = all_models()[name]
    rng = np.random.default_rng(0)
    for _ in range(5):
        theta = rng.uniform(-3, 3, model.dim)
        g = np.array([model.stoch_grad(theta, rng) for _ in range(10_000)])
        se = g.std(axis=0) / np.sqrt(len(g))
        # 3-SE band per coordinate; a zero-variance coordinate must match exactly
        assert np.all(np.abs(g.mean(axis=0) - model.grad(theta)) <= 3 * se + 1e-12)


def test_blr_minibatch_expectation_exact():
    # each training row enters a without-replacement minibatch with probability n'/N,
    # so the N/n'-scaled estimator averages to the full gradient; check by
    # enumerating every size-2 subset of a 6-row problem
    import itertools
    from sgmgt.potentials import Dataset

    rng = np.random.default_rng(3)
    x = np.hstack([rng.normal(size=(6, 2)), np.ones((6, 1))])
    data = Dataset(x, np.array([0, 1, 1, 0, 1, 0]), np.zeros(6, dtype=bool))
    m = blr_potential(data, 1.5, 2)
    theta = np.array([0.3, -0.7, 0.2])
    ys = np.where(data.labels > 0, 1.0, -1.0)
    total = np.zeros(3)
    subsets = list(itertools.combinations(range(6), 2))
    for idx in subsets:
        idx = list(idx)
        z = ys[idx] * (x[idx] @ theta)
        lik = -(x[idx].T @ (ys[idx] / (1 + np.exp(z))))
        total += 3.0 * lik + theta / 1.5
    np.testing.assert_allclose(total / len(subsets), m.grad(theta), rtol=1e-12)
