import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.tree import DecisionTreeRegressor

from tabsearch.errors import EmptyInputError, InvalidDataError, NotFittedError
from tabsearch.surrogate import TreeEnsembleRegressor


def hp_like(n, rng):
    return np.column_stack([rng.uniform(-3, -1, n), rng.integers(0, 6, n), rng.integers(0, 4, n)])


def test_constant_targets():
    rng = np.random.default_rng(0)
    X = hp_like(30, rng)
    model = TreeEnsembleRegressor(n_trees=20).fit(X, np.full(30, 0.5))
    mu, sigma = model.predict(hp_like(50, rng))
    np.testing.assert_array_equal(mu, 0.5)
    np.testing.assert_array_equal(sigma, 0.0)


def test_single_point():
    x0 = np.array([[-2.0, 3, 1]])
    mu, sigma = TreeEnsembleRegressor().fit(x0, [0.8]).predict(x0)
    assert mu[0] == 0.8 and sigma[0] == 0.0


def test_two_clusters():
    rng = np.random.default_rng(1)
    a = rng.normal([-2.8, 0, 0], 0.02, size=(40, 3))
    b = rng.normal([-1.2, 5, 3], 0.02, size=(40, 3))
    ya = 0.3 + rng.normal(0, 0.01, 40)
    yb = 0.9 + rng.normal(0, 0.01, 40)
    model = TreeEnsembleRegressor(rng_seed=2).fit(np.vstack([a, b]), np.concatenate([ya, yb]))
    mu, _ = model.predict(np.array([[-2.8, 0, 0], [-1.2, 5, 3]]))
    assert abs(mu[0] - ya.mean()) < 0.05
    assert abs(mu[1] - yb.mean()) < 0.05


def test_single_tree_matches_reference_tree_on_training_points():
    # without bootstrap a single tree is a plain CART regressor; ties between equally
    # good splits may be broken differently, which never changes training-point fits
    rng = np.random.default_rng(3)
    for trial in range(5):
        X = hp_like(80, rng)
        y = np.sin(3 * X[:, 0]) + 0.1 * X[:, 1] - 0.05 * X[:, 2] + rng.normal(0, 0.05, 80)
        ours = TreeEnsembleRegressor(n_trees=1, min_samples_leaf=5, bootstrap=False, rng_seed=trial).fit(X, y)
        ref = DecisionTreeRegressor(min_samples_leaf=5, random_state=trial).fit(X, y)
        np.testing.assert_allclose(ours.predict(X)[0], ref.predict(X), rtol=0, atol=1e-12)


def test_mu_within_target_range_and_sigma_nonnegative():
    rng = np.random.default_rng(4)
    X = hp_like(60, rng)
    y = rng.uniform(0.2, 0.7, 60)
    mu, sigma = TreeEnsembleRegressor(rng_seed=1).fit(X, y).predict(hp_like(500, rng))
    assert np.all(mu >= y.min() - 1e-12) and np.all(mu <= y.max() + 1e-12)
    assert np.all(sigma >= 0)


def test_sigma_is_population_std_of_trees():
    rng = np.random.default_rng(5)
    X = hp_like(40, rng)
    model = TreeEnsembleRegressor(n_trees=15, rng_seed=3).fit(X, rng.uniform(size=40))
    Xq = hp_like(20, rng)
    per_tree = model.tree_predictions(Xq)
    mu, sigma = model.predict(Xq)
    np.testing.assert_allclose(mu, per_tree.mean(axis=0))
    np.testing.assert_allclose(sigma, np.sqrt(((per_tree - per_tree.mean(axis=0)) ** 2).mean(axis=0)))


def test_one_tree_zero_sigma():
    rng = np.random.default_rng(6)
    X = hp_like(30, rng)
    _, sigma = TreeEnsembleRegressor(n_trees=1).fit(X, rng.uniform(size=30)).predict(hp_like(40, rng))
    np.testing.assert_array_equal(sigma, 0.0)


def test_deterministic_refit():
    rng = np.random.default_rng(7)
    X, y = hp_like(50, rng), rng.uniform(size=50)
    Xq = hp_like(100, rng)
    a = TreeEnsembleRegressor(rng_seed=9).fit(X, y).predict(Xq)
    b = TreeEnsembleRegressor(rng_seed=9).fit(X, y).predict(Xq)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])


def test_duplicated_training_set_keeps_leaf_means():
    rng = np.random.default_rng(8)
    X = hp_like(40, rng)
    y = rng.uniform(size=40)
    one = TreeEnsembleRegressor(n_trees=1, min_samples_leaf=1, bootstrap=False).fit(X, y)
    two = TreeEnsembleRegressor(n_trees=1, min_samples_leaf=2, bootstrap=False).fit(
        np.vstack([X, X]), np.concatenate([y, y])
    )
    np.testing.assert_allclose(one.predict(X)[0], two.predict(X)[0], atol=1e-12)


def test_conflicting_targets_give_spread():
    X = np.array([[-2.0, 1, 1]] * 2)
    model = TreeEnsembleRegressor(n_trees=200, min_samples_leaf=1, rng_seed=0).fit(X, [0.0, 1.0])
    assert model.predict(X[:1])[1][0] > 0


def test_errors():
    with pytest.raises(NotFittedError):
        TreeEnsembleRegressor().predict(np.zeros((1, 3)))
    with pytest.raises(EmptyInputError):
        TreeEnsembleRegressor().fit(np.zeros((0, 3)), [])
    with pytest.raises(InvalidDataError):
        TreeEnsembleRegressor().fit(np.zeros((2, 3)), [0.1, np.nan])


@given(st.integers(1, 40), st.integers(0, 1000))
def test_predictions_finite_and_bounded(n, seed):
    rng = np.random.default_rng(seed)
    X, y = hp_like(n, rng), rng.uniform(size=n)
    mu, sigma = TreeEnsembleRegressor(n_trees=5, rng_seed=seed).fit(X, y).predict(hp_like(30, rng))
    assert np.all(np.isfinite(mu)) and np.all(sigma >= 0)
    assert mu.min() >= y.min() - 1e-12 and mu.max() <= y.max() + 1e-12
