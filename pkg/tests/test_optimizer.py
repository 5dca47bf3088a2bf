import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tabsearch.errors import InvalidInputError, NoDataError
from tabsearch.optimizer import BayesianOptimizer, ucb
from tabsearch.space import HPConfig, HPSpace, random_hp


class FixedSurrogate:
    """Returns preset (mu, sigma) for the candidate rows it is asked about."""

    def __init__(self, mu, sigma):
        self.mu, self.sigma = np.asarray(mu), np.asarray(sigma)

    def fit(self, X, y):
        return self

    def predict(self, X):
        return self.mu[: len(X)], self.sigma[: len(X)]


def observed_bo(n=12, seed=0, **kw):
    bo = BayesianOptimizer(seed=seed, n_candidates=500, n_trees=20, **kw)
    rng = np.random.default_rng(seed)
    cfgs = [random_hp(HPSpace(), rng) for _ in range(n)]
    bo.tell(cfgs, [0.5 + 0.4 * np.exp(-abs(np.log10(c.lr1) + 1.5)) for c in cfgs])
    return bo


def test_lie_value_examples():
    bo = BayesianOptimizer(seed=0)
    h = HPConfig(0.01, 256, 1)
    with pytest.raises(NoDataError):
        bo.lie_value()
    bo.tell([h], [0.7])
    assert bo.lie_value() == 0.7
    bo = BayesianOptimizer(seed=0)
    bo.tell([h, h], [0.8, 0.9])
    assert bo.lie_value() == 0.85
    bo = BayesianOptimizer(seed=0)
    bo.tell([h] * 4, [0, 1, 1, 0])
    assert bo.lie_value() == 0.5


def test_lies_accumulate_and_clear():
    bo = observed_bo()
    assert bo.model_based
    bo.ask(5)
    assert len(bo.lies) == 5
    assert all(v == bo.lie_value() for _, v in bo.lies)
    bo.tell([HPConfig(0.01, 64, 2)], [0.6])
    assert len(bo.lies) == 0


def test_tell_appends_without_dedup():
    bo = BayesianOptimizer(seed=0)
    h = HPConfig(0.01, 256, 1)
    bo.tell([h], [0.5])
    bo.tell([h], [0.5])
    assert len(bo.observed) == 2 and bo.lies == []


def test_tell_errors():
    bo = BayesianOptimizer(seed=0)
    with pytest.raises(InvalidInputError):
        bo.tell([HPConfig(0.01, 256, 1)], [0.5, 0.6])
    with pytest.raises(InvalidInputError):
        bo.tell([HPConfig(0.01, 256, 1)], [float("nan")])
    with pytest.raises(InvalidInputError):
        bo.ask(0)


def test_random_phase_below_n_initial():
    bo = BayesianOptimizer(seed=0)
    picks = bo.ask(3)
    assert len(picks) == 3 and bo.lies == []
    assert all(HPSpace().contains(p) for p in picks)
    assert not bo.model_based


def test_model_based_after_n_initial():
    bo = BayesianOptimizer(seed=0)
    h = [random_hp(HPSpace(), i) for i in range(10)]
    bo.tell(h[:9], [0.5] * 9)
    assert not bo.model_based
    bo.tell(h[9:], [0.5])
    assert bo.model_based


def test_kappa_zero_picks_max_mean():
    bo = observed_bo(kappa=0.0)
    bo.ask(1)
    acq = bo.last_acquisition
    assert acq.mu[acq.index] == acq.mu.max()
    assert np.all(acq.mu[acq.index] >= acq.mu)


def test_constructed_kappa_flip():
    candidates = np.array([[-2.0, 3, 0], [-2.0, 3, 1]])
    surrogate = FixedSurrogate([0.90, 0.80], [0.00, 0.20])
    for kappa, expected in ((0.0, 0), (1.96, 1)):
        bo = BayesianOptimizer(kappa=kappa, seed=0, surrogate=surrogate)
        bo.tell([HPConfig(0.01, 256, 1)] * 10, [0.5] * 10)
        acq = bo.select(candidates)
        assert acq.index == expected
    assert ucb(0.80, 0.20, 1.96) == pytest.approx(1.192)
    assert acq.best.score == ucb(0.80, 0.20, 1.96)


def test_ties_go_to_first_candidate():
    surrogate = FixedSurrogate([0.5, 0.7, 0.7], [0.0, 0.0, 0.0])
    bo = BayesianOptimizer(kappa=1.0, seed=0, surrogate=surrogate)
    bo.tell([HPConfig(0.01, 256, 1)] * 10, [0.5] * 10)
    assert bo.select(np.array([[-2.0, 0, 0], [-2.0, 1, 0], [-2.0, 2, 0]])).index == 1


def test_shift_invariance():
    rng = np.random.default_rng(0)
    mu, sigma = rng.uniform(size=100), rng.uniform(size=100)
    assert np.argmax(ucb(mu, sigma, 0.5)) == np.argmax(ucb(mu + 3.0, sigma, 0.5))


def test_ask_deterministic():
    a = observed_bo(seed=3).ask(4)
    b = observed_bo(seed=3).ask(4)
    assert a == b
    assert all(HPSpace().contains(h) for h in a)


@given(st.integers(1, 6), st.integers(0, 10_000))
def test_ask_returns_q_valid_configs(q, seed):
    bo = observed_bo(seed=seed % 50)
    bo.rng = np.random.default_rng(seed)
    picks = bo.ask(q)
    assert len(picks) == q == len(bo.lies)
    assert all(HPSpace().contains(h) for h in picks)
