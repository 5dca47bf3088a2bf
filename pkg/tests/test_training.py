import copy

import numpy as np
import pytest

from tabsearch.errors import InvalidDataError
from tabsearch.model import (
    Adam,
    DataSplit,
    LRSchedule,
    TrainConfig,
    accuracy,
    averaged_gradient,
    build,
    make_shards,
    scaled_hp,
    train,
)
from tabsearch.space import ArchConfig, ArchSpace, encode_layer


def toy_data(n=400, d=6, classes=3, seed=0):
    rng = np.random.default_rng(seed)
    centers = rng.normal(0, 3, size=(classes, d))
    y = rng.integers(0, classes, n)
    x = centers[y] + rng.normal(size=(n, d))
    return x, y


def skip_plan(d=6, classes=3, seed=0, dtype=np.float64):
    space = ArchSpace(m=3, input_dim=d, output_dim=classes)
    arch = ArchConfig((encode_layer(16, "tanh"), encode_layer(32, "relu"), 1, encode_layer(16, "swish"), 1, 0, 1, 0, 1))
    return build(arch, space, seed=seed, dtype=dtype)


@pytest.mark.parametrize("n", [2, 4])
def test_averaged_step_equals_large_batch_step(n):
    x, y = toy_data(n * 32)
    bs1 = 32
    plan = skip_plan()
    params_a = copy.deepcopy(plan.params)
    params_b = copy.deepcopy(plan.params)
    batches = [(x[i * bs1 : (i + 1) * bs1], y[i * bs1 : (i + 1) * bs1]) for i in range(n)]
    _, g_avg = averaged_gradient(plan, params_a, batches)
    _, g_big = plan.loss_and_grad(x, y, params_b)
    opt_a, opt_b = Adam(params_a), Adam(params_b)
    opt_a.step(params_a, g_avg, 0.01 * n)
    opt_b.step(params_b, g_big, 0.01 * n)
    for k in params_a:
        np.testing.assert_allclose(params_a[k], params_b[k], rtol=0, atol=1e-10)


def test_threaded_shards_match_serial():
    x, y = toy_data(128)
    plan = skip_plan()
    from concurrent.futures import ThreadPoolExecutor

    batches = [(x[i::4], y[i::4]) for i in range(4)]
    with ThreadPoolExecutor(4) as pool:
        l1, g1 = averaged_gradient(plan, plan.params, batches, pool)
    l2, g2 = averaged_gradient(plan, plan.params, batches)
    assert l1 == l2
    for k in g1:
        np.testing.assert_array_equal(g1[k], g2[k])


def test_scaled_hp():
    assert scaled_hp(TrainConfig(lr1=0.01, bs1=256, n_shards=8)) == (0.08, 2048)
    assert scaled_hp(0.01, 256, 8) == (0.08, 2048)
    assert scaled_hp(TrainConfig(lr1=0.003, bs1=64, n_shards=1)) == (0.003, 64)
    assert scaled_hp(TrainConfig(bs1=64, n_shards=4))[1] == 256


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(epochs=3, warmup_epochs=5)
    with pytest.raises(ValueError):
        TrainConfig(plateau_factor=1.0)
    with pytest.raises(ValueError):
        TrainConfig(bs1=0)


def test_warmup_schedule():
    s = LRSchedule(0.01, 0.08, warmup=5, patience=5, factor=0.1)
    lrs = [s.lr(k) for k in range(1, 8)]
    assert lrs[0] == 0.01
    assert lrs[4] == 0.08
    np.testing.assert_allclose(lrs[:5], np.linspace(0.01, 0.08, 5), rtol=1e-12)
    assert max(lrs) <= 0.08
    assert lrs[5] == lrs[6] == 0.08


def test_plateau_counts_only_after_warmup():
    s = LRSchedule(0.01, 0.02, warmup=5, patience=5, factor=0.1)
    cuts, lrs = [], []
    for k in range(1, 16):
        cuts.append(s.update(k, 0.5))
        lrs.append(s.lr(k + 1))
    # epoch 1 sets the best; epochs 6..10 are the first five counted stalls
    assert [k for k, c in enumerate(cuts, start=1) if c] == [10, 15]
    assert lrs[9] == pytest.approx(0.002) and lrs[14] == pytest.approx(0.0002)
    assert s.update(16, 0.6) is False and s.wait == 0


def test_default_history_and_stagnating_run():
    x, y = toy_data(200)
    plan = skip_plan()
    data = DataSplit(x[:150], y[:150], x[150:], y[150:])
    # a vanishing learning rate freezes the network, so validation accuracy stalls
    res = train(plan, data, TrainConfig(lr1=1e-12, bs1=32, n_shards=2))
    assert res.status == "ok"
    assert len(res.history) == 20
    lrs = [h.lr for h in res.history]
    assert lrs[4] == 2e-12
    assert lrs[9] == 2e-12 and lrs[10] == pytest.approx(2e-13)
    assert lrs[15] == pytest.approx(2e-14)
    assert res.valid_accuracy == res.history[-1].valid_accuracy


def test_overfits_separable_toy_set():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(50, 2))
    y = (x[:, 0] + 0.5 * x[:, 1] > 0).astype(int)
    space = ArchSpace(m=1, input_dim=2, output_dim=2)
    plan = build(ArchConfig((encode_layer(32, "relu"), 0)), space, seed=0)
    res = train(plan, DataSplit(x, y, x, y), TrainConfig(lr1=0.05, bs1=16, epochs=60, warmup_epochs=5))
    assert accuracy(plan, x, y) == 1.0
    assert res.valid_accuracy == 1.0


def test_deterministic_under_seed():
    x, y = toy_data(240)
    data = DataSplit(x[:160], y[:160], x[160:], y[160:])
    cfg = TrainConfig(lr1=0.01, bs1=32, n_shards=2, epochs=4, warmup_epochs=2, seed=3)
    a = train(skip_plan(), data, cfg)
    b = train(skip_plan(), data, cfg)
    assert a.history == b.history


def test_parallel_shards_match_serial_training():
    x, y = toy_data(240)
    data = DataSplit(x[:160], y[:160], x[160:], y[160:])
    cfg = TrainConfig(lr1=0.01, bs1=16, n_shards=4, epochs=3, warmup_epochs=2)
    a = train(skip_plan(), data, cfg)
    b = train(skip_plan(), data, TrainConfig(**{**cfg.__dict__, "parallel_shards": True}))
    assert a.history == b.history


def test_divergence_reports_failure():
    x, y = toy_data(100)
    x[0, 0] = np.nan
    data = DataSplit(x, y, x, y)
    res = train(skip_plan(), data, TrainConfig(lr1=0.1, bs1=100, epochs=2, warmup_epochs=1))
    assert res.status == "failed" and res.valid_accuracy == 0.0


def test_empty_training_set():
    plan = skip_plan()
    with pytest.raises(InvalidDataError):
        train(plan, DataSplit(np.zeros((0, 6)), np.zeros(0, int), np.zeros((1, 6)), [0]), TrainConfig())


def test_shards_are_disjoint_cover():
    shards = make_shards(103, 4, np.random.default_rng(0))
    allrows = np.concatenate(shards)
    assert len(shards) == 4 and sorted(allrows) == list(range(103))


def test_small_shard_shrinks_last_batch():
    x, y = toy_data(50)
    res = train(skip_plan(), DataSplit(x, y, x, y), TrainConfig(bs1=1024, n_shards=8, epochs=2, warmup_epochs=1))
    assert res.status == "ok" and len(res.history) == 2
