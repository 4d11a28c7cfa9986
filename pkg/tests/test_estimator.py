import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from femtosim.estimator import DEFAULT_BETAS, HopSimulator, sweep_beta
from femtosim.simulator import SimConfig, build_world, derive_rng, serve_request, STREAM_PREDICT

SMALL = dict(n=100, trials=30, popular_size="asymptotic")


def test_get_params_round_trip():
    est = HopSimulator(**SMALL)
    params = est.get_params()
    assert params["n"] == 100 and params["n_jobs"] == 1
    assert set(params) == set(SimConfig.field_names()) | {"n_jobs"}
    est2 = clone(est)
    assert est2.get_params() == params


def test_from_config():
    config = SimConfig(**SMALL)
    est = HopSimulator.from_config(config, n_jobs=2)
    assert est.get_params()["n_jobs"] == 2
    est.fit()
    assert est.config_ == config


def test_fit_sets_attributes():
    est = HopSimulator(**SMALL).fit()
    assert est.h_ == 40
    assert est.M_ == 10
    assert est.m_ == 8000


@pytest.mark.parametrize("bad", [dict(n=1), dict(policy="x"), dict(n_jobs=0)])
def test_fit_validates(bad):
    with pytest.raises((ValueError, TypeError)):
        HopSimulator(**{**SMALL, **bad}).fit()


def test_unfitted():
    with pytest.raises(NotFittedError):
        HopSimulator(**SMALL).predict([[0, 1]])


def test_predict_reproducible_and_matches_engine():
    est = HopSimulator(**SMALL).fit()
    X = np.array([[0, 1], [5, 3], [99, 8000], [42, 2]])
    y = est.predict(X)
    assert y.dtype == np.int64 and y.shape == (4,)
    np.testing.assert_array_equal(y, est.predict(X))
    world = build_world(est.config_)
    for i, (u, r) in enumerate(X):
        rng = derive_rng(0, STREAM_PREDICT, i)
        assert y[i] == serve_request(world, u, r, "coded", rng).hops


@pytest.mark.parametrize(
    "X", [[[0, 0]], [[100, 1]], [[0, 8001]], [[0.5, 1]], np.zeros((2, 3)), [1, 2]]
)
def test_predict_rejects(X):
    est = HopSimulator(**SMALL).fit()
    with pytest.raises(ValueError):
        est.predict(X)


def test_simulate_and_theory():
    est = HopSimulator(**SMALL).fit()
    s = est.simulate()
    assert est.summary_ is s and s.trials == 30
    tp = est.theory()
    assert (tp.h, tp.M) == (40, 10)


@pytest.mark.filterwarnings("ignore::femtosim.analysis.TrivialRegimeWarning")
def test_sweep_shape_and_pairing():
    rows = sweep_beta(HopSimulator(**SMALL), betas=(0.3, 0.8))
    assert [(r.beta, r.policy) for r in rows] == [
        (0.3, "uncoded"), (0.3, "coded"), (0.8, "uncoded"), (0.8, "coded")
    ]
    assert all(r.summary.config.master_seed == 0 for r in rows)
    assert rows[0].summary.M == 3 and rows[2].summary.M == 39


def test_sweep_accepts_config_and_rejects_empty():
    assert len(sweep_beta(SimConfig(**SMALL), betas=[0.5])) == 2
    with pytest.raises(ValueError):
        sweep_beta(SimConfig(**SMALL), betas=[])


def test_default_betas():
    assert DEFAULT_BETAS == (0.3, 0.4, 0.5, 0.6, 0.7, 0.8)
