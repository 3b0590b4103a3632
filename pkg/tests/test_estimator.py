import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from bpalloc.bp import check_validity
from bpalloc.estimator import ChannelAllocator, InterferenceDetector, check_network


def test_params_round_trip():
    est = ChannelAllocator(n_slots=3, n_channels=2, alpha=0.2)
    assert est.get_params()["alpha"] == 0.2
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    est.set_params(n_interm="inf")
    assert est.n_interm == "inf"


def test_fit_predict(fig2):
    est = ChannelAllocator(seed=0).fit(fig2)
    assert est.valid_
    rows = est.predict()
    assert rows.shape == (4, 3)
    assert rows[:, 0].tolist() == fig2.non_sink
    assert check_validity(est.factor_graph_, est.allocation_.xhat)
    assert est.score() == 1.0
    np.testing.assert_array_equal(est.fit_predict(fig2), rows)


def test_fit_accepts_mapping_and_path(tmp_path, fig2):
    from bpalloc.network import save_topology

    path = tmp_path / "t.json"
    save_topology(fig2, path)
    a = ChannelAllocator().fit(fig2.to_dict()).predict()
    b = ChannelAllocator().fit(str(path)).predict()
    np.testing.assert_array_equal(a, b)
    with pytest.raises(TypeError):
        check_network(3)


def test_predict_rejects_other_network(fig1, fig2):
    est = ChannelAllocator().fit(fig2)
    with pytest.raises(ValueError):
        est.predict(fig1)
    np.testing.assert_array_equal(est.predict(fig2), est.predict())


def test_not_fitted():
    with pytest.raises(NotFittedError):
        ChannelAllocator().predict()
    with pytest.raises(NotFittedError):
        InterferenceDetector().transform(None)


@pytest.mark.parametrize(
    "params",
    [
        {"n_slots": 0},
        {"n_slots": "many"},
        {"n_channels": 0},
        {"n_iter": 0},
        {"schedule": "parallel"},
    ],
)
def test_bad_params_fail_at_fit(fig2, params):
    with pytest.raises(ValueError):
        ChannelAllocator(**params).fit(fig2)


def test_theta_override(tree9):
    low = ChannelAllocator(theta_db=3.0).fit(tree9)
    assert low.network_.radio.theta_db == 3.0
    assert ChannelAllocator(theta_db=12.0).fit(tree9).network_.radio.theta_db == 12.0


def test_unsuccessful_fit_scores_zero(tree9):
    est = ChannelAllocator(n_iter=1).fit(tree9)
    assert not est.valid_
    assert est.score() == 0.0


def test_interference_detector(fig2):
    mat = InterferenceDetector().fit(fig2).transform(fig2)
    expected = {1: {1, 3}, 2: {2, 3}, 3: {1, 3}, 4: set(), 5: {1, 5}}
    for i, members in expected.items():
        assert set(np.flatnonzero(mat[i - 1]) + 1) == members
    assert InterferenceDetector().fit_transform(fig2).tolist() == mat.tolist()


def test_interference_detector_theta(tree9):
    low = InterferenceDetector(theta_db=3.0).fit_transform(tree9)
    high = InterferenceDetector(theta_db=12.0).fit(tree9).transform(tree9)
    assert np.all(high >= low)
