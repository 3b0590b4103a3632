import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bpalloc.bp import (
    ASYNC,
    LOG_HALF,
    SYNC,
    BpConfig,
    PriorVector,
    check_validity,
    damp,
    decide,
    factor_to_var_naive,
    factor_to_var_sweep,
    fresh_state,
    guided_log_prior,
    init_random,
    log_epsilon,
    plan_for,
    run,
    run_batch,
    violated_factors,
)
from bpalloc.factors import epsilon
from bpalloc.oracle import find_valid


def _lse(pairs):
    return np.logaddexp(pairs[..., 0], pairs[..., 1])


def test_config_validation():
    with pytest.raises(ValueError):
        BpConfig(n_iter=0)
    with pytest.raises(ValueError):
        BpConfig(alpha=1.0)
    with pytest.raises(ValueError):
        BpConfig(n_interm=0)
    with pytest.raises(ValueError):
        BpConfig(schedule="parallel")
    with pytest.raises(ValueError):
        BpConfig(margin=1.0)


def test_prior_vector_from_q():
    pv = PriorVector.from_q([0.25, 1.0])
    np.testing.assert_allclose(pv.q[0], [0.25, 1.0])
    assert pv.log_p[0, 1, 1] == -np.inf
    with pytest.raises(ValueError):
        PriorVector.from_q([1.5])


def test_fresh_state_starts_from_priors(fig2_fg3):
    plan = plan_for(fig2_fg3)
    priors, state = init_random(fig2_fg3, 7, plan)
    assert state.var_to_fac.shape == (1, fig2_fg3.n_edges, 2)
    np.testing.assert_array_equal(state.var_to_fac[0], priors.log_p[0, fig2_fg3.edge_var])
    assert np.all(state.fac_to_var == LOG_HALF)
    assert state.sentinel.all()


def test_decide_breaks_ties_toward_one():
    beliefs = np.log(np.array([[[0.5, 0.5], [0.6, 0.4], [0.4, 0.6]]]))
    assert decide(beliefs).tolist() == [[1, 0, 1]]


def test_damp_passes_sentinel_edges_and_blends_others():
    new = np.log(np.array([[[0.9, 0.1], [0.9, 0.1]]]))
    prev = np.log(np.array([[[0.1, 0.9], [0.1, 0.9]]]))
    sentinel = np.array([[True, False]])
    out = np.exp(damp(new, prev, sentinel, 0.25))
    np.testing.assert_allclose(out[0, 0], [0.9, 0.1])
    np.testing.assert_allclose(out[0, 1], [0.25 * 0.1 + 0.75 * 0.9, 0.25 * 0.9 + 0.75 * 0.1])
    assert damp(new, prev, sentinel, 0.0) is new


def test_batched_sweep_equals_naive_on_tree9(tree9_fg):
    plan = plan_for(tree9_fg)
    cfg = BpConfig(n_iter=6, alpha=0.3, seed=11)
    seen = []

    def check(n, beliefs, state, log_prior):
        fast, _ = factor_to_var_sweep(plan, state)
        for b in range(state.var_to_fac.shape[0]):
            slow = factor_to_var_naive(tree9_fg, state.var_to_fac[b])
            np.testing.assert_allclose(np.exp(fast[b]), slow, atol=1e-12, rtol=0)
        seen.append(n)

    run_batch(tree9_fg, cfg, 2, callback=check)
    assert seen == list(range(1, 7))


def test_batch_rows_equal_single_runs(tree9_fg):
    cfg = BpConfig(n_iter=20, n_interm=8, alpha=0.3, seed=100)
    batch = run_batch(tree9_fg, cfg, 4)
    for t in range(4):
        single = run_batch(tree9_fg, BpConfig(**{**cfg.__dict__, "seed": 100 + t}), 1)
        np.testing.assert_array_equal(batch.valid[t], single.valid[0])
        np.testing.assert_array_equal(batch.xhat[t], single.xhat[0])


def test_batch_split_does_not_change_results(tree9_fg):
    cfg = BpConfig(n_iter=16, n_interm=8, alpha=0.3, seed=5)
    whole = run_batch(tree9_fg, cfg, 6)
    head = run_batch(tree9_fg, cfg, 2)
    tail = run_batch(tree9_fg, cfg, 4, first_trial=2)
    np.testing.assert_array_equal(whole.valid, np.vstack([head.valid, tail.valid]))


def test_run_is_deterministic(tree9_fg):
    cfg = BpConfig(n_iter=30, n_interm=8, alpha=0.3, seed=3)
    a, b = run(tree9_fg, cfg), run(tree9_fg, cfg)
    assert a.trace == b.trace
    np.testing.assert_array_equal(a.allocation.xhat, b.allocation.xhat)


def test_validity_record_matches_check(tree9_fg):
    res = run(tree9_fg, BpConfig(n_iter=40, n_interm=8, alpha=0.3, seed=1))
    assert res.allocation.valid == check_validity(tree9_fg, res.allocation.xhat)
    assert res.trace[-1][2] == res.allocation.valid


def test_restarts_only_on_schedule(tree9_fg):
    cfg = BpConfig(n_iter=24, n_interm=8, alpha=0.3, seed=0)
    batch = run_batch(tree9_fg, cfg, 30)
    # restart counts can only change right after iterations 8 and 16
    steps = np.diff(batch.restarts, axis=1)
    changed = sorted(set(np.nonzero(steps)[1] + 2))
    assert set(changed) <= {9, 17}
    no_restart = run_batch(tree9_fg, BpConfig(**{**cfg.__dict__, "n_interm": None}), 30)
    assert not no_restart.restarts.any()


def test_restart_is_needed_for_some_runs(tree9_fg):
    batch = run_batch(tree9_fg, BpConfig(n_iter=24, n_interm=8, alpha=0.3), 50)
    assert batch.restarts[:, -1].max() >= 1


def test_stop_on_valid_truncates(fig2_fg3):
    res = run(fig2_fg3, BpConfig(n_iter=50, n_interm=8, alpha=0.3, seed=2, stop_on_valid=True))
    assert res.allocation.valid
    assert len(res.trace) == res.allocation.converged_at == 8


def test_outage_helper(tree9_fg):
    batch = run_batch(tree9_fg, BpConfig(n_iter=10, alpha=0.3), 20)
    assert batch.outage(10) == pytest.approx(np.mean(~batch.valid[:, 9]))


def test_guided_priors_sit_inside_the_band(fig2_fg3):
    fg = fig2_fg3
    xstar = find_valid(fg.network, 3, 2)
    log_p = guided_log_prior(fg, xstar, 0.5)
    for v in range(fg.n_vars):
        eps = epsilon(fg, v)
        q = math.exp(log_p[v, 0])
        if xstar[v]:
            assert q < eps
        else:
            assert q > 1 - eps


def test_log_epsilon_matches_direct(fig2_fg3):
    for v in range(fig2_fg3.n_vars):
        assert math.exp(log_epsilon(fig2_fg3, v)) == pytest.approx(epsilon(fig2_fg3, v), rel=1e-12)


def test_guided_rejects_invalid_reference(fig2_fg3):
    with pytest.raises(ValueError, match="does not satisfy"):
        guided_log_prior(fig2_fg3, np.zeros(fig2_fg3.n_vars), 0.5)
    with pytest.raises(ValueError):
        guided_log_prior(fig2_fg3, np.zeros(3), 0.5)


@pytest.mark.parametrize("schedule", [SYNC, ASYNC])
def test_guided_run_returns_reference(fig2_fg3, schedule):
    xstar = find_valid(fig2_fg3.network, 3, 2)
    res = run(fig2_fg3, BpConfig(n_iter=10, schedule=schedule, guided=xstar))
    assert all(valid for _, _, valid, _ in res.trace)
    np.testing.assert_array_equal(res.allocation.xhat, xstar)


def test_async_is_deterministic(fig2_fg3):
    cfg = BpConfig(n_iter=15, n_interm=8, alpha=0.3, schedule=ASYNC, seed=4)
    assert run(fig2_fg3, cfg).trace == run(fig2_fg3, cfg).trace


def test_violated_factors_zero_vector(fig2_fg3):
    bad = violated_factors(plan_for(fig2_fg3), np.zeros(fig2_fg3.n_vars, dtype=np.int8))
    kinds = {fig2_fg3.factors[J].kind for J in np.flatnonzero(bad[0])}
    assert kinds == {"T"}


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), alpha=st.sampled_from([0.0, 0.3, 0.6]), n_interm=st.sampled_from([None, 3]))
def test_messages_stay_normalized(seed, alpha, n_interm, fig2_fg3):
    def check(n, beliefs, state, log_prior):
        np.testing.assert_allclose(_lse(state.var_to_fac), 0.0, atol=1e-9)
        np.testing.assert_allclose(_lse(state.fac_to_var), 0.0, atol=1e-9)
        np.testing.assert_allclose(_lse(beliefs), 0.0, atol=1e-9)

    run_batch(fig2_fg3, BpConfig(n_iter=10, alpha=alpha, n_interm=n_interm, seed=seed), 3, callback=check)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_sweep_matches_naive_from_random_priors(seed, fig2_fg3):
    plan = plan_for(fig2_fg3)
    priors, state = init_random(fig2_fg3, seed, plan)
    fast, _ = factor_to_var_sweep(plan, state)
    slow = factor_to_var_naive(fig2_fg3, state.var_to_fac[0])
    np.testing.assert_allclose(np.exp(fast[0]), slow, atol=1e-12, rtol=0)


def test_sweep_handles_hard_zero_priors(fig2_fg3):
    plan = plan_for(fig2_fg3)
    q = np.full(fig2_fg3.n_vars, 0.5)
    q[:4] = 1.0  # terminal 1 certainly silent in slots 1 and 2
    state = fresh_state(plan, PriorVector.from_q(q))
    fast, _ = factor_to_var_sweep(plan, state)
    slow = factor_to_var_naive(fig2_fg3, state.var_to_fac[0])
    np.testing.assert_allclose(np.exp(fast[0]), slow, atol=1e-12, rtol=0)
