import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bpalloc.bp import BpConfig
from bpalloc.experiments import (
    ExperimentConfig,
    OutageCurve,
    emit_csv,
    outage_point,
    parse_gen_spec,
    parse_interm,
    read_allocation_csv,
    read_outage_csv,
    resolve_topology,
    run_allocate,
    run_outage,
    wilson_interval,
    write_allocation_csv,
)
from bpalloc.network import save_topology, verify_schedule
from bpalloc.oracle import enumerate_valid


def test_parse_gen_spec():
    assert parse_gen_spec("tree3hop:9") == {"kind": "tree3hop", "n": 9}
    assert parse_gen_spec("grid:16:12.5:3") == {"kind": "grid", "n": 16, "spacing_m": 12.5, "seed": 3}
    assert parse_gen_spec("fig2") == {"kind": "fig2"}
    for bad in ("tree3hop", "fig1:3", "chain:3:1:2:9"):
        with pytest.raises(ValueError):
            parse_gen_spec(bad)


def test_parse_interm():
    assert parse_interm("inf") is None
    assert parse_interm(None) is None
    assert parse_interm(float("inf")) is None
    assert parse_interm("8") == 8


def test_resolve_topology_accepts_every_form(tmp_path, fig2):
    path = tmp_path / "t.json"
    save_topology(fig2, path)
    for spec in (fig2, {"kind": "fig2"}, "fig2", str(path)):
        assert resolve_topology(spec).to_dict() == fig2.to_dict()
    assert resolve_topology("fig2", 9.0).radio.theta_db == 9.0
    with pytest.raises(ValueError):
        resolve_topology(42)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(trials=0)
    with pytest.raises(ValueError):
        ExperimentConfig(n_iter=[])
    with pytest.raises(ValueError):
        ExperimentConfig(mode="batch")
    cfg = ExperimentConfig(n_iter=[30, 10, 30], n_interm=["inf", 8])
    assert cfg.n_iter == [10, 30]
    assert cfg.n_interm == [None, 8]


def test_config_file_round_trip(tmp_path):
    cfg = ExperimentConfig(topology="fig2", M=3, trials=5, n_iter=[5, 10])
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert ExperimentConfig.from_file(path) == cfg
    path.write_text(json.dumps({"trials": 3, "colour": "red"}))
    with pytest.raises(ValueError, match="unknown"):
        ExperimentConfig.from_file(path)


def test_wilson_interval_brackets_estimate():
    lo, hi = wilson_interval(3, 100)
    assert lo < 0.03 < hi
    lo, hi = wilson_interval(0, 50)
    assert lo == 0.0 and hi > 0.0
    p = outage_point(8, 10, 5, 20)
    assert p.outage == 0.25 and p.failures == 5


def test_outage_is_reproducible():
    cfg = ExperimentConfig(topology="fig2", M=3, trials=40, n_iter=[5, 15], chunk=16)
    a, b = run_outage(cfg), run_outage(cfg)
    assert a == b
    assert all(p.trials == 40 and 0.0 <= p.outage <= 1.0 for p in a.points)


def test_outage_chunking_does_not_change_estimates():
    base = dict(topology="tree3hop:9", trials=30, n_iter=[10, 20])
    a = run_outage(ExperimentConfig(**base, chunk=7))
    b = run_outage(ExperimentConfig(**base, chunk=30))
    assert a == b


def test_outage_is_one_without_a_valid_allocation():
    cfg = ExperimentConfig(topology="fig2", M=2, trials=5, n_iter=[5])
    with pytest.warns(UserWarning, match="no valid allocation"):
        curve = run_outage(cfg)
    assert all(p.outage == 1.0 for p in curve.points)


def test_async_outage_runs():
    cfg = ExperimentConfig(topology="fig2", M=3, trials=4, n_iter=[3, 6], mode="async")
    curve = run_outage(cfg)
    assert len(curve.points) == 4


def test_curve_lookup():
    curve = run_outage(ExperimentConfig(topology="fig2", M=3, trials=3, n_iter=[4]))
    assert curve.get(None, 4).n_interm is None
    with pytest.raises(KeyError):
        curve.get(8, 5)


def test_allocate_increments_slots(fig1):
    res = run_allocate(fig1, M=2, K=1)
    assert res.valid and res.n_slots == 3
    assert {m for m, _, ok in res.attempts if not ok} == {2}


def test_allocate_gives_up_after_extra_slots(tree9):
    # one iteration is never enough, so every slot count up to auto + 3 is tried
    res = run_allocate(tree9, K=2, bp=BpConfig(n_iter=1, alpha=0.3))
    assert not res.valid and res.report is None
    assert sorted({m for m, _, _ in res.attempts}) == [4, 5, 6, 7]
    assert len(res.attempts) == 12


def test_allocate_guided_on_fig2(fig2):
    res = run_allocate(fig2, M=2, K=2, guided=True)
    # two slots are infeasible, so the loop moves on to three
    assert res.valid and res.n_slots == 3
    assert res.report.n_residual == 0 and not res.report.violations
    oracle = enumerate_valid(fig2, 3, 2)
    assert tuple(res.allocation.xhat) in oracle


def test_allocation_csv_round_trip(tmp_path, fig1):
    res = run_allocate(fig1, K=2)
    path = tmp_path / "a.csv"
    emit_csv(res.allocation, path)
    assert read_allocation_csv(path) == res.allocation.schedule
    x = res.factor_graph.schedule_to_x(read_allocation_csv(path))
    np.testing.assert_array_equal(x, res.allocation.xhat)
    assert b"\r" not in path.read_bytes()


def test_allocation_csv_rejects_duplicates(tmp_path):
    path = tmp_path / "a.csv"
    path.write_text("terminal,slot,channel\n1,1,1\n1,2,1\n")
    with pytest.raises(ValueError, match="twice"):
        read_allocation_csv(path)
    path.write_text("node,slot,channel\n1,1,1\n")
    with pytest.raises(ValueError, match="header"):
        read_allocation_csv(path)


def test_empty_curve_writes_header_only(tmp_path):
    path = tmp_path / "o.csv"
    emit_csv(OutageCurve([]), path)
    assert path.read_text() == "n_interm,n_iter,trials,outage,ci_lo,ci_hi\n"


def test_outage_csv_round_trip(tmp_path):
    curve = run_outage(ExperimentConfig(topology="fig2", M=3, trials=10, n_iter=[3, 9]))
    path = tmp_path / "o.csv"
    emit_csv(curve, path)
    assert read_outage_csv(path) == curve


def test_residual_and_trace_csv(tmp_path, fig2):
    rep = verify_schedule(fig2, {1: (1, 1), 2: (2, 1), 3: (3, 1), 5: (1, 1)})
    path = tmp_path / "r.csv"
    emit_csv(rep, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "link_child,link_parent,sinr_db,violated"
    assert len(lines) == 1 + len(rep.links)
    trace_path = tmp_path / "t.csv"
    emit_csv([(1, 3, False, 0), (2, 0, True, 0)], trace_path)
    assert trace_path.read_text() == "iter,violated,valid,restarts\n1,3,0,0\n2,0,1,0\n"
    with pytest.raises(TypeError):
        emit_csv(3.5, tmp_path / "x.csv")


@settings(max_examples=40, deadline=None)
@given(
    schedule=st.dictionaries(
        st.integers(1, 50), st.tuples(st.integers(1, 9), st.integers(1, 4)), min_size=1, max_size=20
    )
)
def test_allocation_csv_round_trip_property(tmp_path_factory, schedule):
    path = tmp_path_factory.mktemp("csv") / "a.csv"
    write_allocation_csv(schedule, path)
    assert read_allocation_csv(path) == schedule


def test_outage_warning_free_on_feasible_instance():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        run_outage(ExperimentConfig(topology="fig2", M=3, trials=2, n_iter=[2]))
