"""Monte-Carlo outage sweeps, the end-to-end allocation pipeline and CSV files."""

from __future__ import annotations

import contextlib
import csv
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import binomtest

from .bp import ASYNC, SYNC, Allocation, BpConfig, run, run_async, run_batch
from .datasets import fig1_network, fig2_network, generate_topology
from .factors import choose_n_slots, prepare
from .network import NetworkModel, ResidualReport, detect_interferers, load_topology, verify_schedule
from .oracle import find_valid

EXTRA_SLOTS = 3
DEFAULT_GRID = (10, 30, 50, 70, 90)
DEFAULT_CHUNK = 500

MODES = {"sync": SYNC, "async": ASYNC, SYNC: SYNC, ASYNC: ASYNC}


# -- topology specs -----------------------------------------------------------


def resolve_topology(spec, theta_db=None) -> NetworkModel:
    """Network from a path, a NetworkModel, or a generator spec.

    Generator specs are dicts ``{kind, n, spacing_m, seed}`` or strings
    ``kind:n[:spacing[:seed]]``; ``fig1`` and ``fig2`` name the small fixtures.
    """
    if isinstance(spec, NetworkModel):
        net = spec
    elif isinstance(spec, dict):
        kind = spec["kind"]
        if kind in ("fig1", "fig2"):
            net = {"fig1": fig1_network, "fig2": fig2_network}[kind]()
        else:
            net = generate_topology(
                kind, int(spec["n"]), float(spec.get("spacing_m", 10.0)), int(spec.get("seed", 0))
            )
    elif isinstance(spec, (str, Path)) and Path(spec).exists():
        net = load_topology(spec)
    elif isinstance(spec, str):
        net = resolve_topology(parse_gen_spec(spec))
    else:
        raise ValueError(f"cannot interpret topology {spec!r}")
    return net if theta_db is None else net.with_theta(theta_db)


def parse_gen_spec(text):
    parts = text.split(":")
    if parts[0] in ("fig1", "fig2"):
        if len(parts) > 1:
            raise ValueError(f"{parts[0]} takes no parameters")
        return {"kind": parts[0]}
    if len(parts) < 2 or len(parts) > 4:
        raise ValueError(f"generator spec {text!r} should look like kind:n[:spacing[:seed]]")
    out = {"kind": parts[0], "n": int(parts[1])}
    if len(parts) > 2:
        out["spacing_m"] = float(parts[2])
    if len(parts) > 3:
        out["seed"] = int(parts[3])
    return out


# -- outage -------------------------------------------------------------------


def _interm_label(n_interm):
    return "inf" if n_interm is None else str(int(n_interm))


def parse_interm(value):
    if value is None:
        return None
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "none", "∞"):
        return None
    if isinstance(value, float) and math.isinf(value):
        return None
    return int(value)


@dataclass
class ExperimentConfig:
    topology: object = "tree3hop:9"
    M: object = "auto"
    K: int = 2
    theta_db: float = 3.0
    n_iter: list = field(default_factory=lambda: list(DEFAULT_GRID))
    n_interm: list = field(default_factory=lambda: [8, None])
    alpha: float = 0.3
    trials: int = 2000
    seed: int = 0
    mode: str = "sync"
    chunk: int = DEFAULT_CHUNK

    def __post_init__(self):
        self.n_iter = sorted({int(n) for n in self.n_iter})
        self.n_interm = [parse_interm(v) for v in self.n_interm]
        if int(self.trials) < 1:
            raise ValueError("trials must be at least 1")
        if not self.n_iter or self.n_iter[0] < 1:
            raise ValueError("n_iter grid must hold positive integers")
        if not self.n_interm:
            raise ValueError("n_interm list must not be empty")
        if self.mode not in MODES:
            raise ValueError(f"mode must be sync or async, got {self.mode!r}")
        if self.M != "auto":
            self.M = int(self.M)

    @classmethod
    def from_file(cls, path):
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self):
        d = asdict(self)
        d["n_interm"] = [_interm_label(v) if v is None else v for v in self.n_interm]
        if isinstance(d["topology"], NetworkModel):
            d["topology"] = d["topology"].to_dict()
        return d


@dataclass(frozen=True)
class OutagePoint:
    n_interm: int | None
    n_iter: int
    trials: int
    outage: float
    ci_lo: float
    ci_hi: float
    failures: int


@dataclass
class OutageCurve:
    points: list

    def get(self, n_interm, n_iter) -> OutagePoint:
        for p in self.points:
            if p.n_interm == n_interm and p.n_iter == n_iter:
                return p
        raise KeyError((n_interm, n_iter))


def wilson_interval(failures, trials, confidence=0.95):
    ci = binomtest(int(failures), int(trials)).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def outage_point(n_interm, n_iter, failures, trials) -> OutagePoint:
    lo, hi = wilson_interval(failures, trials)
    return OutagePoint(n_interm, int(n_iter), int(trials), failures / trials, lo, hi, int(failures))


def _instance(config: ExperimentConfig):
    net = resolve_topology(config.topology, config.theta_db)
    M = choose_n_slots(net) if config.M == "auto" else int(config.M)
    return net, M


def run_outage(config: ExperimentConfig, progress=None) -> OutageCurve:
    """Outage estimates for every ``(n_interm, n_iter)`` grid point.

    Each trial runs once for ``max(n_iter)`` iterations with no early exit and
    its decision is checked at every grid point along the way; trial ``t``
    uses seed ``config.seed + t``.
    """
    net, M = _instance(config)
    fg = prepare(net, M, config.K)
    if find_valid(net, M, config.K, fg.interference) is None:
        warnings.warn(f"no valid allocation exists with M={M}, K={config.K}; outage is 1", stacklevel=2)
    horizon = max(config.n_iter)
    points = []
    for n_interm in config.n_interm:
        bp = BpConfig(
            n_iter=horizon, n_interm=n_interm, alpha=config.alpha, schedule=MODES[config.mode], seed=config.seed
        )
        failures = np.zeros(len(config.n_iter), dtype=np.int64)
        cols = np.array(config.n_iter) - 1
        if bp.schedule == SYNC:
            for start in range(0, config.trials, config.chunk):
                size = min(config.chunk, config.trials - start)
                batch = run_batch(fg, bp, size, first_trial=start)
                failures += (~batch.valid[:, cols]).sum(axis=0)
                if progress:
                    progress(n_interm, start + size)
        else:
            for t in range(config.trials):
                res = run_async(fg, BpConfig(**{**bp.__dict__, "seed": config.seed + t}))
                ok = np.array([rec[2] for rec in res.trace])
                failures += ~ok[cols]
        for n, f in zip(config.n_iter, failures):
            points.append(outage_point(n_interm, n, int(f), config.trials))
    return OutageCurve(points)


# -- allocation pipeline ------------------------------------------------------


@dataclass
class AllocateResult:
    allocation: Allocation
    report: ResidualReport | None
    n_slots: int
    n_channels: int
    factor_graph: object
    attempts: list  # (M, seed, valid) for every BP run tried

    @property
    def valid(self):
        return self.allocation.valid


def run_allocate(
    net: NetworkModel,
    M="auto",
    K=2,
    theta_db=None,
    bp: BpConfig | None = None,
    guided=False,
    tries_per_slot_count=3,
) -> AllocateResult:
    """Relations, interferers, factor graph, BP and verification in one pass.

    When no valid allocation turns up the slot count grows by one, up to
    three beyond the tree-degree choice.  Each slot count gets
    ``tries_per_slot_count`` BP runs with consecutive seeds; with ``guided``
    the priors are centred on a backtracking solution instead.
    """
    if theta_db is not None:
        net = net.with_theta(theta_db)
    bp = bp or BpConfig(n_iter=50, n_interm=8, alpha=0.3)
    m_auto = choose_n_slots(net)
    m = m_auto if M == "auto" else int(M)
    m_max = max(m, m_auto + EXTRA_SLOTS)
    interference = detect_interferers(net)
    attempts = []
    last = None
    while m <= m_max:
        fg = prepare(net, m, K)
        if guided:
            xstar = find_valid(net, m, K, interference)
            seeds = [bp.seed] if xstar is not None else []
        else:
            xstar = None
            seeds = [bp.seed + r for r in range(tries_per_slot_count)]
        for s in seeds:
            cfg = BpConfig(**{**bp.__dict__, "seed": s, "guided": xstar, "stop_on_valid": True})
            res = run(fg, cfg)
            attempts.append((m, s, res.allocation.valid))
            last = (res.allocation, fg, m)
            if res.allocation.valid:
                report = verify_schedule(net, res.allocation, fg.interference)
                return AllocateResult(res.allocation, report, m, K, fg, attempts)
        if last is None or last[2] != m:
            zeros = np.zeros(fg.n_vars, dtype=np.int8)
            last = (Allocation.from_x(fg, zeros, False), fg, m)
        m += 1
    alloc, fg, m_last = last
    return AllocateResult(alloc, None, m_last, K, fg, attempts)


# -- CSV ----------------------------------------------------------------------

OUTAGE_HEADER = ["n_interm", "n_iter", "trials", "outage", "ci_lo", "ci_hi"]
ALLOCATION_HEADER = ["terminal", "slot", "channel"]
RESIDUAL_HEADER = ["link_child", "link_parent", "sinr_db", "violated"]
TRACE_HEADER = ["iter", "violated", "valid", "restarts"]


def _writer(handle):
    return csv.writer(handle, lineterminator="\n")


@contextlib.contextmanager
def _open_out(path):
    """File handle for ``path``; ``None`` or ``"-"`` means stdout."""
    if path is None or str(path) == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _fmt(x):
    return repr(float(x))


def write_outage_csv(curve: OutageCurve, path):
    with _open_out(path) as fh:
        w = _writer(fh)
        w.writerow(OUTAGE_HEADER)
        for p in curve.points:
            w.writerow([_interm_label(p.n_interm), p.n_iter, p.trials, _fmt(p.outage), _fmt(p.ci_lo), _fmt(p.ci_hi)])


def read_outage_csv(path) -> OutageCurve:
    points = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            trials = int(row["trials"])
            outage = float(row["outage"])
            points.append(
                OutagePoint(
                    parse_interm(row["n_interm"]),
                    int(row["n_iter"]),
                    trials,
                    outage,
                    float(row["ci_lo"]),
                    float(row["ci_hi"]),
                    int(round(outage * trials)),
                )
            )
    return OutageCurve(points)


def write_allocation_csv(schedule, path):
    with _open_out(path) as fh:
        w = _writer(fh)
        w.writerow(ALLOCATION_HEADER)
        for t in sorted(schedule):
            m, k = schedule[t]
            w.writerow([t, m, k])


def read_allocation_csv(path) -> dict:
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ALLOCATION_HEADER:
            raise ValueError(f"allocation CSV must have header {','.join(ALLOCATION_HEADER)}")
        for row in reader:
            t = int(row["terminal"])
            if t in out:
                raise ValueError(f"terminal {t} listed twice")
            out[t] = (int(row["slot"]), int(row["channel"]))
    return out


def write_residual_csv(report: ResidualReport, path):
    with _open_out(path) as fh:
        w = _writer(fh)
        w.writerow(RESIDUAL_HEADER)
        for link in report.links:
            w.writerow([link.child, link.parent, _fmt(link.sinr_db), int(link.violated)])


def write_trace_csv(trace, path):
    with _open_out(path) as fh:
        w = _writer(fh)
        w.writerow(TRACE_HEADER)
        for n, violated, valid, restarts in trace:
            w.writerow([n, violated, int(valid), restarts])


def emit_csv(result, path):
    """Write an outage curve, a schedule, a residual report or a trace."""
    if isinstance(result, OutageCurve):
        write_outage_csv(result, path)
    elif isinstance(result, ResidualReport):
        write_residual_csv(result, path)
    elif isinstance(result, Allocation):
        write_allocation_csv(result.schedule, path)
    elif isinstance(result, dict):
        write_allocation_csv(result, path)
    elif isinstance(result, list):
        write_trace_csv(result, path)
    else:
        raise TypeError(f"no CSV layout for {type(result).__name__}")


__all__ = [
    "ExperimentConfig",
    "OutagePoint",
    "OutageCurve",
    "AllocateResult",
    "resolve_topology",
    "parse_gen_spec",
    "parse_interm",
    "wilson_interval",
    "run_outage",
    "run_allocate",
    "emit_csv",
    "write_outage_csv",
    "read_outage_csv",
    "write_allocation_csv",
    "read_allocation_csv",
    "write_residual_csv",
    "write_trace_csv",
]
