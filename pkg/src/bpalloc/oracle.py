"""Brute-force ground truth for small instances.

Everything here is built on :mod:`bpalloc.constraints`; nothing calls the
factor evaluators, so agreement between the two is a real cross-check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .constraints import (
    interference_conflict,
    interference_ok,
    routing_conflict,
    routing_ok,
    schedule_violations,
    transmission_ok,
)
from .network import NetworkModel, detect_interferers

MAX_VARS = 24


class InstanceTooLarge(ValueError):
    pass


@dataclass
class OracleResult:
    valid_allocations: list  # sorted tuples of 0/1, one per variable
    count: int
    per_factor_counts: dict = field(default_factory=dict)
    n_slots: int = 0
    n_channels: int = 0

    def __contains__(self, x):
        return tuple(int(b) for b in x) in self._lookup

    @property
    def _lookup(self):
        cache = self.__dict__.get("_set")
        if cache is None:
            cache = self.__dict__["_set"] = set(self.valid_allocations)
        return cache


@dataclass(frozen=True)
class CrossReport:
    bp_valid: bool
    member: bool
    distance: int | None  # Hamming distance to the nearest valid allocation
    consistent: bool


def _index(rank, slot, channel, M, K):
    return rank * M * K + (slot - 1) * K + (channel - 1)


def decode_activity(net: NetworkModel, x, M, K):
    """``{terminal: [(slot, channel), ...]}`` for a full bit vector."""
    terminals = net.non_sink
    x = np.asarray(x).ravel()
    if len(x) != len(terminals) * M * K:
        raise ValueError(f"expected {len(terminals) * M * K} bits, got {len(x)}")
    out = {}
    for r, t in enumerate(terminals):
        out[t] = [
            (m, k)
            for m in range(1, M + 1)
            for k in range(1, K + 1)
            if x[_index(r, m, k, M, K)]
        ]
    return out


def is_valid(net: NetworkModel, x, M, K, interference=None) -> bool:
    """True when the bit vector violates none of the scheduling constraints."""
    interference = interference or detect_interferers(net)
    activity = decode_activity(net, x, M, K)
    return not schedule_violations(activity, net.parent, net.sink, interference.interferers)


def _pair_ok(a, b, parent, watchers):
    """Can transmissions ``a`` and ``b`` (terminal, slot, channel) coexist?

    ``watchers[t]`` lists the children whose interferer set contains ``t``.
    """
    (ta, ma, ka), (tb, mb, kb) = a, b
    if ma != mb:
        return True
    if routing_conflict(ta, ka, tb, kb, parent):
        return False
    shared = set(watchers[ta]) & set(watchers[tb])
    return not any(interference_conflict(ta, ka, tb, kb, c, parent) for c in shared)


def _search(net, M, K, interference, limit=None):
    terminals = net.non_sink
    sets = interference.interferers
    watchers = {t: [c for c in terminals if t in sets[c]] for t in terminals}
    choices = [(m, k) for m in range(1, M + 1) for k in range(1, K + 1)]
    found = []
    chosen = []

    def visit(depth):
        if limit is not None and len(found) >= limit:
            return
        if depth == len(terminals):
            found.append(tuple(chosen))
            return
        t = terminals[depth]
        for m, k in choices:
            here = (t, m, k)
            if all(_pair_ok(prev, here, net.parent, watchers) for prev in chosen):
                chosen.append(here)
                visit(depth + 1)
                chosen.pop()

    visit(0)
    return found


def _to_bits(net, picks, M, K):
    rank = {t: r for r, t in enumerate(net.non_sink)}
    x = [0] * (len(rank) * M * K)
    for t, m, k in picks:
        x[_index(rank[t], m, k, M, K)] = 1
    return tuple(x)


def enumerate_valid(net: NetworkModel, M, K, interference=None, factor_graph=None) -> OracleResult:
    """Every valid allocation of a small instance.

    Assignments where some terminal is not active exactly once are skipped
    up front, and partial schedules are abandoned on their first conflicting
    pair.  Every survivor is re-checked against the full constraint audit.
    """
    n_vars = M * K * (net.n_terminals - 1)
    if n_vars > MAX_VARS:
        raise InstanceTooLarge(f"{n_vars} variables exceed the oracle cap of {MAX_VARS}")
    interference = interference or detect_interferers(net)
    valid = []
    for picks in _search(net, M, K, interference):
        x = _to_bits(net, picks, M, K)
        if is_valid(net, x, M, K, interference):
            valid.append(x)
    valid.sort()
    counts = {}
    if factor_graph is not None:
        counts = {node.index: count_satisfying(factor_graph, node.index) for node in factor_graph.factors}
    return OracleResult(valid, len(valid), counts, M, K)


def find_valid(net: NetworkModel, M, K, interference=None):
    """First valid allocation found by backtracking, or ``None``. No size cap."""
    interference = interference or detect_interferers(net)
    hits = _search(net, M, K, interference, limit=1)
    if not hits:
        return None
    x = _to_bits(net, hits[0], M, K)
    if not is_valid(net, x, M, K, interference):
        raise AssertionError("backtracking produced an allocation the audit rejects")
    return np.array(x, dtype=np.int8)


def local_ok(kind, terminal, active, parent, n_active) -> bool:
    """Reference check of one factor's constraints on its active (terminal, channel) list."""
    if kind == "F":
        return routing_ok(active, parent)
    if kind == "H":
        return interference_ok(active, terminal, parent)
    return transmission_ok(n_active)


def count_satisfying(factor_graph, J) -> int:
    """Number of satisfying configurations of factor ``J`` by full enumeration."""
    node = factor_graph.factors[J]
    degree = len(node.scope)
    if degree > MAX_VARS:
        raise InstanceTooLarge(f"factor scope of {degree} variables exceeds {MAX_VARS}")
    K = factor_graph.n_channels
    parent = factor_graph.network.parent
    total = 0
    for bits in itertools.product((0, 1), repeat=degree):
        active = [(node.scope_terminals[p], p % K + 1) for p, b in enumerate(bits) if b]
        if local_ok(node.kind, node.terminal, active, parent, len(active)):
            total += 1
    return total


def cross_validate(x, bp_valid: bool, oracle: OracleResult) -> CrossReport:
    """Compare a BP decision with the oracle's valid set."""
    x = tuple(int(b) for b in np.asarray(x).ravel())
    member = x in oracle
    if member:
        distance = 0
    elif oracle.valid_allocations:
        arr = np.array(oracle.valid_allocations, dtype=np.int8)
        distance = int(np.min(np.sum(arr != np.array(x, dtype=np.int8), axis=1)))
    else:
        distance = None
    consistent = member if bp_valid else not member
    return CrossReport(bool(bp_valid), member, distance, consistent)


__all__ = [
    "OracleResult",
    "CrossReport",
    "InstanceTooLarge",
    "MAX_VARS",
    "decode_activity",
    "is_valid",
    "enumerate_valid",
    "find_valid",
    "count_satisfying",
    "local_ok",
    "cross_validate",
]
