"""Constraint factor graph over the binary scheduling variables.

Variable ``v`` stands for "terminal ``i`` transmits in slot ``m`` on channel
``k``" (slots and channels are 1-based, ``v`` is 0-based):

    v = rank(i) * M * K + (m - 1) * K + (k - 1)

where ``rank`` orders the non-sink terminals by id.  Every factor scope is
ordered terminal-major (terminals by id, then channels ascending), so bit
``p`` of a local assignment mask is scope position ``p``.

Three factor kinds exist per slot ``m``:

* ``F(i, m)`` routing factor over the two-hop neighbourhood of ``i``;
* ``H(i, m)`` interference factor over the interferer set of ``i``;
* ``T(i)`` transmission factor over every variable of ``i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .network import InterferenceMap, NetworkModel, RelationSets, build_relations, detect_interferers

F, H, T = "F", "H", "T"

# Scopes up to this many variables store their satisfying masks as int64.
MAX_WORD_SCOPE = 62


def _popcount(bits):
    return int(sum(1 for b in bits if b))


def _active(terminals, bits, n_channels):
    return [
        (terminals[p // n_channels], p % n_channels + 1)
        for p, b in enumerate(bits)
        if b
    ]


def _check_len(bits, expected, what):
    if len(bits) != expected:
        raise ValueError(f"{what} expects {expected} bits, got {len(bits)}")


# -- factor pairwise rules ------------------------------------------------------


def _f_conflict(a, b, rel: RelationSets):
    (t1, k1), (t2, k2) = a, b
    if k1 != k2:
        return t1 in rel.one_hop[t2] or t1 in rel.siblings[t2]
    return t1 in rel.two_hop[t2]


def _h_conflict(a, b, i, par):
    (t1, k1), (t2, k2) = a, b
    if k1 == k2:
        return True
    if t1 == t2:
        return True
    return (t1 == i and t2 == par) or (t1 == par and t2 == i)


def h_zero_threshold(i, relations_or_parent, interference: InterferenceMap, n_channels):
    """Active-count from which an interference factor is identically zero.

    The parent of ``i`` is counted even when it is the sink, which keeps the
    shortcut sound for children of the sink (their parent is not a scope
    member, so ``|I(i)|`` active bits can all sit on different channels).
    """
    members = interference.interferers[i]
    return min(n_channels + 1, len(members) + (0 if _parent_in(i, members, relations_or_parent) else 1))


def _parent_in(i, members, relations_or_parent):
    par = _parent_of(i, relations_or_parent)
    return par is None or par in members


def _parent_of(i, relations_or_parent):
    if isinstance(relations_or_parent, dict):
        return relations_or_parent.get(i)
    return getattr(relations_or_parent, "parent", {}).get(i)


def eval_factor_f(i, assignment, relations: RelationSets, n_channels) -> int:
    """Routing factor of terminal ``i`` in one slot."""
    scope = sorted(relations.two_hop[i])
    _check_len(assignment, len(scope) * n_channels, f"f[{i}]")
    n_on = _popcount(assignment)
    if n_on <= 1:
        return 1
    if n_on >= routing_zero_threshold(len(scope)):
        return 0  # constraints 2 or 3
    active = _active(scope, assignment, n_channels)
    for a in active:
        for b in active:
            if a != b and _f_conflict(a, b, relations):
                return 0
    return 1


def eval_factor_h(i, assignment, parent, interference: InterferenceMap, n_channels) -> int:
    """Interference factor of terminal ``i`` in one slot.

    ``parent`` is the routing parent map of the network.
    """
    scope = sorted(interference.interferers[i])
    _check_len(assignment, len(scope) * n_channels, f"h[{i}]")
    n_on = _popcount(assignment)
    if n_on <= 1:
        return 1
    if n_on >= h_zero_threshold(i, parent, interference, n_channels):
        return 0  # constraints 2 or 3
    active = _active(scope, assignment, n_channels)
    par = parent.get(i)
    for a in active:
        for b in active:
            if a != b and _h_conflict(a, b, i, par):
                return 0
    return 1


def eval_factor_t(assignment, n_slots, n_channels) -> int:
    """Transmission factor: exactly one active bit."""
    _check_len(assignment, n_slots * n_channels, "t")
    return int(_popcount(assignment) == 1)


# -- graph --------------------------------------------------------------------


@dataclass(frozen=True)
class FactorNode:
    index: int
    kind: str
    terminal: int
    slot: int | None
    scope: np.ndarray  # variable indices, canonical order
    scope_terminals: tuple  # terminal of each scope position

    @property
    def degree(self):
        return len(self.scope)

    @property
    def label(self):
        return f"{self.kind}({self.terminal})" if self.slot is None else f"{self.kind}({self.terminal},{self.slot})"


@dataclass
class FeasibleSet:
    """Satisfying configurations of every factor.

    ``masks[J]`` holds the sorted local bitmasks (bit ``p`` = scope position
    ``p``) with ``g_J = 1``.  Factors of the same kind and terminal share one
    array.  Scopes wider than ``MAX_WORD_SCOPE`` fall back to Python ints in
    an object array.
    """

    masks: list

    def count(self, J):
        return len(self.masks[J])

    def contains(self, J, mask):
        arr = self.masks[J]
        if arr.dtype == object:
            return int(mask) in set(arr.tolist())
        pos = np.searchsorted(arr, mask)
        return pos < len(arr) and arr[pos] == mask

    def bits(self, J, degree):
        """Satisfying configurations as a boolean matrix ``(n_sat, degree)``."""
        arr = self.masks[J]
        if arr.dtype == object:
            return np.array([[(int(m) >> p) & 1 for p in range(degree)] for m in arr], dtype=bool).reshape(-1, degree)
        return ((arr[:, None] >> np.arange(degree, dtype=np.int64)) & 1).astype(bool)

    def partial(self, J, pos, x):
        """Assignments of ``V_J \\ v`` that satisfy ``g_J`` with ``x_v = x``.

        ``v`` is scope position ``pos``; the returned masks drop that bit.
        """
        out = []
        for m in self.masks[J].tolist():
            m = int(m)
            if (m >> pos) & 1 == x:
                low = m & ((1 << pos) - 1)
                high = m >> (pos + 1)
                out.append(low | (high << pos))
        return out

    @property
    def total_size(self):
        return int(sum(len(m) for m in self.masks))


@dataclass
class FactorGraph:
    network: NetworkModel
    relations: RelationSets
    interference: InterferenceMap
    n_slots: int
    n_channels: int
    var_terminals: tuple  # non-sink terminals, rank order
    factors: list
    feasible: FeasibleSet | None = None
    # edges, factor-major: edge e joins factors[edge_factor[e]] and variable edge_var[e]
    edge_factor: np.ndarray = field(default=None, repr=False)
    edge_var: np.ndarray = field(default=None, repr=False)
    edge_pos: np.ndarray = field(default=None, repr=False)
    factor_edges: list = field(default=None, repr=False)
    var_edges: list = field(default=None, repr=False)

    @property
    def n_vars(self):
        return len(self.var_terminals) * self.n_slots * self.n_channels

    @property
    def n_factors(self):
        return len(self.factors)

    @property
    def n_edges(self):
        return len(self.edge_var)

    def var_index(self, terminal, slot, channel):
        rank = self.var_terminals.index(terminal)
        if not (1 <= slot <= self.n_slots and 1 <= channel <= self.n_channels):
            raise ValueError(f"slot {slot} / channel {channel} out of range")
        return rank * self.n_slots * self.n_channels + (slot - 1) * self.n_channels + channel - 1

    def decode(self, v):
        mk = self.n_slots * self.n_channels
        rank, rest = divmod(int(v), mk)
        m, k = divmod(rest, self.n_channels)
        return self.var_terminals[rank], m + 1, k + 1

    def factors_of(self, v):
        """Indices of the factors adjacent to variable ``v``."""
        return [int(self.edge_factor[e]) for e in self.var_edges[v]]

    def evaluate(self, J, bits) -> int:
        """Evaluate factor ``J`` on its local bits with the reference evaluator."""
        node = self.factors[J]
        if node.kind == F:
            return eval_factor_f(node.terminal, bits, self.relations, self.n_channels)
        if node.kind == H:
            return eval_factor_h(node.terminal, bits, self.network.parent, self.interference, self.n_channels)
        return eval_factor_t(bits, self.n_slots, self.n_channels)

    def local_mask(self, J, xhat):
        scope = self.factors[J].scope
        return int(sum(int(xhat[v]) << p for p, v in enumerate(scope)))

    def schedule_to_x(self, schedule):
        """Bit vector for ``{terminal: (slot, channel)}``."""
        x = np.zeros(self.n_vars, dtype=np.int8)
        for t, (m, k) in schedule.items():
            x[self.var_index(t, m, k)] = 1
        return x

    def x_to_activity(self, x):
        out = {t: [] for t in self.var_terminals}
        for v in np.flatnonzero(np.asarray(x)):
            t, m, k = self.decode(v)
            out[t].append((m, k))
        return out

    def dump(self) -> str:
        """One line per factor: kind, terminal, slot, scope as terminal:slot:channel."""
        lines = []
        for node in self.factors:
            scope = " ".join("%d:%d:%d" % self.decode(v) for v in node.scope)
            slot = "-" if node.slot is None else node.slot
            lines.append(f"{node.kind} {node.terminal} {slot} [{scope}]")
        expected = expected_factor_count(self.network.n_terminals, self.n_slots)
        omitted = expected - len(self.factors)
        if omitted:
            lines.append(f"# {omitted} empty-scope factor(s) omitted from {expected}")
        return "\n".join(lines) + "\n"


def expected_factor_count(n_terminals, n_slots):
    return (n_terminals - 1) * (2 * n_slots + 1) + n_slots


def choose_n_slots(net: NetworkModel) -> int:
    """Maximum routing-tree degree (at least 1)."""
    degree = {t: 0 for t in net.terminals}
    for c, p in net.parent.items():
        degree[c] += 1
        degree[p] += 1
    return max(1, max(degree.values()))


def build_factor_graph(net: NetworkModel, n_slots, n_channels, relations=None, interference=None) -> FactorGraph:
    if n_slots < 1 or n_channels < 1:
        raise ValueError("need at least one slot and one channel")
    relations = relations or build_relations(net)
    interference = interference or detect_interferers(net)
    M, K = int(n_slots), int(n_channels)
    var_terminals = tuple(net.non_sink)
    rank = {t: r for r, t in enumerate(var_terminals)}

    def scope_of(terminals, slot):
        ts = sorted(terminals)
        vars_ = [rank[t] * M * K + (slot - 1) * K + k for t in ts for k in range(K)]
        owners = tuple(t for t in ts for _ in range(K))
        return np.array(vars_, dtype=np.int64), owners

    factors = []

    def add(kind, terminal, slot, scope, owners):
        if len(scope) == 0:
            return
        factors.append(FactorNode(len(factors), kind, terminal, slot, scope, owners))

    for i in sorted(net.terminals):
        for m in range(1, M + 1):
            add(F, i, m, *scope_of(relations.two_hop[i], m))
    for i in var_terminals:
        for m in range(1, M + 1):
            add(H, i, m, *scope_of(interference.interferers[i], m))
    for i in var_terminals:
        scope = np.arange(rank[i] * M * K, (rank[i] + 1) * M * K, dtype=np.int64)
        add(T, i, None, scope, tuple(i for _ in scope))

    fg = FactorGraph(net, relations, interference, M, K, var_terminals, factors)
    edge_factor, edge_var, edge_pos, factor_edges = [], [], [], []
    for node in factors:
        start = len(edge_var)
        for p, v in enumerate(node.scope):
            edge_factor.append(node.index)
            edge_var.append(int(v))
            edge_pos.append(p)
        factor_edges.append(np.arange(start, len(edge_var), dtype=np.int64))
    fg.edge_factor = np.array(edge_factor, dtype=np.int64)
    fg.edge_var = np.array(edge_var, dtype=np.int64)
    fg.edge_pos = np.array(edge_pos, dtype=np.int64)
    fg.factor_edges = factor_edges
    var_edges = [[] for _ in range(fg.n_vars)]
    for e, v in enumerate(edge_var):
        var_edges[v].append(e)
    fg.var_edges = [np.array(es, dtype=np.int64) for es in var_edges]
    return fg


# -- feasible sets ------------------------------------------------------------


def _search(degree, owners, n_channels, max_on, conflict):
    """Depth-first enumeration of assignments with no conflicting active pair.

    Branches are cut as soon as the active count reaches ``max_on + 1`` or a
    newly activated position conflicts with an earlier one.
    """
    found = []
    active = []

    def visit(p, mask):
        if p == degree:
            found.append(mask)
            return
        visit(p + 1, mask)
        if len(active) >= max_on:
            return
        here = (owners[p], p % n_channels + 1)
        if any(conflict(here, a) for a in active):
            return
        active.append(here)
        visit(p + 1, mask | (1 << p))
        active.pop()

    visit(0, 0)
    return found


def _candidates(fg: FactorGraph, node: FactorNode):
    K = fg.n_channels
    if node.kind == T:
        return [1 << p for p in range(node.degree)]
    if node.kind == F:
        max_on = routing_zero_threshold(len(fg.relations.two_hop[node.terminal])) - 1
        return _search(node.degree, node.scope_terminals, K, max_on, lambda a, b: _f_conflict(a, b, fg.relations))
    par = fg.network.parent.get(node.terminal)
    max_on = max(1, h_zero_threshold(node.terminal, fg.network.parent, fg.interference, K) - 1)
    return _search(
        node.degree, node.scope_terminals, K, max_on, lambda a, b: _h_conflict(a, b, node.terminal, par)
    )


def precompute_feasible(fg: FactorGraph) -> FeasibleSet:
    """Enumerate and store the satisfying configurations of every factor.

    Candidates come from a pruned binary-tree search; each one is confirmed
    with the reference evaluator before it is stored.
    """
    cache = {}
    masks = []
    for node in fg.factors:
        key = (node.kind, node.terminal)
        if key not in cache:
            keep = []
            for mask in _candidates(fg, node):
                bits = [(mask >> p) & 1 for p in range(node.degree)]
                if fg.evaluate(node.index, bits):
                    keep.append(mask)
            keep.sort()
            dtype = np.int64 if node.degree <= MAX_WORD_SCOPE else object
            arr = np.array(keep, dtype=dtype)
            arr.setflags(write=False)
            cache[key] = arr
        masks.append(cache[key])
    fg.feasible = FeasibleSet(masks)
    return fg.feasible


def binary_entropy(x):
    if x <= 0 or x >= 1:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def routing_zero_threshold(n_two_hop):
    """Active-count from which a routing factor is identically zero.

    A lone terminal may always transmit once, so the count never drops below 2.
    """
    return max(int(n_two_hop), 2)


def prop3_bound(kind, scope_terminals, n_channels, zero_threshold=None):
    """Entropy upper bound on the number of satisfying configurations.

    ``scope_terminals`` is ``|N_TwoH(i)|`` for routing factors and
    ``|I_interf(i)|`` for interference factors.  Satisfying configurations
    have fewer than ``zero_threshold`` active bits, which gives
    ``delta = (zero_threshold - 1) / (K * n)``.  Without an explicit
    threshold the raw counts are used (``n`` for routing, ``min(K+1, n)``
    for interference); those undercount single-terminal scopes.
    """
    n = int(scope_terminals)
    K = int(n_channels)
    if n == 0:
        return 1.0
    if kind == F:
        thr = n if zero_threshold is None else zero_threshold
    elif kind == H:
        thr = min(K + 1, n) if zero_threshold is None else zero_threshold
    else:
        raise ValueError(f"no cardinality bound for factor kind {kind!r}")
    delta = (int(thr) - 1) / (K * n)
    return 2.0 ** (binary_entropy(delta) * K * n)


def factor_bound(fg: FactorGraph, J, raw_threshold=False):
    """Entropy bound for factor ``J``, using the sound zero thresholds unless ``raw_threshold``."""
    node = fg.factors[J]
    n = len(set(node.scope_terminals))
    if raw_threshold:
        return prop3_bound(node.kind, n, fg.n_channels)
    if node.kind == F:
        thr = routing_zero_threshold(n)
    else:
        thr = h_zero_threshold(node.terminal, fg.network.parent, fg.interference, fg.n_channels)
    return prop3_bound(node.kind, n, fg.n_channels, thr)


def _require_feasible(fg):
    if fg.feasible is None:
        raise RuntimeError("feasible sets are not precomputed; call precompute_feasible first")


def kappa(fg: FactorGraph, v) -> int:
    _require_feasible(fg)
    return max(fg.feasible.count(J) for J in fg.factors_of(v))


def epsilon(fg: FactorGraph, v) -> float:
    """``1 / (1 + kappa_v ** |J_v|)`` evaluated with exact integers."""
    k = kappa(fg, v)
    power = k ** len(fg.var_edges[v])
    return 1.0 / (1 + power)


def kappas(fg: FactorGraph) -> np.ndarray:
    return np.array([kappa(fg, v) for v in range(fg.n_vars)], dtype=np.int64)


def epsilons(fg: FactorGraph) -> np.ndarray:
    return np.array([epsilon(fg, v) for v in range(fg.n_vars)])


def prepare(net: NetworkModel, n_slots, n_channels, theta_db=None) -> FactorGraph:
    """Relations, interferers, graph and feasible sets in one call."""
    if theta_db is not None:
        net = net.with_theta(theta_db)
    fg = build_factor_graph(net, n_slots, n_channels)
    precompute_feasible(fg)
    return fg


def local_masks(fg: FactorGraph, J, X: np.ndarray) -> np.ndarray:
    """Local masks of factor ``J`` for a batch of assignments ``X (B, n_vars)``."""
    scope = fg.factors[J].scope
    weights = (np.int64(1) << np.arange(len(scope), dtype=np.int64))
    return (np.asarray(X)[:, scope].astype(np.int64) * weights).sum(axis=1)


def factor_values(fg: FactorGraph, X: np.ndarray) -> np.ndarray:
    """``g_J`` for every factor and every row of ``X``: boolean ``(B, n_factors)``."""
    _require_feasible(fg)
    X = np.atleast_2d(np.asarray(X))
    out = np.empty((X.shape[0], fg.n_factors), dtype=bool)
    for node in fg.factors:
        arr = fg.feasible.masks[node.index]
        if arr.dtype == object:
            ok = set(arr.tolist())
            out[:, node.index] = [fg.local_mask(node.index, row) in ok for row in X]
            continue
        out[:, node.index] = np.isin(local_masks(fg, node.index, X), arr)
    return out


__all__ = [
    "F",
    "H",
    "T",
    "FactorNode",
    "FeasibleSet",
    "FactorGraph",
    "eval_factor_f",
    "eval_factor_h",
    "eval_factor_t",
    "h_zero_threshold",
    "choose_n_slots",
    "build_factor_graph",
    "precompute_feasible",
    "prop3_bound",
    "factor_bound",
    "binary_entropy",
    "routing_zero_threshold",
    "kappa",
    "epsilon",
    "kappas",
    "epsilons",
    "prepare",
    "factor_values",
    "expected_factor_count",
]
