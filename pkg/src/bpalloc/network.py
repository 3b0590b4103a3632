"""Physical network model: terminals, radio, routing tree and interference sets."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Mapping

import numpy as np

from .constraints import Violation, schedule_violations

DEFAULT_TX_POWER_DBM = -10.0
DEFAULT_NOISE_DBM = -110.0


class TopologyError(ValueError):
    """Raised for malformed topologies and routing trees."""


@dataclass(frozen=True)
class Terminal:
    id: int
    position: tuple
    tx_power_dbm: float = DEFAULT_TX_POWER_DBM
    noise_power_dbm: float = DEFAULT_NOISE_DBM
    is_sink: bool = False


@dataclass(frozen=True)
class RadioModel:
    """Log-distance path loss with an optional fixed shadowing draw per link."""

    pathloss_ref_db: float = 55.0
    ref_distance_m: float = 1.0
    pathloss_exponent: float = 2.4
    shadowing_sigma_db: float = 0.0
    sensitivity_dbm: float = -100.0
    theta_db: float = 3.0

    def __post_init__(self):
        if self.ref_distance_m <= 0:
            raise ValueError("ref_distance_m must be positive")
        if self.pathloss_exponent <= 0:
            raise ValueError("pathloss_exponent must be positive")
        if self.shadowing_sigma_db < 0:
            raise ValueError("shadowing_sigma_db must be non-negative")


@dataclass(frozen=True)
class RelationSets:
    """Routing-tree neighbourhoods; every set excludes the sink."""

    children: Mapping
    siblings: Mapping
    one_hop: Mapping
    two_hop: Mapping


@dataclass(frozen=True)
class InterferenceMap:
    potential: Mapping
    interferers: Mapping


@dataclass(frozen=True)
class NetworkModel:
    terminals: Mapping  # id -> Terminal
    sink: int
    parent: Mapping  # child id -> parent id
    radio: RadioModel = field(default_factory=RadioModel)
    seed: int = 0

    def __post_init__(self):
        ids = sorted(self.terminals)
        if ids != list(range(1, len(ids) + 1)):
            raise TopologyError(f"terminal ids must be dense 1..N, got {ids}")
        sinks = [t.id for t in self.terminals.values() if t.is_sink]
        if sinks != [self.sink]:
            raise TopologyError(f"exactly one sink expected (declared {self.sink}, flagged {sinks})")
        _check_tree(self.parent, self.sink, ids)

    @property
    def n_terminals(self):
        return len(self.terminals)

    @property
    def non_sink(self):
        return [t for t in sorted(self.terminals) if t != self.sink]

    @cached_property
    def routing_edges(self):
        return frozenset(frozenset(e) for e in self.parent.items())

    def is_routing_link(self, a, b):
        return frozenset((a, b)) in self.routing_edges

    def with_theta(self, theta_db):
        radio = RadioModel(**{**self.radio.__dict__, "theta_db": float(theta_db)})
        return NetworkModel(dict(self.terminals), self.sink, dict(self.parent), radio, self.seed)

    def distance(self, i, j):
        (xi, yi), (xj, yj) = self.terminals[i].position, self.terminals[j].position
        return math.hypot(xi - xj, yi - yj)

    def to_dict(self):
        r = self.radio
        return {
            "terminals": [
                {
                    "id": t.id,
                    "x": t.position[0],
                    "y": t.position[1],
                    "tx_power_dbm": t.tx_power_dbm,
                    "noise_power_dbm": t.noise_power_dbm,
                }
                for t in (self.terminals[i] for i in sorted(self.terminals))
            ],
            "sink": self.sink,
            "routing_edges": [[c, p] for c, p in sorted(self.parent.items())],
            "radio": dict(r.__dict__),
            "seed": self.seed,
        }


def _check_tree(parent, sink, ids):
    if sink in parent:
        raise TopologyError("the sink cannot have a parent")
    missing = [i for i in ids if i != sink and i not in parent]
    if missing:
        raise TopologyError(f"terminals without a routing parent: {missing}")
    unknown = [p for p in parent.values() if p not in ids] + [c for c in parent if c not in ids]
    if unknown:
        raise TopologyError(f"routing edges reference unknown terminals: {unknown}")
    for start in parent:
        seen = {start}
        t = start
        while t in parent:
            t = parent[t]
            if t in seen:
                raise TopologyError(f"routing edges contain a cycle through {t}")
            seen.add(t)
        if t != sink:
            raise TopologyError(f"terminal {start} does not reach the sink")


def network_from_dict(data: Mapping) -> NetworkModel:
    """Build a :class:`NetworkModel` from the JSON-shaped topology layout."""
    try:
        rows = data["terminals"]
        sink = data["sink"]
    except (KeyError, TypeError) as exc:
        raise TopologyError(f"topology is missing field {exc}") from None
    if isinstance(sink, list):
        if len(sink) != 1:
            raise TopologyError(f"exactly one sink expected, got {sink}")
        sink = sink[0]
    sink = int(sink)
    flagged = [int(r["id"]) for r in rows if r.get("is_sink")]
    if any(f != sink for f in flagged):
        raise TopologyError(f"exactly one sink expected, got {sorted(set(flagged) | {sink})}")
    if "routing_edges" not in data:
        raise TopologyError("topology has no routing_edges; tree construction is not supported")
    terminals = {}
    for row in rows:
        tid = int(row["id"])
        if tid in terminals:
            raise TopologyError(f"duplicate terminal id {tid}")
        terminals[tid] = Terminal(
            id=tid,
            position=(float(row["x"]), float(row["y"])),
            tx_power_dbm=float(row.get("tx_power_dbm", DEFAULT_TX_POWER_DBM)),
            noise_power_dbm=float(row.get("noise_power_dbm", DEFAULT_NOISE_DBM)),
            is_sink=tid == sink,
        )
    if sink not in terminals:
        raise TopologyError(f"sink {sink} is not a terminal")
    parent = {}
    for edge in data["routing_edges"]:
        child, par = (int(x) for x in edge)
        if child in parent:
            raise TopologyError(f"terminal {child} has two parents")
        parent[child] = par
    radio = RadioModel(**{k: float(v) for k, v in data.get("radio", {}).items()})
    return NetworkModel(terminals, sink, parent, radio, int(data.get("seed", 0)))


def load_topology(path) -> NetworkModel:
    """Read a topology file (JSON) and validate its routing tree."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TopologyError(f"{path}: {exc}") from None
    return network_from_dict(data)


def save_topology(net: NetworkModel, path):
    Path(path).write_text(json.dumps(net.to_dict(), indent=2) + "\n", encoding="utf-8")


# -- radio ------------------------------------------------------------------


def link_gain_db(net: NetworkModel, i, j):
    """Channel gain from ``i`` to ``j`` in dB (negative path loss plus shadowing).

    The shadowing term is a single draw per ordered pair, seeded by the network
    seed, so repeated calls agree and links may be asymmetric when sigma > 0.
    """
    if i == j:
        raise ValueError("link gain needs two distinct terminals")
    d = net.distance(i, j)
    if d == 0:
        raise ValueError(f"terminals {i} and {j} are co-located")
    r = net.radio
    gain = -(r.pathloss_ref_db + 10.0 * r.pathloss_exponent * math.log10(d / r.ref_distance_m))
    if r.shadowing_sigma_db > 0:
        rng = np.random.default_rng([net.seed, i, j])
        gain += r.shadowing_sigma_db * rng.standard_normal()
    return gain


def rx_power_dbm(net, i, j):
    return net.terminals[i].tx_power_dbm + link_gain_db(net, i, j)


def _mw(dbm):
    return 10.0 ** (dbm / 10.0)


def sinr_set_db(net: NetworkModel, i, j, iset=()):
    """SINR of the link ``i -> j`` with every terminal of ``iset`` transmitting."""
    interference = sum(_mw(rx_power_dbm(net, k, j)) for k in iset)
    denom = _mw(net.terminals[j].noise_power_dbm) + interference
    return 10.0 * math.log10(_mw(rx_power_dbm(net, i, j)) / denom)


def sinr_pair_db(net: NetworkModel, i, j, iprime):
    if iprime == i:
        raise ValueError("interferer must differ from the transmitter")
    return sinr_set_db(net, i, j, (iprime,))


# -- routing relations --------------------------------------------------------


def build_relations(net: NetworkModel) -> RelationSets:
    sink, parent = net.sink, net.parent
    ids = sorted(net.terminals)
    children = {i: set() for i in ids}
    for c, p in parent.items():
        children[p].add(c)

    def drop_sink(s):
        return {t for t in s if t != sink}

    siblings = {
        i: drop_sink(children[parent[i]] - {i}) if i in parent else set() for i in ids
    }
    one_hop = {}
    for i in ids:
        s = set(children[i]) | {i}
        if i in parent:
            s.add(parent[i])
        one_hop[i] = drop_sink(s)
    two_hop = {}
    for i in ids:
        s = set(one_hop[parent[i]]) if i in parent else set()
        for c in children[i]:
            s |= one_hop[c]
        two_hop[i] = drop_sink(s)
    children = {i: drop_sink(children[i]) for i in ids}
    return RelationSets(children, siblings, one_hop, two_hop)


def detect_interferers(net: NetworkModel, theta_db=None) -> InterferenceMap:
    """Pairwise-SINR interferer detection around each routing link.

    A terminal is a potential interferer of receiver ``j`` when it is heard
    above sensitivity and is not routing-linked to ``j``.  It becomes an
    interferer of child ``i`` when its lone transmission drops the SINR of
    ``i -> par(i)`` strictly below theta.  The child and its parent are always
    members; the sink never is.
    """
    theta = net.radio.theta_db if theta_db is None else theta_db
    sens = net.radio.sensitivity_dbm
    ids = sorted(net.terminals)
    potential = {}
    for j in ids:
        potential[j] = {
            k
            for k in ids
            if k not in (j, net.sink)
            and not net.is_routing_link(k, j)
            and rx_power_dbm(net, k, j) >= sens
        }
    interferers = {}
    for i in ids:
        if i == net.sink:
            interferers[i] = set()
            continue
        par = net.parent[i]
        found = {k for k in potential[par] if k != i and sinr_pair_db(net, i, par, k) < theta}
        interferers[i] = (found | {i, par}) - {net.sink}
    return InterferenceMap(potential, interferers)


# -- schedule verification ----------------------------------------------------


@dataclass(frozen=True)
class LinkReport:
    child: int
    parent: int
    sinr_db: float
    violated: bool


@dataclass(frozen=True)
class ResidualReport:
    links: list
    violations: list  # of constraints.Violation

    @property
    def residual(self):
        return [link for link in self.links if link.violated]

    @property
    def n_residual(self):
        return len(self.residual)

    def constraint_counts(self):
        out = {c: 0 for c in range(1, 7)}
        for v in self.violations:
            out[v.constraint] += 1
        return out


def as_schedule(alloc) -> dict:
    """Coerce an allocation-like object to ``{terminal: (slot, channel)}``."""
    if hasattr(alloc, "schedule"):
        if getattr(alloc, "valid", True) is False and not alloc.schedule:
            raise ValueError("allocation is marked invalid and carries no schedule")
        alloc = alloc.schedule
    return {int(t): (int(m), int(k)) for t, (m, k) in dict(alloc).items()}


def verify_schedule(net: NetworkModel, alloc, interference: InterferenceMap | None = None) -> ResidualReport:
    """Aggregate-SINR and constraint audit of a one-slot-per-terminal schedule.

    Every co-slot, co-channel transmitter in the whole network counts as
    interference here, not only the detected interferers.
    """
    schedule = as_schedule(alloc)
    missing = [t for t in net.non_sink if t not in schedule]
    if missing:
        raise ValueError(f"schedule leaves terminals unassigned: {missing}")
    if interference is None:
        interference = detect_interferers(net)
    theta = net.radio.theta_db
    links = []
    for child in net.non_sink:
        par = net.parent[child]
        slot, chan = schedule[child]
        iset = [
            t
            for t, (m, k) in schedule.items()
            if t not in (child, par) and m == slot and k == chan
        ]
        s = sinr_set_db(net, child, par, iset)
        links.append(LinkReport(child, par, s, s < theta))
    activity = {t: [mk] for t, mk in schedule.items()}
    violations = schedule_violations(activity, net.parent, net.sink, interference.interferers)
    return ResidualReport(links, violations)


__all__ = [
    "Terminal",
    "RadioModel",
    "RelationSets",
    "InterferenceMap",
    "NetworkModel",
    "TopologyError",
    "Violation",
    "network_from_dict",
    "load_topology",
    "save_topology",
    "link_gain_db",
    "rx_power_dbm",
    "sinr_set_db",
    "sinr_pair_db",
    "build_relations",
    "detect_interferers",
    "LinkReport",
    "ResidualReport",
    "verify_schedule",
    "as_schedule",
]
