"""Built-in fixtures and seeded topology generators."""

from __future__ import annotations

import math

import numpy as np

from .network import NetworkModel, RadioModel, Terminal

KINDS = ("chain", "star", "tree3hop", "grid")


def _network(positions, sink, parent, radio=None, seed=0):
    terminals = {
        i: Terminal(i, (float(x), float(y)), is_sink=(i == sink)) for i, (x, y) in positions.items()
    }
    return NetworkModel(terminals, sink, dict(parent), radio or RadioModel(), seed)


def fig1_network(theta_db=3.0) -> NetworkModel:
    """Four terminals where a time-only schedule needs three slots.

    Terminal 1 is heard at the sink, so it interferes with the link 2 -> 4.
    With one channel, 1, 2 and 3 must all use different slots; a second
    channel lets 1 and 2 share a slot.
    """
    positions = {1: (-6.0, 6.0), 2: (15.0, 0.0), 3: (-12.0, 0.0), 4: (0.0, 0.0)}
    return _network(positions, 4, {1: 3, 3: 4, 2: 4}, RadioModel(theta_db=theta_db))


def fig2_network(theta_db=3.0) -> NetworkModel:
    """Five terminals, sink 4, where terminal 1 interferes at the sink.

    Expected interferer sets: 1:{1,3} 2:{2,3} 3:{1,3} 4:{} 5:{1,5}.
    """
    positions = {
        1: (-5.0, 5.0),
        2: (-30.0, 0.0),
        3: (-15.0, 0.0),
        4: (0.0, 0.0),
        5: (15.0, 0.0),
    }
    return _network(positions, 4, {1: 3, 2: 3, 3: 4, 5: 4}, RadioModel(theta_db=theta_db))


def _jitter(rng, scale):
    return rng.uniform(-scale, scale, size=2)


def _chain(n, spacing, rng):
    pos = {i: (spacing * (i - 1), 0.0) for i in range(1, n + 1)}
    return pos, 1, {i: i - 1 for i in range(2, n + 1)}


def _star(n, spacing, rng):
    pos = {1: (0.0, 0.0)}
    for i in range(2, n + 1):
        a = 2 * math.pi * (i - 2) / max(1, n - 1)
        pos[i] = (spacing * math.cos(a), spacing * math.sin(a))
    return pos, 1, {i: 1 for i in range(2, n + 1)}


def _hop_sizes(n_children):
    outer = max(1, n_children // 4)
    middle = max(1, n_children // 4)
    inner = n_children - middle - outer
    if inner < 1:
        raise ValueError("tree3hop needs at least 4 terminals")
    return [inner, middle, outer]


def _tree3hop(n, spacing, rng):
    """Three rings of terminals in a 120 degree sector around the sink.

    Half of the terminals sit on the first ring, so the sink is the busiest
    receiver; the other two rings hold a quarter each.  Each terminal routes
    to the nearest terminal of the previous ring.
    """
    pos = {1: (0.0, 0.0)}
    rings = [[1]]
    nid = 2
    sector = math.radians(120.0)
    for hop, size in enumerate(_hop_sizes(n - 1), start=1):
        ring = []
        for s in range(size):
            a = -sector / 2 + sector * (s + 0.5) / size
            x, y = hop * spacing * math.cos(a), hop * spacing * math.sin(a)
            dx, dy = _jitter(rng, 0.15 * spacing)
            pos[nid] = (x + dx, y + dy)
            ring.append(nid)
            nid += 1
        rings.append(ring)
    parent = {}
    for hop in range(1, len(rings)):
        for t in rings[hop]:
            parent[t] = min(rings[hop - 1], key=lambda p: (math.dist(pos[t], pos[p]), p))
    return pos, 1, parent


def _grid(n, spacing, rng):
    side = math.ceil(math.sqrt(n))
    pos = {}
    for i in range(1, n + 1):
        r, c = divmod(i - 1, side)
        dx, dy = _jitter(rng, 0.1 * spacing)
        pos[i] = (c * spacing + (0.0 if i == 1 else dx), r * spacing + (0.0 if i == 1 else dy))
    parent = {}
    for i in range(2, n + 1):
        r, c = divmod(i - 1, side)
        # step toward the corner sink: left along the row, then up column 0
        parent[i] = i - 1 if c > 0 else i - side
    return pos, 1, parent


def generate_topology(kind, n, spacing_m=10.0, seed=0, theta_db=3.0, radio=None) -> NetworkModel:
    """Deterministic synthetic topology with terminal 1 as the sink."""
    if kind not in KINDS:
        raise ValueError(f"unknown topology kind {kind!r}; expected one of {KINDS}")
    if int(n) < 1 or (kind != "chain" and int(n) < 2):
        raise ValueError(f"{kind} needs more terminals than {n}")
    if spacing_m <= 0:
        raise ValueError("spacing_m must be positive")
    rng = np.random.default_rng(seed)
    builder = {"chain": _chain, "star": _star, "tree3hop": _tree3hop, "grid": _grid}[kind]
    pos, sink, parent = builder(int(n), float(spacing_m), rng)
    if radio is None:
        radio = RadioModel(theta_db=theta_db)
    return _network(pos, sink, parent, radio, seed)


__all__ = ["fig1_network", "fig2_network", "generate_topology", "KINDS"]
