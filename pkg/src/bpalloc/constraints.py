"""Scheduling constraints checked directly on the routing tree.

These checkers work from tree distances and the interferer sets alone.  They
deliberately share no code with :mod:`bpalloc.factors`, so they can serve as
an independent reference for the factor evaluators.

Constraint numbering:

1. siblings never transmit in the same slot;
2. a child and its parent never transmit in the same slot (half-duplex);
3. a terminal uses at most one channel in a slot;
4. terminals exactly two hops apart never share both slot and channel;
5. a child and the terminals that interfere with its link, together with
   the interferers themselves, use pairwise different channels in a slot;
6. every non-sink terminal transmits in exactly one slot per frame.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping


@dataclass(frozen=True)
class Violation:
    constraint: int
    terminals: tuple
    slot: int | None = None

    def __str__(self):
        where = "" if self.slot is None else f" in slot {self.slot}"
        return f"constraint {self.constraint}: terminals {self.terminals}{where}"


def _path_to_root(t, parent):
    path = [t]
    while t in parent:
        t = parent[t]
        path.append(t)
    return path


def tree_distance(a, b, parent):
    """Number of routing hops between ``a`` and ``b`` (sink may be on the path)."""
    if a == b:
        return 0
    up_a = _path_to_root(a, parent)
    depth_a = {t: d for d, t in enumerate(up_a)}
    for d_b, t in enumerate(_path_to_root(b, parent)):
        if t in depth_a:
            return depth_a[t] + d_b
    raise ValueError(f"terminals {a} and {b} are not in the same tree")


def are_siblings(a, b, parent):
    return a != b and a in parent and b in parent and parent[a] == parent[b]


def routing_conflict(a, ka, b, kb, parent):
    """True when transmitting ``(a, ka)`` and ``(b, kb)`` in one slot breaks 1-4."""
    if a == b:
        return ka != kb  # constraint 3
    if parent.get(a) == b or parent.get(b) == a:
        return True  # constraint 2
    if are_siblings(a, b, parent):
        return True  # constraint 1
    if ka == kb and tree_distance(a, b, parent) == 2:
        return True  # constraint 4
    return False


def interference_conflict(a, ka, b, kb, child, parent):
    """True when ``(a, ka)`` and ``(b, kb)`` break 2, 3 or 5 for the link of ``child``.

    Both terminals must belong to the interferer set of ``child``.
    """
    if a == b:
        return ka != kb
    if {a, b} == {child, parent.get(child)}:
        return True
    return ka == kb


def _pairs(active):
    active = list(active)
    for x in range(len(active)):
        for y in range(x + 1, len(active)):
            yield active[x], active[y]


def routing_ok(active: Iterable[tuple], parent: Mapping) -> bool:
    """Check 1-4 for a list of ``(terminal, channel)`` transmissions in one slot."""
    return not any(routing_conflict(a, ka, b, kb, parent) for (a, ka), (b, kb) in _pairs(active))


def interference_ok(active: Iterable[tuple], child, parent: Mapping) -> bool:
    """Check 2, 3 and 5 for transmissions drawn from the interferer set of ``child``."""
    return not any(
        interference_conflict(a, ka, b, kb, child, parent) for (a, ka), (b, kb) in _pairs(active)
    )


def transmission_ok(n_active: int) -> bool:
    return n_active == 1


def schedule_violations(activity, parent, sink, interferers) -> list:
    """All constraint violations of a full activity pattern.

    Parameters
    ----------
    activity : mapping terminal -> iterable of (slot, channel)
        Every transmission of each non-sink terminal.  Terminals missing from
        the mapping are treated as silent.
    parent : mapping child -> parent
    sink : terminal id
    interferers : mapping terminal -> set of terminals (detected interferer sets)
    """
    out = []
    by_slot = defaultdict(list)
    terminals = sorted(t for t in set(parent) | set(parent.values()) if t != sink)
    for t in terminals:
        uses = sorted(set(activity.get(t, ())))
        slots = [m for m, _ in uses]
        for m in sorted(set(slots)):
            if slots.count(m) > 1:
                out.append(Violation(3, (t,), m))
        if not transmission_ok(len(set(slots))):
            out.append(Violation(6, (t,)))
        for m, k in uses:
            by_slot[m].append((t, k))

    for m in sorted(by_slot):
        active = by_slot[m]
        for (a, ka), (b, kb) in _pairs(active):
            if a == b:
                continue
            pair = tuple(sorted((a, b)))
            if parent.get(a) == b or parent.get(b) == a:
                out.append(Violation(2, pair, m))
            elif are_siblings(a, b, parent):
                out.append(Violation(1, pair, m))
            elif ka == kb and tree_distance(a, b, parent) == 2:
                out.append(Violation(4, pair, m))
        for child in terminals:
            members = interferers.get(child, set())
            local = [(t, k) for t, k in active if t in members]
            for (a, ka), (b, kb) in _pairs(local):
                if a != b and ka == kb:
                    out.append(Violation(5, tuple(sorted((a, b))) + (child,), m))
    return out
