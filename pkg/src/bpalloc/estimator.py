"""Estimator-style front end: ``fit`` a network, ``predict`` its schedule."""

from __future__ import annotations

from collections.abc import Mapping
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .bp import ASYNC, SYNC, BpConfig
from .experiments import parse_interm, run_allocate
from .network import NetworkModel, build_relations, detect_interferers, load_topology, network_from_dict, verify_schedule


def check_network(network) -> NetworkModel:
    """Accept a NetworkModel, a topology mapping or a topology file path."""
    if isinstance(network, NetworkModel):
        return network
    if isinstance(network, Mapping):
        return network_from_dict(network)
    if isinstance(network, (str, Path)):
        return load_topology(network)
    raise TypeError(f"expected a NetworkModel, mapping or path, got {type(network).__name__}")


def check_slots(n_slots):
    if n_slots == "auto":
        return n_slots
    if isinstance(n_slots, (int, np.integer)) and n_slots >= 1:
        return int(n_slots)
    raise ValueError(f"n_slots must be 'auto' or a positive integer, got {n_slots!r}")


def check_positive_int(value, name):
    if not isinstance(value, (int, np.integer)) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


class ChannelAllocator(BaseEstimator):
    """Joint slot and channel allocation by loopy belief propagation.

    Parameters
    ----------
    n_slots : int or "auto"
        Frame length. "auto" uses the largest routing-tree degree and grows
        it by one (up to three times) until a valid allocation appears.
    n_channels : int
    theta_db : float or None
        SINR threshold; None keeps the network's own value.
    n_iter, n_interm, alpha : message-passing budget, restart period
        (None or "inf" for no restarts) and damping weight.
    schedule : "synchronous" or "asynchronous"
    guided : bool
        Centre the priors on a backtracking solution (debugging aid).
    seed : int

    Attributes
    ----------
    allocation_ : Allocation
    factor_graph_ : FactorGraph of the final slot count
    n_slots_ : int
    valid_ : bool
    report_ : ResidualReport or None
    """

    def __init__(
        self,
        n_slots="auto",
        n_channels=2,
        theta_db=None,
        n_iter=50,
        n_interm=8,
        alpha=0.3,
        schedule=SYNC,
        guided=False,
        margin=0.5,
        seed=0,
    ):
        self.n_slots = n_slots
        self.n_channels = n_channels
        self.theta_db = theta_db
        self.n_iter = n_iter
        self.n_interm = n_interm
        self.alpha = alpha
        self.schedule = schedule
        self.guided = guided
        self.margin = margin
        self.seed = seed

    def _config(self):
        if self.schedule not in (SYNC, ASYNC):
            raise ValueError(f"schedule must be {SYNC!r} or {ASYNC!r}")
        return BpConfig(
            n_iter=check_positive_int(self.n_iter, "n_iter"),
            n_interm=parse_interm(self.n_interm),
            alpha=float(self.alpha),
            schedule=self.schedule,
            seed=int(self.seed),
            margin=float(self.margin),
        )

    def fit(self, network, y=None):
        net = check_network(network)
        if self.theta_db is not None:
            net = net.with_theta(self.theta_db)
        result = run_allocate(
            net,
            M=check_slots(self.n_slots),
            K=check_positive_int(self.n_channels, "n_channels"),
            bp=self._config(),
            guided=bool(self.guided),
        )
        self.network_ = net
        self.allocation_ = result.allocation
        self.factor_graph_ = result.factor_graph
        self.n_slots_ = result.n_slots
        self.valid_ = result.valid
        self.report_ = result.report
        self.attempts_ = result.attempts
        return self

    def predict(self, network=None):
        """``(terminal, slot, channel)`` rows for every scheduled terminal."""
        check_is_fitted(self, "allocation_")
        if network is not None and check_network(network).to_dict() != self.network_.to_dict():
            raise ValueError("predict only covers the network passed to fit")
        rows = [(t, m, k) for t, (m, k) in sorted(self.allocation_.schedule.items())]
        return np.array(rows, dtype=np.int64).reshape(-1, 3)

    def fit_predict(self, network, y=None):
        return self.fit(network).predict()

    def score(self, network=None, y=None):
        """Fraction of routing links that meet the SINR threshold with every co-channel transmitter active.

        Zero when the fitted allocation is not valid.
        """
        check_is_fitted(self, "allocation_")
        if not self.valid_:
            return 0.0
        report = verify_schedule(self.network_, self.allocation_)
        return 1.0 - report.n_residual / max(1, len(report.links))


class InterferenceDetector(TransformerMixin, BaseEstimator):
    """Pairwise-SINR interferer detection as a transformer.

    ``transform`` returns an ``(N, N)`` 0/1 matrix whose row ``i - 1`` marks
    the interferer set of terminal ``i``.
    """

    def __init__(self, theta_db=None):
        self.theta_db = theta_db

    def fit(self, network, y=None):
        net = check_network(network)
        if self.theta_db is not None:
            net = net.with_theta(self.theta_db)
        self.network_ = net
        self.relations_ = build_relations(net)
        self.interference_ = detect_interferers(net)
        return self

    def transform(self, network):
        check_is_fitted(self, "interference_")
        net = check_network(network)
        if self.theta_db is not None:
            net = net.with_theta(self.theta_db)
        interference = detect_interferers(net)
        n = len(interference.interferers)
        out = np.zeros((n, n), dtype=np.int8)
        for i, members in interference.interferers.items():
            for j in members:
                out[i - 1, j - 1] = 1
        return out


__all__ = ["ChannelAllocator", "InterferenceDetector", "check_network", "check_slots", "check_positive_int"]
