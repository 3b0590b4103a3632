"""Loopy sum-product message passing on the scheduling factor graph.

Messages are kept as normalized log-probability pairs ``(log m(0), log m(1))``
with a leading batch axis, so many independent trials advance together.
A probability at or below ``exp(ZERO_LOG)`` is handled as an exact zero: the
products below track how many zero terms they contain instead of taking the
log of zero, which keeps exclusive products exact when one input vanishes.

The factor-to-variable update only visits the precomputed satisfying
configurations of each factor.  For an edge at scope position ``p``:

    m(x) = sum over satisfying c with c_p = x of  prod_{u != p} m_u(c_u)
         = (sum over those c of prod_u m_u(c_u)) / m_p(x)

which turns the whole sweep into two small matrix products per factor
template.  When ``m_p(x)`` is zero the same sums are taken over the
configurations whose only zero term is ``p`` itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .factors import FactorGraph, kappa, precompute_feasible

ZERO_LOG = -600.0
LOG_HALF = math.log(0.5)
SYNC, ASYNC = "synchronous", "asynchronous"


# -- configuration and results -------------------------------------------------


@dataclass(frozen=True)
class BpConfig:
    n_iter: int = 50
    n_interm: int | None = None  # None means no restarts
    alpha: float = 0.0
    schedule: str = SYNC
    seed: int = 0
    guided: np.ndarray | None = None  # reference solution x* for guided priors
    margin: float = 0.5
    stop_on_valid: bool = False

    def __post_init__(self):
        if int(self.n_iter) < 1:
            raise ValueError("n_iter must be at least 1")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("alpha must lie in [0, 1)")
        if self.n_interm is not None and int(self.n_interm) < 1:
            raise ValueError("n_interm must be positive or None")
        if self.schedule not in (SYNC, ASYNC):
            raise ValueError(f"schedule must be {SYNC!r} or {ASYNC!r}")
        if not 0.0 < self.margin < 1.0:
            raise ValueError("margin must lie in (0, 1)")


@dataclass
class PriorVector:
    """Per-variable priors as log pairs; ``q`` is the probability of zero."""

    log_p: np.ndarray  # (B, V, 2)
    seed: int | None = None

    @property
    def q(self):
        return np.exp(self.log_p[..., 0])

    @classmethod
    def from_q(cls, q, seed=None):
        """Priors from probabilities of zero, shape ``(V,)`` or ``(B, V)``."""
        q = np.atleast_2d(np.asarray(q, dtype=float))
        if np.any((q < 0) | (q > 1)):
            raise ValueError("prior entries must lie in [0, 1]")
        return cls(_log_prior_from_q(q), seed)


@dataclass
class MessageState:
    """All directed-edge messages of a batch of runs.

    ``fac_to_var`` entries flagged in ``sentinel`` carry no information yet;
    they hold the uniform pair, which contributes nothing to products.
    """

    var_to_fac: np.ndarray  # (B, E, 2) log pairs
    fac_to_var: np.ndarray  # (B, E, 2) log pairs
    sentinel: np.ndarray  # (B, E) bool
    iteration: int = 0
    conflicts: np.ndarray | None = None  # (B,) degenerate factor messages seen

    def prob_zero(self):
        """Both message directions as probabilities of zero, ``(var_to_fac, fac_to_var)``."""
        return np.exp(self.var_to_fac[..., 0]), np.exp(self.fac_to_var[..., 0])

    def copy(self):
        return MessageState(
            self.var_to_fac.copy(),
            self.fac_to_var.copy(),
            self.sentinel.copy(),
            self.iteration,
            None if self.conflicts is None else self.conflicts.copy(),
        )


@dataclass
class Allocation:
    xhat: np.ndarray  # (V,) int8
    schedule: dict  # terminal -> (slot, channel), only terminals with one active bit
    valid: bool
    converged_at: int | None = None

    @classmethod
    def from_x(cls, fg: FactorGraph, x, valid=None, converged_at=None):
        x = np.asarray(x, dtype=np.int8).ravel()
        schedule = {}
        for t, uses in fg.x_to_activity(x).items():
            if len(uses) == 1:
                schedule[t] = uses[0]
        if valid is None:
            valid = check_validity(fg, x)
        return cls(x, schedule, bool(valid), converged_at)


@dataclass
class BpResult:
    allocation: Allocation
    trace: list = field(default_factory=list)  # (iter, violated, valid, restarts)
    priors: PriorVector | None = None
    state: MessageState | None = None


@dataclass
class BatchResult:
    """Per-trial, per-iteration record of a batch of runs."""

    valid: np.ndarray  # (B, n_iter) bool, validity of the decision after iteration n
    violated: np.ndarray  # (B, n_iter) int
    restarts: np.ndarray  # (B, n_iter) cumulative restart events
    xhat: np.ndarray  # (B, V) final decisions
    seeds: np.ndarray  # (B,)

    def outage(self, n_iter):
        return float(np.mean(~self.valid[:, n_iter - 1]))


# -- compiled graph -----------------------------------------------------------


class _Group:
    """Factors sharing one satisfying-configuration table."""

    def __init__(self, factors, edges, configs):
        self.factors = np.asarray(factors, dtype=np.int64)  # (n,)
        self.edges = np.asarray(edges, dtype=np.int64)  # (n, d)
        self.configs = configs  # (S, d) float 0/1
        self.configs_t = np.ascontiguousarray(configs.T)  # (d, S)
        self.split = np.concatenate([1.0 - configs, configs], axis=1)  # (S, 2d)
        self.weights = np.int64(1) << np.arange(configs.shape[1], dtype=np.int64)

    @property
    def degree(self):
        return self.configs.shape[1]


class Plan:
    """Index arrays derived once from a factor graph."""

    def __init__(self, fg: FactorGraph):
        if fg.feasible is None:
            precompute_feasible(fg)
        self.fg = fg
        self.n_vars = fg.n_vars
        self.n_edges = fg.n_edges
        by_key = {}
        for node in fg.factors:
            arr = fg.feasible.masks[node.index]
            key = (node.kind, node.terminal)
            by_key.setdefault(key, (arr, []))[1].append(node.index)
        self.groups = []
        self.satisfying = {}
        for key, (arr, members) in by_key.items():
            degree = fg.factors[members[0]].degree
            if arr.dtype == object:
                raise ValueError(f"factor {key} has {degree} variables; too wide for the batched engine")
            configs = fg.feasible.bits(members[0], degree).astype(float)
            edges = np.stack([fg.factor_edges[J] for J in members])
            self.groups.append(_Group(members, edges, configs))
            self.satisfying[key] = np.asarray(arr)
        self.edge_var = fg.edge_var
        order = np.argsort(fg.edge_var, kind="stable")
        self.by_var = order
        counts = np.bincount(fg.edge_var, minlength=self.n_vars)
        if np.any(counts == 0):
            raise ValueError("every variable needs at least one adjacent factor")
        self.var_starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        self.factor_of_edge = fg.edge_factor


# -- log-pair helpers ----------------------------------------------------------


def _normalize(logs):
    """Normalize log pairs along the last axis; all-zero pairs become uniform.

    Returns the normalized pairs and a boolean mask of degenerate pairs.
    """
    with np.errstate(invalid="ignore"):
        total = np.logaddexp(logs[..., 0], logs[..., 1])
        bad = ~np.isfinite(total)
        out = logs - total[..., None]
    if np.any(bad):
        out[bad] = LOG_HALF
    return out, bad


def _split_zero(logs):
    """Finite part of log values and a 0/1 marker of vanishing entries."""
    zero = logs <= ZERO_LOG
    return np.where(zero, 0.0, logs), zero


# -- initialization -----------------------------------------------------------


def _uniform_draws(rng, n_vars):
    return rng.random(n_vars)


def _log_prior_from_q(q):
    q = np.asarray(q, dtype=float)
    with np.errstate(divide="ignore"):
        return np.stack([np.log(q), np.log1p(-q)], axis=-1)


def fresh_state(plan: Plan, priors: PriorVector) -> MessageState:
    B = priors.log_p.shape[0]
    v2f = priors.log_p[:, plan.edge_var, :].copy()
    f2v = np.full((B, plan.n_edges, 2), LOG_HALF)
    sentinel = np.ones((B, plan.n_edges), dtype=bool)
    return MessageState(v2f, f2v, sentinel, 0, np.zeros(B, dtype=np.int64))


def init_random(fg: FactorGraph, seed, plan=None):
    """Uniform random priors from ``default_rng(seed)``; messages start at the priors."""
    plan = plan or Plan(fg)
    q = _uniform_draws(np.random.default_rng(seed), fg.n_vars)
    priors = PriorVector(_log_prior_from_q(q)[None], seed)
    return priors, fresh_state(plan, priors)


def guided_log_prior(fg: FactorGraph, xstar, margin=0.5):
    """Log priors placed inside the convergence band around ``xstar``.

    ``P(x*_v) = 1 - margin * eps_v``.  The small side is stored as
    ``log(margin) + log(eps_v)`` so it keeps full precision when ``eps_v``
    is far below machine epsilon.
    """
    if not 0.0 < margin < 1.0:
        raise ValueError("margin must lie in (0, 1)")
    xstar = np.asarray(xstar).ravel()
    if len(xstar) != fg.n_vars:
        raise ValueError(f"reference solution needs {fg.n_vars} bits")
    if not check_validity(fg, xstar):
        raise ValueError("reference solution does not satisfy every factor")
    log_p = np.empty((fg.n_vars, 2))
    for v in range(fg.n_vars):
        log_small = math.log(margin) + log_epsilon(fg, v)
        small = math.exp(log_small)
        big = math.log1p(-small)
        if xstar[v]:
            log_p[v] = (log_small, big)
        else:
            log_p[v] = (big, log_small)
    return log_p


def log_epsilon(fg: FactorGraph, v):
    """``log(eps_v)`` computed without overflow for large ``kappa_v ** |J_v|``."""
    k = kappa(fg, v)
    n = len(fg.var_edges[v])
    if k == 1:
        return -math.log(2.0)
    # log(1 / (1 + k^n)) without forming k^n as a float
    return -(n * math.log(k) + math.log1p(k ** (-float(n))))


def init_guided(fg: FactorGraph, xstar, margin=0.5) -> PriorVector:
    return PriorVector(guided_log_prior(fg, xstar, margin)[None])


# -- sweeps -------------------------------------------------------------------


def factor_to_var_sweep(plan: Plan, state: MessageState):
    """Sum-product factor messages from the current variable messages.

    Returns new ``(B, E, 2)`` log pairs and a ``(B,)`` count of degenerate
    (all-zero) messages, which are replaced by the uniform pair.
    """
    v2f = state.var_to_fac
    B = v2f.shape[0]
    out = np.empty_like(v2f)
    degenerate = np.zeros(B, dtype=np.int64)
    for g in plan.groups:
        inc = v2f[:, g.edges, :]  # (B, n, d, 2)
        fin, zero = _split_zero(inc)
        zero_f = zero.astype(float)
        log_total = fin[..., 0].sum(-1)[..., None] + (fin[..., 1] - fin[..., 0]) @ g.configs_t
        n_zero = zero_f[..., 0].sum(-1)[..., None] + (zero_f[..., 1] - zero_f[..., 0]) @ g.configs_t
        n_zero = np.rint(n_zero)
        sums = []
        for want in (0.0, 1.0):
            mask = n_zero == want
            masked = np.where(mask, log_total, -np.inf)
            shift = masked.max(-1, keepdims=True)
            shift = np.where(np.isfinite(shift), shift, 0.0)
            weights = np.where(mask, np.exp(np.minimum(log_total - shift, 0.0)), 0.0)
            s = weights @ g.split  # (B, n, 2d)
            d = g.degree
            s = np.stack([s[..., :d], s[..., d:]], axis=-1)  # (B, n, d, 2)
            with np.errstate(divide="ignore"):
                sums.append(np.log(s) + shift[..., None])
        msg = np.where(zero, sums[1], sums[0] - fin)
        msg, bad = _normalize(msg)
        degenerate += bad.reshape(B, -1).sum(-1)
        out[:, g.edges, :] = msg
    return out, degenerate


def factor_to_var_naive(fg: FactorGraph, var_to_fac):
    """Reference factor sweep over every configuration of every factor domain.

    Single run: ``var_to_fac`` is an ``(E, 2)`` array of log pairs.  Each
    message is a log-sum-exp over the full domain, keeping only the
    configurations the reference evaluator accepts.  Returns ``(E, 2)``
    probability pairs.
    """
    logs = np.asarray(var_to_fac, dtype=float)
    out = np.empty_like(logs)
    for node in fg.factors:
        edges = fg.factor_edges[node.index]
        d = len(edges)
        domain = ((np.arange(2 ** d)[:, None] >> np.arange(d)) & 1).astype(np.int64)
        keep = np.array([fg.evaluate(node.index, row.tolist()) for row in domain], dtype=bool)
        rows = domain[keep]
        local = logs[edges]  # (d, 2)
        terms = local[np.arange(d), rows]  # (n_keep, d)
        for p, e in enumerate(edges):
            others = np.delete(terms, p, axis=1).sum(axis=1)
            pair = np.array(
                [np.logaddexp.reduce(others[rows[:, p] == x], initial=-np.inf) for x in (0, 1)]
            )
            top = pair.max()
            if not np.isfinite(top):
                out[e] = 0.5
                continue
            w = np.exp(pair - top)
            out[e] = w / w.sum()
    return out


def damp(new, previous, prev_sentinel, alpha):
    """Blend ``alpha * previous + (1 - alpha) * new`` in probability space.

    Edges whose previous message is still the uninformative sentinel are
    passed through unchanged.
    """
    if alpha == 0.0:
        return new
    blend = np.logaddexp(math.log(alpha) + previous, math.log1p(-alpha) + new)
    blend, _ = _normalize(blend)
    return np.where(prev_sentinel[..., None], new, blend)


def _var_totals(plan: Plan, log_prior, f2v):
    """Per-variable finite log sums and zero counts of prior times all factor messages."""
    fin, zero = _split_zero(f2v)
    fin_sorted = fin[:, plan.by_var, :]
    zero_sorted = zero[:, plan.by_var, :].astype(np.int64)
    pf, pz = _split_zero(log_prior)
    tot = np.add.reduceat(fin_sorted, plan.var_starts, axis=1) + pf
    nz = np.add.reduceat(zero_sorted, plan.var_starts, axis=1) + pz
    return tot, nz, fin, zero


def var_to_factor_sweep(plan: Plan, log_prior, state: MessageState):
    """Prior times every other incoming factor message, normalized per edge."""
    tot, nz, fin, zero = _var_totals(plan, log_prior, state.fac_to_var)
    ev = plan.edge_var
    ex_nz = nz[:, ev, :] - zero
    logs = np.where(ex_nz == 0, tot[:, ev, :] - fin, -np.inf)
    msg, bad = _normalize(logs)
    return msg, bad.reshape(bad.shape[0], -1).sum(-1)


def marginals(plan: Plan, log_prior, state: MessageState):
    """Normalized beliefs ``(B, V, 2)`` as log pairs."""
    tot, nz, _, _ = _var_totals(plan, log_prior, state.fac_to_var)
    logs = np.where(nz == 0, tot, -np.inf)
    return _normalize(logs)[0]


def decide(beliefs):
    """Hard decisions ``1{r(1) >= r(0)}``."""
    return (beliefs[..., 1] >= beliefs[..., 0]).astype(np.int8)


def violated_factors(plan: Plan, X):
    """Boolean ``(B, n_factors)`` marking factors that evaluate to zero on ``X``."""
    X = np.atleast_2d(X).astype(np.int64)
    out = np.zeros((X.shape[0], plan.fg.n_factors), dtype=bool)
    for g in plan.groups:
        scope_vars = plan.edge_var[g.edges]  # (n, d)
        masks = X[:, scope_vars] @ g.weights  # (B, n)
        node = plan.fg.factors[int(g.factors[0])]
        sat = plan.satisfying[(node.kind, node.terminal)]
        pos = np.searchsorted(sat, masks)
        pos = np.minimum(pos, len(sat) - 1)
        out[:, g.factors] = sat[pos] != masks
    return out


def check_validity(fg: FactorGraph, x, plan=None) -> bool:
    """True when every factor evaluates to one on ``x``."""
    plan = plan or plan_for(fg)
    return not bool(violated_factors(plan, np.asarray(x).reshape(1, -1)).any())


def plan_for(fg: FactorGraph) -> Plan:
    """The compiled plan of ``fg``, built on first use and kept on the graph."""
    plan = getattr(fg, "_bp_plan", None)
    if plan is None:
        plan = Plan(fg)
        fg._bp_plan = plan
    return plan


def periodic_restart(plan: Plan, state: MessageState, log_prior, X, rngs):
    """Re-randomize every variable adjacent to a violated factor.

    Each run's generator draws one full uniform vector per call; flagged
    variables take their new prior from it, their outgoing messages reset to
    that prior and their incoming factor messages reset to the sentinel.
    Returns the ``(B, V)`` flag mask.  Arrays are updated in place.
    """
    bad = violated_factors(plan, X)
    B = X.shape[0]
    edge_flag = bad[:, plan.factor_of_edge]  # (B, E) edges of violated factors
    flags = np.zeros((B, plan.n_vars), dtype=bool)
    rows, cols = np.nonzero(edge_flag)
    flags[rows, plan.edge_var[cols]] = True
    for b in np.flatnonzero(flags.any(axis=1)):
        q = _uniform_draws(rngs[b], plan.n_vars)
        sel = flags[b]
        log_prior[b, sel] = _log_prior_from_q(q[sel])
    touched = flags[:, plan.edge_var]  # (B, E)
    state.var_to_fac = np.where(touched[..., None], log_prior[:, plan.edge_var, :], state.var_to_fac)
    state.fac_to_var = np.where(touched[..., None], LOG_HALF, state.fac_to_var)
    state.sentinel = state.sentinel | touched
    return flags


# -- drivers ------------------------------------------------------------------


def _step(plan, state, log_prior, alpha):
    f2v, degenerate = factor_to_var_sweep(plan, state)
    if state.iteration >= 1:
        f2v = damp(f2v, state.fac_to_var, state.sentinel, alpha)
    state.fac_to_var = f2v
    state.sentinel = np.zeros_like(state.sentinel)
    state.var_to_fac, _ = var_to_factor_sweep(plan, log_prior, state)
    state.iteration += 1
    state.conflicts = state.conflicts + degenerate
    return marginals(plan, log_prior, state)


def run_batch(
    fg: FactorGraph,
    config: BpConfig,
    n_trials=1,
    first_trial=0,
    plan=None,
    callback: Callable | None = None,
) -> BatchResult:
    """Synchronous runs of trials ``first_trial ..`` with seeds ``config.seed + t``.

    Unless ``stop_on_valid`` is set, every run goes the full ``n_iter``
    iterations and the validity of its decision is recorded after each one.
    With ``stop_on_valid`` the batch stops once every run is valid and the
    records are truncated there.  ``callback(n, beliefs, state, log_prior)``
    is called after iteration n.
    """
    plan = plan or plan_for(fg)
    seeds = config.seed + first_trial + np.arange(n_trials)
    rngs = [np.random.default_rng(int(s)) for s in seeds]
    if config.guided is not None:
        base = guided_log_prior(fg, config.guided, config.margin)
        log_prior = np.repeat(base[None], n_trials, axis=0)
    else:
        log_prior = np.stack([_log_prior_from_q(_uniform_draws(r, fg.n_vars)) for r in rngs])
    state = fresh_state(plan, PriorVector(log_prior))
    n_iter = int(config.n_iter)
    valid = np.zeros((n_trials, n_iter), dtype=bool)
    violated = np.zeros((n_trials, n_iter), dtype=np.int64)
    restarts = np.zeros((n_trials, n_iter), dtype=np.int64)
    n_restarts = np.zeros(n_trials, dtype=np.int64)
    X = None
    for n in range(1, n_iter + 1):
        beliefs = _step(plan, state, log_prior, config.alpha)
        X = decide(beliefs)
        bad = violated_factors(plan, X)
        violated[:, n - 1] = bad.sum(axis=1)
        valid[:, n - 1] = violated[:, n - 1] == 0
        restarts[:, n - 1] = n_restarts
        if callback is not None:
            callback(n, beliefs, state, log_prior)
        if config.stop_on_valid and valid[:, n - 1].all():
            valid, violated, restarts = valid[:, :n], violated[:, :n], restarts[:, :n]
            break
        if config.n_interm is not None and n % int(config.n_interm) == 0 and n < n_iter:
            flags = periodic_restart(plan, state, log_prior, X, rngs)
            n_restarts += flags.any(axis=1)
    return BatchResult(valid, violated, restarts, X, seeds)


def run(fg: FactorGraph, config: BpConfig, callback=None) -> BpResult:
    """One run with its per-iteration trace."""
    if config.schedule == ASYNC:
        return run_async(fg, config)
    batch = run_batch(fg, config, 1, callback=callback)
    trace = [
        (n + 1, int(batch.violated[0, n]), bool(batch.valid[0, n]), int(batch.restarts[0, n]))
        for n in range(batch.valid.shape[1])
    ]
    first = np.flatnonzero(batch.valid[0])
    converged = int(first[0]) + 1 if len(first) else None
    alloc = Allocation.from_x(fg, batch.xhat[0], bool(batch.valid[0, -1]), converged)
    return BpResult(alloc, trace)


# -- asynchronous schedule ----------------------------------------------------


def _async_factor_message(fg, J, p, v2f_prob):
    """Factor message on scope position ``p`` from current incoming probabilities."""
    edges = fg.factor_edges[J]
    d = len(edges)
    pair = [0.0, 0.0]
    for mask in fg.feasible.masks[J].tolist():
        term = 1.0
        for u in range(d):
            if u != p:
                term *= v2f_prob[edges[u]][(int(mask) >> u) & 1]
        pair[(int(mask) >> p) & 1] += term
    return pair


def run_async(fg: FactorGraph, config: BpConfig) -> BpResult:
    """Edge-at-a-time schedule in a seeded random order.

    One iteration updates every directed edge once, in a fresh permutation,
    always reading the latest values of the incoming messages.
    """
    plan = plan_for(fg)
    rng = np.random.default_rng(config.seed)
    if config.guided is not None:
        log_prior = guided_log_prior(fg, config.guided, config.margin)
    else:
        log_prior = _log_prior_from_q(_uniform_draws(rng, fg.n_vars))
    E = fg.n_edges
    prior = np.exp(log_prior)
    v2f = prior[fg.edge_var].copy()
    f2v = np.full((E, 2), 0.5)
    sentinel = np.ones(E, dtype=bool)
    alpha = config.alpha
    trace = []
    restarts = 0
    X = None
    converged = None
    for n in range(1, config.n_iter + 1):
        order = rng.permutation(2 * E)
        for item in order:
            e = int(item % E)
            J, v, p = int(fg.edge_factor[e]), int(fg.edge_var[e]), int(fg.edge_pos[e])
            if item < E:
                new = _async_factor_message(fg, J, p, v2f)
                total = new[0] + new[1]
                new = np.array(new) / total if total > 0 else np.array([0.5, 0.5])
                if not sentinel[e] and alpha > 0:
                    new = alpha * f2v[e] + (1 - alpha) * new
                    new = new / new.sum()
                f2v[e] = new
                sentinel[e] = False
            else:
                msg = prior[v].copy()
                for other in fg.var_edges[v]:
                    if other != e:
                        msg = msg * f2v[other]
                total = msg.sum()
                v2f[e] = msg / total if total > 0 else 0.5
        belief = prior.copy()
        for v in range(fg.n_vars):
            for e in fg.var_edges[v]:
                belief[v] = belief[v] * f2v[e]
        X = (belief[:, 1] >= belief[:, 0]).astype(np.int8)[None]
        bad = violated_factors(plan, X)
        ok = not bad.any()
        trace.append((n, int(bad.sum()), ok, restarts))
        if ok and converged is None:
            converged = n
        if ok and config.stop_on_valid:
            break
        if config.n_interm is not None and n % int(config.n_interm) == 0 and n < config.n_iter:
            flags = np.zeros(fg.n_vars, dtype=bool)
            for J in np.flatnonzero(bad[0]):
                flags[fg.factors[J].scope] = True
            if flags.any():
                restarts += 1
                q = _uniform_draws(rng, fg.n_vars)
                prior[flags, 0] = q[flags]
                prior[flags, 1] = 1 - q[flags]
                touched = flags[fg.edge_var]
                v2f[touched] = prior[fg.edge_var[touched]]
                f2v[touched] = 0.5
                sentinel[touched] = True
    alloc = Allocation.from_x(fg, X[0], trace[-1][2], converged)
    return BpResult(alloc, trace)


__all__ = [
    "BpConfig",
    "PriorVector",
    "MessageState",
    "Allocation",
    "BpResult",
    "BatchResult",
    "Plan",
    "plan_for",
    "SYNC",
    "ASYNC",
    "init_random",
    "init_guided",
    "guided_log_prior",
    "log_epsilon",
    "fresh_state",
    "factor_to_var_sweep",
    "factor_to_var_naive",
    "damp",
    "var_to_factor_sweep",
    "marginals",
    "decide",
    "violated_factors",
    "check_validity",
    "periodic_restart",
    "run",
    "run_batch",
    "run_async",
]
