"""Collapsed Gibbs sampling of event topics, diffusion parents and edge strengths.

One sweep resamples every event's topic, then every event's parent, then
refreshes the pooled edge strengths (Gamma-Poisson posterior means) and,
unless pinned, the per-node base rates. The continuous topic-word,
topic-transition and user-preference distributions are integrated out, so
their sufficient statistics live in count tables that are maintained
incrementally and must always equal a from-scratch recount.

Conditionals are evaluated by removing every statistic the event touches
(its incoming transition or user pick, its outgoing transitions to children,
its token counts) and scoring each candidate value as the Dirichlet-
multinomial predictive probability of re-inserting those statistics in
sequence. That chain-rule form is exactly proportional to the joint
likelihood ratio, including the awkward case where a candidate topic equals
the parent topic, and it is what the enumeration oracle in the tests checks
against.

Three modes share the machinery. FULL uses all factors. DIAGONAL pins the
topic-transition factor to an indicator (child topic must equal parent
topic), so cascades are single-topic. DECOUPLED drops transition factors
from both conditionals, leaving a per-user mixture topic model beside a
plain network Hawkes parent sampler; in this mode the user-topic table
counts every event rather than only spontaneous ones.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .core import (
    SPONTANEOUS,
    Dataset,
    EdgeGrouping,
    Event,
    Hyperparameters,
    ObservationWindow,
)
from .generator import exposure_counts

log = logging.getLogger("hmhp.sampler")


class Mode(Enum):
    FULL = "full"
    DIAGONAL = "diag"
    DECOUPLED = "decoupled"


@dataclass(frozen=True)
class SamplerConfig:
    n_topics: int
    hyper: Hyperparameters
    iterations: int = 100
    burn_in: int = 0
    mode: Mode = Mode.FULL
    candidate_window: float = 24.0
    max_candidates: int = 100
    seed: int = 0
    fixed_mu: Optional[Mapping] = None
    edge_grouping: str = "degree"
    ranking_depth: int = 10
    debug_recount: bool = False

    def __post_init__(self):
        if self.iterations > 0 and not self.burn_in < self.iterations:
            raise ValueError("burn_in must be smaller than iterations")
        if self.max_candidates < 1:
            raise ValueError("max_candidates must be >= 1")
        if self.n_topics < 1:
            raise ValueError("n_topics must be >= 1")


@dataclass
class CountStatistics:
    """Sufficient statistics implied by the current (topic, parent) state.

    trans[k', k] counts parent-child event pairs with those topics, word[k, w]
    token occurrences under topic k, user[v, k] topic picks charged to node v
    (spontaneous events only, or every event in DECOUPLED mode), spont[v]
    spontaneous events per node, group_pairs[g] parent-child pairs per edge
    group. group_source[g] is the static pooled exposure count.

    Tables are float64 (counts stay integral and exact) and the word table is
    backed by token-major storage so the sweep reads contiguous rows; ``word``
    is the topic-major view of the same memory.
    """

    trans: np.ndarray
    trans_row: np.ndarray
    word_t: np.ndarray
    word_row: np.ndarray
    user: np.ndarray
    user_row: np.ndarray
    spont: np.ndarray
    group_pairs: np.ndarray
    group_source: np.ndarray

    @property
    def word(self) -> np.ndarray:
        return self.word_t.T

    _FIELDS = ("trans", "trans_row", "word_t", "word_row", "user", "user_row",
               "spont", "group_pairs", "group_source")

    def copy(self) -> "CountStatistics":
        return CountStatistics(*(getattr(self, f).copy() for f in self._FIELDS))

    def equals(self, other: "CountStatistics") -> bool:
        return all(np.array_equal(getattr(self, f), getattr(other, f))
                   for f in self._FIELDS)


class _IndexedData:
    """Dense-array view of a dataset plus everything that is static during
    sampling: candidate lists, edge-group indices, exposure and survival
    pools."""

    def __init__(self, dataset: Dataset, config: SamplerConfig):
        self.dataset = dataset
        network = dataset.network
        self.network = network
        self.window = dataset.window
        events = dataset.events
        n = len(events)
        self.n = n
        self.ids = np.array([e.id for e in events], dtype=np.int64)
        self.index_of = {e.id: i for i, e in enumerate(events)}
        self.times = np.array([e.time for e in events], dtype=float)
        self.node_ids = [e.node for e in events]
        self.node_idx = np.array([network.node_index[e.node] for e in events], dtype=np.int64)
        self.docs = [np.asarray(e.tokens, dtype=np.int64) for e in events]
        self.doc_len = np.array([len(d) for d in self.docs], dtype=np.int64)
        self.uniq_tokens = []
        self.uniq_counts = []
        for d in self.docs:
            u, c = np.unique(d, return_counts=True)
            self.uniq_tokens.append(u)
            self.uniq_counts.append(c)

        self.grouping = EdgeGrouping(network, mode=config.edge_grouping)
        self.group_index = self.grouping.group_index
        self.n_groups = self.grouping.n_groups
        self.edge_group_idx = {(u, v): self.group_index[self.grouping.key(u, v)]
                               for (u, v) in network.edges}

        # Candidate parents: followee events inside the window, most recent
        # max_candidates kept, stored in ascending (time, index) order.
        per_node_times: dict = {}
        per_node_idx: dict = {}
        for v in network.sorted_nodes:
            per_node_times[v] = []
            per_node_idx[v] = []
        for i, e in enumerate(events):
            per_node_times[e.node].append(e.time)
            per_node_idx[e.node].append(i)
        for v in network.sorted_nodes:
            per_node_times[v] = np.asarray(per_node_times[v], dtype=float)
            per_node_idx[v] = np.asarray(per_node_idx[v], dtype=np.int64)

        self.cand: list = []
        self.cand_dt: list = []
        self.cand_group: list = []
        win = config.candidate_window
        for i, e in enumerate(events):
            found = []
            for u in network.followees(e.node):
                ts = per_node_times[u]
                lo = np.searchsorted(ts, e.time - win, side="left")
                hi = np.searchsorted(ts, e.time, side="left")
                if hi > lo:
                    found.append(per_node_idx[u][lo:hi])
            if found:
                merged = np.concatenate(found)
                merged = merged[np.argsort(merged, kind="stable")]
                if len(merged) > config.max_candidates:
                    merged = merged[-config.max_candidates:]
            else:
                merged = np.empty(0, dtype=np.int64)
            self.cand.append(merged)
            self.cand_dt.append(e.time - self.times[merged])
            self.cand_group.append(np.array(
                [self.edge_group_idx[(events[j].node, e.node)] for j in merged],
                dtype=np.int64))

        self.group_source = exposure_counts(dataset, self.grouping, win)

        # Survival pool: sum over events of (1 - exp(-(T - t))) routed to the
        # groups of the author's out-edges; the Hawkes survival term is then
        # just a dot product with the current strengths.
        horizon = self.window.horizon
        decay_by_node = {v: 0.0 for v in network.sorted_nodes}
        for e in events:
            decay_by_node[e.node] += 1.0 - math.exp(-(horizon - e.time))
        self.survival_per_group = np.zeros(self.n_groups, dtype=float)
        for (u, v) in network.edges:
            self.survival_per_group[self.edge_group_idx[(u, v)]] += decay_by_node[u]


@dataclass
class SamplerState:
    """Mutable sampling state: assignments, counts, strengths and rates.

    log_w and log_mu are caches kept in sync by the update functions; they
    exist because strengths and rates only move once per sweep while the
    parent step reads them for every candidate.
    """

    topics: np.ndarray
    parents: np.ndarray
    parent_group: np.ndarray
    children: list
    counts: CountStatistics
    w: np.ndarray
    mu: np.ndarray
    rng: np.random.Generator
    config: SamplerConfig
    data: _IndexedData
    log_w: np.ndarray = None
    log_mu: np.ndarray = None
    diag_fallbacks: int = 0
    last_sweep_timings: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.log_w is None:
            self.refresh_log_caches()

    def refresh_log_caches(self) -> None:
        with np.errstate(divide="ignore"):
            self.log_w = np.log(self.w)
            self.log_mu = np.log(self.mu)

    @property
    def n_events(self) -> int:
        return self.data.n

    def w_by_key(self) -> dict:
        return {key: float(self.w[i]) for i, key in enumerate(self.data.grouping.group_keys)}

    def mu_by_node(self) -> dict:
        nodes = self.data.network.sorted_nodes
        return {v: float(self.mu[i]) for i, v in enumerate(nodes)}


def parent_candidates(event: Event, dataset: Dataset, config: SamplerConfig) -> list:
    """Followee events strictly earlier than the event and at most
    candidate_window hours old; at most max_candidates most recent ones.
    The spontaneous option is an implicit extra candidate everywhere."""
    out = []
    cutoff = event.time - config.candidate_window
    followees = set(dataset.network.followees(event.node))
    for e in dataset.events:
        if e.time >= event.time:
            break
        if e.time >= cutoff and e.node in followees:
            out.append(e)
    if len(out) > config.max_candidates:
        out = out[-config.max_candidates:]
    return out


def _tally_counts(data: _IndexedData, topics: np.ndarray, parents: np.ndarray,
                  config: SamplerConfig) -> CountStatistics:
    K = config.n_topics
    W = config.hyper.vocab_size
    V = data.network.n_nodes
    G = data.n_groups
    trans = np.zeros((K, K))
    word_t = np.zeros((W, K))
    user = np.zeros((V, K))
    spont = np.zeros(V)
    group_pairs = np.zeros(G, dtype=np.int64)
    decoupled = config.mode is Mode.DECOUPLED
    for i in range(data.n):
        k = topics[i]
        v = data.node_idx[i]
        np.add.at(word_t[:, k], data.docs[i], 1.0)
        if decoupled:
            user[v, k] += 1
        p = parents[i]
        if p < 0:
            spont[v] += 1
            if not decoupled:
                user[v, k] += 1
        else:
            trans[topics[p], k] += 1
            group_pairs[data.edge_group_idx[(data.node_ids[p], data.node_ids[i])]] += 1
    return CountStatistics(
        trans=trans, trans_row=trans.sum(axis=1), word_t=word_t,
        word_row=word_t.sum(axis=0), user=user, user_row=user.sum(axis=1),
        spont=spont, group_pairs=group_pairs, group_source=data.group_source.copy())


def recount(state: SamplerState) -> CountStatistics:
    """From-scratch tally of all tables; must equal the incremental ones."""
    return _tally_counts(state.data, state.topics, state.parents, state.config)


def counts_consistent(state: SamplerState) -> bool:
    return state.counts.equals(recount(state))


def initialize_state(dataset: Dataset, config: SamplerConfig) -> SamplerState:
    """Random parents over each candidate set (plus spontaneous), uniform
    random topics (component-wise in DIAGONAL mode so the hard constraint is
    satisfiable from the start), strengths at the prior mean, base rates from
    the implied spontaneous counts."""
    data = _IndexedData(dataset, config)
    rng = np.random.default_rng(config.seed)
    n = data.n
    K = config.n_topics

    parents = np.full(n, -1, dtype=np.int64)
    parent_group = np.full(n, -1, dtype=np.int64)
    children: list = [[] for _ in range(n)]
    for i in range(n):
        m = len(data.cand[i])
        j = int(rng.integers(0, m + 1))
        if j < m:
            p = int(data.cand[i][j])
            parents[i] = p
            parent_group[i] = data.cand_group[i][j]
            children[p].append(i)

    if config.mode is Mode.DIAGONAL:
        topics = np.zeros(n, dtype=np.int64)
        for i in range(n):
            p = parents[i]
            topics[i] = topics[p] if p >= 0 else rng.integers(0, K)
    else:
        topics = rng.integers(0, K, size=n).astype(np.int64)

    counts = _tally_counts(data, topics, parents, config)
    w = np.full(data.n_groups, config.hyper.w_prior_mean, dtype=float)
    state = SamplerState(topics=topics, parents=parents, parent_group=parent_group,
                         children=children, counts=counts, w=w,
                         mu=np.zeros(data.network.n_nodes), rng=rng,
                         config=config, data=data)
    _refresh_mu(state)
    return state


def state_from_assignments(dataset: Dataset, config: SamplerConfig,
                           topics: Mapping, parents: Mapping,
                           w: Optional[Mapping] = None,
                           mu: Optional[Mapping] = None) -> SamplerState:
    """State pinned at explicit assignments (maps keyed by event id; parents
    use SPONTANEOUS for parentless events). Every assigned parent must be in
    the event's candidate set. Strengths default to the prior mean and base
    rates to the smoothed spontaneous rate."""
    data = _IndexedData(dataset, config)
    n = data.n
    topic_arr = np.array([int(topics[eid]) for eid in data.ids], dtype=np.int64)
    if n and (topic_arr.min() < 0 or topic_arr.max() >= config.n_topics):
        raise ValueError("topic assignment out of range")
    parent_arr = np.full(n, -1, dtype=np.int64)
    parent_group = np.full(n, -1, dtype=np.int64)
    children: list = [[] for _ in range(n)]
    for i in range(n):
        ref = parents[int(data.ids[i])]
        if ref is SPONTANEOUS:
            continue
        p = data.index_of[int(ref)]
        pos = np.nonzero(data.cand[i] == p)[0]
        if len(pos) == 0:
            raise ValueError(f"parent {ref} of event {data.ids[i]} is not a candidate")
        parent_arr[i] = p
        parent_group[i] = data.cand_group[i][pos[0]]
        children[p].append(i)
    counts = _tally_counts(data, topic_arr, parent_arr, config)
    if w is None:
        w_arr = np.full(data.n_groups, config.hyper.w_prior_mean, dtype=float)
    else:
        w_arr = np.array([float(w[key]) for key in data.grouping.group_keys])
    state = SamplerState(topics=topic_arr, parents=parent_arr, parent_group=parent_group,
                         children=children, counts=counts, w=w_arr,
                         mu=np.zeros(data.network.n_nodes), rng=np.random.default_rng(config.seed),
                         config=config, data=data)
    if mu is not None:
        state.mu = np.array([float(mu[v]) for v in data.network.sorted_nodes])
        state.refresh_log_caches()
    else:
        _refresh_mu(state)
    return state


def _refresh_mu(state: SamplerState) -> None:
    config = state.config
    if config.fixed_mu is not None:
        nodes = state.data.network.sorted_nodes
        state.mu = np.array([float(config.fixed_mu[v]) for v in nodes], dtype=float)
    else:
        duration = state.data.window.duration
        state.mu = (state.counts.spont + 1.0) / (duration + 1.0)
    state.refresh_log_caches()


def update_base_rates(state: SamplerState, window: Optional[ObservationWindow] = None) -> dict:
    """Smoothed spontaneous rate per node, (count + 1) / (duration + 1);
    a no-op when the config pins base rates."""
    _refresh_mu(state)
    return state.mu_by_node()


def update_edge_strengths(state: SamplerState, network=None,
                          hyper: Optional[Hyperparameters] = None) -> dict:
    """Gamma-Poisson posterior mean per edge group,
    (shape + pairs) / (1/scale + exposure); groups with no pairs this
    iteration sit at the prior mean."""
    hyper = hyper or state.config.hyper
    counts = state.counts
    posterior = (hyper.w_prior_shape + counts.group_pairs) / (
        1.0 / hyper.w_prior_scale + counts.group_source)
    state.w = np.where(counts.group_pairs > 0, posterior, hyper.w_prior_mean)
    state.refresh_log_caches()
    return state.w_by_key()


def _asc_log_sum(base: np.ndarray, m: int) -> np.ndarray:
    # sum_{j<m} log(base + j), the ascending-factorial correction, as a
    # log-gamma difference.
    if m == 1:
        return np.log(base)
    return gammaln(base + m) - gammaln(base)


# -- topic step ---------------------------------------------------------------

def _remove_topic_stats(state: SamplerState, i: int) -> None:
    c = state.counts
    data = state.data
    k = state.topics[i]
    v = data.node_idx[i]
    c.word_t[data.uniq_tokens[i], k] -= data.uniq_counts[i]
    c.word_row[k] -= data.doc_len[i]
    p = state.parents[i]
    if state.config.mode is Mode.DECOUPLED:
        c.user[v, k] -= 1
        c.user_row[v] -= 1
    elif p < 0:
        c.user[v, k] -= 1
        c.user_row[v] -= 1
    if p >= 0:
        kp = state.topics[p]
        c.trans[kp, k] -= 1
        c.trans_row[kp] -= 1
    for ch in state.children[i]:
        c.trans[k, state.topics[ch]] -= 1
        c.trans_row[k] -= 1


def _insert_topic_stats(state: SamplerState, i: int, k: int) -> None:
    c = state.counts
    data = state.data
    v = data.node_idx[i]
    c.word_t[data.uniq_tokens[i], k] += data.uniq_counts[i]
    c.word_row[k] += data.doc_len[i]
    p = state.parents[i]
    if state.config.mode is Mode.DECOUPLED:
        c.user[v, k] += 1
        c.user_row[v] += 1
    elif p < 0:
        c.user[v, k] += 1
        c.user_row[v] += 1
    if p >= 0:
        c.trans[state.topics[p], k] += 1
        c.trans_row[state.topics[p]] += 1
    for ch in state.children[i]:
        c.trans[k, state.topics[ch]] += 1
        c.trans_row[k] += 1
    state.topics[i] = k


def _topic_log_weights(state: SamplerState, i: int) -> np.ndarray:
    """Log weights over candidate topics for event i, with all of event i's
    statistics already removed from the tables."""
    config = state.config
    hyper = config.hyper
    mode = config.mode
    c = state.counts
    data = state.data
    K = config.n_topics
    v = data.node_idx[i]
    p = state.parents[i]
    lw = np.zeros(K, dtype=float)

    # Incoming pick: transition from the parent topic, or the author's
    # preference urn for spontaneous events (and for every event when
    # transitions are decoupled).
    kp = state.topics[p] if p >= 0 else -1
    if mode is Mode.DECOUPLED or p < 0:
        lw += np.log(hyper.gamma + c.user[v])
    elif mode is Mode.DIAGONAL:
        mask = np.full(K, -np.inf)
        mask[kp] = 0.0
        lw += mask
    else:
        lw += np.log(hyper.beta + c.trans[kp])

    # Outgoing picks: sequential re-insertion of the child transitions, with
    # the incoming edge already counted (it lands in row k when k == kp).
    children = state.children[i]
    if children and mode is Mode.DIAGONAL:
        mask = np.full(K, -np.inf)
        uniq = {int(state.topics[ch]) for ch in children}
        if len(uniq) == 1:
            mask[uniq.pop()] = 0.0
        lw += mask
    elif children and mode is not Mode.DECOUPLED:
        by_topic: dict = {}
        for ch in children:
            l = int(state.topics[ch])
            by_topic[l] = by_topic.get(l, 0) + 1
        for l, m in by_topic.items():
            base = hyper.beta[l] + c.trans[:, l]
            if p >= 0 and l == kp:
                base[kp] += 1.0
            lw += _asc_log_sum(base, m)
        denom = hyper.beta_total + c.trans_row
        if p >= 0:
            denom[kp] += 1.0
        lw -= _asc_log_sum(denom, len(children))

    # Document: Dirichlet-multinomial predictive of the tokens under each k.
    lw += _word_log_factor(state, i)

    if mode is Mode.DIAGONAL and not np.any(np.isfinite(lw)):
        # Unsatisfiable hard constraint (possible only for externally built
        # states); fall back to word plus preference evidence.
        state.diag_fallbacks += 1
        lw = np.log(hyper.gamma + c.user[v]) + _word_log_factor(state, i)
    return lw


def _word_log_factor(state: SamplerState, i: int) -> np.ndarray:
    hyper = state.config.hyper
    c = state.counts
    data = state.data
    n_tokens = int(data.doc_len[i])
    if not n_tokens:
        return np.zeros(state.config.n_topics)
    uniq = data.uniq_tokens[i]
    mult = data.uniq_counts[i]
    bases = hyper.alpha[uniq, None] + c.word_t[uniq]
    if len(uniq) == n_tokens:
        lw = np.log(bases).sum(axis=0)
    else:
        lw = np.zeros(state.config.n_topics)
        for row, m in zip(bases, mult):
            lw += _asc_log_sum(row, int(m))
    lw -= _asc_log_sum(hyper.alpha_total + c.word_row, n_tokens)
    return lw


def _sample_log_weights(rng: np.random.Generator, lw: np.ndarray) -> int:
    if lw.shape[0] == 1:
        rng.random()
        return 0
    m = lw.max()
    p = np.exp(lw - m)
    cum = p.cumsum()
    u = rng.random() * cum[-1]
    return min(int(cum.searchsorted(u, side="right")), lw.shape[0] - 1)


def topic_conditional(event, state: SamplerState, dataset: Optional[Dataset] = None,
                      hyper: Optional[Hyperparameters] = None) -> np.ndarray:
    """Normalized conditional over topics for one event given everything
    else; accepts an Event or an event id. Leaves the state untouched."""
    event_id = event.id if isinstance(event, Event) else int(event)
    i = state.data.index_of[event_id]
    original = int(state.topics[i])
    _remove_topic_stats(state, i)
    lw = _topic_log_weights(state, i)
    _insert_topic_stats(state, i, original)
    m = np.max(lw)
    p = np.exp(lw - m)
    return p / p.sum()


# -- parent step --------------------------------------------------------------

def _remove_parent_stats(state: SamplerState, i: int) -> None:
    c = state.counts
    data = state.data
    k = state.topics[i]
    v = data.node_idx[i]
    p = state.parents[i]
    if p < 0:
        c.spont[v] -= 1
        if state.config.mode is not Mode.DECOUPLED:
            c.user[v, k] -= 1
            c.user_row[v] -= 1
    else:
        kp = state.topics[p]
        c.trans[kp, k] -= 1
        c.trans_row[kp] -= 1
        c.group_pairs[state.parent_group[i]] -= 1
        state.children[p].remove(i)
    state.parents[i] = -1
    state.parent_group[i] = -1


def _insert_parent_stats(state: SamplerState, i: int, p: int, group: int) -> None:
    c = state.counts
    data = state.data
    k = state.topics[i]
    v = data.node_idx[i]
    if p < 0:
        c.spont[v] += 1
        if state.config.mode is not Mode.DECOUPLED:
            c.user[v, k] += 1
            c.user_row[v] += 1
        state.parents[i] = -1
        state.parent_group[i] = -1
    else:
        kp = state.topics[p]
        c.trans[kp, k] += 1
        c.trans_row[kp] += 1
        c.group_pairs[group] += 1
        state.children[p].append(i)
        state.parents[i] = p
        state.parent_group[i] = group


def _parent_log_weights(state: SamplerState, i: int) -> np.ndarray:
    """Log weights over (candidates..., SPONTANEOUS) for event i, with event
    i's incoming pick already removed from the tables."""
    config = state.config
    hyper = config.hyper
    mode = config.mode
    c = state.counts
    data = state.data
    k = state.topics[i]
    v = data.node_idx[i]
    cand = data.cand[i]
    lw = np.empty(len(cand) + 1, dtype=float)
    if len(cand):
        cand_topics = state.topics[cand]
        time_part = state.log_w[data.cand_group[i]] - data.cand_dt[i]
        if mode is Mode.DECOUPLED:
            lw[:-1] = time_part
        elif mode is Mode.DIAGONAL:
            lw[:-1] = np.where(cand_topics == k, time_part, -np.inf)
        else:
            topic_part = np.log((hyper.beta[k] + c.trans[cand_topics, k])
                                / (hyper.beta_total + c.trans_row[cand_topics]))
            lw[:-1] = topic_part + time_part
    if mode is Mode.DECOUPLED:
        lw[-1] = state.log_mu[v]
    else:
        lw[-1] = (math.log((hyper.gamma[k] + c.user[v, k])
                           / (hyper.gamma_total + c.user_row[v]))
                  + state.log_mu[v])
    if not np.any(np.isfinite(lw)):
        lw[-1] = 0.0
    return lw


def parent_conditional(event, state: SamplerState, dataset: Optional[Dataset] = None,
                       hyper: Optional[Hyperparameters] = None):
    """Normalized conditional over candidate parents for one event. Returns
    (choices, probabilities) where choices lists candidate event ids followed
    by SPONTANEOUS. Leaves the state untouched."""
    event_id = event.id if isinstance(event, Event) else int(event)
    i = state.data.index_of[event_id]
    old_p = int(state.parents[i])
    old_g = int(state.parent_group[i])
    _remove_parent_stats(state, i)
    lw = _parent_log_weights(state, i)
    _insert_parent_stats(state, i, old_p, old_g)
    m = np.max(lw)
    p = np.exp(lw - m)
    p = p / p.sum()
    choices = [int(state.data.ids[j]) for j in state.data.cand[i]] + [SPONTANEOUS]
    return choices, p


# -- sweeps -------------------------------------------------------------------

def _sweep_topics(state: SamplerState) -> None:
    for i in range(state.data.n):
        _remove_topic_stats(state, i)
        lw = _topic_log_weights(state, i)
        k = _sample_log_weights(state.rng, lw)
        _insert_topic_stats(state, i, k)


def _sweep_parents(state: SamplerState) -> None:
    for i in range(state.data.n):
        _remove_parent_stats(state, i)
        lw = _parent_log_weights(state, i)
        j = _sample_log_weights(state.rng, lw)
        if j == len(lw) - 1:
            _insert_parent_stats(state, i, -1, -1)
        else:
            _insert_parent_stats(state, i, int(state.data.cand[i][j]),
                                 int(state.data.cand_group[i][j]))


def gibbs_sweep(state: SamplerState, dataset: Optional[Dataset] = None,
                config: Optional[SamplerConfig] = None) -> SamplerState:
    """One full pass: topics, parents, strengths, base rates. Phase wall
    times land in state.last_sweep_timings."""
    t0 = time.perf_counter()
    _sweep_topics(state)
    t1 = time.perf_counter()
    _sweep_parents(state)
    t2 = time.perf_counter()
    update_edge_strengths(state)
    _refresh_mu(state)
    t3 = time.perf_counter()
    state.last_sweep_timings = {"topic": t1 - t0, "parent": t2 - t1, "strengths": t3 - t2,
                                "total": t3 - t0}
    if state.config.debug_recount and not counts_consistent(state):
        raise AssertionError("count tables diverged from a full recount")
    return state


def estimate_parameters(state: SamplerState, hyper: Optional[Hyperparameters] = None):
    """Smoothed count-ratio point estimates (zeta_hat, phi_hat, trans_hat)."""
    hyper = hyper or state.config.hyper
    c = state.counts
    zeta = (c.word + hyper.alpha) / (c.word_row[:, None] + hyper.alpha_total)
    phi = (c.user + hyper.gamma) / (c.user_row[:, None] + hyper.gamma_total)
    trans = (c.trans + hyper.beta) / (c.trans_row[:, None] + hyper.beta_total)
    return zeta, phi, trans


def state_joint_log_likelihood(state: SamplerState) -> float:
    """Collapsed joint log likelihood of the running model at the current
    state, computed from the count tables. The FULL model scores transition,
    preference, word and Hawkes factors; DIAGONAL drops the (deterministic)
    transition factor; DECOUPLED scores its per-user mixture instead of
    transitions."""
    config = state.config
    hyper = config.hyper
    c = state.counts
    data = state.data
    ll = 0.0

    def dm_term(counts2d, conc, conc_total):
        rows = counts2d.sum(axis=1)
        out = gammaln(conc_total) * counts2d.shape[0] - gammaln(conc_total + rows).sum()
        out += (gammaln(conc + counts2d) - gammaln(conc)).sum()
        return out

    if config.mode is Mode.FULL:
        ll += dm_term(c.trans, hyper.beta, hyper.beta_total)
    ll += dm_term(c.user, hyper.gamma, hyper.gamma_total)
    ll += dm_term(c.word, hyper.alpha, hyper.alpha_total)

    with np.errstate(divide="ignore"):
        log_mu = np.log(state.mu)
    spont_mask = state.parents < 0
    ll += float(log_mu[data.node_idx[spont_mask]].sum())
    ll -= float(state.mu.sum() * data.window.duration)
    diff = np.nonzero(~spont_mask)[0]
    if len(diff):
        dts = data.times[diff] - data.times[state.parents[diff]]
        with np.errstate(divide="ignore"):
            ll += float(np.log(state.w[state.parent_group[diff]]).sum() - dts.sum())
    ll -= float(state.w @ data.survival_per_group)
    return ll


def _parent_ranking(state: SamplerState, i: int, depth: int):
    old_p = int(state.parents[i])
    old_g = int(state.parent_group[i])
    _remove_parent_stats(state, i)
    lw = _parent_log_weights(state, i)
    _insert_parent_stats(state, i, old_p, old_g)
    order = np.lexsort((np.arange(len(lw)), -lw))
    ranked = []
    for j in order[:depth]:
        if j == len(lw) - 1:
            ranked.append(SPONTANEOUS)
        else:
            ranked.append(int(state.data.ids[state.data.cand[i][j]]))
    return ranked


@dataclass
class InferenceResult:
    """Final assignments and point estimates from a Gibbs run."""

    event_ids: list
    topics: dict
    parents: dict
    rankings: dict
    w: dict
    grouping: EdgeGrouping
    mu: dict
    zeta: np.ndarray
    phi: np.ndarray
    trans: np.ndarray
    trace: list
    config: SamplerConfig
    state: SamplerState
    diag_fallbacks: int = 0

    @property
    def train_window_duration(self) -> float:
        return self.state.data.window.duration

    def assignment_rows(self) -> list:
        rows = []
        for eid in self.event_ids:
            parent = self.parents[eid]
            ranking = [None if r is SPONTANEOUS else r for r in self.rankings[eid]]
            rows.append({"id": eid, "topic": self.topics[eid],
                         "parent": None if parent is SPONTANEOUS else parent,
                         "parent_ranking": ranking})
        return rows


def run_gibbs(dataset: Dataset, config: SamplerConfig) -> InferenceResult:
    """Run the configured number of sweeps and package point estimates,
    ranked parent candidates and the per-sweep likelihood trace. With zero
    iterations the initialization is returned verbatim."""
    state = initialize_state(dataset, config)
    trace = []
    for it in range(config.iterations):
        start = time.perf_counter()
        gibbs_sweep(state)
        seconds = time.perf_counter() - start
        trace.append((it, state_joint_log_likelihood(state), seconds))
        if config.iterations >= 10 and (it + 1) % max(1, config.iterations // 10) == 0:
            log.info("sweep %d/%d loglik %.2f", it + 1, config.iterations, trace[-1][1])

    zeta, phi, trans = estimate_parameters(state)
    ids = [int(x) for x in state.data.ids]
    topics = {eid: int(state.topics[i]) for i, eid in enumerate(ids)}
    parents = {}
    rankings = {}
    for i, eid in enumerate(ids):
        p = state.parents[i]
        parents[eid] = SPONTANEOUS if p < 0 else int(state.data.ids[p])
        rankings[eid] = _parent_ranking(state, i, config.ranking_depth)
    return InferenceResult(event_ids=ids, topics=topics, parents=parents,
                           rankings=rankings, w=state.w_by_key(),
                           grouping=state.data.grouping, mu=state.mu_by_node(),
                           zeta=zeta, phi=phi, trans=trans, trace=trace,
                           config=config, state=state,
                           diag_fallbacks=state.diag_fallbacks)
