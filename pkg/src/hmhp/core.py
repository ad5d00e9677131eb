"""Shared domain types for text-bearing cascades on a directed follower graph.

Times are in hours throughout. Base rates are events per hour and the decay
kernel has unit rate, so typical inter-event gaps sit near 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence, Union

import numpy as np

ROW_SUM_TOL = 1e-9


class _Spontaneous:
    """Sentinel for "this event has no parent" (distinct from "unlabeled")."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "SPONTANEOUS"


#: Parent value for events generated by a node's base rate. Kept distinct
#: from real event ids so that ids may start at 0, and distinct from None,
#: which means the parent is simply unknown.
SPONTANEOUS = _Spontaneous()

ParentRef = Union[int, _Spontaneous, None]


class EdgeGroupKey(NamedTuple):
    """Edges sharing (source out-degree, destination in-degree) pool strength."""

    source_out_degree: int
    dest_in_degree: int


@dataclass(frozen=True)
class Network:
    """Directed follower graph. Edge (u, v) means v follows u: events at u
    are visible to v and may trigger events at v."""

    node_ids: frozenset
    edges: frozenset

    def __post_init__(self):
        followers: dict = {u: [] for u in self.node_ids}
        followees: dict = {v: [] for v in self.node_ids}
        for (u, v) in self.edges:
            if u not in self.node_ids or v not in self.node_ids:
                raise ValueError(f"edge ({u}, {v}) references unknown node")
            followers[u].append(v)
            followees[v].append(u)
        for d in (followers, followees):
            for k in d:
                d[k] = tuple(sorted(d[k]))
        nodes = tuple(sorted(self.node_ids))
        object.__setattr__(self, "_followers", followers)
        object.__setattr__(self, "_followees", followees)
        object.__setattr__(self, "sorted_nodes", nodes)
        object.__setattr__(self, "node_index", {u: i for i, u in enumerate(nodes)})

    @classmethod
    def from_edges(cls, edges: Iterable, nodes: Optional[Iterable] = None) -> "Network":
        edge_list = list(edges)
        edge_set = frozenset(edge_list)
        if len(edge_set) != len(edge_list):
            raise ValueError("duplicate edges in input")
        node_set = set(nodes) if nodes is not None else set()
        for (u, v) in edge_set:
            node_set.add(u)
            node_set.add(v)
        return cls(node_ids=frozenset(node_set), edges=edge_set)

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    def followers(self, u) -> tuple:
        return self._followers[u]

    def followees(self, v) -> tuple:
        return self._followees[v]

    def out_degree(self, u) -> int:
        return len(self._followers[u])

    def in_degree(self, v) -> int:
        return len(self._followees[v])

    def has_edge(self, u, v) -> bool:
        return (u, v) in self.edges


def edge_group_key(u: int, v: int, network: Network) -> EdgeGroupKey:
    """Group key (out-degree(u), in-degree(v)) for an existing edge."""
    if not network.has_edge(u, v):
        raise KeyError(f"edge ({u}, {v}) not in network")
    return EdgeGroupKey(network.out_degree(u), network.in_degree(v))


@dataclass(frozen=True)
class EdgeGrouping:
    """Maps edges to pooling groups for strength estimation.

    mode "degree" pools edges by (source out-degree, destination in-degree);
    mode "edge" gives every edge its own group (no pooling).
    """

    network: Network
    mode: str = "degree"

    def __post_init__(self):
        if self.mode not in ("degree", "edge"):
            raise ValueError(f"unknown grouping mode {self.mode!r}")
        keys = sorted({self.key(u, v) for (u, v) in self.network.edges})
        object.__setattr__(self, "group_keys", tuple(keys))
        object.__setattr__(self, "group_index", {k: i for i, k in enumerate(keys)})

    def key(self, u, v):
        if self.mode == "edge":
            if not self.network.has_edge(u, v):
                raise KeyError(f"edge ({u}, {v}) not in network")
            return (u, v)
        return edge_group_key(u, v, self.network)

    @property
    def n_groups(self) -> int:
        return len(self.group_keys)

    def edges_by_group(self) -> dict:
        out: dict = {k: [] for k in self.group_keys}
        for (u, v) in sorted(self.network.edges):
            out[self.key(u, v)].append((u, v))
        return out


@dataclass(frozen=True)
class ObservationWindow:
    """Half-open observation interval [start, horizon) in hours."""

    start: float
    horizon: float

    def __post_init__(self):
        if not self.start < self.horizon:
            raise ValueError("window start must be strictly before horizon")

    @property
    def duration(self) -> float:
        return self.horizon - self.start

    def contains(self, t: float) -> bool:
        return self.start <= t < self.horizon


@dataclass(frozen=True)
class Event:
    """One post: time, author node, token ids, and (possibly latent) labels.

    ``topic`` is None when unlabeled. ``parent`` is an event id, SPONTANEOUS,
    or None when unlabeled.
    """

    id: int
    time: float
    node: int
    tokens: tuple = ()
    topic: Optional[int] = None
    parent: ParentRef = None

    @property
    def is_spontaneous(self) -> bool:
        return self.parent is SPONTANEOUS

    @property
    def has_parent_label(self) -> bool:
        return self.parent is not None


def _positive_vector(x, size: int, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = np.full(size, float(arr))
    if arr.shape != (size,):
        raise ValueError(f"{name} must have length {size}, got shape {arr.shape}")
    if not np.all(arr > 0):
        raise ValueError(f"{name} entries must be strictly positive")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Hyperparameters:
    """Dirichlet/Gamma hyperparameters and model dimensions.

    alpha smooths topic-word rows (length vocab_size), beta smooths
    topic-transition rows (length n_topics), gamma smooths user-topic
    preferences (length n_topics). The Gamma prior on edge strengths uses
    shape w_prior_shape and scale w_prior_scale (prior mean shape * scale).
    """

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    doc_length_rate: float
    w_prior_shape: float
    w_prior_scale: float
    n_topics: int
    vocab_size: int

    def __post_init__(self):
        if self.n_topics < 1 or self.vocab_size < 1:
            raise ValueError("n_topics and vocab_size must be >= 1")
        object.__setattr__(self, "alpha", _positive_vector(self.alpha, self.vocab_size, "alpha"))
        object.__setattr__(self, "beta", _positive_vector(self.beta, self.n_topics, "beta"))
        object.__setattr__(self, "gamma", _positive_vector(self.gamma, self.n_topics, "gamma"))
        for name in ("doc_length_rate", "w_prior_shape", "w_prior_scale"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")

    @classmethod
    def symmetric(cls, n_topics: int, vocab_size: int, alpha: float = 0.01,
                  beta: float = 0.01, gamma: float = 0.1, doc_length_rate: float = 7.0,
                  w_prior_shape: float = 2.0, w_prior_scale: float = 0.5) -> "Hyperparameters":
        return cls(alpha=np.full(vocab_size, alpha), beta=np.full(n_topics, beta),
                   gamma=np.full(n_topics, gamma), doc_length_rate=doc_length_rate,
                   w_prior_shape=w_prior_shape, w_prior_scale=w_prior_scale,
                   n_topics=n_topics, vocab_size=vocab_size)

    @property
    def alpha_total(self) -> float:
        return float(self.alpha.sum())

    @property
    def beta_total(self) -> float:
        return float(self.beta.sum())

    @property
    def gamma_total(self) -> float:
        return float(self.gamma.sum())

    @property
    def w_prior_mean(self) -> float:
        return self.w_prior_shape * self.w_prior_scale


def _check_row_stochastic(mat: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(mat, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a matrix")
    if np.any(arr < 0):
        raise ValueError(f"{name} has negative entries")
    sums = arr.sum(axis=1)
    if arr.shape[0] and np.max(np.abs(sums - 1.0)) > ROW_SUM_TOL:
        raise ValueError(f"{name} rows must sum to 1 within {ROW_SUM_TOL}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ModelParameters:
    """Full generative parameter set.

    mu maps node id to base rate; w maps a grouping key to a shared edge
    strength (resolve per edge with :meth:`edge_strength`). zeta is the
    (n_topics, vocab_size) topic-word matrix, phi the (n_nodes, n_topics)
    user-preference matrix (rows ordered by ``network.sorted_nodes``) and
    trans the (n_topics, n_topics) parent-to-child topic transition matrix.
    """

    mu: Mapping
    w: Mapping
    grouping: EdgeGrouping
    zeta: np.ndarray
    phi: np.ndarray
    trans: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "zeta", _check_row_stochastic(self.zeta, "zeta"))
        object.__setattr__(self, "phi", _check_row_stochastic(self.phi, "phi"))
        object.__setattr__(self, "trans", _check_row_stochastic(self.trans, "trans"))
        if self.trans.shape[0] != self.trans.shape[1]:
            raise ValueError("trans must be square")
        if self.zeta.shape[0] != self.trans.shape[0] or self.phi.shape[1] != self.trans.shape[0]:
            raise ValueError("topic dimensions of zeta, phi, trans disagree")
        network = self.grouping.network
        if self.phi.shape[0] != network.n_nodes:
            raise ValueError("phi must have one row per network node")
        if any(r < 0 for r in self.mu.values()) or any(w < 0 for w in self.w.values()):
            raise ValueError("mu and w must be nonnegative")

    @property
    def network(self) -> Network:
        return self.grouping.network

    @property
    def n_topics(self) -> int:
        return self.trans.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.zeta.shape[1]

    def edge_strength(self, u, v) -> float:
        return float(self.w[self.grouping.key(u, v)])

    def phi_row(self, node) -> np.ndarray:
        return self.phi[self.network.node_index[node]]


def exp_kernel(dt: float) -> float:
    """Unit-rate exponential decay kernel; integrates to 1 over [0, inf)."""
    if dt < 0:
        raise ValueError("kernel lag must be nonnegative")
    return math.exp(-dt)


def impulse_response(u: int, v: int, dt: float, params: ModelParameters) -> float:
    """Added intensity at v caused dt hours after an event at u."""
    return params.edge_strength(u, v) * exp_kernel(dt)


@dataclass(frozen=True)
class Dataset:
    """Events on a network within an observation window, sorted by (time, id)."""

    network: Network
    window: ObservationWindow
    events: tuple
    vocabulary: Optional[Mapping] = None

    def __post_init__(self):
        order = [(e.time, e.id) for e in self.events]
        if any(order[i] >= order[i + 1] for i in range(len(order) - 1)):
            raise ValueError("events must be strictly sorted by (time, id)")
        ids = [e.id for e in self.events]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate event ids")
        object.__setattr__(self, "_by_id", {e.id: e for e in self.events})

    @classmethod
    def from_events(cls, network: Network, window: ObservationWindow,
                    events: Iterable[Event], vocabulary=None) -> "Dataset":
        ordered = tuple(sorted(events, key=lambda e: (e.time, e.id)))
        return cls(network=network, window=window, events=ordered, vocabulary=vocabulary)

    @property
    def n_events(self) -> int:
        return len(self.events)

    def event(self, event_id: int) -> Event:
        return self._by_id[event_id]

    def has_event(self, event_id: int) -> bool:
        return event_id in self._by_id

    def replace_events(self, events: Iterable[Event]) -> "Dataset":
        return Dataset.from_events(self.network, self.window, events, self.vocabulary)


@dataclass(frozen=True)
class Violation:
    """One failed dataset invariant, naming the offending event and rule."""

    event_id: Optional[int]
    rule: str
    detail: str


def validate_dataset(dataset: Dataset, vocab_size: Optional[int] = None) -> list:
    """Check event/dataset invariants; returns violations instead of raising."""
    violations = []
    network = dataset.network
    for e in dataset.events:
        if e.node not in network.node_ids:
            violations.append(Violation(e.id, "unknown-node", f"node {e.node} not in network"))
            continue
        if not dataset.window.contains(e.time):
            violations.append(Violation(e.id, "time-out-of-window",
                                        f"time {e.time} outside [{dataset.window.start}, {dataset.window.horizon})"))
        for w in e.tokens:
            if w < 0 or (vocab_size is not None and w >= vocab_size):
                violations.append(Violation(e.id, "token-out-of-range", f"token {w}"))
                break
        if isinstance(e.parent, int):
            if not dataset.has_event(e.parent):
                violations.append(Violation(e.id, "parent-unknown", f"parent id {e.parent}"))
                continue
            p = dataset.event(e.parent)
            if not p.time < e.time:
                violations.append(Violation(e.id, "parent-time-order",
                                            f"parent {p.id} at {p.time} not strictly before {e.time}"))
            if not network.has_edge(p.node, e.node):
                violations.append(Violation(e.id, "parent-not-followee",
                                            f"no edge ({p.node}, {e.node})"))
    return violations
