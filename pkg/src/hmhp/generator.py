"""Forward simulation of cascades and documents, plus semi-synthetic recipes.

Cascades are generated level by level: level 0 holds the spontaneous events
drawn from per-node base rates, level l the children triggered by level l-1.
Child counts per follower follow Poisson(W * (1 - exp(-(T - t_parent)))) and
child offsets the unit-rate exponential truncated to the remaining horizon,
which is equivalent to sampling the inhomogeneous Poisson process with the
decaying impulse response directly. Documents are then drawn down the tree:
a spontaneous event picks its topic from the author's preferences, a
diffusion event from the transition row of its parent's topic.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Union

import numpy as np

from .core import (
    SPONTANEOUS,
    Dataset,
    EdgeGrouping,
    Event,
    Hyperparameters,
    ModelParameters,
    Network,
    ObservationWindow,
)

log = logging.getLogger("hmhp.generator")

# Row sums of W at or above this trip a runaway-branching warning in the
# generation report (supercritical regimes still terminate via the horizon).
BRANCHING_WARN_THRESHOLD = 5.0


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int
    window: ObservationWindow
    max_events: Optional[int] = None
    truncate_at_horizon: bool = True

    def __post_init__(self):
        if self.max_events is not None and self.max_events < 1:
            raise ValueError("max_events must be >= 1 when set")


@dataclass(frozen=True)
class SemiSynthRecipe:
    """Knobs for re-fitting a real unlabeled dataset before regeneration."""

    source: Dataset
    n_topics: int
    doc_length_rate: float = 7.0
    parent_window: float = 24.0

    def __post_init__(self):
        if self.parent_window <= 0:
            raise ValueError("parent_window must be positive")


def sample_spontaneous_events(network: Network, mu: Mapping, config: GeneratorConfig,
                              rng: Optional[np.random.Generator] = None) -> list:
    """Level-0 events: per node, Poisson(mu_v * duration) many, times uniform
    on the window. Ids are provisional (renumbered once a cascade is final)."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    window = config.window
    events = []
    next_id = 0
    for v in network.sorted_nodes:
        rate = float(mu[v])
        if rate < 0:
            raise ValueError(f"negative base rate at node {v}")
        count = rng.poisson(rate * window.duration)
        times = window.start + rng.random(count) * window.duration
        for t in times:
            events.append(Event(id=next_id, time=float(t), node=v, parent=SPONTANEOUS))
            next_id += 1
    events.sort(key=lambda e: (e.time, e.id))
    return events


def _truncated_exp_offsets(rng: np.random.Generator, span: float, count: int) -> np.ndarray:
    # Inverse CDF of the unit-rate exponential restricted to (0, span).
    u = rng.random(count)
    return -np.log1p(-u * (1.0 - math.exp(-span)))


def sample_children(parent: Event, network: Network, params: ModelParameters,
                    config: GeneratorConfig, rng: Optional[np.random.Generator] = None,
                    next_id: int = 0) -> list:
    """Direct children of one event across all followers of its author."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    horizon = config.window.horizon
    span = horizon - parent.time
    if span <= 0:
        return []
    children = []
    for v in network.followers(parent.node):
        strength = params.edge_strength(parent.node, v)
        if strength <= 0:
            continue
        mean = strength * (1.0 - math.exp(-span))
        count = rng.poisson(mean)
        if count == 0:
            continue
        for dt in _truncated_exp_offsets(rng, span, count):
            children.append(Event(id=next_id, time=float(parent.time + dt), node=v,
                                  parent=parent.id))
            next_id += 1
    return children


def generate_cascades(network: Network, params: ModelParameters, config: GeneratorConfig,
                      report_out: Optional[dict] = None) -> Dataset:
    """Level-wise cascade simulation; events come back time-sorted with dense
    ids 0..n-1 and parents resolved. Pass report_out to collect per-level
    counts and warnings."""
    rng = np.random.default_rng(config.seed)
    warnings = []
    for u in network.sorted_nodes:
        row_sum = sum(params.edge_strength(u, v) for v in network.followers(u))
        if row_sum >= BRANCHING_WARN_THRESHOLD:
            warnings.append(f"node {u} has outgoing strength sum {row_sum:.3f}; "
                            "branching may run away")
            log.warning(warnings[-1])
            break

    level = sample_spontaneous_events(network, params.mu, config, rng)
    all_events = list(level)
    level_counts = [len(level)]
    next_id = len(level)
    truncated = False
    while level:
        if config.max_events is not None and len(all_events) >= config.max_events:
            truncated = True
            break
        next_level = []
        for parent in level:
            kids = sample_children(parent, network, params, config, rng, next_id=next_id)
            next_id += len(kids)
            next_level.extend(kids)
        next_level.sort(key=lambda e: (e.time, e.id))
        if next_level:
            level_counts.append(len(next_level))
            all_events.extend(next_level)
        level = next_level

    all_events.sort(key=lambda e: (e.time, e.id))
    if config.max_events is not None and len(all_events) > config.max_events:
        truncated = True
        all_events = all_events[: config.max_events]

    # Children are strictly later than parents, so an earliest-by-time prefix
    # is closed under parent references; renumber ids in time order.
    id_map = {e.id: i for i, e in enumerate(all_events)}
    final = []
    for i, e in enumerate(all_events):
        parent = e.parent if e.parent is SPONTANEOUS else id_map[e.parent]
        final.append(Event(id=i, time=e.time, node=e.node, parent=parent))

    if truncated:
        warnings.append(f"output truncated to max_events={config.max_events}; "
                        "latest events dropped")
    if report_out is not None:
        report_out["level_counts"] = level_counts
        report_out["n_events"] = len(final)
        report_out["warnings"] = warnings
        report_out["truncated"] = truncated
    return Dataset.from_events(network, config.window, final)


def generate_documents(dataset: Dataset, params: ModelParameters,
                       hyper: Hyperparameters, seed: int) -> Dataset:
    """Fill topics and tokens in time order so parents precede children.

    Document lengths are Poisson(doc_length_rate) with one resample on zero
    and a floor of one token, so every document carries topic evidence.
    """
    rng = np.random.default_rng(seed)
    zeta_cdf = np.cumsum(params.zeta, axis=1)
    trans_cdf = np.cumsum(params.trans, axis=1)
    phi_cdf = np.cumsum(params.phi, axis=1)
    node_index = dataset.network.node_index
    topic_of: dict = {}
    out = []
    for e in dataset.events:
        if e.parent is SPONTANEOUS:
            cdf = phi_cdf[node_index[e.node]]
        elif isinstance(e.parent, int):
            parent_topic = topic_of.get(e.parent)
            if parent_topic is None:
                raise RuntimeError(f"event {e.id}: parent {e.parent} has no topic yet")
            cdf = trans_cdf[parent_topic]
        else:
            raise ValueError(f"event {e.id} has no parent label; generate cascades first")
        topic = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
        topic = min(topic, params.n_topics - 1)
        topic_of[e.id] = topic

        length = int(rng.poisson(hyper.doc_length_rate))
        if length == 0:
            length = int(rng.poisson(hyper.doc_length_rate))
        length = max(length, 1)
        row_cdf = zeta_cdf[topic]
        tokens = np.minimum(
            np.searchsorted(row_cdf, rng.random(length) * row_cdf[-1], side="right"),
            params.vocab_size - 1,
        )
        out.append(Event(id=e.id, time=e.time, node=e.node, tokens=tuple(int(w) for w in tokens),
                         topic=topic, parent=e.parent))
    return dataset.replace_events(out)


def build_circular_network(n: int):
    """Cycle of n nodes: self-edge (strength 0.3) plus an edge to the
    successor (strength 0.15). Returns (network, per-edge strength map)."""
    if n < 2:
        raise ValueError("circular network needs at least 2 nodes")
    edges = []
    w = {}
    for i in range(n):
        j = (i + 1) % n
        edges.append((i, i))
        edges.append((i, j))
        w[(i, i)] = 0.3
        w[(i, j)] = 0.15
    return Network.from_edges(edges), w


def sample_model_parameters(network: Network, hyper: Hyperparameters, seed: int,
                            mu: Union[Mapping, float, None] = None,
                            w: Optional[Mapping] = None,
                            grouping_mode: str = "edge",
                            phi: Optional[np.ndarray] = None,
                            zeta: Optional[np.ndarray] = None,
                            trans: Optional[np.ndarray] = None) -> ModelParameters:
    """Draw zeta/trans/phi rows from their Dirichlet priors (unless supplied)
    and attach explicit or default base rates and edge strengths.

    Default mu is 0.02 events/hour. Default strengths split 0.5 across each
    source node's out-edges, keeping the branching factor subcritical so
    simulation terminates regardless of the graph.
    """
    rng = np.random.default_rng(seed)
    if zeta is None:
        zeta = rng.dirichlet(hyper.alpha, size=hyper.n_topics)
    if trans is None:
        trans = rng.dirichlet(hyper.beta, size=hyper.n_topics)
    if phi is None:
        phi = rng.dirichlet(hyper.gamma, size=network.n_nodes)
    if mu is None:
        mu = 0.02
    if isinstance(mu, (int, float)):
        mu = {v: float(mu) for v in network.sorted_nodes}
    grouping = EdgeGrouping(network, mode=grouping_mode)
    if w is None:
        if grouping_mode != "edge":
            raise ValueError("default strengths need per-edge grouping; "
                             "pass an explicit strength map instead")
        w = {(u, v): 0.5 / network.out_degree(u)
             for (u, v) in sorted(network.edges)}
    else:
        w = {k: float(x) for k, x in w.items()}
        missing = [k for k in grouping.group_keys if k not in w]
        if missing:
            raise ValueError(f"strength map is missing {len(missing)} group keys, e.g. {missing[0]}")
    return ModelParameters(mu=mu, w=dict(w), grouping=grouping,
                           zeta=np.asarray(zeta), phi=np.asarray(phi), trans=np.asarray(trans))


def heuristic_parent_assignment(source: Dataset, parent_window: float) -> Dataset:
    """Closest-in-time preceding followee event within the window, else
    spontaneous. Ties on time break toward the larger event id."""
    by_node: dict = {v: [] for v in source.network.sorted_nodes}
    out = []
    for e in source.events:
        best = None
        cutoff = e.time - parent_window
        for u in source.network.followees(e.node):
            lst = by_node[u]
            # Events arrive in (time, id) order, so the last qualifying entry
            # per followee is the closest.
            for cand in reversed(lst):
                if cand.time >= e.time:
                    continue
                if cand.time < cutoff:
                    break
                if best is None or (cand.time, cand.id) > (best.time, best.id):
                    best = cand
                break
        parent = best.id if best is not None else SPONTANEOUS
        out.append(Event(id=e.id, time=e.time, node=e.node, tokens=e.tokens,
                         topic=e.topic, parent=parent))
        by_node[e.node].append(e)
    return source.replace_events(out)


def fit_semisynth_model(recipe: SemiSynthRecipe, seed: int, iterations: int = 60,
                        grouping_mode: str = "degree") -> ModelParameters:
    """Fit generative parameters to a real, unlabeled dataset so fresh data
    with gold labels can be simulated from them.

    Parents come from the closest-in-time heuristic, topics from a decoupled
    sampler run (a per-user mixture model over documents, no transition
    coupling), and the parameters from the smoothed count estimators.
    """
    from .sampler import Mode, SamplerConfig, run_gibbs

    labeled = heuristic_parent_assignment(recipe.source, recipe.parent_window)
    vocab_size = 1 + max((max(e.tokens) for e in labeled.events if e.tokens), default=0)
    hyper = Hyperparameters.symmetric(recipe.n_topics, vocab_size,
                                      doc_length_rate=recipe.doc_length_rate)
    config = SamplerConfig(n_topics=recipe.n_topics, hyper=hyper, iterations=iterations,
                           mode=Mode.DECOUPLED, seed=seed,
                           candidate_window=recipe.parent_window)
    fit = run_gibbs(labeled, config)
    with_topics = labeled.replace_events(
        Event(id=e.id, time=e.time, node=e.node, tokens=e.tokens,
              topic=fit.topics[e.id], parent=e.parent)
        for e in labeled.events)
    return estimate_semisynth_parameters(with_topics, hyper,
                                         grouping_mode=grouping_mode,
                                         candidate_window=recipe.parent_window)


def exposure_counts(dataset: Dataset, grouping: EdgeGrouping,
                    candidate_window: float) -> np.ndarray:
    """Pooled exposure per group: events at each edge's source node, counting
    only events with a full candidate window before the horizon. When the
    whole observation window is shorter than the candidate window, every
    event counts."""
    horizon = dataset.window.horizon
    apply_cutoff = dataset.window.duration > candidate_window
    per_node = {v: 0 for v in dataset.network.sorted_nodes}
    for e in dataset.events:
        if not apply_cutoff or horizon - e.time >= candidate_window:
            per_node[e.node] += 1
    counts = np.zeros(grouping.n_groups, dtype=np.int64)
    for (u, v) in dataset.network.edges:
        counts[grouping.group_index[grouping.key(u, v)]] += per_node[u]
    return counts


def estimate_semisynth_parameters(labeled: Dataset, hyper: Hyperparameters,
                                  grouping_mode: str = "degree",
                                  candidate_window: float = 24.0) -> ModelParameters:
    """Moment/posterior-mean estimates from a fully labeled dataset: smoothed
    count ratios for zeta/phi/trans, pooled Gamma-Poisson posterior means for
    edge strengths, and raw spontaneous rates for mu."""
    network = labeled.network
    K, W = hyper.n_topics, hyper.vocab_size
    topic_word = np.zeros((K, W))
    user_topic = np.zeros((network.n_nodes, K))
    trans_pairs = np.zeros((K, K))
    spont = {v: 0 for v in network.sorted_nodes}
    grouping = EdgeGrouping(network, mode=grouping_mode)
    group_pairs = np.zeros(grouping.n_groups, dtype=np.int64)
    for e in labeled.events:
        if e.topic is None or e.parent is None:
            raise ValueError(f"event {e.id} is missing a topic or parent label")
        np.add.at(topic_word[e.topic], np.asarray(e.tokens, dtype=int), 1)
        if e.parent is SPONTANEOUS:
            spont[e.node] += 1
            user_topic[network.node_index[e.node], e.topic] += 1
        else:
            p = labeled.event(e.parent)
            trans_pairs[p.topic, e.topic] += 1
            group_pairs[grouping.group_index[grouping.key(p.node, e.node)]] += 1

    zeta = (topic_word + hyper.alpha) / (topic_word.sum(axis=1, keepdims=True) + hyper.alpha_total)
    phi = (user_topic + hyper.gamma) / (user_topic.sum(axis=1, keepdims=True) + hyper.gamma_total)
    trans = (trans_pairs + hyper.beta) / (trans_pairs.sum(axis=1, keepdims=True) + hyper.beta_total)

    sources = exposure_counts(labeled, grouping, candidate_window)
    w = {}
    for key, pairs, n_src in zip(grouping.group_keys, group_pairs, sources):
        w[key] = (hyper.w_prior_shape + float(pairs)) / (1.0 / hyper.w_prior_scale + float(n_src))

    duration = labeled.window.duration
    mu = {v: spont[v] / duration for v in network.sorted_nodes}
    return ModelParameters(mu=mu, w=w, grouping=grouping, zeta=zeta, phi=phi, trans=trans)
