from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hmhp import (
    SPONTANEOUS,
    Dataset,
    EdgeGrouping,
    Event,
    Hyperparameters,
    Mode,
    Network,
    ObservationWindow,
    SamplerConfig,
    parent_candidates,
    sample_model_parameters,
)


def random_tiny_instance(rng: np.random.Generator, mode: Mode = Mode.FULL):
    """Small random instance with random (but valid) assignments: at most 5
    events, 3 topics, 3 vocabulary items, asymmetric hyperparameters, random
    per-edge or per-degree-group strengths."""
    n_nodes = int(rng.integers(2, 5))
    nodes = list(range(n_nodes))
    edges = set()
    for u in nodes:
        for v in nodes:
            if rng.random() < 0.55:
                edges.add((u, v))
    if not edges:
        edges.add((0, min(1, n_nodes - 1)))
    network = Network.from_edges(sorted(edges), nodes=nodes)

    K = int(rng.integers(1, 4))
    W = int(rng.integers(1, 4))
    hyper = Hyperparameters(
        alpha=rng.uniform(0.05, 2.0, W),
        beta=rng.uniform(0.05, 2.0, K),
        gamma=rng.uniform(0.05, 2.0, K),
        doc_length_rate=3.0,
        w_prior_shape=float(rng.uniform(0.5, 3.0)),
        w_prior_scale=float(rng.uniform(0.2, 1.5)),
        n_topics=K,
        vocab_size=W,
    )

    horizon = float(rng.uniform(5.0, 30.0))
    window = ObservationWindow(0.0, horizon)
    n_events = int(rng.integers(1, 6))
    times = np.sort(rng.uniform(0.0, horizon, n_events))
    events = []
    for i, t in enumerate(times):
        doc_len = int(rng.integers(0, 5))
        events.append(Event(id=i, time=float(t), node=int(rng.choice(nodes)),
                            tokens=tuple(int(w) for w in rng.integers(0, W, doc_len))))
    dataset = Dataset.from_events(network, window, events)

    grouping_mode = "edge" if rng.random() < 0.5 else "degree"
    grouping = EdgeGrouping(network, mode=grouping_mode)
    w = {key: float(rng.uniform(0.05, 1.0)) for key in grouping.group_keys}
    params = sample_model_parameters(
        network, hyper, seed=int(rng.integers(0, 2**31)),
        mu={v: float(rng.uniform(0.05, 1.0)) for v in nodes},
        w=w, grouping_mode=grouping_mode)

    config = SamplerConfig(
        n_topics=K, hyper=hyper, iterations=1, mode=mode,
        candidate_window=float(rng.uniform(2.0, horizon + 10.0)),
        max_candidates=int(rng.choice([1, 2, 100])),
        seed=int(rng.integers(0, 2**31)),
        edge_grouping=grouping_mode)

    topics = {e.id: int(rng.integers(0, K)) for e in dataset.events}
    parents = {}
    candidate_ids = {}
    for e in dataset.events:
        cands = [c.id for c in parent_candidates(e, dataset, config)]
        candidate_ids[e.id] = cands
        choices = cands + [SPONTANEOUS]
        parents[e.id] = choices[int(rng.integers(0, len(choices)))]
    if mode is Mode.DIAGONAL:
        for e in dataset.events:
            p = parents[e.id]
            topics[e.id] = topics[p] if isinstance(p, int) else topics[e.id]
    return dataset, params, hyper, config, topics, parents, candidate_ids


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
