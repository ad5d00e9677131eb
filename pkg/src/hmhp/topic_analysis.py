"""Analytics over the estimated topic-transition matrix.

The matrix is read as a weighted directed graph between topics: asymmetric
pairs surface directional interactions, HITS separates topics that start
cascades (hubs) from topics cascades drift into (authorities), and
personalized PageRank ranks where conversations seeded at one topic tend to
end up.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

log = logging.getLogger("hmhp.topic_analysis")


@dataclass(frozen=True)
class TopicGraph:
    """Thresholded view of a transition matrix as a weighted digraph."""

    n_topics: int
    weights: np.ndarray
    threshold: float
    diagonal_removed: bool

    @classmethod
    def from_transition(cls, trans: np.ndarray, threshold: float = 0.1,
                        remove_diagonal: bool = True) -> "TopicGraph":
        trans = np.asarray(trans, dtype=float)
        weights = np.where(trans > threshold, trans, 0.0)
        if remove_diagonal:
            np.fill_diagonal(weights, 0.0)
        return cls(n_topics=trans.shape[0], weights=weights, threshold=threshold,
                   diagonal_removed=remove_diagonal)


def asymmetric_pairs(trans: np.ndarray, top_n: int):
    """Most directional topic pairs by the difference of the two transition
    directions; each unordered pair appears once, oriented positively."""
    trans = np.asarray(trans, dtype=float)
    K = trans.shape[0]
    scored = []
    for k in range(K):
        for kk in range(k + 1, K):
            score = trans[k, kk] - trans[kk, k]
            if score > 0:
                scored.append((k, kk, score))
            elif score < 0:
                scored.append((kk, k, -score))
    scored.sort(key=lambda t: (-t[2], t[0], t[1]))
    return scored[:top_n]


def hits_scores(graph: TopicGraph, iterations: int = 200, tol: float = 1e-12):
    """Weighted HITS power iteration; returns (hub, authority), both unit L2."""
    w = graph.weights
    K = graph.n_topics
    if not np.any(w > 0):
        log.warning("HITS on an all-zero graph; returning uniform scores")
        uniform = np.full(K, 1.0 / np.sqrt(K))
        return uniform.copy(), uniform.copy()
    hub = np.full(K, 1.0 / np.sqrt(K))
    auth = np.full(K, 1.0 / np.sqrt(K))
    for _ in range(iterations):
        new_auth = w.T @ hub
        new_auth /= np.linalg.norm(new_auth)
        new_hub = w @ new_auth
        new_hub /= np.linalg.norm(new_hub)
        delta = max(np.max(np.abs(new_auth - auth)), np.max(np.abs(new_hub - hub)))
        hub, auth = new_hub, new_auth
        if delta < tol:
            break
    return hub, auth


def ppr_distribution(trans: np.ndarray, start: int, restart: float = 0.15,
                     excluded: Iterable = ()) -> dict:
    """Stationary distribution of the restart walk on the transition chain
    with the excluded topics removed and rows renormalized. Scores sum to 1
    over the remaining topics."""
    if not 0 < restart <= 1:
        raise ValueError("restart must be in (0, 1]")
    trans = np.asarray(trans, dtype=float)
    K = trans.shape[0]
    excluded = set(int(x) for x in excluded)
    if start in excluded:
        raise ValueError("start topic is in the excluded set")
    keep = [k for k in range(K) if k not in excluded]
    sub = trans[np.ix_(keep, keep)].copy()
    rowsum = sub.sum(axis=1, keepdims=True)
    # Rows stranded by the exclusion spread uniformly over what remains.
    dangling = rowsum[:, 0] <= 0
    sub[dangling] = 1.0 / len(keep)
    rowsum[dangling] = 1.0
    sub /= rowsum

    pos = {k: i for i, k in enumerate(keep)}
    e = np.zeros(len(keep))
    e[pos[start]] = 1.0
    a = np.eye(len(keep)) - (1.0 - restart) * sub.T
    r = np.linalg.solve(a, restart * e)
    return {k: float(r[pos[k]]) for k in keep}


def personalized_pagerank(trans: np.ndarray, start: int, restart: float = 0.15,
                          excluded: Iterable = (), top_n: int = 3):
    """Top related topics for a start topic (the start itself is skipped)."""
    scores = ppr_distribution(trans, start, restart, excluded)
    ranked = sorted(((k, s) for k, s in scores.items() if k != start),
                    key=lambda t: (-t[1], t[0]))
    return ranked[:top_n]


def top_words_per_topic(zeta: np.ndarray, n: int,
                        vocabulary: Optional[Sequence] = None):
    """Per topic, the n most probable vocabulary items; ties break toward the
    lower index. With a vocabulary (index -> token) the tokens are returned,
    otherwise the indices."""
    zeta = np.asarray(zeta, dtype=float)
    out = []
    for row in zeta:
        order = np.lexsort((np.arange(len(row)), -row))[:n]
        if vocabulary is not None:
            out.append([vocabulary[i] for i in order])
        else:
            out.append([int(i) for i in order])
    return out


def gini_coefficient(scores: np.ndarray) -> float:
    """Skew summary used to compare hub and authority score spreads."""
    x = np.sort(np.asarray(scores, dtype=float))
    if len(x) == 0 or x.sum() == 0:
        return 0.0
    n = len(x)
    return float((2 * np.arange(1, n + 1) - n - 1) @ x / (n * x.sum()))
