"""Reconstruction metrics against gold labels.

Parent metrics treat "spontaneous" as a rankable outcome, so accuracy is
defined over every event. Strength errors compare per-edge values (resolve
grouped estimates through the group key first) and report percentage error
only where the gold strength is positive. Topic agreement is measured on a
balanced sample of event pairs, which makes it invariant to label
permutations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import SPONTANEOUS, Dataset


@dataclass(frozen=True)
class NetworkErrorReport:
    mean_ape: float
    median_ape: float
    mean_ape_active: float
    median_ape_active: float
    tae: float
    n_edges: int
    n_excluded_zero_gold: int
    n_active_edges: int


@dataclass(frozen=True)
class PairMetricsReport:
    precision: float
    recall: float
    f1: float
    n_same: int
    n_diff: int


@dataclass(frozen=True)
class EvalReport:
    parent_accuracy: float
    parent_accuracy_diffusion: float
    recall_at: dict
    network: Optional[NetworkErrorReport]
    pairs: Optional[PairMetricsReport]

    def flat_row(self) -> dict:
        row = {
            "parent_accuracy": self.parent_accuracy,
            "parent_accuracy_diffusion": self.parent_accuracy_diffusion,
        }
        for k in sorted(self.recall_at):
            row[f"recall_at_{k}"] = self.recall_at[k]
        if self.network is not None:
            row.update({
                "mean_ape": self.network.mean_ape,
                "median_ape": self.network.median_ape,
                "mean_ape_active": self.network.mean_ape_active,
                "median_ape_active": self.network.median_ape_active,
                "tae": self.network.tae,
            })
        if self.pairs is not None:
            row.update({"topic_precision": self.pairs.precision,
                        "topic_recall": self.pairs.recall,
                        "topic_f1": self.pairs.f1})
        return row


def _matches(gold_parent, predicted) -> bool:
    if gold_parent is SPONTANEOUS:
        return predicted is SPONTANEOUS
    return isinstance(predicted, int) and predicted == gold_parent


def parent_metrics(gold: Dataset, ranked_predictions: Mapping, ks: Sequence[int]):
    """Accuracy (rank-1 match over all events) and recall@k for each k.

    ranked_predictions maps event id to a best-first list of candidate
    parents, SPONTANEOUS included as an ordinary entry.
    """
    ks = sorted(set(int(k) for k in ks))
    hits = {k: 0 for k in ks}
    top1 = 0
    top1_diffusion = 0
    n_diffusion = 0
    n = 0
    for e in gold.events:
        if e.parent is None:
            raise ValueError(f"event {e.id} has no gold parent")
        ranking = ranked_predictions.get(e.id) or [SPONTANEOUS]
        n += 1
        rank1 = _matches(e.parent, ranking[0])
        top1 += rank1
        if e.parent is not SPONTANEOUS:
            n_diffusion += 1
            top1_diffusion += rank1
        for k in ks:
            if any(_matches(e.parent, r) for r in ranking[:k]):
                hits[k] += 1
    if n == 0:
        return 0.0, {k: 0.0 for k in ks}, 0.0
    accuracy = top1 / n
    recall = {k: hits[k] / n for k in ks}
    diffusion_accuracy = top1_diffusion / n_diffusion if n_diffusion else 0.0
    return accuracy, recall, diffusion_accuracy


def children_counts(gold: Dataset) -> dict:
    """Diffusion children generated per node, the activity measure used to
    filter strength errors."""
    out = {v: 0 for v in gold.network.sorted_nodes}
    for e in gold.events:
        if isinstance(e.parent, int):
            out[gold.event(e.parent).node] += 1
    return out


def _lower_median(values: np.ndarray) -> float:
    if len(values) == 0:
        return float("nan")
    ordered = np.sort(values)
    return float(ordered[(len(ordered) - 1) // 2])


def network_error(gold_w: Mapping, est_w: Mapping, activity: Mapping,
                  active_threshold: int) -> NetworkErrorReport:
    """Per-edge absolute percentage errors plus the total absolute error.

    Edges with zero gold strength are excluded from APE (but kept in TAE) and
    counted. The filtered variants keep only edges whose source node has
    activity at or above the threshold. Medians use the lower-median
    convention.
    """
    apes = []
    active_apes = []
    tae = 0.0
    excluded = 0
    n_active = 0
    for (u, v) in sorted(gold_w):
        gold = float(gold_w[(u, v)])
        est = float(est_w[(u, v)])
        tae += abs(gold - est)
        if gold <= 0:
            excluded += 1
            continue
        ape = abs(gold - est) / gold
        apes.append(ape)
        if activity.get(u, 0) >= active_threshold:
            active_apes.append(ape)
            n_active += 1
    apes_arr = np.asarray(apes, dtype=float)
    active_arr = np.asarray(active_apes, dtype=float)
    return NetworkErrorReport(
        mean_ape=float(apes_arr.mean()) if len(apes_arr) else float("nan"),
        median_ape=_lower_median(apes_arr),
        mean_ape_active=float(active_arr.mean()) if len(active_arr) else float("nan"),
        median_ape_active=_lower_median(active_arr),
        tae=tae,
        n_edges=len(gold_w),
        n_excluded_zero_gold=excluded,
        n_active_edges=n_active,
    )


def resolve_edge_strengths(w_by_group: Mapping, grouping) -> dict:
    """Expand grouped strengths to a per-edge map through the group key."""
    return {(u, v): float(w_by_group[grouping.key(u, v)])
            for (u, v) in sorted(grouping.network.edges)}


def topic_pair_metrics(gold_topics: Mapping, predicted_topics: Mapping,
                       n_pairs: int, seed: int) -> PairMetricsReport:
    """Precision/recall/F1 for "same topic" on a roughly balanced pair sample.

    Pairs are drawn without replacement, targeting half gold-same and half
    gold-different; any shortfall shows up in the reported class counts.
    """
    ids = sorted(set(gold_topics) & set(predicted_topics))
    if len(ids) < 2:
        raise ValueError("need at least two events with both labelings")
    rng = np.random.default_rng(seed)
    by_topic: dict = {}
    for eid in ids:
        by_topic.setdefault(gold_topics[eid], []).append(eid)

    target_same = n_pairs // 2
    target_diff = n_pairs - target_same

    same_capacity = sum(len(g) * (len(g) - 1) // 2 for g in by_topic.values())
    n_same_target = min(target_same, same_capacity)

    groups = [g for g in by_topic.values() if len(g) > 1]
    weights = np.array([len(g) * (len(g) - 1) / 2 for g in groups], dtype=float)
    seen = set()
    same_pairs = []
    guard = 0
    while len(same_pairs) < n_same_target and guard < 100 * n_pairs:
        guard += 1
        gi = rng.choice(len(groups), p=weights / weights.sum())
        g = groups[gi]
        a, b = rng.choice(len(g), size=2, replace=False)
        pair = (min(g[a], g[b]), max(g[a], g[b]))
        if pair not in seen:
            seen.add(pair)
            same_pairs.append(pair)

    diff_pairs = []
    guard = 0
    while len(diff_pairs) < target_diff and guard < 100 * n_pairs:
        guard += 1
        a, b = rng.choice(len(ids), size=2, replace=False)
        x, y = ids[a], ids[b]
        if gold_topics[x] == gold_topics[y]:
            continue
        pair = (min(x, y), max(x, y))
        if pair not in seen:
            seen.add(pair)
            diff_pairs.append(pair)

    tp = fp = fn = 0
    for (x, y) in same_pairs + diff_pairs:
        gold_same = gold_topics[x] == gold_topics[y]
        pred_same = predicted_topics[x] == predicted_topics[y]
        if pred_same and gold_same:
            tp += 1
        elif pred_same and not gold_same:
            fp += 1
        elif gold_same and not pred_same:
            fn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (2 * precision * recall / (precision + recall)) if precision + recall else 0.0
    return PairMetricsReport(precision=precision, recall=recall, f1=f1,
                             n_same=len(same_pairs), n_diff=len(diff_pairs))


def evaluate(gold: Dataset, ranked_predictions: Mapping, predicted_topics: Optional[Mapping],
             ks: Sequence[int] = (1, 3, 5, 7), gold_w: Optional[Mapping] = None,
             est_w: Optional[Mapping] = None, active_threshold: int = 100,
             n_pairs: int = 10000, seed: int = 0) -> EvalReport:
    """Bundle all reconstruction metrics into one report."""
    accuracy, recall, diffusion_accuracy = parent_metrics(gold, ranked_predictions, ks)
    network = None
    if gold_w is not None and est_w is not None:
        network = network_error(gold_w, est_w, children_counts(gold), active_threshold)
    pairs = None
    if predicted_topics is not None:
        gold_topics = {e.id: e.topic for e in gold.events if e.topic is not None}
        pairs = topic_pair_metrics(gold_topics, predicted_topics, n_pairs, seed)
    return EvalReport(parent_accuracy=accuracy, parent_accuracy_diffusion=diffusion_accuracy,
                      recall_at=recall, network=network, pairs=pairs)
