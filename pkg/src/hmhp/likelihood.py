"""Joint likelihood of a fully assigned dataset and a held-out scoring pass.

The joint value is the exact log of the generative probability with the
topic-word, topic-transition and user-preference distributions integrated
out: three Dirichlet-multinomial blocks over the count tables plus the point
process terms (log base rates for spontaneous events, log impulse responses
for diffusion pairs, and the base-rate and survival integrals over the
window, using the truncated kernel mass 1 - exp(-(T - t))).

Held-out scoring freezes the trained point estimates, assigns each held-out
event a parent by one greedy best-first pass (candidates weighted by the
frozen strengths and kernel times the topic-marginalized transition
evidence), and then reports content and event-time log likelihood
separately. Topics are never sampled: the content term marginalizes each
event's topic under its parent's assigned topic, so the pass is
deterministic and comparable across sampler modes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np
from scipy.special import gammaln, logsumexp

from .core import (
    SPONTANEOUS,
    Dataset,
    Hyperparameters,
    ModelParameters,
)

TOTAL_TOL = 1e-6


@dataclass(frozen=True)
class LikelihoodReport:
    content_ll: float
    time_ll: float
    total_ll: float
    per_event: Optional[list] = None

    def __post_init__(self):
        if abs(self.total_ll - (self.content_ll + self.time_ll)) > TOTAL_TOL * max(
                1.0, abs(self.content_ll) + abs(self.time_ll)):
            raise ValueError("total_ll must equal content_ll + time_ll")

    @classmethod
    def from_parts(cls, content_ll: float, time_ll: float, per_event=None) -> "LikelihoodReport":
        return cls(content_ll=content_ll, time_ll=time_ll,
                   total_ll=content_ll + time_ll, per_event=per_event)


@dataclass(frozen=True)
class FrozenTrainResult:
    """Just enough of a training run, reloaded from disk, to score held-out
    data: frozen estimates plus the training window length."""

    config: object
    w: Mapping
    mu: Mapping
    zeta: np.ndarray
    phi: np.ndarray
    trans: np.ndarray
    train_window_duration: float


def assignments_from_dataset(dataset: Dataset) -> dict:
    """Lift gold labels into the {id: (topic, parent)} form; every event must
    carry both."""
    out = {}
    for e in dataset.events:
        if e.topic is None or e.parent is None:
            raise ValueError(f"event {e.id} lacks a topic or parent assignment")
        out[e.id] = (e.topic, e.parent)
    return out


def _dirichlet_multinomial_block(counts: np.ndarray, conc: np.ndarray, conc_total: float) -> float:
    rows = counts.sum(axis=1)
    out = gammaln(conc_total) * counts.shape[0] - gammaln(conc_total + rows).sum()
    out += (gammaln(conc + counts) - gammaln(conc)).sum()
    return float(out)


def joint_log_likelihood(dataset: Dataset, assignments: Mapping,
                         params: ModelParameters, hyper: Hyperparameters) -> float:
    """Collapsed joint log likelihood of events, topics and parents under the
    given base rates and edge strengths. ``assignments`` maps event id to
    (topic, parent) with SPONTANEOUS for parentless events."""
    network = dataset.network
    K, W = hyper.n_topics, hyper.vocab_size
    trans = np.zeros((K, K), dtype=np.int64)
    word = np.zeros((K, W), dtype=np.int64)
    user = np.zeros((network.n_nodes, K), dtype=np.int64)

    time_ll = 0.0
    horizon = dataset.window.horizon
    for e in dataset.events:
        if e.id not in assignments:
            raise ValueError(f"no assignment for event {e.id}")
        topic, parent = assignments[e.id]
        np.add.at(word[topic], np.asarray(e.tokens, dtype=np.int64), 1)
        if parent is SPONTANEOUS:
            user[network.node_index[e.node], topic] += 1
            time_ll += np.log(params.mu[e.node])
        else:
            p = dataset.event(parent)
            trans[assignments[p.id][0], topic] += 1
            dt = e.time - p.time
            time_ll += np.log(params.edge_strength(p.node, e.node)) - dt
        decay = 1.0 - np.exp(-(horizon - e.time))
        for v in network.followers(e.node):
            time_ll -= params.edge_strength(e.node, v) * decay

    time_ll -= sum(params.mu[v] for v in network.sorted_nodes) * dataset.window.duration

    content_ll = (_dirichlet_multinomial_block(trans, hyper.beta, hyper.beta_total)
                  + _dirichlet_multinomial_block(user, hyper.gamma, hyper.gamma_total)
                  + _dirichlet_multinomial_block(word, hyper.alpha, hyper.alpha_total))
    return content_ll + time_ll


def heldout_log_likelihood(train_result, heldout: Dataset,
                           config=None, per_event: bool = False) -> LikelihoodReport:
    """Score held-out events under the frozen estimates of a training run.

    Parents are fixed by one greedy pass in time order; each event's topic is
    marginalized under its parent's (already fixed) topic, or under the
    author's preference row for spontaneous events. Strengths resolve through
    the training run's edge grouping; groups and nodes unseen in training
    fall back to the prior mean strength and the smoothed zero-count rate.
    """
    from .sampler import _IndexedData

    config = config or train_result.config
    hyper = config.hyper
    data = _IndexedData(heldout, config)
    network = heldout.network

    prior_mean = hyper.w_prior_mean
    w_arr = np.array([train_result.w.get(key, prior_mean) for key in data.grouping.group_keys])
    mu_fallback = 1.0 / (train_result.train_window_duration + 1.0)
    mu_arr = np.array([train_result.mu.get(v, mu_fallback) for v in network.sorted_nodes])

    log_zeta = np.log(train_result.zeta)
    log_phi = np.log(train_result.phi)
    log_trans = np.log(train_result.trans)

    content = 0.0
    time_ll = 0.0
    breakdown = [] if per_event else None
    assigned_topic = np.full(data.n, -1, dtype=np.int64)

    with np.errstate(divide="ignore"):
        log_w = np.log(w_arr)
        log_mu = np.log(mu_arr)

    for i in range(data.n):
        v = data.node_idx[i]
        tokens = data.docs[i]
        word_loglik = log_zeta[:, tokens].sum(axis=1) if len(tokens) else np.zeros(hyper.n_topics)

        spont_mix = logsumexp(log_phi[v] + word_loglik)
        spont_score = spont_mix + log_mu[v]
        cand = data.cand[i]
        if len(cand):
            cand_mix = np.array([logsumexp(log_trans[assigned_topic[j]] + word_loglik)
                                 for j in cand])
            scores = cand_mix + log_w[data.cand_group[i]] - data.cand_dt[i]
            best = int(np.argmax(scores))
            take_spont = spont_score >= scores[best]
        else:
            take_spont = True

        if take_spont:
            prior = log_phi[v]
            event_time = float(log_mu[v])
        else:
            j = int(cand[best])
            prior = log_trans[assigned_topic[j]]
            event_time = float(log_w[data.cand_group[i][best]] - data.cand_dt[i][best])

        event_content = float(logsumexp(prior + word_loglik))
        assigned_topic[i] = int(np.argmax(prior + word_loglik))
        content += event_content
        time_ll += event_time
        if breakdown is not None:
            breakdown.append((int(data.ids[i]), event_content, event_time))

    time_ll -= float(mu_arr.sum() * heldout.window.duration)
    time_ll -= float(w_arr @ data.survival_per_group)
    return LikelihoodReport.from_parts(content, time_ll, per_event=breakdown)
