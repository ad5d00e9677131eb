from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from hmhp import (
    SPONTANEOUS,
    Dataset,
    Event,
    GeneratorConfig,
    Hyperparameters,
    Network,
    ObservationWindow,
    build_circular_network,
    estimate_semisynth_parameters,
    generate_cascades,
    generate_documents,
    heuristic_parent_assignment,
    sample_children,
    sample_model_parameters,
    sample_spontaneous_events,
    validate_dataset,
)


def _simple_params(network, hyper, mu, w, seed=0):
    return sample_model_parameters(network, hyper, seed, mu=mu, w=w, grouping_mode="edge")


class TestSpontaneous:
    def test_zero_rates_give_nothing(self):
        network = Network.from_edges([(0, 1), (1, 0)])
        config = GeneratorConfig(seed=1, window=ObservationWindow(0.0, 100.0))
        events = sample_spontaneous_events(network, {0: 0.0, 1: 0.0}, config)
        assert events == []

    def test_poisson_moments(self):
        # One node at 2/hour over 100 hours: mean count 200, sd sqrt(200).
        network = Network.from_edges([(0, 0)])
        config = GeneratorConfig(seed=5, window=ObservationWindow(0.0, 100.0))
        rng = np.random.default_rng(5)
        counts = [len(sample_spontaneous_events(network, {0: 2.0}, config, rng))
                  for _ in range(10_000)]
        sigma_of_mean = math.sqrt(200.0 / 10_000)
        assert abs(np.mean(counts) - 200.0) < 3 * sigma_of_mean

    def test_seed_determinism(self):
        network = Network.from_edges([(0, 1), (1, 0)])
        config = GeneratorConfig(seed=9, window=ObservationWindow(0.0, 50.0))
        a = sample_spontaneous_events(network, {0: 0.5, 1: 0.2}, config)
        b = sample_spontaneous_events(network, {0: 0.5, 1: 0.2}, config)
        assert a == b


class TestChildren:
    def test_zero_strength_row(self):
        network = Network.from_edges([(0, 1)])
        hyper = Hyperparameters.symmetric(2, 5)
        params = _simple_params(network, hyper, mu=0.1, w={(0, 1): 0.0})
        config = GeneratorConfig(seed=2, window=ObservationWindow(0.0, 100.0))
        parent = Event(id=0, time=1.0, node=0, parent=SPONTANEOUS)
        assert sample_children(parent, network, params, config) == []

    def test_mean_children_matches_strength(self):
        # Long horizon: expected children per follower approaches W = 0.3.
        network = Network.from_edges([(0, 1)])
        hyper = Hyperparameters.symmetric(2, 5)
        params = _simple_params(network, hyper, mu=0.1, w={(0, 1): 0.3})
        config = GeneratorConfig(seed=3, window=ObservationWindow(0.0, 500.0))
        rng = np.random.default_rng(3)
        parent = Event(id=0, time=0.0, node=0, parent=SPONTANEOUS)
        counts = [len(sample_children(parent, network, params, config, rng))
                  for _ in range(10_000)]
        sigma_of_mean = math.sqrt(0.3 / 10_000)
        assert abs(np.mean(counts) - 0.3) < 3 * sigma_of_mean

    def test_offsets_match_truncated_exponential(self):
        # Horizon 5 ahead of the parent: offsets follow the unit exponential
        # truncated to (0, 5); compare the empirical mean against quadrature.
        span = 5.0
        norm = 1.0 - math.exp(-span)
        expected_mean, _ = quad(lambda t: t * math.exp(-t) / norm, 0, span)
        assert expected_mean == pytest.approx(0.9663, abs=5e-4)

        network = Network.from_edges([(0, 1)])
        hyper = Hyperparameters.symmetric(2, 5)
        params = _simple_params(network, hyper, mu=0.1, w={(0, 1): 5.0})
        config = GeneratorConfig(seed=4, window=ObservationWindow(0.0, span))
        rng = np.random.default_rng(4)
        offsets = []
        parent = Event(id=0, time=0.0, node=0, parent=SPONTANEOUS)
        while len(offsets) < 100_000:
            offsets.extend(c.time for c in
                           sample_children(parent, network, params, config, rng))
        assert abs(np.mean(offsets) - expected_mean) < 0.02


class TestCascades:
    def test_all_zero_strengths_keep_level_zero_only(self):
        network, _ = build_circular_network(6)
        hyper = Hyperparameters.symmetric(3, 5)
        w = {key: 0.0 for key in
             _simple_params(network, hyper, 0.05, None).grouping.group_keys}
        params = _simple_params(network, hyper, mu=0.05, w=w)
        report = {}
        dataset = generate_cascades(network, params,
                                    GeneratorConfig(seed=6, window=ObservationWindow(0, 200.0)),
                                    report_out=report)
        assert all(e.parent is SPONTANEOUS for e in dataset.events)
        assert len(report["level_counts"]) == 1

    def test_every_diffusion_parent_is_valid(self):
        network, w = build_circular_network(10)
        hyper = Hyperparameters.symmetric(10, 20, alpha=0.1, beta=0.01)
        params = _simple_params(network, hyper, mu=0.02, w=w)
        config = GeneratorConfig(seed=7, window=ObservationWindow(0.0, 1500.0))
        dataset = generate_cascades(network, params, config)
        assert validate_dataset(dataset) == []

    def test_max_events_truncates_in_time_order(self):
        network, w = build_circular_network(10)
        hyper = Hyperparameters.symmetric(10, 20)
        params = _simple_params(network, hyper, mu=0.05, w=w)
        full = generate_cascades(network, params,
                                 GeneratorConfig(seed=8, window=ObservationWindow(0, 800.0)))
        report = {}
        capped = generate_cascades(
            network, params,
            GeneratorConfig(seed=8, window=ObservationWindow(0, 800.0),
                            max_events=full.n_events // 2),
            report_out=report)
        assert capped.n_events == full.n_events // 2
        assert report["truncated"]
        # Same RNG stream up to the stop level: every kept event also exists
        # in the uncapped run, and keeping the earliest slice of a subset can
        # only push the k-th time later.
        kept = [e.time for e in capped.events]
        full_times = {e.time for e in full.events}
        assert all(t in full_times for t in kept)
        assert all(a <= b for a, b in zip((e.time for e in full.events), kept))
        assert validate_dataset(capped) == []

    def test_determinism(self):
        network, w = build_circular_network(8)
        hyper = Hyperparameters.symmetric(4, 10)
        params = _simple_params(network, hyper, mu=0.03, w=w)
        config = GeneratorConfig(seed=11, window=ObservationWindow(0, 600.0))
        a = generate_cascades(network, params, config)
        b = generate_cascades(network, params, config)
        assert a.events == b.events


class TestDocuments:
    def _chain_dataset(self, n_events=2000, seed=12):
        network, w = build_circular_network(10)
        hyper = Hyperparameters.symmetric(10, 30, alpha=0.1, beta=0.01)
        params = _simple_params(network, hyper, mu=0.05, w=w, seed=seed)
        window = ObservationWindow(0, max(3000.0, 2.4 * n_events))
        config = GeneratorConfig(seed=seed, window=window, max_events=n_events)
        return generate_cascades(network, params, config), params, hyper

    def test_identity_transition_keeps_cascades_single_topic(self):
        dataset, params, hyper = self._chain_dataset()
        params = sample_model_parameters(
            params.network, hyper, 13, mu=dict(params.mu),
            w={k: params.w[k] for k in params.grouping.group_keys},
            grouping_mode="edge", zeta=params.zeta, phi=params.phi,
            trans=np.eye(hyper.n_topics))
        docs = generate_documents(dataset, params, hyper, seed=14)
        topic = {e.id: e.topic for e in docs.events}
        for e in docs.events:
            if isinstance(e.parent, int):
                assert topic[e.id] == topic[e.parent]

    def test_single_topic_model(self):
        network = Network.from_edges([(0, 0)])
        hyper = Hyperparameters.symmetric(1, 10)
        params = sample_model_parameters(network, hyper, 15, mu=0.5)
        config = GeneratorConfig(seed=16, window=ObservationWindow(0, 200.0))
        dataset = generate_cascades(network, params, config)
        docs = generate_documents(dataset, params, hyper, seed=17)
        assert all(e.topic == 0 for e in docs.events)

    def test_document_length_moments(self):
        dataset, params, hyper = self._chain_dataset(n_events=10_000, seed=18)
        docs = generate_documents(dataset, params, hyper, seed=19)
        lengths = np.array([len(e.tokens) for e in docs.events])
        assert len(lengths) >= 10_000 * 0.9
        # Poisson(7) with a single zero-resample and floor at one: the mean
        # shifts by under p0*(1+7p0) ~ 0.001, well inside the 3 sigma band.
        sigma_of_mean = math.sqrt(7.0 / len(lengths))
        assert abs(lengths.mean() - 7.0) < 3 * sigma_of_mean + 0.002
        assert lengths.min() >= 1

    def test_topic_chain_frequencies_follow_transition_rows(self):
        # High branching (row sum 0.8) so that well over 1e5 of the events
        # are diffusion pairs; conditioned on the parent topic, child topics
        # must follow the matching transition row.
        network = Network.from_edges(
            [(i, i) for i in range(10)] + [(i, (i + 1) % 10) for i in range(10)])
        w = {(i, i): 0.55 for i in range(10)}
        w.update({(i, (i + 1) % 10): 0.25 for i in range(10)})
        hyper = Hyperparameters.symmetric(3, 10, beta=1.0)
        rng = np.random.default_rng(20)
        trans = rng.dirichlet(np.full(3, 2.0), size=3)
        params = sample_model_parameters(network, hyper, 21, mu=0.01, w=w,
                                         grouping_mode="edge", trans=trans)
        config = GeneratorConfig(seed=22, window=ObservationWindow(0, 260_000.0))
        dataset = generate_cascades(network, params, config)
        docs = generate_documents(dataset, params, hyper, seed=23)
        topic = {e.id: e.topic for e in docs.events}
        counts = np.zeros((3, 3))
        for e in docs.events:
            if isinstance(e.parent, int):
                counts[topic[e.parent], topic[e.id]] += 1
        assert counts.sum() >= 100_000
        rows = counts / counts.sum(axis=1, keepdims=True)
        l1 = np.abs(rows - trans).sum(axis=1).max()
        assert l1 < 0.05


class TestCircularNetwork:
    def test_shape(self):
        network, w = build_circular_network(10)
        assert len(network.edges) == 20
        assert all(network.out_degree(v) == 2 and network.in_degree(v) == 2
                   for v in network.sorted_nodes)
        assert {w[(i, i)] for i in range(10)} == {0.3}
        assert {w[(i, (i + 1) % 10)] for i in range(10)} == {0.15}

    def test_too_small(self):
        with pytest.raises(ValueError):
            build_circular_network(1)


class TestSampleModelParameters:
    def test_rows_are_stochastic(self):
        network, _ = build_circular_network(5)
        hyper = Hyperparameters.symmetric(4, 30, alpha=0.1, beta=0.01)
        params = sample_model_parameters(network, hyper, 24)
        for mat in (params.zeta, params.phi, params.trans):
            np.testing.assert_allclose(mat.sum(axis=1), 1.0, atol=1e-9)

    def test_large_concentration_near_uniform(self):
        network, _ = build_circular_network(5)
        hyper = Hyperparameters.symmetric(4, 10, beta=1e6)
        params = sample_model_parameters(network, hyper, 25)
        assert np.max(np.abs(params.trans - 0.25)) < 1e-2

    def test_seed_determinism(self):
        network, _ = build_circular_network(5)
        hyper = Hyperparameters.symmetric(4, 10)
        a = sample_model_parameters(network, hyper, 26)
        b = sample_model_parameters(network, hyper, 26)
        assert np.array_equal(a.zeta, b.zeta)
        assert np.array_equal(a.trans, b.trans)
        assert np.array_equal(a.phi, b.phi)


class TestHeuristicParents:
    def _dataset(self):
        network = Network.from_edges([(0, 1), (1, 1)])
        window = ObservationWindow(0.0, 100.0)
        events = [
            Event(id=0, time=1.0, node=0),
            Event(id=1, time=2.0, node=0),
            Event(id=2, time=3.0, node=1),
            Event(id=3, time=60.0, node=1),
        ]
        return Dataset.from_events(network, window, events)

    def test_picks_closest_in_time(self):
        labeled = heuristic_parent_assignment(self._dataset(), parent_window=24.0)
        assert labeled.event(2).parent == 1

    def test_no_prior_activity_means_spontaneous(self):
        labeled = heuristic_parent_assignment(self._dataset(), parent_window=24.0)
        assert labeled.event(0).parent is SPONTANEOUS

    def test_window_cutoff(self):
        # The only followee activity for event 3 is 57+ hours old.
        labeled = heuristic_parent_assignment(self._dataset(), parent_window=24.0)
        assert labeled.event(3).parent is SPONTANEOUS


class TestSemiSynthEstimates:
    def test_transition_counts_dominate(self):
        network = Network.from_edges([(0, 1), (1, 0), (0, 0), (1, 1)])
        window = ObservationWindow(0.0, 50.0)
        events = [Event(id=0, time=1.0, node=0, tokens=(0,), topic=0, parent=SPONTANEOUS)]
        for i in range(1, 9):
            events.append(Event(id=i, time=1.0 + i, node=i % 2, tokens=(1,),
                                topic=(0 if i % 2 == 0 else 1), parent=i - 1))
        dataset = Dataset.from_events(network, window, events)
        hyper = Hyperparameters.symmetric(2, 3)
        params = estimate_semisynth_parameters(dataset, hyper)
        assert params.trans[0].argmax() == 1
        assert params.trans[1].argmax() == 0

    def test_no_spontaneous_events_zero_rate(self):
        network = Network.from_edges([(0, 1), (1, 0)])
        window = ObservationWindow(0.0, 10.0)
        events = [
            Event(id=0, time=1.0, node=0, tokens=(0,), topic=0, parent=SPONTANEOUS),
            Event(id=1, time=2.0, node=1, tokens=(0,), topic=0, parent=0),
        ]
        dataset = Dataset.from_events(network, window, events)
        params = estimate_semisynth_parameters(dataset, Hyperparameters.symmetric(2, 3))
        assert params.mu[1] == 0.0
        assert params.mu[0] == pytest.approx(0.1)

    def test_pooled_posterior_mean_strength(self):
        # One group carrying 5 influence pairs against 10 source events with
        # shape 2 and scale 1: the Gamma posterior mean is (2+5)/(1+10).
        network = Network.from_edges([(0, 1)])
        window = ObservationWindow(0.0, 5.0)
        events = [Event(id=0, time=0.2, node=0, tokens=(0,), topic=0, parent=SPONTANEOUS)]
        next_id = 1
        for i in range(9):
            events.append(Event(id=next_id, time=0.3 + 0.1 * i, node=0, tokens=(0,),
                                topic=0, parent=SPONTANEOUS))
            next_id += 1
        for i in range(5):
            events.append(Event(id=next_id, time=1.5 + 0.1 * i, node=1, tokens=(0,),
                                topic=0, parent=i))
            next_id += 1
        dataset = Dataset.from_events(network, window, events)
        hyper = Hyperparameters.symmetric(2, 3, w_prior_shape=2.0, w_prior_scale=1.0)
        params = estimate_semisynth_parameters(dataset, hyper)
        (key,) = params.grouping.group_keys
        assert params.w[key] == pytest.approx(7.0 / 11.0)

    def test_missing_labels_raise(self):
        network = Network.from_edges([(0, 0)])
        dataset = Dataset.from_events(network, ObservationWindow(0, 10.0),
                                      [Event(id=0, time=1.0, node=0)])
        with pytest.raises(ValueError):
            estimate_semisynth_parameters(dataset, Hyperparameters.symmetric(2, 3))


class TestSemiSynthPipeline:
    def test_refit_from_unlabeled_data(self):
        from hmhp import SemiSynthRecipe, fit_semisynth_model

        network, w = build_circular_network(8)
        hyper = Hyperparameters.symmetric(4, 40, alpha=0.1, beta=0.01)
        params = _simple_params(network, hyper, mu=0.05, w=w, seed=70)
        config = GeneratorConfig(seed=71, window=ObservationWindow(0, 500.0))
        labeled = generate_documents(generate_cascades(network, params, config),
                                     params, hyper, seed=72)
        unlabeled = labeled.replace_events(
            Event(id=e.id, time=e.time, node=e.node, tokens=e.tokens)
            for e in labeled.events)

        recipe = SemiSynthRecipe(source=unlabeled, n_topics=4,
                                 doc_length_rate=7.0, parent_window=24.0)
        fitted = fit_semisynth_model(recipe, seed=73, iterations=30)
        for mat in (fitted.zeta, fitted.phi, fitted.trans):
            np.testing.assert_allclose(mat.sum(axis=1), 1.0, atol=1e-9)
        assert all(rate >= 0 for rate in fitted.mu.values())
        assert fitted.grouping.mode == "degree"
        # The refit model must be generate-ready.
        regen = generate_cascades(network, fitted,
                                  GeneratorConfig(seed=74, window=ObservationWindow(0, 200.0)))
        assert validate_dataset(regen) == []
