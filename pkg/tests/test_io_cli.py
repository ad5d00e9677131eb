from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np
import pytest

from hmhp import (
    SPONTANEOUS,
    Dataset,
    Event,
    Network,
    ObservationWindow,
    build_circular_network,
)
from hmhp import io as hio
from hmhp.cli import main


@pytest.fixture
def cycle_graph(tmp_path):
    network, _ = build_circular_network(10)
    path = tmp_path / "cycle.tsv"
    hio.write_graph(network, path)
    return path


class TestGraphIO:
    def test_round_trip(self, tmp_path):
        network = Network.from_edges([(0, 1), (1, 2), (2, 0), (2, 2)])
        path = tmp_path / "g.tsv"
        hio.write_graph(network, path)
        again = hio.read_graph(path)
        assert again.edges == network.edges

    def test_rejects_malformed_lines(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("0\t1\nnot an edge\n")
        with pytest.raises(ValueError, match="bad.tsv:2"):
            hio.read_graph(path)


class TestEventsIO:
    def test_round_trip_with_labels_and_window(self, tmp_path):
        network = Network.from_edges([(0, 1), (1, 1)])
        window = ObservationWindow(0.0, 10.0)
        events = [
            Event(id=0, time=1.0, node=0, tokens=(0, 2), topic=1, parent=SPONTANEOUS),
            Event(id=1, time=2.0, node=1, tokens=(1,), topic=0, parent=0),
            Event(id=2, time=3.0, node=1, tokens=()),
        ]
        dataset = Dataset.from_events(network, window, events)
        path = tmp_path / "events.jsonl"
        hio.write_events_jsonl(dataset, path)
        again = hio.read_dataset(path, network)
        assert again.window == window
        assert again.events == dataset.events

    def test_string_words_need_vocabulary(self, tmp_path):
        path = tmp_path / "events.jsonl"
        path.write_text('{"id": 0, "time": 1.0, "user": 0, "words": ["dog"]}\n')
        with pytest.raises(ValueError, match="vocabulary"):
            hio.read_events_jsonl(path)
        events, _ = hio.read_events_jsonl(path, vocabulary={"dog": 3})
        assert events[0].tokens == (3,)

    def test_unknown_schema_major_rejected(self, tmp_path):
        path = tmp_path / "events.jsonl"
        path.write_text('{"schema_version": "2.0", "type": "hmhp.events"}\n')
        with pytest.raises(ValueError, match="schema_version"):
            hio.read_events_jsonl(path)

    def test_null_parent_means_spontaneous_absent_means_unlabeled(self, tmp_path):
        path = tmp_path / "events.jsonl"
        path.write_text(
            '{"id": 0, "time": 1.0, "user": 0, "words": [], "parent": null}\n'
            '{"id": 1, "time": 2.0, "user": 0, "words": []}\n')
        events, _ = hio.read_events_jsonl(path)
        assert events[0].parent is SPONTANEOUS
        assert events[1].parent is None


class TestCliPipelines:
    def test_generate_infer_eval_loglik_analyze(self, tmp_path, cycle_graph):
        gen = tmp_path / "gen"
        assert main(["generate", "--circular", "10", "--window", "400", "--seed", "7",
                     "--phi-identity", "--out", str(gen)]) == 0
        assert (gen / "events.jsonl").exists()
        assert (gen / "params.json").exists()
        assert (gen / "generation-report.json").exists()
        assert (gen / "resolved-config.json").exists()

        inf = tmp_path / "inf"
        assert main(["infer", "--events", str(gen / "events.jsonl"),
                     "--graph", str(cycle_graph), "--mode", "full", "--topics", "10",
                     "--iters", "15", "--seed", "3", "--edge-grouping", "edge",
                     "--out", str(inf)]) == 0
        for name in ("assignments.jsonl", "w_groups.csv", "params.json", "trace.csv",
                     "resolved-config.json"):
            assert (inf / name).exists()

        ev = tmp_path / "ev"
        assert main(["eval", "--gold", str(gen / "events.jsonl"),
                     "--gold-params", str(gen / "params.json"),
                     "--graph", str(cycle_graph), "--pred", str(inf),
                     "--out", str(ev)]) == 0
        report = json.loads((ev / "report.json").read_text())
        for key in ("parent_accuracy", "recall_at_1", "recall_at_7", "tae", "topic_f1"):
            assert key in report
        assert report["recall_at_1"] == report["parent_accuracy"]

        assert main(["loglik", "--train-out", str(inf),
                     "--heldout", str(gen / "events.jsonl"),
                     "--graph", str(cycle_graph)]) == 0

        ana = tmp_path / "ana"
        assert main(["analyze", "--params", str(inf / "params.json"),
                     "--graph", str(cycle_graph), "--out", str(ana)]) == 0
        assert (ana / "asymmetric.csv").exists()
        assert (ana / "hits.csv").exists()
        assert (ana / "topic_words.txt").exists()
        assert (ana / "ppr_0.csv").exists()

    def test_fixed_mu_file_is_honored(self, tmp_path, cycle_graph):
        gen = tmp_path / "gen"
        assert main(["generate", "--circular", "10", "--window", "200", "--seed", "1",
                     "--out", str(gen)]) == 0
        mu_file = tmp_path / "mu.json"
        mu_file.write_text(json.dumps({str(v): 0.5 for v in range(10)}))
        inf = tmp_path / "inf"
        assert main(["infer", "--events", str(gen / "events.jsonl"),
                     "--graph", str(cycle_graph), "--topics", "4", "--iters", "3",
                     "--seed", "2", "--fixed-mu", str(mu_file),
                     "--out", str(inf)]) == 0
        params = json.loads((inf / "params.json").read_text())
        assert params["mu"] == [0.5] * 10

    def test_usage_error_exit_code(self):
        assert main(["infer"]) == 1
        assert main(["no-such-command"]) == 1

    def test_data_error_exit_code(self, tmp_path):
        assert main(["infer", "--events", str(tmp_path / "missing.jsonl"),
                     "--graph", str(tmp_path / "missing.tsv"),
                     "--out", str(tmp_path / "out")]) == 2

    def test_config_file_with_flag_override(self, tmp_path):
        conf = tmp_path / "conf.json"
        conf.write_text(json.dumps({"circular": 10, "window": 300.0, "seed": 5,
                                    "out": str(tmp_path / "a")}))
        assert main(["generate", "--config", str(conf)]) == 0
        assert main(["generate", "--config", str(conf), "--seed", "6",
                     "--out", str(tmp_path / "b")]) == 0
        resolved_a = json.loads((tmp_path / "a" / "resolved-config.json").read_text())
        resolved_b = json.loads((tmp_path / "b" / "resolved-config.json").read_text())
        assert resolved_a["seed"] == 5
        assert resolved_b["seed"] == 6
        with_unknown = tmp_path / "bad.json"
        with_unknown.write_text(json.dumps({"not_a_flag": 1}))
        assert main(["generate", "--config", str(with_unknown),
                     "--out", str(tmp_path / "c")]) == 1

    def test_benchmark_phases_sum_to_total(self, capsys):
        assert main(["benchmark", "--events", "400", "--topics", "4",
                     "--sweeps", "2", "--nodes", "20", "--vocab-size", "50"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        header = lines[0].split(",")
        row = dict(zip(header, lines[1].split(",")))
        parts = (float(row["topic_seconds"]) + float(row["parent_seconds"])
                 + float(row["strengths_seconds"]))
        assert parts == pytest.approx(float(row["total_seconds"]), rel=0.05)


class TestDeterminism:
    def _run_pipeline(self, root, cycle_graph):
        gen = root / "gen"
        inf = root / "inf"
        assert main(["generate", "--circular", "10", "--window", "300", "--seed", "11",
                     "--phi-identity", "--out", str(gen)]) == 0
        assert main(["infer", "--events", str(gen / "events.jsonl"),
                     "--graph", str(cycle_graph), "--topics", "10", "--iters", "10",
                     "--seed", "4", "--out", str(inf)]) == 0
        return gen, inf

    def test_reruns_are_byte_identical(self, tmp_path, cycle_graph):
        a_gen, a_inf = self._run_pipeline(tmp_path / "a", cycle_graph)
        b_gen, b_inf = self._run_pipeline(tmp_path / "b", cycle_graph)
        for name in ("events.jsonl", "params.json", "generation-report.json"):
            assert (a_gen / name).read_bytes() == (b_gen / name).read_bytes()
        for name in ("assignments.jsonl", "w_groups.csv", "params.json"):
            assert (a_inf / name).read_bytes() == (b_inf / name).read_bytes()
        # trace.csv carries wall-clock seconds; everything but that column
        # must match exactly.
        for a_line, b_line in zip((a_inf / "trace.csv").read_text().splitlines(),
                                  (b_inf / "trace.csv").read_text().splitlines()):
            assert a_line.rsplit(",", 1)[0] == b_line.rsplit(",", 1)[0]


class TestFloatFormat:
    def test_seventeen_digit_round_trip(self):
        for x in (0.1, 1 / 3, 1e-17, 123456.789, np.pi):
            assert float(hio.fmt_float(x)) == x
