"""Command line pipelines: generate, infer, eval, loglik, analyze, benchmark.

Every subcommand accepts --config pointing at a flat key=value JSON file
whose keys mirror the flag names (explicit flags win), and every run that
writes artifacts also writes resolved-config.json capturing the effective
configuration and seed. Diagnostics go to stderr (level from HMHP_LOG or
--log-level); stdout is reserved for machine-readable results. Exit codes:
0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import io as hio
from .core import (
    SPONTANEOUS,
    Dataset,
    EdgeGrouping,
    Hyperparameters,
    ModelParameters,
    Network,
    ObservationWindow,
    validate_dataset,
)
from .evaluation import children_counts, evaluate, resolve_edge_strengths
from .generator import (
    GeneratorConfig,
    build_circular_network,
    generate_cascades,
    generate_documents,
    sample_model_parameters,
)
from .likelihood import FrozenTrainResult, heldout_log_likelihood
from .sampler import Mode, SamplerConfig, gibbs_sweep, initialize_state, run_gibbs
from .topic_analysis import (
    TopicGraph,
    asymmetric_pairs,
    gini_coefficient,
    hits_scores,
    personalized_pagerank,
    top_words_per_topic,
)

log = logging.getLogger("hmhp.cli")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="hmhp", description=__doc__)
    parser.add_argument("--log-level", default=None,
                        help="overrides the HMHP_LOG environment variable")
    sub = parser.add_subparsers(dest="command")

    common = dict(add_help=True)

    g = sub.add_parser("generate", help="simulate cascades and documents", **common)
    g.add_argument("--config", default=None)
    g.add_argument("--graph", default=None, help="edge list file (u<TAB>v)")
    g.add_argument("--circular", type=int, default=None, help="use the n-node cycle benchmark graph")
    g.add_argument("--params", default=None, help="params.json to generate from")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--window", type=float, default=None, help="observation horizon in hours")
    g.add_argument("--max-events", type=int, default=None)
    g.add_argument("--topics", type=int, default=None)
    g.add_argument("--vocab-size", type=int, default=None)
    g.add_argument("--alpha", type=float, default=None, help="topic-word concentration")
    g.add_argument("--beta", type=float, default=None, help="topic-transition concentration")
    g.add_argument("--gamma", type=float, default=None, help="user-preference concentration")
    g.add_argument("--doc-length", type=float, default=None)
    g.add_argument("--mu", type=float, default=None, help="base rate per node (events/hour)")
    g.add_argument("--phi-identity", action="store_true", default=None,
                   help="pin node i's preference to topic i (needs nodes == topics)")
    g.add_argument("--out", default=None, required=False)

    i = sub.add_parser("infer", help="collapsed Gibbs inference", **common)
    i.add_argument("--config", default=None)
    i.add_argument("--events", default=None)
    i.add_argument("--graph", default=None)
    i.add_argument("--mode", choices=["full", "diag", "decoupled"], default=None)
    i.add_argument("--topics", type=int, default=None)
    i.add_argument("--iters", type=int, default=None)
    i.add_argument("--burn-in", type=int, default=None)
    i.add_argument("--seed", type=int, default=None)
    i.add_argument("--window-hours", type=float, default=None, help="candidate parent window")
    i.add_argument("--max-candidates", type=int, default=None)
    i.add_argument("--vocab-size", type=int, default=None,
                   help="defaults to 1 + the largest token id in the events")
    i.add_argument("--alpha", type=float, default=None)
    i.add_argument("--beta", type=float, default=None)
    i.add_argument("--gamma", type=float, default=None)
    i.add_argument("--w-prior-shape", type=float, default=None)
    i.add_argument("--w-prior-scale", type=float, default=None)
    i.add_argument("--edge-grouping", choices=["degree", "edge"], default=None)
    i.add_argument("--fixed-mu", default=None, help="JSON file {node: events/hour}")
    i.add_argument("--out", default=None)

    e = sub.add_parser("eval", help="reconstruction metrics against gold labels", **common)
    e.add_argument("--config", default=None)
    e.add_argument("--gold", default=None, help="gold events.jsonl")
    e.add_argument("--gold-params", default=None, help="gold params.json (enables strength errors)")
    e.add_argument("--graph", default=None)
    e.add_argument("--pred", default=None, help="directory with assignments.jsonl (+ params.json)")
    e.add_argument("--ks", default=None, help="comma list, e.g. 1,3,5,7")
    e.add_argument("--active-threshold", type=int, default=None)
    e.add_argument("--pairs", type=int, default=None)
    e.add_argument("--seed", type=int, default=None)
    e.add_argument("--out", default=None)

    l = sub.add_parser("loglik", help="held-out log likelihood from a training run", **common)
    l.add_argument("--config", default=None)
    l.add_argument("--train-out", default=None, help="output directory of an infer run")
    l.add_argument("--heldout", default=None, help="held-out events.jsonl")
    l.add_argument("--graph", default=None)
    l.add_argument("--out", default=None)

    a = sub.add_parser("analyze", help="topic-interaction analytics", **common)
    a.add_argument("--config", default=None)
    a.add_argument("--params", default=None)
    a.add_argument("--graph", default=None)
    a.add_argument("--vocab", default=None, help="JSON {token: index} for readable words")
    a.add_argument("--threshold", type=float, default=None)
    a.add_argument("--restart", type=float, default=None)
    a.add_argument("--exclude", default=None, help="comma list of topic ids to drop")
    a.add_argument("--top-n", type=int, default=None)
    a.add_argument("--top-words", type=int, default=None)
    a.add_argument("--out", default=None)

    b = sub.add_parser("benchmark", help="per-sweep phase timings on synthetic data", **common)
    b.add_argument("--config", default=None)
    b.add_argument("--events", default=None, help="comma list of event counts")
    b.add_argument("--topics", default=None, help="comma list of topic counts")
    b.add_argument("--sweeps", type=int, default=None)
    b.add_argument("--nodes", type=int, default=None)
    b.add_argument("--vocab-size", type=int, default=None)
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--out", default=None)
    return parser


_DEFAULTS = {
    "generate": {"seed": 0, "window": 1000.0, "max_events": None, "topics": 10,
                 "vocab_size": 100, "alpha": 0.1, "beta": 0.01, "gamma": 0.1,
                 "doc_length": 7.0, "mu": 0.02, "phi_identity": False,
                 "graph": None, "circular": None, "params": None, "out": None},
    "infer": {"seed": 0, "mode": "full", "topics": 10, "iters": 100, "burn_in": 0,
              "window_hours": 24.0, "max_candidates": 100, "vocab_size": None,
              "alpha": 0.01, "beta": 0.01, "gamma": 0.1, "w_prior_shape": 2.0,
              "w_prior_scale": 0.5, "edge_grouping": "degree", "fixed_mu": None,
              "events": None, "graph": None, "out": None},
    "eval": {"ks": "1,3,5,7", "active_threshold": 100, "pairs": 10000, "seed": 0,
             "gold": None, "gold_params": None, "graph": None, "pred": None, "out": None},
    "loglik": {"train_out": None, "heldout": None, "graph": None, "out": None},
    "analyze": {"threshold": 0.1, "restart": 0.15, "exclude": "", "top_n": 3,
                "top_words": 5, "params": None, "graph": None, "vocab": None, "out": None},
    "benchmark": {"events": "100000", "topics": "25,50,100", "sweeps": 2, "nodes": 200,
                  "vocab_size": 1000, "seed": 0, "out": None},
}


def _resolve(command: str, args: argparse.Namespace) -> dict:
    resolved = dict(_DEFAULTS[command])
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            with open(config_path, "r", encoding="utf-8") as fh:
                file_conf = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"{config_path}: {exc}") from exc
        for key, value in file_conf.items():
            key = key.replace("-", "_")
            if key in ("schema_version", "command"):
                continue
            if key not in resolved:
                raise UsageError(f"unknown config key {key!r} for {command}")
            resolved[key] = value
    for key in resolved:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    resolved["command"] = command
    return resolved


def _require(resolved: dict, *keys: str) -> None:
    for key in keys:
        if resolved.get(key) is None:
            raise UsageError(f"--{key.replace('_', '-')} is required")


def _out_dir(resolved: dict) -> Path:
    out = Path(resolved["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_resolved(resolved: dict, out: Path) -> None:
    hio.write_resolved_config(resolved, out / "resolved-config.json")


def _load_network(resolved: dict) -> Network:
    if resolved.get("circular"):
        network, _ = build_circular_network(int(resolved["circular"]))
        return network
    _require(resolved, "graph")
    return hio.read_graph(resolved["graph"])


def _int_list(text: str) -> list:
    return [int(x) for x in str(text).split(",") if str(x).strip() != ""]


# -- generate -----------------------------------------------------------------

def _cmd_generate(resolved: dict) -> int:
    _require(resolved, "out")
    out = _out_dir(resolved)
    seed = int(resolved["seed"])
    K = int(resolved["topics"])
    vocab = int(resolved["vocab_size"])
    hyper = Hyperparameters.symmetric(K, vocab, alpha=float(resolved["alpha"]),
                                      beta=float(resolved["beta"]), gamma=float(resolved["gamma"]),
                                      doc_length_rate=float(resolved["doc_length"]))
    if resolved.get("circular"):
        network, w = build_circular_network(int(resolved["circular"]))
    else:
        network = _load_network(resolved)
        w = None

    if resolved.get("params"):
        params = hio.read_params_json(resolved["params"], network)
    else:
        phi = None
        if resolved["phi_identity"]:
            if network.n_nodes != K:
                raise UsageError("--phi-identity needs as many topics as nodes")
            phi = np.eye(K)
        params = sample_model_parameters(network, hyper, seed, mu=float(resolved["mu"]),
                                         w=w, grouping_mode="edge", phi=phi)

    window = ObservationWindow(0.0, float(resolved["window"]))
    config = GeneratorConfig(seed=seed, window=window,
                             max_events=(int(resolved["max_events"])
                                         if resolved["max_events"] else None))
    report: dict = {}
    skeleton = generate_cascades(network, params, config, report_out=report)
    dataset = generate_documents(skeleton, params, hyper, seed=seed + 1)

    hio.write_events_jsonl(dataset, out / "events.jsonl")
    hio.write_params_json(params, out / "params.json")
    report["schema_version"] = hio.SCHEMA_VERSION
    with open(out / "generation-report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")
    _write_resolved(resolved, out)
    log.info("generated %d events into %s", dataset.n_events, out)
    print(json.dumps({"events": dataset.n_events, "levels": report["level_counts"]},
                     sort_keys=True))
    return 0


# -- infer --------------------------------------------------------------------

def _sampler_config(resolved: dict, dataset: Dataset) -> SamplerConfig:
    vocab = resolved.get("vocab_size")
    if vocab is None:
        max_token = max((max(e.tokens) for e in dataset.events if e.tokens), default=-1)
        vocab = max_token + 1
        if vocab < 1:
            raise DataError("events carry no tokens; pass --vocab-size explicitly")
    hyper = Hyperparameters.symmetric(
        int(resolved["topics"]), int(vocab), alpha=float(resolved["alpha"]),
        beta=float(resolved["beta"]), gamma=float(resolved["gamma"]),
        w_prior_shape=float(resolved["w_prior_shape"]),
        w_prior_scale=float(resolved["w_prior_scale"]))
    fixed_mu = None
    if resolved.get("fixed_mu"):
        with open(resolved["fixed_mu"], "r", encoding="utf-8") as fh:
            fixed_mu = {int(k): float(v) for k, v in json.load(fh).items()}
    return SamplerConfig(n_topics=int(resolved["topics"]), hyper=hyper,
                         iterations=int(resolved["iters"]), burn_in=int(resolved["burn_in"]),
                         mode=Mode(resolved["mode"]),
                         candidate_window=float(resolved["window_hours"]),
                         max_candidates=int(resolved["max_candidates"]),
                         seed=int(resolved["seed"]), fixed_mu=fixed_mu,
                         edge_grouping=resolved["edge_grouping"])


def _write_infer_outputs(result, dataset: Dataset, out: Path) -> None:
    hio.write_assignments_jsonl(result.assignment_rows(), out / "assignments.jsonl")

    grouping = result.grouping
    counts = result.state.counts
    rows = []
    for idx, key in enumerate(grouping.group_keys):
        head = list(key)
        rows.append(head + [int(counts.group_pairs[idx]), int(counts.group_source[idx]),
                            float(result.state.w[idx])])
    head_cols = (["u", "v"] if grouping.mode == "edge" else ["out_deg", "in_deg"])
    hio.write_csv(out / "w_groups.csv", "hmhp.w_groups",
                  head_cols + ["N_pairs", "N_source", "w_hat"], rows)

    estimates = ModelParameters(mu=result.mu, w=result.w, grouping=grouping,
                                zeta=result.zeta, phi=result.phi, trans=result.trans)
    hio.write_params_json(estimates, out / "params.json")
    hio.write_csv(out / "trace.csv", "hmhp.trace", ["iter", "joint_ll", "seconds"],
                  [(it, float(ll), float(secs)) for (it, ll, secs) in result.trace])
    window = dataset.window
    with open(out / "train-window.json", "w", encoding="utf-8") as fh:
        json.dump({"schema_version": hio.SCHEMA_VERSION, "start": window.start,
                   "horizon": window.horizon, "duration": window.duration},
                  fh, sort_keys=True)
        fh.write("\n")


def _cmd_infer(resolved: dict) -> int:
    _require(resolved, "events", "out")
    out = _out_dir(resolved)
    network = _load_network(resolved)
    dataset = hio.read_dataset(resolved["events"], network)
    bad = [v for v in validate_dataset(dataset)
           if v.rule in ("unknown-node", "parent-unknown")]
    if bad:
        raise DataError(f"{resolved['events']}: {bad[0].rule} for event {bad[0].event_id}")
    config = _sampler_config(resolved, dataset)
    result = run_gibbs(dataset, config)
    _write_infer_outputs(result, dataset, out)
    _write_resolved(resolved, out)
    summary = {"events": dataset.n_events, "iterations": config.iterations,
               "final_joint_ll": (result.trace[-1][1] if result.trace else None)}
    print(json.dumps(summary, sort_keys=True))
    return 0


# -- eval ---------------------------------------------------------------------

def _cmd_eval(resolved: dict) -> int:
    _require(resolved, "gold", "pred")
    network = _load_network(resolved)
    gold = hio.read_dataset(resolved["gold"], network)
    pred_dir = Path(resolved["pred"])
    assignments = hio.read_assignments_jsonl(pred_dir / "assignments.jsonl")

    rankings = {}
    topics = {}
    for eid, row in assignments.items():
        topics[eid] = row["topic"]
        rankings[eid] = row["parent_ranking"] or [row["parent"]]

    gold_w = est_w = None
    if resolved.get("gold_params"):
        gold_params = hio.read_params_json(resolved["gold_params"], network)
        gold_w = resolve_edge_strengths(gold_params.w, gold_params.grouping)
        est_path = pred_dir / "params.json"
        if est_path.exists():
            est_params = hio.read_params_json(est_path, network)
            est_w = resolve_edge_strengths(est_params.w, est_params.grouping)

    report = evaluate(gold, rankings, topics, ks=_int_list(resolved["ks"]),
                      gold_w=gold_w, est_w=est_w,
                      active_threshold=int(resolved["active_threshold"]),
                      n_pairs=int(resolved["pairs"]), seed=int(resolved["seed"]))
    row = report.flat_row()
    out = Path(resolved["out"]) if resolved.get("out") else pred_dir
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump({"schema_version": hio.SCHEMA_VERSION, **row}, fh, sort_keys=True, indent=2)
        fh.write("\n")
    keys = sorted(row)
    hio.write_csv(out / "report.csv", "hmhp.eval", keys, [[row[k] for k in keys]])
    _write_resolved(resolved, out)
    print(",".join(keys))
    print(",".join(hio.fmt_float(row[k]) for k in keys))
    return 0


# -- loglik -------------------------------------------------------------------

def _load_train_result(train_dir: Path, network: Network) -> FrozenTrainResult:
    with open(train_dir / "resolved-config.json", "r", encoding="utf-8") as fh:
        train_conf = json.load(fh)
    params = hio.read_params_json(train_dir / "params.json", network)
    vocab = params.vocab_size
    hyper = Hyperparameters.symmetric(
        params.n_topics, vocab, alpha=float(train_conf["alpha"]),
        beta=float(train_conf["beta"]), gamma=float(train_conf["gamma"]),
        w_prior_shape=float(train_conf["w_prior_shape"]),
        w_prior_scale=float(train_conf["w_prior_scale"]))
    config = SamplerConfig(n_topics=params.n_topics, hyper=hyper, iterations=1,
                           mode=Mode(train_conf["mode"]),
                           candidate_window=float(train_conf["window_hours"]),
                           max_candidates=int(train_conf["max_candidates"]),
                           seed=int(train_conf["seed"]),
                           edge_grouping=train_conf["edge_grouping"])
    with open(train_dir / "train-window.json", "r", encoding="utf-8") as fh:
        duration = float(json.load(fh)["duration"])
    return FrozenTrainResult(config=config, w=dict(params.w), mu=dict(params.mu),
                             zeta=params.zeta, phi=params.phi, trans=params.trans,
                             train_window_duration=duration)


def _cmd_loglik(resolved: dict) -> int:
    _require(resolved, "train_out", "heldout")
    network = _load_network(resolved)
    train = _load_train_result(Path(resolved["train_out"]), network)
    heldout = hio.read_dataset(resolved["heldout"], network)
    report = heldout_log_likelihood(train, heldout)
    if resolved.get("out"):
        out = _out_dir(resolved)
        _write_resolved(resolved, out)
    print(f"{hio.fmt_float(report.content_ll)},{hio.fmt_float(report.time_ll)},"
          f"{hio.fmt_float(report.total_ll)}")
    return 0


# -- analyze ------------------------------------------------------------------

def _cmd_analyze(resolved: dict) -> int:
    _require(resolved, "params", "out")
    network = _load_network(resolved)
    params = hio.read_params_json(resolved["params"], network)
    out = _out_dir(resolved)

    vocabulary = None
    if resolved.get("vocab"):
        with open(resolved["vocab"], "r", encoding="utf-8") as fh:
            token_to_index = json.load(fh)
        vocabulary = {int(i): tok for tok, i in token_to_index.items()}

    top_n = int(resolved["top_n"])
    pairs = asymmetric_pairs(params.trans, top_n=max(top_n, 10))
    hio.write_csv(out / "asymmetric.csv", "hmhp.asymmetric",
                  ["parent_topic", "child_topic", "score"],
                  [(k, kk, float(s)) for (k, kk, s) in pairs])

    graph = TopicGraph.from_transition(params.trans, threshold=float(resolved["threshold"]))
    hub, auth = hits_scores(graph)
    hio.write_csv(out / "hits.csv", "hmhp.hits", ["topic", "hub", "authority"],
                  [(k, float(hub[k]), float(auth[k])) for k in range(params.n_topics)])
    log.info("hub gini %.3f authority gini %.3f", gini_coefficient(hub), gini_coefficient(auth))

    excluded = set(_int_list(resolved["exclude"])) if resolved.get("exclude") else set()
    for start in range(params.n_topics):
        if start in excluded:
            continue
        ranked = personalized_pagerank(params.trans, start, restart=float(resolved["restart"]),
                                       excluded=excluded, top_n=top_n)
        hio.write_csv(out / f"ppr_{start}.csv", "hmhp.ppr", ["topic", "score"],
                      [(k, float(s)) for (k, s) in ranked])

    words = top_words_per_topic(params.zeta, int(resolved["top_words"]), vocabulary)
    with open(out / "topic_words.txt", "w", encoding="utf-8") as fh:
        for k, items in enumerate(words):
            fh.write(f"{k}\t" + " ".join(str(x) for x in items) + "\n")
    _write_resolved(resolved, out)
    print(json.dumps({"topics": params.n_topics,
                      "hub_gini": gini_coefficient(hub),
                      "authority_gini": gini_coefficient(auth)}, sort_keys=True))
    return 0


# -- benchmark ----------------------------------------------------------------

def _benchmark_dataset(n_events: int, n_nodes: int, vocab_size: int, seed: int) -> Dataset:
    rng = np.random.default_rng(seed)
    edges = set()
    for u in range(n_nodes):
        edges.add((u, u))
        for v in rng.choice(n_nodes, size=4, replace=False):
            if int(v) != u:
                edges.add((u, int(v)))
    network = Network.from_edges(sorted(edges))
    hyper = Hyperparameters.symmetric(10, vocab_size, alpha=0.05)
    w = {key: 0.5 / max(network.out_degree(key[0]), 1) for key in
         EdgeGrouping(network, mode="edge").group_keys}
    # Aim the base rates so the horizon produces roughly n_events in total.
    branching = 0.5
    window_hours = 2000.0
    mu = n_events * (1 - branching) / (n_nodes * window_hours)
    params = sample_model_parameters(network, hyper, seed, mu=mu, w=w, grouping_mode="edge")
    config = GeneratorConfig(seed=seed, window=ObservationWindow(0.0, window_hours),
                             max_events=n_events)
    skeleton = generate_cascades(network, params, config)
    return generate_documents(skeleton, params, hyper, seed=seed + 1)


def benchmark(dataset_sizes, topic_counts, sweeps: int = 2, n_nodes: int = 200,
              vocab_size: int = 1000, seed: int = 0) -> list:
    """Sweep-phase timing table over dataset sizes and topic counts; one row
    per combination with mean seconds for the topic, parent and strength
    phases."""
    rows = []
    for n_events in dataset_sizes:
        dataset = _benchmark_dataset(int(n_events), n_nodes, vocab_size, seed)
        for K in topic_counts:
            hyper = Hyperparameters.symmetric(int(K), vocab_size)
            config = SamplerConfig(n_topics=int(K), hyper=hyper, iterations=sweeps,
                                   seed=seed, edge_grouping="degree")
            state = initialize_state(dataset, config)
            phases = {"topic": 0.0, "parent": 0.0, "strengths": 0.0, "total": 0.0}
            for _ in range(sweeps):
                gibbs_sweep(state)
                for key in phases:
                    phases[key] += state.last_sweep_timings[key]
            rows.append({"events": dataset.n_events, "topics": int(K),
                         "topic_seconds": phases["topic"] / sweeps,
                         "parent_seconds": phases["parent"] / sweeps,
                         "strengths_seconds": phases["strengths"] / sweeps,
                         "total_seconds": phases["total"] / sweeps})
            log.info("benchmark events=%d topics=%d total=%.3fs/sweep",
                     dataset.n_events, K, rows[-1]["total_seconds"])
    return rows


def _cmd_benchmark(resolved: dict) -> int:
    rows = benchmark(_int_list(resolved["events"]), _int_list(resolved["topics"]),
                     sweeps=int(resolved["sweeps"]), n_nodes=int(resolved["nodes"]),
                     vocab_size=int(resolved["vocab_size"]), seed=int(resolved["seed"]))
    cols = ["events", "topics", "topic_seconds", "parent_seconds",
            "strengths_seconds", "total_seconds"]
    print(",".join(cols))
    for row in rows:
        print(",".join(hio.fmt_float(row[c]) if isinstance(row[c], float) else str(row[c])
                       for c in cols))
    if resolved.get("out"):
        out = _out_dir(resolved)
        hio.write_csv(out / "benchmark.csv", "hmhp.benchmark", cols,
                      [[row[c] for c in cols] for row in rows])
        _write_resolved(resolved, out)
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "infer": _cmd_infer,
    "eval": _cmd_eval,
    "loglik": _cmd_loglik,
    "analyze": _cmd_analyze,
    "benchmark": _cmd_benchmark,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        level = args.log_level or os.environ.get("HMHP_LOG", "WARNING")
        logging.basicConfig(stream=sys.stderr, level=getattr(logging, str(level).upper(), 30),
                            format="%(levelname)s %(name)s: %(message)s")
        if not args.command:
            raise UsageError("a subcommand is required (see --help)")
        resolved = _resolve(args.command, args)
        return _COMMANDS[args.command](resolved)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError, DataError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
