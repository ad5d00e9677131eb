"""Readers and writers for the on-disk formats.

Graph files are tab-separated edge lists ("u<TAB>v" means v follows u).
Event files are JSON Lines; files written here start with a header record
carrying schema_version and the observation window. CSV artifacts carry the
schema in a leading comment line. Readers reject unknown schema majors.
"""

from __future__ import annotations

import json
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .core import (
    SPONTANEOUS,
    Dataset,
    EdgeGrouping,
    Event,
    ModelParameters,
    Network,
    ObservationWindow,
)

SCHEMA_VERSION = "1.0"


def _check_schema_version(version: str, where: str) -> None:
    major = str(version).split(".", 1)[0]
    if major != SCHEMA_VERSION.split(".", 1)[0]:
        raise ValueError(f"{where}: unsupported schema_version {version!r}")


def fmt_float(x: float) -> str:
    """17 significant digits, enough to round-trip any float64."""
    return format(float(x), ".17g")


def read_graph(path) -> Network:
    """Edge list, one "u<TAB>v" per line; blank lines and #-comments skipped."""
    edges = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'u<TAB>v', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-integer node id") from exc
            edges.append((u, v))
    return Network.from_edges(edges)


def write_graph(network: Network, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for (u, v) in sorted(network.edges):
            fh.write(f"{u}\t{v}\n")


def _event_to_record(event: Event, inv_vocab: Optional[Mapping] = None) -> dict:
    words: Sequence
    if inv_vocab is not None:
        words = [inv_vocab[w] for w in event.tokens]
    else:
        words = list(event.tokens)
    record = {"id": event.id, "time": event.time, "user": event.node, "words": words}
    if event.parent is not None:
        record["parent"] = None if event.parent is SPONTANEOUS else event.parent
    if event.topic is not None:
        record["topic"] = event.topic
    return record


def write_events_jsonl(dataset: Dataset, path) -> None:
    inv_vocab = None
    if dataset.vocabulary is not None:
        inv_vocab = {idx: tok for tok, idx in dataset.vocabulary.items()}
    header = {
        "schema_version": SCHEMA_VERSION,
        "type": "hmhp.events",
        "window": {"start": dataset.window.start, "horizon": dataset.window.horizon},
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for e in dataset.events:
            fh.write(json.dumps(_event_to_record(e, inv_vocab), sort_keys=True) + "\n")


def read_events_jsonl(path, vocabulary: Optional[Mapping] = None):
    """Returns (events, window-or-None). Records need id/time/user/words;
    optional parent (int, or null for spontaneous) and topic. String words
    require a vocabulary map."""
    events = []
    window = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON") from exc
            if "type" in record and record.get("type") == "hmhp.events":
                _check_schema_version(record.get("schema_version", "?"), f"{path}:{lineno}")
                w = record.get("window")
                if w is not None:
                    window = ObservationWindow(start=float(w["start"]), horizon=float(w["horizon"]))
                continue
            try:
                tokens = []
                for w in record["words"]:
                    if isinstance(w, str):
                        if vocabulary is None:
                            raise ValueError(f"{path}:{lineno}: string word {w!r} without a vocabulary map")
                        tokens.append(int(vocabulary[w]))
                    else:
                        tokens.append(int(w))
                parent = record.get("parent", "__absent__")
                if parent == "__absent__":
                    parent_ref = None
                elif parent is None:
                    parent_ref = SPONTANEOUS
                else:
                    parent_ref = int(parent)
                events.append(Event(id=int(record["id"]), time=float(record["time"]),
                                    node=int(record["user"]), tokens=tuple(tokens),
                                    topic=(int(record["topic"]) if "topic" in record else None),
                                    parent=parent_ref))
            except KeyError as exc:
                raise ValueError(f"{path}:{lineno}: missing field {exc}") from exc
    return events, window


def read_dataset(events_path, network: Network, window: Optional[ObservationWindow] = None,
                 vocabulary: Optional[Mapping] = None) -> Dataset:
    """Load events against a network; the window comes from the file header
    unless given explicitly, falling back to a snug hull of the data."""
    events, file_window = read_events_jsonl(events_path, vocabulary)
    if window is None:
        window = file_window
    if window is None:
        if not events:
            raise ValueError(f"{events_path}: no window header and no events to infer one from")
        t = [e.time for e in events]
        span = max(max(t) - min(t), 1.0)
        window = ObservationWindow(start=min(t), horizon=max(t) + 1e-6 * span)
    return Dataset.from_events(network, window, events, vocabulary)


def write_params_json(params: ModelParameters, path) -> None:
    network = params.network
    if params.grouping.mode == "edge":
        entries = [[u, v, params.w[(u, v)]] for (u, v) in sorted(network.edges)]
    else:
        entries = [[k.source_out_degree, k.dest_in_degree, params.w[k]]
                   for k in params.grouping.group_keys]
    payload = {
        "schema_version": SCHEMA_VERSION,
        "type": "hmhp.params",
        "nodes": list(network.sorted_nodes),
        "mu": [params.mu[v] for v in network.sorted_nodes],
        "w": {"grouping": params.grouping.mode, "entries": entries},
        "zeta": params.zeta.tolist(),
        "phi": params.phi.tolist(),
        "trans": params.trans.tolist(),
        "n_topics": params.n_topics,
        "vocab_size": params.vocab_size,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def read_params_json(path, network: Network) -> ModelParameters:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    _check_schema_version(payload.get("schema_version", "?"), str(path))
    grouping = EdgeGrouping(network, mode=payload["w"]["grouping"])
    if grouping.mode == "edge":
        w = {(int(u), int(v)): float(x) for (u, v, x) in payload["w"]["entries"]}
    else:
        from .core import EdgeGroupKey

        w = {EdgeGroupKey(int(a), int(b)): float(x) for (a, b, x) in payload["w"]["entries"]}
    mu = {v: float(r) for v, r in zip(payload["nodes"], payload["mu"])}
    return ModelParameters(mu=mu, w=w, grouping=grouping,
                           zeta=np.asarray(payload["zeta"], dtype=float),
                           phi=np.asarray(payload["phi"], dtype=float),
                           trans=np.asarray(payload["trans"], dtype=float))


def write_assignments_jsonl(rows: Iterable[dict], path) -> None:
    """Rows need id/topic/parent (None for spontaneous) and may carry
    parent_ranking, a best-first list of candidate parent ids."""
    header = {"schema_version": SCHEMA_VERSION, "type": "hmhp.assignments"}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def read_assignments_jsonl(path):
    """Returns {event id: {"topic", "parent", "parent_ranking"}} with
    SPONTANEOUS substituted for JSON nulls."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if record.get("type") == "hmhp.assignments":
                _check_schema_version(record.get("schema_version", "?"), f"{path}:{lineno}")
                continue
            parent = record["parent"]
            ranking = record.get("parent_ranking")
            out[int(record["id"])] = {
                "topic": int(record["topic"]),
                "parent": SPONTANEOUS if parent is None else int(parent),
                "parent_ranking": None if ranking is None else
                    [SPONTANEOUS if r is None else int(r) for r in ranking],
            }
    return out


def write_csv(path, name: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {name} schema_version={SCHEMA_VERSION}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = [fmt_float(c) if isinstance(c, float) else str(c) for c in row]
            fh.write(",".join(cells) + "\n")


def write_resolved_config(config: Mapping, path) -> None:
    payload = dict(config)
    payload.setdefault("schema_version", SCHEMA_VERSION)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")
