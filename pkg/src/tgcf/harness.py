"""Dataset ingestion, instance selection, and experiment orchestration.

Datasets arrive as Jodie-format event CSVs
(``user_id,item_id,timestamp,state_label,feat_1,...,feat_d``).  Experiments
are driven by a flat JSON config and write a manifest, per-instance JSONL
records, metric CSV/JSON reports, and fidelity-sparsity curve samples into a
run directory.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .evaluation import (InstanceRecord, aggregate, curves_to_csv, jaccard,
                         make_instance_record, reports_to_csv, reports_to_json)
from .graph import Event, TemporalGraph, candidate_events, temporal_view
from .greedy import GreedyConfig, greedy_explain
from .mcts import MctsConfig, mcts_explain
from .oracle import (OracleError, DegenerateInstanceError, PredictorSession,
                     ReferenceParams, ReferencePredictor, classify, make_session)
from .policies import POLICY_NAMES, Policy

__all__ = [
    "DatasetParseError",
    "DatasetDescriptor",
    "InstanceSpec",
    "Instance",
    "ExperimentConfig",
    "load_jodie_csv",
    "load_dataset",
    "save_jodie_csv",
    "select_instances",
    "run_experiment",
    "compare_runs",
]


class DatasetParseError(ValueError):
    """Malformed dataset file; the message carries the offending line number."""


@dataclass(frozen=True)
class DatasetDescriptor:
    """A dataset location plus optional validation counts and split fractions."""

    name: str
    path: str
    bipartite: bool = False
    expected_nodes: int | None = None
    expected_edges: int | None = None
    splits: tuple[float, float, float] = (0.70, 0.15, 0.15)

    def __post_init__(self) -> None:
        if abs(sum(self.splits) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {self.splits}")


def load_jodie_csv(path: str | Path, bipartite: bool = False,
                   max_time_disorder: float = 0.0) -> TemporalGraph:
    """Load a Jodie-format interaction CSV into a temporal graph.

    Nodes are re-indexed densely; for bipartite data destination ids are
    offset by the source-partition size.  Rows may run backward in time by
    at most ``max_time_disorder``; events end up sorted by (timestamp, line
    order) and the state label column is ignored.
    """
    path = Path(path)
    rows: list[tuple[int, int, float, tuple[float, ...]]] = []
    feature_len: int | None = None
    max_seen = -np.inf
    with path.open() as fh:
        header = fh.readline()
        if not header:
            raise DatasetParseError(f"{path}: empty file")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) < 4:
                raise DatasetParseError(f"{path}:{lineno}: expected at least 4 fields")
            try:
                user = int(float(parts[0]))
                item = int(float(parts[1]))
                ts = float(parts[2])
                feats = tuple(float(x) for x in parts[4:])
            except ValueError as exc:
                raise DatasetParseError(f"{path}:{lineno}: non-numeric field ({exc})") from None
            if feature_len is None:
                feature_len = len(feats)
            elif len(feats) != feature_len:
                raise DatasetParseError(
                    f"{path}:{lineno}: ragged feature row ({len(feats)} != {feature_len})")
            if ts < max_seen - max_time_disorder:
                raise DatasetParseError(
                    f"{path}:{lineno}: timestamp {ts} runs backward beyond tolerance")
            max_seen = max(max_seen, ts)
            rows.append((user, item, ts, feats))
    if not rows:
        raise DatasetParseError(f"{path}: no event rows")

    sources = sorted({r[0] for r in rows})
    src_map = {raw: i for i, raw in enumerate(sources)}
    if bipartite:
        destinations = sorted({r[1] for r in rows})
        dst_map = {raw: len(sources) + i for i, raw in enumerate(destinations)}
        node_count = len(sources) + len(destinations)
        num_sources = len(sources)
    else:
        nodes = sorted({r[0] for r in rows} | {r[1] for r in rows})
        src_map = dst_map = {raw: i for i, raw in enumerate(nodes)}
        node_count = len(nodes)
        num_sources = None

    indexed = sorted(range(len(rows)), key=lambda i: (rows[i][2], i))
    events = [
        Event(event_id=eid, src=src_map[rows[i][0]], dst=dst_map[rows[i][1]],
              timestamp=rows[i][2], features=rows[i][3])
        for eid, i in enumerate(indexed)
    ]
    return TemporalGraph(events, node_count=node_count, bipartite=bipartite,
                         num_sources=num_sources)


def load_dataset(descriptor: DatasetDescriptor) -> TemporalGraph:
    """Load a described dataset and validate it against expected counts."""
    graph = load_jodie_csv(descriptor.path, bipartite=descriptor.bipartite)
    if descriptor.expected_nodes is not None and \
            graph.node_count != descriptor.expected_nodes:
        raise DatasetParseError(
            f"{descriptor.name}: expected {descriptor.expected_nodes} nodes, "
            f"loaded {graph.node_count}")
    if descriptor.expected_edges is not None and \
            len(graph) != descriptor.expected_edges:
        raise DatasetParseError(
            f"{descriptor.name}: expected {descriptor.expected_edges} events, "
            f"loaded {len(graph)}")
    return graph


def save_jodie_csv(graph: TemporalGraph, path: str | Path) -> None:
    """Serialize a graph back to the loader's CSV schema (source of the
    round-trip property: load(save(g)) reproduces the event sequence)."""
    offset = graph.num_sources if graph.bipartite and graph.num_sources else 0
    feature_len = len(graph.events[0].features) if len(graph) else 0
    header = "user_id,item_id,timestamp,state_label" + "".join(
        f",feat_{i + 1}" for i in range(feature_len))
    lines = [header]
    for e in graph.events:
        feats = "".join(f",{x!r}" for x in e.features)
        lines.append(f"{e.src},{e.dst - offset},{e.timestamp!r},0{feats}")
    Path(path).write_text("\n".join(lines) + "\n")


# ------------------------------------------------------------ instance pool

@dataclass(frozen=True)
class InstanceSpec:
    """How many instances to draw per correctness bucket and with what seed."""

    per_bucket: int = 100
    seed: int = 0
    splits: tuple[float, float, float] = (0.70, 0.15, 0.15)
    include_negatives: bool = True


@dataclass(frozen=True)
class Instance:
    """One explanation target: a real test event or a negative-sampled twin.

    Synthetic negatives keep the (timestamp, event id) cutoff of the positive
    they shadow so both see the identical history.
    """

    target: Event
    ground_truth: int
    cutoff: tuple[float, int]
    original_logit: float
    original_class: int

    @property
    def correctness(self) -> str:
        return "correct" if self.original_class == self.ground_truth else "incorrect"


def select_instances(graph: TemporalGraph, session: PredictorSession,
                     spec: InstanceSpec) -> tuple[list[Instance], list[str]]:
    """Draw explained instances from the chronological test split.

    Positives are test-split events; negatives replace the destination with a
    seeded uniform draw from the destination partition.  Every instance is
    scored once and bucketed by prediction correctness; short buckets are
    reported as warnings, not errors.
    """
    n = len(graph)
    test_start = int(n * (spec.splits[0] + spec.splits[1]))
    test_events = graph.events[test_start:]
    if not test_events:
        raise ValueError("test split is empty")

    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(len(test_events))
    if graph.bipartite and graph.num_sources is not None:
        dst_lo, dst_hi = graph.num_sources, graph.node_count
    else:
        dst_lo, dst_hi = 0, graph.node_count

    buckets: dict[str, list[Instance]] = {"correct": [], "incorrect": []}
    next_synthetic_id = int(max(graph.event_ids)) + 1

    def full(bucket: str) -> bool:
        return len(buckets[bucket]) >= spec.per_bucket

    def admit(instance: Instance) -> None:
        if not full(instance.correctness):
            buckets[instance.correctness].append(instance)

    for idx in order:
        if full("correct") and full("incorrect"):
            break
        positive = test_events[idx]
        logit = session.predict(temporal_view(graph, positive), positive)
        admit(Instance(positive, 1, positive.order_key, logit, classify(logit)))

        if not spec.include_negatives:
            continue
        forbidden = {positive.dst, positive.src}
        if dst_hi - dst_lo <= len(forbidden & set(range(dst_lo, dst_hi))):
            continue  # no destination left to resample
        replacement = positive.dst
        while replacement in forbidden:
            replacement = int(rng.integers(dst_lo, dst_hi))
        synthetic = Event(event_id=next_synthetic_id, src=positive.src,
                          dst=replacement, timestamp=positive.timestamp,
                          features=positive.features)
        next_synthetic_id += 1
        view = temporal_view(graph, synthetic, cutoff=positive.order_key)
        logit = session.predict(view, synthetic)
        admit(Instance(synthetic, 0, positive.order_key, logit, classify(logit)))

    warnings = [
        f"bucket {name!r} short: requested {spec.per_bucket}, found {len(instances)}"
        for name, instances in buckets.items() if len(instances) < spec.per_bucket
    ]
    instances = buckets["correct"] + buckets["incorrect"]
    instances.sort(key=lambda inst: (inst.target.event_id, inst.ground_truth))
    return instances, warnings


# ------------------------------------------------------------- experiments

@dataclass(frozen=True)
class ExplainerSpec:
    """One explainer/policy combination with its search parameters."""

    explainer: str
    policy: str
    l: int = 10
    it_max: int = 300
    alpha: float = 2.0 / 3.0
    m_max: int = 64
    k: int | None = None
    best_first_stop: bool = False

    def __post_init__(self) -> None:
        if self.explainer not in ("greedy", "cody"):
            raise ValueError(f"unknown explainer {self.explainer!r}")
        if self.policy not in POLICY_NAMES:
            raise ValueError(f"unknown policy {self.policy!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully serializable experiment description (flat JSON file).

    ``explainer`` and ``policy`` accept comma-separated lists; the run covers
    their cross product over one shared instance pool.
    """

    dataset: str
    output_dir: str
    dataset_name: str = ""
    bipartite: bool = False
    oracle: str = "reference"
    explainer: str = "cody"
    policy: str = "spatio-temporal"
    k: int | None = None
    m_max: int = 64
    it_max: int = 300
    alpha: float = 2.0 / 3.0
    l: int = 10
    best_first_stop: bool = False
    seed: int = 0
    instances_per_bucket: int = 100
    include_negatives: bool = True
    ref_a: float = 1.0
    ref_b: float = 0.5
    ref_c: float = 1.0
    ref_lam: float | None = None

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        doc = json.loads(Path(path).read_text())
        known = {f for f in cls.__dataclass_fields__}  # type: ignore[attr-defined]
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        return asdict(self)

    def explainer_specs(self) -> list[ExplainerSpec]:
        specs = []
        for explainer in (x.strip() for x in self.explainer.split(",")):
            for policy in (x.strip() for x in self.policy.split(",")):
                specs.append(ExplainerSpec(
                    explainer=explainer, policy=policy, l=self.l,
                    it_max=self.it_max, alpha=self.alpha, m_max=self.m_max,
                    k=self.k, best_first_stop=self.best_first_stop))
        return specs


def _build_session(config: ExperimentConfig, graph: TemporalGraph) -> PredictorSession:
    if config.oracle == "reference":
        lam = config.ref_lam if config.ref_lam is not None \
            else 1.0 / graph.mean_inter_event_gap()
        params = ReferenceParams(a=config.ref_a, b=config.ref_b,
                                 c=config.ref_c, lam=lam)
        return PredictorSession(ReferencePredictor(params))
    return make_session(config.oracle, graph)


def _explain_one(session: PredictorSession, graph: TemporalGraph,
                 instance: Instance, spec: ExplainerSpec, seed: int):
    policy = Policy(spec.policy, seed=seed)
    if spec.explainer == "greedy":
        return greedy_explain(session, graph, instance.target, policy,
                              GreedyConfig(l=spec.l, k=spec.k, m_max=spec.m_max),
                              cutoff=instance.cutoff)
    return mcts_explain(session, graph, instance.target, policy,
                        MctsConfig(it_max=spec.it_max, alpha=spec.alpha,
                                   m_max=spec.m_max, k=spec.k, seed=seed,
                                   best_first_stop=spec.best_first_stop),
                        cutoff=instance.cutoff)


def run_experiment(config: ExperimentConfig) -> Path:
    """Run every explainer spec over one shared instance pool.

    Writes ``manifest.json``, ``records.jsonl``, ``reports.csv``,
    ``reports.json``, and ``curves.csv`` to the output directory.  Individual
    oracle failures are recorded and skipped; the run fails only if every
    instance fails.
    """
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    graph = load_jodie_csv(config.dataset, bipartite=config.bipartite)
    dataset_name = config.dataset_name or Path(config.dataset).stem

    selection_session = _build_session(config, graph)
    spec = InstanceSpec(per_bucket=config.instances_per_bucket, seed=config.seed,
                        include_negatives=config.include_negatives)
    instances, warnings = select_instances(graph, selection_session, spec)

    records: list[InstanceRecord] = []
    failures: list[dict] = []
    for explainer_spec in config.explainer_specs():
        session = _build_session(config, graph)
        k = explainer_spec.k if explainer_spec.k is not None else session.num_layers
        for instance in instances:
            candidates = candidate_events(graph, instance.target, k,
                                          explainer_spec.m_max, cutoff=instance.cutoff)
            if len(candidates) == 0:
                failures.append({"target_event_id": instance.target.event_id,
                                 "explainer": explainer_spec.explainer,
                                 "policy": explainer_spec.policy,
                                 "reason": "empty candidate set"})
                continue
            try:
                explanation = _explain_one(session, graph, instance,
                                           explainer_spec, config.seed)
                record = make_instance_record(
                    session, graph, instance.target, candidates, explanation,
                    instance.ground_truth, cutoff=instance.cutoff,
                    dataset=dataset_name, explainer=explainer_spec.explainer,
                    policy=explainer_spec.policy)
            except (OracleError, DegenerateInstanceError) as exc:
                failures.append({"target_event_id": instance.target.event_id,
                                 "explainer": explainer_spec.explainer,
                                 "policy": explainer_spec.policy,
                                 "reason": str(exc)})
                continue
            records.append(record)

    if not records and failures:
        raise RuntimeError(f"all {len(failures)} instances failed; first: {failures[0]}")

    records.sort(key=lambda r: (r.explainer, r.policy, r.target_event_id,
                                r.ground_truth))
    with (out / "records.jsonl").open("w") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")

    reports = aggregate(records)
    (out / "reports.csv").write_text(reports_to_csv(reports))
    (out / "reports.json").write_text(reports_to_json(reports))
    (out / "curves.csv").write_text(curves_to_csv(reports))

    manifest = {
        "config": config.to_dict(),
        "version": __version__,
        "created_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "dataset_name": dataset_name,
        "n_graph_events": len(graph),
        "node_count": graph.node_count,
        "instances": [
            {"target_event_id": inst.target.event_id,
             "ground_truth": inst.ground_truth,
             "correctness": inst.correctness,
             "original_logit": inst.original_logit}
            for inst in instances
        ],
        "warnings": warnings,
        "failures": failures,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return out


# ---------------------------------------------------------------- comparison

def load_run_records(run_dir: str | Path) -> list[InstanceRecord]:
    path = Path(run_dir) / "records.jsonl"
    return [InstanceRecord.from_dict(json.loads(line))
            for line in path.read_text().splitlines() if line.strip()]


def compare_runs(run_a: str | Path, run_b: str | Path) -> dict:
    """Mean Jaccard similarity between explanations of shared instances,
    per explainer/policy pair, plus a per-group metric diff table."""
    records_a = load_run_records(run_a)
    records_b = load_run_records(run_b)

    def by_group(records: Sequence[InstanceRecord]):
        grouped: dict[tuple[str, str], dict[tuple[int, int], InstanceRecord]] = {}
        for r in records:
            grouped.setdefault((r.explainer, r.policy), {})[
                (r.target_event_id, r.ground_truth)] = r
        return grouped

    groups_a, groups_b = by_group(records_a), by_group(records_b)
    similarity = []
    for key_a, recs_a in sorted(groups_a.items()):
        for key_b, recs_b in sorted(groups_b.items()):
            shared = sorted(set(recs_a) & set(recs_b))
            if not shared:
                continue
            mean_sim = sum(
                jaccard(recs_a[k].explanation.events, recs_b[k].explanation.events)
                for k in shared) / len(shared)
            similarity.append({
                "group_a": "/".join(key_a), "group_b": "/".join(key_b),
                "n_shared": len(shared), "mean_jaccard": mean_sim,
            })

    reports_a = {(r.explainer, r.policy, r.correctness): r
                 for r in aggregate(records_a)}
    reports_b = {(r.explainer, r.policy, r.correctness): r
                 for r in aggregate(records_b)}
    diffs = []
    for key in sorted(set(reports_a) & set(reports_b)):
        ra, rb = reports_a[key], reports_b[key]
        diffs.append({
            "group": "/".join(key),
            "fid_plus": rb.fid_plus - ra.fid_plus,
            "fid_minus": rb.fid_minus - ra.fid_minus,
            "aufsc_plus": rb.aufsc_plus - ra.aufsc_plus,
            "aufsc_minus": rb.aufsc_minus - ra.aufsc_minus,
            "char": rb.char - ra.char,
            "sparsity": rb.sparsity - ra.sparsity,
        })
    return {"jaccard": similarity, "metric_diff": diffs}
