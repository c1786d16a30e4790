"""Fidelity, sparsity, AUFSC, characterization, and similarity metrics.

Per-instance flags come from two oracle calls: removing the explanation
(necessity) and keeping only the explanation inside the candidate pool
(sufficiency).  Aggregation groups instances by dataset, explainer, policy,
and prediction correctness.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .graph import CandidateSet, Event, TemporalGraph, temporal_view
from .oracle import PredictorSession, classify
from .result import ExplanationResult

__all__ = [
    "InstanceRecord",
    "MetricReport",
    "UndefinedGroupError",
    "fid_flags",
    "aufsc",
    "char_score",
    "jaccard",
    "aggregate",
    "reports_to_csv",
    "curves_to_csv",
]


class UndefinedGroupError(ValueError):
    """Raised when a metric is requested over an empty record group."""


@dataclass(frozen=True)
class InstanceRecord:
    """One explained instance with its fidelity flags and group labels."""

    target_event_id: int
    original_logit: float
    original_class: int
    ground_truth: int
    explanation: ExplanationResult
    candidate_size: int
    fid_plus_flag: int
    fid_minus_flag: int
    sparsity: float
    dataset: str = ""
    explainer: str = ""
    policy: str = ""

    @property
    def correctness(self) -> str:
        return "correct" if self.original_class == self.ground_truth else "incorrect"

    def to_dict(self) -> dict:
        return {
            "target_event_id": self.target_event_id,
            "original_logit": self.original_logit,
            "original_class": self.original_class,
            "ground_truth": self.ground_truth,
            "correctness": self.correctness,
            "candidate_size": self.candidate_size,
            "fid_plus_flag": self.fid_plus_flag,
            "fid_minus_flag": self.fid_minus_flag,
            "sparsity": self.sparsity,
            "dataset": self.dataset,
            "explainer": self.explainer,
            "policy": self.policy,
            "explanation": self.explanation.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "InstanceRecord":
        return cls(
            target_event_id=int(doc["target_event_id"]),
            original_logit=float(doc["original_logit"]),
            original_class=int(doc["original_class"]),
            ground_truth=int(doc["ground_truth"]),
            explanation=ExplanationResult.from_dict(doc["explanation"]),
            candidate_size=int(doc["candidate_size"]),
            fid_plus_flag=int(doc["fid_plus_flag"]),
            fid_minus_flag=int(doc["fid_minus_flag"]),
            sparsity=float(doc["sparsity"]),
            dataset=doc.get("dataset", ""),
            explainer=doc.get("explainer", ""),
            policy=doc.get("policy", ""),
        )


def make_instance_record(session: PredictorSession, graph: TemporalGraph,
                         target: Event, candidates: CandidateSet,
                         explanation: ExplanationResult, ground_truth: int,
                         cutoff: tuple[float, int] | None = None,
                         dataset: str = "", explainer: str = "",
                         policy: str = "") -> InstanceRecord:
    """Score one finished explanation into an :class:`InstanceRecord`."""
    if len(candidates) == 0:
        raise UndefinedGroupError("candidate set is empty; sparsity undefined")
    original_class = classify(explanation.original_logit)
    plus, minus = fid_flags(session, graph, target, explanation.events,
                            candidates, original_class, cutoff=cutoff)
    return InstanceRecord(
        target_event_id=target.event_id,
        original_logit=explanation.original_logit,
        original_class=original_class,
        ground_truth=ground_truth,
        explanation=explanation,
        candidate_size=len(candidates),
        fid_plus_flag=plus,
        fid_minus_flag=minus,
        sparsity=len(explanation.events) / len(candidates),
        dataset=dataset,
        explainer=explainer,
        policy=policy,
    )


def fid_flags(session: PredictorSession, graph: TemporalGraph, target: Event,
              explanation_events: frozenset[int], candidates: CandidateSet,
              original_class: int,
              cutoff: tuple[float, int] | None = None) -> tuple[int, int]:
    """Necessity and sufficiency indicator flags for one explanation.

    fid+ removes the explanation from the input; fid- keeps the explanation
    plus all history outside the candidate pool, removing only candidate
    events the explanation left out.  The candidate-relative reading keeps
    the untouchable history identical across explainers.
    """
    view_removed = temporal_view(graph, target, explanation_events, cutoff=cutoff)
    plus = int(classify(session.predict(view_removed, target)) != original_class)
    complement = frozenset(candidates.event_ids) - explanation_events
    view_only = temporal_view(graph, target, complement, cutoff=cutoff)
    minus = int(classify(session.predict(view_only, target)) == original_class)
    return plus, minus


def aufsc(records: Sequence[InstanceRecord], direction: str) -> float:
    """Exact area under the cumulative fidelity-versus-sparsity-limit curve.

    F(s) is the fraction of instances whose flag is set and whose sparsity is
    at most s; the integral over [0, 1] has the closed form
    sum(flag * (1 - sparsity)) / N.
    """
    if not records:
        raise UndefinedGroupError("aufsc over an empty record set is undefined")
    if direction not in ("plus", "minus"):
        raise ValueError(f"direction must be 'plus' or 'minus', got {direction!r}")
    total = 0.0
    for r in records:
        flag = r.fid_plus_flag if direction == "plus" else r.fid_minus_flag
        total += flag * (1.0 - r.sparsity)
    return total / len(records)


def char_score(fid_plus: float, fid_minus: float,
               w_plus: float = 0.5, w_minus: float = 0.5) -> float:
    """Weighted harmonic mean of the two fidelities; 0 when either is 0."""
    if not (0.0 <= fid_plus <= 1.0 and 0.0 <= fid_minus <= 1.0):
        raise ValueError("fidelity values must lie in [0, 1]")
    if w_plus <= 0 or w_minus <= 0:
        raise ValueError("weights must be positive")
    if fid_plus == 0.0 or fid_minus == 0.0:
        return 0.0
    return (w_plus + w_minus) / (w_plus / fid_plus + w_minus / fid_minus)


def jaccard(a: Iterable[int], b: Iterable[int]) -> float:
    """Set similarity |a & b| / |a | b|; two empty sets count as identical."""
    sa, sb = frozenset(a), frozenset(b)
    if not sa and not sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


@dataclass(frozen=True)
class MetricReport:
    """Aggregate metrics for one (dataset, explainer, policy, correctness) group."""

    dataset: str
    explainer: str
    policy: str
    correctness: str
    n_instances: int
    sparsity: float
    fid_plus: float
    fid_minus: float
    aufsc_plus: float
    aufsc_minus: float
    char: float
    oracle_calls: float
    wall_time_s: float
    curve: tuple[tuple[float, float, float], ...] = field(default_factory=tuple)

    CSV_COLUMNS = ("dataset", "explainer", "policy", "correctness", "n",
                   "sparsity", "fid_plus", "fid_minus", "aufsc_plus",
                   "aufsc_minus", "char", "oracle_calls", "wall_time_s")

    def csv_row(self) -> list:
        return [self.dataset, self.explainer, self.policy, self.correctness,
                self.n_instances, self.sparsity, self.fid_plus, self.fid_minus,
                self.aufsc_plus, self.aufsc_minus, self.char,
                self.oracle_calls, self.wall_time_s]

    def to_dict(self) -> dict:
        doc = dict(zip(self.CSV_COLUMNS, self.csv_row()))
        doc["curve"] = [list(point) for point in self.curve]
        return doc


def _fidelity_sparsity_curve(records: Sequence[InstanceRecord]
                             ) -> tuple[tuple[float, float, float], ...]:
    """Step-curve samples (s, F_plus(s), F_minus(s)) at every breakpoint."""
    n = len(records)
    breakpoints = sorted({0.0, 1.0} | {r.sparsity for r in records})
    samples = []
    for s in breakpoints:
        f_plus = sum(r.fid_plus_flag for r in records if r.sparsity <= s) / n
        f_minus = sum(r.fid_minus_flag for r in records if r.sparsity <= s) / n
        samples.append((s, f_plus, f_minus))
    return tuple(samples)


def aggregate(records: Sequence[InstanceRecord]) -> list[MetricReport]:
    """Group records and compute every metric, deterministically ordered."""
    groups: dict[tuple[str, str, str, str], list[InstanceRecord]] = {}
    for r in records:
        key = (r.dataset, r.explainer, r.policy, r.correctness)
        groups.setdefault(key, []).append(r)
    reports = []
    for key in sorted(groups):
        recs = groups[key]
        n = len(recs)
        fid_plus = sum(r.fid_plus_flag for r in recs) / n
        fid_minus = sum(r.fid_minus_flag for r in recs) / n
        reports.append(MetricReport(
            dataset=key[0], explainer=key[1], policy=key[2], correctness=key[3],
            n_instances=n,
            sparsity=sum(r.sparsity for r in recs) / n,
            fid_plus=fid_plus,
            fid_minus=fid_minus,
            aufsc_plus=aufsc(recs, "plus"),
            aufsc_minus=aufsc(recs, "minus"),
            char=char_score(fid_plus, fid_minus),
            oracle_calls=sum(r.explanation.oracle_calls for r in recs) / n,
            wall_time_s=sum(r.explanation.wall_time_s for r in recs) / n,
            curve=_fidelity_sparsity_curve(recs),
        ))
    return reports


def reports_to_csv(reports: Sequence[MetricReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(MetricReport.CSV_COLUMNS)
    for report in reports:
        writer.writerow(report.csv_row())
    return buf.getvalue()


def curves_to_csv(reports: Sequence[MetricReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(("dataset", "explainer", "policy", "correctness",
                     "s", "f_plus", "f_minus"))
    for report in reports:
        for s, f_plus, f_minus in report.curve:
            writer.writerow((report.dataset, report.explainer, report.policy,
                             report.correctness, s, f_plus, f_minus))
    return buf.getvalue()


def reports_to_json(reports: Sequence[MetricReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2)
