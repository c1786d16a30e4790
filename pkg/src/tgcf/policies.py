"""Selection policies: total, deterministic rankings over candidate events.

Rankings order the candidate set best-first and are used for child ordering
and tie-breaking by both explainers.  Ties everywhere resolve to the higher
event id (the more recent event).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import CandidateSet, Event, GraphView, _edge_hop, _node_distances_from
from .oracle import PredictorSession, delta

__all__ = [
    "POLICY_NAMES",
    "Policy",
    "Ranking",
    "rank_random",
    "rank_temporal",
    "rank_spatio_temporal",
    "rank_event_impact",
    "make_ranking",
]

POLICY_NAMES = ("random", "temporal", "spatio-temporal", "event-impact")


@dataclass(frozen=True)
class Policy:
    """A policy kind plus the seed used by the random kind."""

    kind: str
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in POLICY_NAMES:
            raise ValueError(f"unknown policy {self.kind!r}; choose from {POLICY_NAMES}")


@dataclass(frozen=True)
class Ranking:
    """Ordered (event_id, rank_key) pairs, best first, covering the candidates."""

    entries: tuple[tuple[int, object], ...]

    @property
    def order(self) -> tuple[int, ...]:
        return tuple(eid for eid, _ in self.entries)

    def position(self, event_id: int) -> int:
        return self.order.index(event_id)

    def position_map(self) -> dict[int, int]:
        return {eid: i for i, (eid, _) in enumerate(self.entries)}

    def best(self, exclude: frozenset[int] = frozenset(), limit: int | None = None
             ) -> tuple[int, ...]:
        picked = [eid for eid, _ in self.entries if eid not in exclude]
        return tuple(picked if limit is None else picked[:limit])

    def __len__(self) -> int:
        return len(self.entries)


def rank_random(candidates: CandidateSet, seed: int) -> Ranking:
    """Uniform permutation from PCG64 seeded by (seed, target event id).

    The generator and seeding discipline are fixed so rankings reproduce
    across runs and platforms.
    """
    ids = candidates.event_ids
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence([seed, candidates.target.event_id])))
    perm = rng.permutation(len(ids))
    order = [ids[i] for i in perm]
    return Ranking(tuple((eid, pos) for pos, eid in enumerate(order)))


def rank_temporal(candidates: CandidateSet, target: Event) -> Ranking:
    """Ascending temporal distance to the target; recent events rank first."""
    keyed = [(abs(target.timestamp - ts), -eid, eid) for eid, _, ts in candidates.entries]
    keyed.sort()
    return Ranking(tuple((eid, dist) for dist, _, eid in keyed))


def rank_spatio_temporal(candidates: CandidateSet, view: GraphView,
                         target: Event) -> Ranking:
    """Lexicographic (spatial distance, temporal distance) ranking.

    Spatial distances are edge hops evaluated over the given view; among
    equally distant events the ordering reduces to the temporal policy.
    """
    node_dist = _node_distances_from(view, list(dict.fromkeys(target.nodes)))
    keyed = []
    for eid, _, ts in candidates.entries:
        event = view.base.event_by_id(eid)
        d = _edge_hop(node_dist, event, target)
        keyed.append(((d, abs(target.timestamp - ts)), -eid, eid))
    keyed.sort()
    return Ranking(tuple((eid, key) for key, _, eid in keyed))


def rank_event_impact(candidates: CandidateSet, session: PredictorSession,
                      view: GraphView, target: Event, p_orig: float) -> Ranking:
    """Descending single-event impact on the prediction.

    Evaluates each candidate's removal once against the full input view
    (one oracle call per candidate, modulo cache); the ranking is computed
    once per explanation instance and then frozen.
    """
    keyed = []
    for eid, _, _ in candidates.entries:
        p_j = session.predict(view.without((eid,)), target)
        keyed.append((-delta(p_orig, p_j), -eid, eid))
    keyed.sort()
    return Ranking(tuple((eid, -neg_impact) for neg_impact, _, eid in keyed))


def make_ranking(policy: Policy, candidates: CandidateSet, view: GraphView,
                 target: Event, session: PredictorSession | None = None,
                 p_orig: float | None = None) -> Ranking:
    """Dispatch to the policy's ranking function."""
    if policy.kind == "random":
        return rank_random(candidates, policy.seed)
    if policy.kind == "temporal":
        return rank_temporal(candidates, target)
    if policy.kind == "spatio-temporal":
        return rank_spatio_temporal(candidates, view, target)
    if session is None or p_orig is None:
        raise ValueError("event-impact ranking needs a session and the original logit")
    return rank_event_impact(candidates, session, view, target, p_orig)
