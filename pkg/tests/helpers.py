"""Shared test utilities: synthetic instances and the exhaustive subset oracle."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from tgcf import (CandidateSet, Event, PredictorSession, ReferenceParams,
                  ReferencePredictor, TemporalGraph, candidate_events, delta,
                  temporal_view)


@dataclass(frozen=True)
class SyntheticInstance:
    graph: TemporalGraph
    target: Event
    params: ReferenceParams
    candidates: CandidateSet
    p_orig: float
    m_max: int

    def fresh_session(self) -> PredictorSession:
        return PredictorSession(ReferencePredictor(self.params))


def make_instance(seed: int, min_candidates: int = 8, max_candidates: int = 12,
                  m_max: int | None = None) -> SyntheticInstance | None:
    """One seeded random instance whose candidate set size falls in range.

    Returns None when the drawn graph misses the size window; callers keep
    drawing seeds until they have enough instances.
    """
    rng = np.random.default_rng(seed)
    n_nodes = int(rng.integers(6, 14))
    n_events = int(rng.integers(30, 90))
    times = np.cumsum(rng.uniform(0.1, 1.0, size=n_events))
    events = []
    for i in range(n_events):
        src = int(rng.integers(0, n_nodes))
        dst = int(rng.integers(0, n_nodes))
        while dst == src:
            dst = int(rng.integers(0, n_nodes))
        events.append(Event(i, src, dst, float(times[i])))
    graph = TemporalGraph(events, node_count=n_nodes)

    anchor = events[int(rng.integers(n_events // 2, n_events))]
    target = Event(n_events + 1, anchor.src, anchor.dst, float(times[-1] + 1.0))
    if m_max is None:
        m_max = int(rng.integers(min_candidates, max_candidates + 1))
    candidates = candidate_events(graph, target, k=2, m_max=m_max)
    if not min_candidates <= len(candidates) <= max_candidates:
        return None

    params = ReferenceParams(a=1.0, b=0.5, c=float(rng.uniform(0.2, 1.4)),
                             lam=float(rng.uniform(0.02, 0.3)))
    session = PredictorSession(ReferencePredictor(params))
    p_orig = session.predict(temporal_view(graph, target), target)
    if p_orig == 0.0:
        return None
    return SyntheticInstance(graph, target, params, candidates, p_orig, m_max)


def make_instances(n: int, start_seed: int = 0, **kwargs) -> list[SyntheticInstance]:
    instances = []
    seed = start_seed
    while len(instances) < n:
        candidate = make_instance(seed, **kwargs)
        if candidate is not None:
            instances.append(candidate)
        seed += 1
    return instances


def brute_force_minimal_counterfactual(instance: SyntheticInstance
                                       ) -> tuple[int | None, frozenset[int] | None]:
    """Exhaustive enumeration by subset size; the independent search oracle.

    Returns (minimal size, one witness) or (None, None) when no subset of the
    candidate set flips the prediction.
    """
    session = instance.fresh_session()
    graph, target = instance.graph, instance.target
    view = temporal_view(graph, target)
    p_orig = session.predict(view, target)
    ids = instance.candidates.event_ids
    for size in range(1, len(ids) + 1):
        for subset in combinations(ids, size):
            p = session.predict(view.with_exclusions(subset), target)
            if delta(p_orig, p) > abs(p_orig):
                return size, frozenset(subset)
    return None, None
