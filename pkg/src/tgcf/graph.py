"""Continuous-time dynamic graph store with temporal views and candidate sets.

A graph is an immutable, time-ordered sequence of interaction events.  All
explanation machinery operates on :class:`GraphView` objects, which restrict
the event sequence to the history strictly before a target event minus an
explicit exclusion set.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "Event",
    "TemporalGraph",
    "GraphView",
    "CandidateSet",
    "InvalidTargetError",
    "temporal_view",
    "spatial_distance",
    "candidate_events",
]

INFINITE_DISTANCE = math.inf


class InvalidTargetError(ValueError):
    """Raised when a query references nodes or events the graph does not have."""


@dataclass(frozen=True)
class Event:
    """One timestamped interaction between two nodes.

    ``features`` is a fixed-length tuple of floats; length 0 is legal and all
    events of one graph must agree on the length.
    """

    event_id: int
    src: int
    dst: int
    timestamp: float
    features: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.timestamp < 0:
            raise ValueError(f"event {self.event_id}: negative timestamp {self.timestamp}")

    @property
    def order_key(self) -> tuple[float, int]:
        """Lexicographic (timestamp, event_id) position used everywhere for ordering."""
        return (self.timestamp, self.event_id)

    @property
    def nodes(self) -> tuple[int, int]:
        return (self.src, self.dst)


class TemporalGraph:
    """Immutable event sequence sorted by (timestamp, event_id), with a
    per-node time-sorted adjacency index.

    Safe to share across concurrent searches; all query objects built on top
    of it are cheap value objects.
    """

    def __init__(self, events: Iterable[Event], node_count: int | None = None,
                 bipartite: bool = False, num_sources: int | None = None):
        ordered = sorted(events, key=lambda e: e.order_key)
        ids = [e.event_id for e in ordered]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate event ids")
        feat_lengths = {len(e.features) for e in ordered}
        if len(feat_lengths) > 1:
            raise ValueError(f"inconsistent feature lengths: {sorted(feat_lengths)}")

        self._events: tuple[Event, ...] = tuple(ordered)
        self._ids = np.array(ids, dtype=np.int64)
        self._timestamps = np.array([e.timestamp for e in ordered], dtype=np.float64)
        self._index_of = {eid: i for i, eid in enumerate(ids)}

        max_node = max((max(e.src, e.dst) for e in ordered), default=-1)
        self.node_count = node_count if node_count is not None else max_node + 1
        if max_node >= self.node_count:
            raise ValueError(f"node id {max_node} out of range for node_count {self.node_count}")
        self.bipartite = bipartite
        # For bipartite graphs destinations occupy ids [num_sources, node_count).
        self.num_sources = num_sources

        adjacency: dict[int, list[int]] = {}
        for i, e in enumerate(ordered):
            adjacency.setdefault(e.src, []).append(i)
            if e.dst != e.src:
                adjacency.setdefault(e.dst, []).append(i)
        self._adjacency = {n: np.array(idx, dtype=np.int64) for n, idx in adjacency.items()}

    # ------------------------------------------------------------- accessors
    @property
    def events(self) -> tuple[Event, ...]:
        return self._events

    def __len__(self) -> int:
        return len(self._events)

    @property
    def event_ids(self) -> np.ndarray:
        return self._ids

    @property
    def timestamps(self) -> np.ndarray:
        return self._timestamps

    def has_event(self, event_id: int) -> bool:
        return event_id in self._index_of

    def event_by_id(self, event_id: int) -> Event:
        try:
            return self._events[self._index_of[event_id]]
        except KeyError:
            raise InvalidTargetError(f"unknown event id {event_id}") from None

    def index_of(self, event_id: int) -> int:
        return self._index_of[event_id]

    def has_node(self, node: int) -> bool:
        return 0 <= node < self.node_count

    def node_event_indices(self, node: int) -> np.ndarray:
        """Time-sorted indices of events incident to ``node``."""
        return self._adjacency.get(node, _EMPTY_INDEX)

    def cutoff_index(self, cutoff_time: float, cutoff_event_id: int) -> int:
        """Number of events strictly before (cutoff_time, cutoff_event_id)."""
        lo = bisect_left(self._timestamps, cutoff_time)  # type: ignore[arg-type]
        hi = len(self._events)
        # Few timestamp ties in practice; resolve them by event id linearly.
        i = lo
        while i < hi and self._timestamps[i] == cutoff_time and self._ids[i] < cutoff_event_id:
            i += 1
        return i

    def mean_inter_event_gap(self) -> float:
        """Mean gap between consecutive timestamps; 1.0 for degenerate graphs."""
        if len(self._events) < 2:
            return 1.0
        span = float(self._timestamps[-1] - self._timestamps[0])
        if span <= 0:
            return 1.0
        return span / (len(self._events) - 1)


_EMPTY_INDEX = np.array([], dtype=np.int64)


@dataclass(frozen=True)
class GraphView:
    """The history before a cutoff, minus an exclusion set.

    Contents are exactly ``{e : (t_e, id_e) < (cutoff_time, cutoff_event_id)}``
    minus ``excluded``.
    """

    base: TemporalGraph
    cutoff_time: float
    cutoff_event_id: int
    excluded: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        unknown = [eid for eid in self.excluded if not self.base.has_event(eid)]
        if unknown:
            raise InvalidTargetError(f"excluded ids not in graph: {sorted(unknown)}")

    @property
    def cutoff(self) -> tuple[float, int]:
        return (self.cutoff_time, self.cutoff_event_id)

    def contains(self, event: Event) -> bool:
        return event.order_key < self.cutoff and event.event_id not in self.excluded

    def event_indices(self) -> Iterator[int]:
        """Indices (in base order) of all visible events."""
        end = self.base.cutoff_index(self.cutoff_time, self.cutoff_event_id)
        ids = self.base.event_ids
        for i in range(end):
            if int(ids[i]) not in self.excluded:
                yield i

    def events(self) -> Iterator[Event]:
        for i in self.event_indices():
            yield self.base.events[i]

    def node_events(self, node: int) -> Iterator[Event]:
        """Visible events incident to ``node``, in time order."""
        base = self.base
        cutoff = self.cutoff
        for i in base.node_event_indices(node):
            e = base.events[i]
            if e.order_key >= cutoff:
                break
            if e.event_id not in self.excluded:
                yield e

    def without(self, more_excluded: Iterable[int]) -> "GraphView":
        """A view over the same cutoff with extra events excluded."""
        return GraphView(self.base, self.cutoff_time, self.cutoff_event_id,
                         self.excluded | frozenset(more_excluded))

    def with_exclusions(self, excluded: Iterable[int]) -> "GraphView":
        """A view over the same cutoff with exactly ``excluded`` removed."""
        return GraphView(self.base, self.cutoff_time, self.cutoff_event_id,
                         frozenset(excluded))


@dataclass(frozen=True)
class CandidateSet:
    """The spatially and temporally constrained pool of removable events.

    ``entries`` is ordered most-recent-first; each entry is
    (event_id, hop_distance, timestamp).
    """

    target: Event
    k: int
    m_max: int
    entries: tuple[tuple[int, float, float], ...]

    @property
    def event_ids(self) -> tuple[int, ...]:
        return tuple(entry[0] for entry in self.entries)

    def hop_distance(self, event_id: int) -> float:
        for eid, hop, _ in self.entries:
            if eid == event_id:
                return hop
        raise KeyError(event_id)

    def timestamp(self, event_id: int) -> float:
        for eid, _, ts in self.entries:
            if eid == event_id:
                return ts
        raise KeyError(event_id)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, event_id: int) -> bool:
        return any(eid == event_id for eid, _, _ in self.entries)


# --------------------------------------------------------------- operations

def temporal_view(graph: TemporalGraph, target: Event,
                  excluded: Iterable[int] = (),
                  cutoff: tuple[float, int] | None = None) -> GraphView:
    """History of the graph strictly before ``target``, minus ``excluded``.

    ``target`` may be a synthetic query event (an id the graph does not
    contain) as long as its node ids are valid.  ``cutoff`` overrides the
    (timestamp, event_id) cutoff pair; negative-sampled queries use this to
    see exactly the history of the positive event they shadow.
    """
    for node in target.nodes:
        if not graph.has_node(node):
            raise InvalidTargetError(f"target references unknown node {node}")
    if cutoff is None:
        cutoff = target.order_key
    return GraphView(graph, cutoff[0], cutoff[1], frozenset(excluded))


def _node_distances_from(view: GraphView, sources: Sequence[int]) -> dict[int, int]:
    """BFS hop counts from ``sources`` over the static graph of view contents."""
    adjacency: dict[int, set[int]] = {}
    for e in view.events():
        adjacency.setdefault(e.src, set()).add(e.dst)
        adjacency.setdefault(e.dst, set()).add(e.src)
    dist = {s: 0 for s in sources}
    queue = deque(sources)
    while queue:
        u = queue.popleft()
        for w in adjacency.get(u, ()):
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def _edge_hop(node_dist: dict[int, int], event: Event, target: Event) -> float:
    """Edge-hop distance of ``event`` from ``target``.

    Events on the same node pair as the target are at hop 0; otherwise the
    distance is the minimum node distance between any endpoint pair plus one
    (shortest-path distance in the collapsed line graph).  This makes k equal
    to the receptive depth of a k-layer message-passing model: hop 1 events
    touch a target endpoint, hop 2 events touch one of its neighbors.
    """
    if frozenset(event.nodes) == frozenset(target.nodes):
        return 0
    best = min((node_dist.get(n, INFINITE_DISTANCE) for n in event.nodes),
               default=INFINITE_DISTANCE)
    return best + 1 if best is not INFINITE_DISTANCE else INFINITE_DISTANCE


def spatial_distance(view: GraphView, event: Event, target: Event) -> float:
    """Edge-hop distance between two events over the view's static structure.

    Symmetric in its arguments; unreachable pairs return ``math.inf``.
    """
    for node in (*event.nodes, *target.nodes):
        if not view.base.has_node(node):
            raise InvalidTargetError(f"unknown node {node}")
    node_dist = _node_distances_from(view, list(dict.fromkeys(target.nodes)))
    return _edge_hop(node_dist, event, target)


def candidate_events(graph: TemporalGraph, target: Event, k: int, m_max: int,
                     cutoff: tuple[float, int] | None = None) -> CandidateSet:
    """The ``m_max`` most recent events within ``k`` edge-hops of the target.

    Hop distances are evaluated on the full history before the target.  The
    result is ordered most-recent-first by (timestamp, event_id); an empty
    set is legal and must be handled by callers.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if m_max < 1:
        raise ValueError(f"m_max must be >= 1, got {m_max}")
    view = temporal_view(graph, target, cutoff=cutoff)
    node_dist = _node_distances_from(view, list(dict.fromkeys(target.nodes)))
    eligible = []
    for e in view.events():
        hop = _edge_hop(node_dist, e, target)
        if hop <= k:
            eligible.append((e, hop))
    eligible.sort(key=lambda pair: pair[0].order_key, reverse=True)
    picked = eligible[:m_max]
    entries = tuple((e.event_id, hop, e.timestamp) for e, hop in picked)
    return CandidateSet(target=target, k=k, m_max=m_max, entries=entries)
