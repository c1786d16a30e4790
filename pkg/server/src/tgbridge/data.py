"""Interaction-log ingestion.

The CSV schema and the event-id assignment (dense ids in (timestamp, line
order) position) mirror the explainer side exactly; matching ids are the
contract that makes exclusion requests meaningful.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class EventLog:
    """Columnar event storage; event id == position in (timestamp, line
    order) sorted order."""

    src: np.ndarray
    dst: np.ndarray
    timestamp: np.ndarray
    node_count: int
    bipartite: bool
    name: str
    _adjacency: dict[int, list[int]] = field(repr=False, default_factory=dict)

    def __post_init__(self) -> None:
        for i in range(len(self.src)):
            self._adjacency.setdefault(int(self.src[i]), []).append(i)
            if self.dst[i] != self.src[i]:
                self._adjacency.setdefault(int(self.dst[i]), []).append(i)

    def __len__(self) -> int:
        return len(self.src)

    def has_event(self, event_id: int) -> bool:
        return 0 <= event_id < len(self.src)

    def neighbors_before(self, node: int, t: float, max_id: int,
                         excluded: frozenset[int], limit: int
                         ) -> list[tuple[int, float]]:
        """Most recent ``limit`` (partner, time) pairs of ``node`` strictly
        before the (t, max_id) cutoff, newest first."""
        index = self._adjacency.get(node)
        if not index:
            return []
        # Events are id-ordered, so the id cutoff position also respects time.
        hi = bisect_left(index, max_id)
        out: list[tuple[int, float]] = []
        for pos in range(hi - 1, -1, -1):
            i = index[pos]
            if self.timestamp[i] > t:
                continue
            if i in excluded:
                continue
            partner = int(self.dst[i]) if int(self.src[i]) == node else int(self.src[i])
            out.append((partner, float(self.timestamp[i])))
            if len(out) == limit:
                break
        return out


def load_jodie_csv(path: str | Path, bipartite: bool = False) -> EventLog:
    """Parse ``user_id,item_id,timestamp,state_label,feat...`` rows.

    Nodes are re-indexed densely (bipartite destinations offset by the
    source-partition size); events are sorted by (timestamp, line order) and
    event ids are their positions in that order.
    """
    path = Path(path)
    users, items, times = [], [], []
    with path.open() as fh:
        header = fh.readline()
        if not header:
            raise ValueError(f"{path}: empty file")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) < 4:
                raise ValueError(f"{path}:{lineno}: expected at least 4 fields")
            users.append(int(float(parts[0])))
            items.append(int(float(parts[1])))
            times.append(float(parts[2]))
    if not users:
        raise ValueError(f"{path}: no event rows")

    if bipartite:
        src_ids = sorted(set(users))
        dst_ids = sorted(set(items))
        src_map = {raw: i for i, raw in enumerate(src_ids)}
        dst_map = {raw: len(src_ids) + i for i, raw in enumerate(dst_ids)}
        node_count = len(src_ids) + len(dst_ids)
    else:
        node_ids = sorted(set(users) | set(items))
        src_map = dst_map = {raw: i for i, raw in enumerate(node_ids)}
        node_count = len(node_ids)

    order = sorted(range(len(users)), key=lambda i: (times[i], i))
    return EventLog(
        src=np.array([src_map[users[i]] for i in order], dtype=np.int64),
        dst=np.array([dst_map[items[i]] for i in order], dtype=np.int64),
        timestamp=np.array([times[i] for i in order], dtype=np.float64),
        node_count=node_count,
        bipartite=bipartite,
        name=path.stem,
    )
