"""Shared fixtures: small graphs and oracles used across test modules."""

from __future__ import annotations

import pytest

from tgcf import Event, TemporalGraph


@pytest.fixture
def chain_graph() -> TemporalGraph:
    """Path A-B-C-D-E built by four events at times 1..4 (nodes 0..4)."""
    return TemporalGraph([
        Event(1, 0, 1, 1.0),
        Event(2, 1, 2, 2.0),
        Event(3, 2, 3, 3.0),
        Event(4, 3, 4, 4.0),
    ])


@pytest.fixture
def chain_target() -> Event:
    """Future link between A and B, after all chain events."""
    return Event(5, 0, 1, 5.0)
