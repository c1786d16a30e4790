"""Build a small interaction graph and look at histories, distances, and
candidate pools.

The running example is a five-node chain A-B-C-D-E built by four timestamped
events, with a future link between A and B to explain.
"""

from tgcf import Event, TemporalGraph, candidate_events, spatial_distance, temporal_view

NODES = "ABCDE"

events = [
    Event(1, 0, 1, 1.0),  # A-B
    Event(2, 1, 2, 2.0),  # B-C
    Event(3, 2, 3, 3.0),  # C-D
    Event(4, 3, 4, 4.0),  # D-E
]
graph = TemporalGraph(events)
target = Event(5, 0, 1, 5.0)  # will A and B interact again at t=5?

print("The history visible to the prediction is everything strictly before")
print("the target, minus whatever we choose to exclude:\n")
view = temporal_view(graph, target)
for e in view.events():
    print(f"  event {e.event_id}: {NODES[e.src]}-{NODES[e.dst]} at t={e.timestamp}")

print("\nExcluding event 2 removes the B-C edge from the story:")
pruned = temporal_view(graph, target, excluded={2})
print(" ", sorted(e.event_id for e in pruned.events()))

print("\nSpatial distance counts edge hops from the target link. The old A-B")
print("event sits on the same pair (hop 0); each step down the chain adds one:")
for e in events:
    d = spatial_distance(view, e, target)
    print(f"  event {e.event_id} ({NODES[e.src]}-{NODES[e.dst]}): hop {d}")

print("\nCandidate pools keep the m_max most recent events within k hops.")
print("With k=2 the D-E event (hop 3) is beyond the explained link's reach:")
pool = candidate_events(graph, target, k=2, m_max=64)
print("  k=2:", pool.event_ids)
print("  k=2, m_max=2 keeps only the most recent:",
      candidate_events(graph, target, k=2, m_max=2).event_ids)
