"""Search output shared by both explainers."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ExplanationResult:
    """Chosen event subset plus counterfactual status and search statistics.

    ``omission_order`` lists the events in the order the search committed to
    removing them; ``events`` is the same set without order.
    """

    events: frozenset[int]
    omission_order: tuple[int, ...]
    is_counterfactual: bool
    achieved_logit: float
    original_logit: float
    oracle_calls: int
    iterations: int
    wall_time_s: float
    candidate_size: int = 0

    def __post_init__(self) -> None:
        if frozenset(self.omission_order) != self.events:
            raise ValueError("omission order does not cover the chosen events")

    def to_dict(self) -> dict:
        return {
            "events": sorted(self.events),
            "omission_order": list(self.omission_order),
            "is_counterfactual": self.is_counterfactual,
            "achieved_logit": self.achieved_logit,
            "original_logit": self.original_logit,
            "oracle_calls": self.oracle_calls,
            "iterations": self.iterations,
            "wall_time_s": self.wall_time_s,
            "candidate_size": self.candidate_size,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExplanationResult":
        return cls(
            events=frozenset(doc["events"]),
            omission_order=tuple(doc["omission_order"]),
            is_counterfactual=bool(doc["is_counterfactual"]),
            achieved_logit=float(doc["achieved_logit"]),
            original_logit=float(doc["original_logit"]),
            oracle_calls=int(doc["oracle_calls"]),
            iterations=int(doc["iterations"]),
            wall_time_s=float(doc["wall_time_s"]),
            candidate_size=int(doc.get("candidate_size", 0)),
        )
