"""Greedy hill-climbing search for counterfactual event subsets.

Starting from the empty perturbation set, each iteration samples the best
policy-ranked unused candidates, evaluates every one-event extension, and
advances to the extension with the largest prediction shift.  The search
stops on a counterfactual, on a non-improving step, or when the candidates
are exhausted.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .graph import Event, TemporalGraph, candidate_events, temporal_view
from .oracle import PredictorSession, delta
from .policies import Policy, make_ranking
from .result import ExplanationResult

__all__ = ["GreedyConfig", "greedy_explain"]


@dataclass(frozen=True)
class GreedyConfig:
    """Search parameters; ``k = None`` uses the oracle's layer count."""

    l: int = 10
    k: int | None = None
    m_max: int = 64

    def __post_init__(self) -> None:
        if self.l < 1:
            raise ValueError("l must be >= 1")
        if self.m_max < 1:
            raise ValueError("m_max must be >= 1")


def greedy_explain(session: PredictorSession, graph: TemporalGraph, target: Event,
                   policy: Policy, config: GreedyConfig = GreedyConfig(),
                   cutoff: tuple[float, int] | None = None) -> ExplanationResult:
    """Explain one future-link prediction by greedy subset growth.

    Per iteration the ``config.l`` best-ranked candidates not yet in the
    current set are each tried as an extension (one prediction per child);
    the child maximizing the shift from the original logit wins, with ties
    broken by policy rank.  The search advances only while the best child
    strictly moves the logit toward the opposite sign of the current best.
    """
    started = time.perf_counter()
    calls_before = session.call_counter

    k = config.k if config.k is not None else session.num_layers
    candidates = candidate_events(graph, target, k, config.m_max, cutoff=cutoff)
    full_view = temporal_view(graph, target, cutoff=cutoff)
    p_orig = session.predict(full_view, target)

    def finish(chosen: tuple[int, ...], achieved: float, iterations: int) -> ExplanationResult:
        return ExplanationResult(
            events=frozenset(chosen),
            omission_order=chosen,
            is_counterfactual=delta(p_orig, achieved) > abs(p_orig),
            achieved_logit=achieved,
            original_logit=p_orig,
            oracle_calls=session.call_counter - calls_before,
            iterations=iterations,
            wall_time_s=time.perf_counter() - started,
            candidate_size=len(candidates),
        )

    if len(candidates) == 0:
        return finish((), p_orig, 0)

    ranking = make_ranking(policy, candidates, full_view, target, session, p_orig)

    chosen: tuple[int, ...] = ()
    p_best = p_orig
    iterations = 0
    while len(chosen) < len(candidates):
        batch = ranking.best(exclude=frozenset(chosen), limit=config.l)
        iterations += 1
        best_child: int | None = None
        best_child_logit = 0.0
        best_impact = -float("inf")
        for eid in batch:
            p_child = session.predict(full_view.with_exclusions((*chosen, eid)), target)
            impact = delta(p_orig, p_child)
            # Batch is policy-ordered, so strict improvement keeps the
            # better-ranked event on impact ties.
            if impact > best_impact:
                best_child, best_child_logit, best_impact = eid, p_child, impact
        assert best_child is not None
        if delta(p_best, best_child_logit) > 0:
            chosen = (*chosen, best_child)
            p_best = best_child_logit
            if delta(p_orig, p_best) > abs(p_orig):
                break
        else:
            break

    return finish(chosen, p_best, iterations)
