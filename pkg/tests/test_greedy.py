"""Greedy hill-climbing explainer."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from tgcf import (Event, GreedyConfig, Policy, PredictorSession,
                  ReferenceParams, ReferencePredictor, ScriptedOracle,
                  TemporalGraph, candidate_events, delta, greedy_explain,
                  temporal_view)

FIXTURES = Path(__file__).parent / "fixtures"


def pair_history_graph(n_events, target_id=99, target_time=10.0):
    """Events 1..n on the target's node pair; temporal rank is n, n-1, ..., 1
    unless timestamps are reversed."""
    events = [Event(i, 0, 1, float(target_time - i)) for i in range(1, n_events + 1)]
    graph = TemporalGraph(events)
    target = Event(target_id, 0, 1, target_time)
    return graph, target


class RecordingPredictor:
    """Reference predictor that records every true evaluation."""

    num_layers = 2

    def __init__(self, params):
        self.inner = ReferencePredictor(params)
        self.evaluations = []

    def evaluate(self, view, target):
        logit = self.inner.evaluate(view, target)
        self.evaluations.append((frozenset(view.excluded), logit))
        return logit


class TestTraceReplay:
    """Scripted three-iteration descent: 2.854 -> 1.996 -> 0.816 -> -0.052."""

    def run_trace(self):
        graph, target = pair_history_graph(5)
        session = PredictorSession(
            ScriptedOracle.from_fixture(FIXTURES / "greedy_trace.json"))
        return session, greedy_explain(
            session, graph, target, Policy("temporal"), GreedyConfig(l=3))

    def test_returns_the_counterfactual_path(self):
        _, result = self.run_trace()
        assert result.omission_order == (2, 1, 5)
        assert result.events == frozenset({2, 1, 5})
        assert result.is_counterfactual

    def test_trace_statistics(self):
        session, result = self.run_trace()
        assert result.iterations == 3
        assert result.oracle_calls == 10
        assert session.call_counter == 10
        assert result.original_logit == 2.854
        assert result.achieved_logit == -0.052
        assert result.wall_time_s < 1.0

    def test_achieved_shift_exceeds_original_magnitude(self):
        _, result = self.run_trace()
        assert delta(result.original_logit, result.achieved_logit) == \
            pytest.approx(2.906, abs=1e-12)


class TestStallAndEdgeCases:
    def test_constant_oracle_stalls_immediately(self):
        graph, target = pair_history_graph(4)
        session = PredictorSession(ScriptedOracle({}, default=1.5))
        result = greedy_explain(session, graph, target, Policy("temporal"),
                                GreedyConfig(l=3))
        assert result.events == frozenset()
        assert not result.is_counterfactual
        assert result.iterations == 1

    def test_single_flipping_candidate(self):
        graph, target = pair_history_graph(1)
        session = PredictorSession(ScriptedOracle({
            (99, frozenset()): 1.0,
            (99, frozenset({1})): -0.5,
        }))
        result = greedy_explain(session, graph, target, Policy("temporal"))
        assert result.events == frozenset({1})
        assert result.is_counterfactual
        assert result.oracle_calls == 2

    def test_empty_candidate_set(self):
        graph = TemporalGraph([Event(1, 0, 1, 1.0)], node_count=4)
        target = Event(9, 2, 3, 5.0)
        session = PredictorSession(ScriptedOracle({(9, frozenset()): 0.8}))
        result = greedy_explain(session, graph, target, Policy("temporal"))
        assert result.events == frozenset()
        assert not result.is_counterfactual
        assert result.candidate_size == 0

    def test_batch_shrinks_to_remaining_candidates(self):
        # Two candidates, l=10: one iteration samples both, the second the rest.
        graph, target = pair_history_graph(2)
        session = PredictorSession(ScriptedOracle({
            (99, frozenset()): 2.0,
            (99, frozenset({1})): 1.5,
            (99, frozenset({2})): 1.8,
            (99, frozenset({1, 2})): 1.9,
        }))
        result = greedy_explain(session, graph, target, Policy("temporal"),
                                GreedyConfig(l=10))
        assert result.omission_order == (1,)
        assert result.oracle_calls == 4

    def test_negative_original_climbs_upward(self):
        graph, target = pair_history_graph(2)
        session = PredictorSession(ScriptedOracle({
            (99, frozenset()): -1.0,
            (99, frozenset({1})): -0.4,
            (99, frozenset({2})): -0.9,
            (99, frozenset({1, 2})): 1.2,
        }))
        result = greedy_explain(session, graph, target, Policy("temporal"))
        assert result.omission_order == (1, 2)
        assert result.is_counterfactual

    def test_impact_tie_broken_by_policy_rank(self):
        graph, target = pair_history_graph(3)
        session = PredictorSession(ScriptedOracle({
            (99, frozenset()): 2.0,
            (99, frozenset({1})): 1.0,
            (99, frozenset({2})): 1.0,
            (99, frozenset({3})): 1.0,
        }, default=1.0))
        result = greedy_explain(session, graph, target, Policy("temporal"),
                                GreedyConfig(l=3))
        # Temporal rank is [1, 2, 3]; the first of the tied children wins.
        assert result.omission_order[0] == 1


class TestInvariants:
    def make_random_instance(self, rng):
        n_nodes = int(rng.integers(3, 9))
        events = [Event(i, int(rng.integers(0, n_nodes)),
                        int(rng.integers(0, n_nodes)), float(rng.integers(0, 30)))
                  for i in range(int(rng.integers(5, 25)))]
        graph = TemporalGraph(events, node_count=n_nodes)
        target = Event(1000, int(rng.integers(0, n_nodes)),
                       int(rng.integers(0, n_nodes)), 31.0)
        return graph, target

    def test_budget_and_result_dominance(self):
        rng = np.random.default_rng(21)
        params = ReferenceParams(a=1.0, b=0.5, c=0.6, lam=0.15)
        for trial in range(40):
            graph, target = self.make_random_instance(rng)
            backend = RecordingPredictor(params)
            session = PredictorSession(backend)
            policy = Policy("random", seed=trial)
            result = greedy_explain(session, graph, target, policy,
                                    GreedyConfig(l=4))
            assert result.oracle_calls <= 1 + 4 * max(result.iterations, 1)
            assert result.iterations <= max(result.candidate_size, 1)
            # The returned set's shift dominates everything evaluated.
            p_orig = result.original_logit
            best_seen = max(delta(p_orig, logit) for _, logit in backend.evaluations)
            returned = delta(p_orig, result.achieved_logit)
            assert returned >= best_seen - 1e-12

    def test_event_impact_first_step_is_best_singleton(self):
        rng = np.random.default_rng(33)
        params = ReferenceParams(a=1.0, b=0.5, c=0.6, lam=0.15)
        checked = 0
        while checked < 15:
            graph, target = self.make_random_instance(rng)
            session = PredictorSession(ReferencePredictor(params))
            candidates = candidate_events(graph, target, 2, 12)
            if not 1 <= len(candidates) <= 12:
                continue
            view = temporal_view(graph, target)
            p_orig = session.predict(view, target)
            impacts = {
                eid: delta(p_orig, session.predict(view.without((eid,)), target))
                for eid in candidates.event_ids
            }
            result = greedy_explain(
                session, graph, target, Policy("event-impact"),
                GreedyConfig(l=len(candidates), m_max=12))
            if result.omission_order:
                first = result.omission_order[0]
                assert impacts[first] == max(impacts.values())
            else:
                assert max(impacts.values()) <= 0
            checked += 1
