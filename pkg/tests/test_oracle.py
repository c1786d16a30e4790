"""Prediction sessions, the impact function, and the reference predictor."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tgcf import (Event, OracleError, PredictorSession, ReferenceParams,
                  ReferencePredictor, ScriptedOracle, TemporalGraph, classify,
                  delta, reference_score, temporal_view)


class TestClassify:
    def test_positive_logit(self):
        assert classify(2.854) == 1

    def test_negative_logit(self):
        assert classify(-0.052) == 0

    def test_boundary_rounds_up(self):
        assert classify(0.0) == 1

    def test_non_finite_rejected(self):
        with pytest.raises(OracleError):
            classify(float("nan"))
        with pytest.raises(OracleError):
            classify(float("inf"))


class TestDelta:
    def test_positive_original(self):
        assert delta(2.854, 1.996) == pytest.approx(0.858, abs=1e-12)

    def test_flip_exceeds_magnitude(self):
        shift = delta(2.854, -0.052)
        assert shift == pytest.approx(2.906, abs=1e-12)
        assert shift > abs(2.854)

    def test_identity_is_zero(self):
        for x in (-3.2, 0.0, 0.7, 11.0):
            assert delta(x, x) == 0.0

    # Dyadic grid values keep float subtraction exact, so the strict
    # real-valued properties transfer verbatim.
    dyadic = st.integers(-50 * 2 ** 16, 50 * 2 ** 16).map(lambda k: k / 2 ** 16)

    @given(dyadic, dyadic, dyadic)
    @settings(max_examples=200)
    def test_monotone_in_perturbed_logit(self, p_orig, a, b):
        if a == b:
            return
        lo, hi = min(a, b), max(a, b)
        if p_orig >= 0:
            assert delta(p_orig, lo) > delta(p_orig, hi)
        else:
            assert delta(p_orig, lo) < delta(p_orig, hi)

    @given(dyadic, dyadic)
    @settings(max_examples=300)
    def test_exceeding_magnitude_means_sign_flip(self, p_orig, p_j):
        if p_orig == 0 or p_j == 0:
            return
        flips = (p_j > 0) != (p_orig > 0)
        assert (delta(p_orig, p_j) > abs(p_orig)) == flips


def two_node_graph(times, u=0, v=1, node_count=2):
    return TemporalGraph(
        [Event(i, u, v, t) for i, t in enumerate(times)], node_count=node_count)


class TestReferenceScore:
    def test_empty_view_is_negative_bias(self):
        g = two_node_graph([1.0])
        target = Event(9, 0, 1, 5.0)
        view = temporal_view(g, target, excluded={0})
        params = ReferenceParams(a=1.0, b=0.5, c=1.25, lam=1.0)
        assert reference_score(params, view, target) == -1.25

    def test_single_prior_event_with_halving_decay(self):
        # exp(-ln 2 * 1) = 0.5 for an event one time unit before the target.
        g = two_node_graph([4.0])
        target = Event(9, 0, 1, 5.0)
        view = temporal_view(g, target)
        params = ReferenceParams(a=1.0, b=0.0, c=0.0, lam=math.log(2))
        assert reference_score(params, view, target) == pytest.approx(0.5, abs=1e-12)

    def test_decay_disabled_counts_prior_events(self):
        g = two_node_graph([1.0, 2.0, 3.0])
        target = Event(9, 0, 1, 5.0)
        view = temporal_view(g, target)
        params = ReferenceParams(a=1.0, b=0.0, c=0.0, lam=0.0)
        assert reference_score(params, view, target) == 3.0

    def test_common_neighbor_term(self):
        # u-w at t=1 and v-w at t=2; target (u, v) at t=3 with lam=0:
        # no direct events, one common neighbor -> score = b - c.
        g = TemporalGraph([Event(0, 0, 2, 1.0), Event(1, 1, 2, 2.0)], node_count=3)
        target = Event(9, 0, 1, 3.0)
        view = temporal_view(g, target)
        params = ReferenceParams(a=1.0, b=0.75, c=0.25, lam=0.0)
        assert reference_score(params, view, target) == pytest.approx(0.5, abs=1e-12)

    def test_excluding_direct_event_never_increases_logit(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            times = sorted(rng.uniform(0, 10, size=rng.integers(1, 6)))
            g = two_node_graph([float(t) for t in times])
            target = Event(99, 0, 1, 11.0)
            params = ReferenceParams(a=1.0, b=0.0, c=0.4, lam=0.3)
            base = reference_score(params, temporal_view(g, target), target)
            for eid in range(len(times)):
                dropped = reference_score(
                    params, temporal_view(g, target, excluded={eid}), target)
                assert dropped <= base + 1e-12

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            ReferenceParams(a=0.0)
        with pytest.raises(ValueError):
            ReferenceParams(b=-0.1)
        with pytest.raises(ValueError):
            ReferenceParams(lam=-1.0)

    def test_default_decay_from_graph_density(self):
        g = two_node_graph([0.0, 2.0, 4.0])
        params = ReferenceParams.for_graph(g)
        assert params.lam == pytest.approx(0.5)


class TestPredictorSession:
    def test_cache_returns_identical_logit_and_counts_misses(self):
        g = two_node_graph([1.0, 2.0])
        target = Event(9, 0, 1, 5.0)
        session = PredictorSession(ReferencePredictor(ReferenceParams(lam=0.1)))
        view = temporal_view(g, target, excluded={0})
        first = session.predict(view, target)
        second = session.predict(view, target)
        assert first == second
        assert session.call_counter == 1

    def test_counter_counts_distinct_exclusion_sets(self):
        g = two_node_graph([1.0, 2.0, 3.0])
        target = Event(9, 0, 1, 5.0)
        session = PredictorSession(ReferencePredictor())
        exclusions = [frozenset(), frozenset({0}), frozenset({0, 1}), frozenset({0})]
        for excl in exclusions:
            session.predict(temporal_view(g, target, excluded=excl), target)
        assert session.call_counter == 3

    def test_replay_with_cleared_cache_is_identical(self):
        g = two_node_graph([1.0, 2.0, 3.0])
        target = Event(9, 0, 1, 5.0)
        exclusions = [frozenset(), frozenset({1}), frozenset({0, 2}), frozenset({1})]

        def run():
            session = PredictorSession(ReferencePredictor(ReferenceParams(lam=0.7)))
            return [session.predict(temporal_view(g, target, excluded=e), target)
                    for e in exclusions]

        assert run() == run()

    def test_view_cutoff_must_match_target(self):
        g = two_node_graph([1.0, 2.0])
        session = PredictorSession(ReferencePredictor())
        view = temporal_view(g, g.event_by_id(1))
        with pytest.raises(ValueError, match="cutoff"):
            session.predict(view, Event(9, 0, 1, 5.0))

    def test_non_finite_oracle_output_is_an_error(self):
        g = two_node_graph([1.0])
        target = Event(9, 0, 1, 5.0)
        session = PredictorSession(
            ScriptedOracle({(9, frozenset()): float("inf")}))
        with pytest.raises(OracleError, match="non-finite"):
            session.predict(temporal_view(g, target), target)


class TestScriptedOracle:
    def test_lookup_and_missing_key(self, tmp_path):
        oracle = ScriptedOracle({(9, frozenset({1, 2})): 0.25})
        g = two_node_graph([1.0, 2.0, 3.0])
        target = Event(9, 0, 1, 5.0)
        session = PredictorSession(oracle)
        assert session.predict(temporal_view(g, target, excluded={1, 2}), target) == 0.25
        with pytest.raises(OracleError, match="no entry"):
            session.predict(temporal_view(g, target), target)

    def test_fixture_round_trip(self, tmp_path):
        fixture = tmp_path / "oracle.json"
        fixture.write_text(
            '{"entries": [{"target": 9, "excluded": [], "logit": 1.5},'
            ' {"target": 9, "excluded": [0], "logit": -0.5}],'
            ' "default": 0.125, "num_layers": 3}')
        oracle = ScriptedOracle.from_fixture(fixture)
        g = two_node_graph([1.0, 2.0])
        target = Event(9, 0, 1, 5.0)
        session = PredictorSession(oracle)
        assert session.num_layers == 3
        assert session.predict(temporal_view(g, target), target) == 1.5
        assert session.predict(temporal_view(g, target, excluded={0}), target) == -0.5
        assert session.predict(temporal_view(g, target, excluded={1}), target) == 0.125


class TestBridgeClientFaults:
    """Client behavior against misbehaving servers."""

    @staticmethod
    def serve_once(handler):
        """One-connection server running ``handler(reader, writer)``; returns port."""
        import socket
        import threading

        server_socket = socket.create_server(("127.0.0.1", 0))
        port = server_socket.getsockname()[1]

        def run():
            with server_socket:
                connection, _ = server_socket.accept()
                with connection:
                    handler(connection.makefile("r", encoding="utf-8"),
                            connection.makefile("w", encoding="utf-8"))

        threading.Thread(target=run, daemon=True).start()
        return port

    @staticmethod
    def reply(writer, doc):
        import json
        writer.write(json.dumps(doc) + "\n")
        writer.flush()

    def test_request_id_mismatch_is_an_oracle_error(self):
        import json
        from tgcf.oracle import BridgeClient

        def handler(reader, writer):
            reader.readline()  # info
            self.reply(writer, {"request_id": 1, "info": {"num_layers": 2}})
            reader.readline()  # predict answered with a stale id
            self.reply(writer, {"request_id": 999, "logit": 1.0})

        client = BridgeClient(f"127.0.0.1:{self.serve_once(handler)}")
        with pytest.raises(OracleError, match="does not match"):
            client._call({"type": "predict", "target_event_id": 1,
                          "excluded_event_ids": []})
        client.close()

    def test_error_response_is_raised(self):
        def handler(reader, writer):
            reader.readline()
            self.reply(writer, {"request_id": 1, "info": {"num_layers": 2}})
            reader.readline()
            self.reply(writer, {"request_id": 2, "error": "unknown event id 7"})

        from tgcf.oracle import BridgeClient
        client = BridgeClient(f"127.0.0.1:{self.serve_once(handler)}")
        with pytest.raises(OracleError, match="unknown event id"):
            client._call({"type": "predict", "target_event_id": 7,
                          "excluded_event_ids": []})
        client.close()

    def test_closed_connection_is_an_oracle_error(self):
        def handler(reader, writer):
            reader.readline()
            self.reply(writer, {"request_id": 1, "info": {"num_layers": 2}})
            # connection closes without answering the next request

        from tgcf.oracle import BridgeClient
        client = BridgeClient(f"127.0.0.1:{self.serve_once(handler)}")
        with pytest.raises(OracleError, match="closed"):
            client._call({"type": "predict", "target_event_id": 1,
                          "excluded_event_ids": []})
        client.close()

    def test_bad_address_rejected(self):
        from tgcf.oracle import BridgeClient
        with pytest.raises(ValueError, match="host:port"):
            BridgeClient("no-port-here")


class TestMakeSession:
    def test_unknown_spec_rejected(self):
        from tgcf.oracle import make_session
        with pytest.raises(ValueError, match="unknown oracle spec"):
            make_session("magic")

    def test_reference_needs_a_graph(self):
        from tgcf.oracle import make_session
        with pytest.raises(ValueError, match="graph"):
            make_session("reference")
