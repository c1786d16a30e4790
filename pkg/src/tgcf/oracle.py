"""Black-box future-link oracles: sessions, caching, and built-in predictors.

A :class:`PredictorSession` wraps one oracle backend together with a
prediction cache and a counter of true oracle invocations.  Sessions are
single-owner: concurrent searches must use separate sessions.
"""

from __future__ import annotations

import json
import math
import socket
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Protocol

from .graph import Event, GraphView, TemporalGraph, temporal_view

__all__ = [
    "OracleError",
    "DegenerateInstanceError",
    "classify",
    "delta",
    "ReferenceParams",
    "ReferencePredictor",
    "reference_score",
    "ScriptedOracle",
    "BridgeClient",
    "PredictorSession",
    "make_session",
]


class OracleError(RuntimeError):
    """Oracle failure: non-finite output, unknown fixture key, bridge fault."""


class DegenerateInstanceError(ValueError):
    """Raised for instances whose original logit makes scoring undefined."""


def classify(logit: float) -> int:
    """Binary prediction from a logit: 1 iff the link is predicted to occur.

    The boundary logit 0 (probability one half) classifies as 1.
    """
    if not math.isfinite(logit):
        raise OracleError(f"non-finite logit {logit!r}")
    return 1 if logit >= 0 else 0


def delta(p_orig: float, p_j: float) -> float:
    """Signed logit shift toward the opposite class caused by a perturbation.

    Positive values mean the perturbed prediction moved toward flipping the
    original one; the prediction actually flips when the shift exceeds
    ``abs(p_orig)``.
    """
    return p_orig - p_j if p_orig >= 0 else p_j - p_orig


# -------------------------------------------------------- reference predictor

@dataclass(frozen=True)
class ReferenceParams:
    """Weights of the built-in deterministic predictor.

    ``a`` scales direct recurrence, ``b`` scales common-neighbor closure,
    ``c`` is a bias, and ``lam`` the exponential decay per time unit.
    ``lam = 0`` disables decay.
    """

    a: float = 1.0
    b: float = 0.5
    c: float = 1.0
    lam: float = 1.0

    def __post_init__(self) -> None:
        if self.a <= 0:
            raise ValueError("recency weight a must be > 0")
        if self.b < 0:
            raise ValueError("common-neighbor weight b must be >= 0")
        if self.lam < 0:
            raise ValueError("decay rate lam must be >= 0")

    @classmethod
    def for_graph(cls, graph: TemporalGraph, a: float = 1.0, b: float = 0.5,
                  c: float = 1.0) -> "ReferenceParams":
        """Default weights with decay matched to the dataset's event density."""
        return cls(a=a, b=b, c=c, lam=1.0 / graph.mean_inter_event_gap())


def reference_score(params: ReferenceParams, view: GraphView, target: Event) -> float:
    """Deterministic recency/common-neighbor score for a future link.

    score = a * sum over prior (u, v) events of exp(-lam * age)
          + b * sum over common neighbors w of
                exp(-lam * age(last u~w)) * exp(-lam * age(last v~w))
          - c

    Neighbor sets and last-interaction times are taken from the view, so
    excluding events can only remove or weaken positive terms.
    """
    u, v, t = target.src, target.dst, target.timestamp
    lam = params.lam

    direct = 0.0
    last_u: dict[int, float] = {}
    for e in view.node_events(u):
        partner = e.dst if e.src == u else e.src
        if partner == v and {e.src, e.dst} == {u, v}:
            direct += math.exp(-lam * (t - e.timestamp))
        last_u[partner] = e.timestamp
    last_v: dict[int, float] = {}
    for e in view.node_events(v):
        partner = e.dst if e.src == v else e.src
        last_v[partner] = e.timestamp

    common = 0.0
    if params.b > 0:
        for w, t_uw in last_u.items():
            t_vw = last_v.get(w)
            if t_vw is not None:
                common += math.exp(-lam * (t - t_uw)) * math.exp(-lam * (t - t_vw))

    return params.a * direct + params.b * common - params.c


class OracleBackend(Protocol):
    num_layers: int

    def evaluate(self, view: GraphView, target: Event) -> float: ...


class ReferencePredictor:
    """Backend wrapping :func:`reference_score`.

    Reported as a 2-layer model: the score reads direct events (hop 1) and
    common-neighbor events (hop 2).
    """

    num_layers = 2

    def __init__(self, params: ReferenceParams | None = None):
        self.params = params or ReferenceParams()

    def evaluate(self, view: GraphView, target: Event) -> float:
        return reference_score(self.params, view, target)


class ScriptedOracle:
    """Fixture-driven backend mapping (target id, exclusion set) to a logit.

    The table is a mapping {(target_event_id, frozenset of excluded ids):
    logit}.  Lookups outside the table raise unless a default is given.
    """

    def __init__(self, table: Mapping[tuple[int, frozenset[int]], float],
                 default: float | None = None, num_layers: int = 2):
        self.table = dict(table)
        self.default = default
        self.num_layers = num_layers

    @classmethod
    def from_fixture(cls, path: str | Path) -> "ScriptedOracle":
        """Load a JSON fixture: {"entries": [{"target": id, "excluded": [...],
        "logit": x}], "default": optional, "num_layers": optional}."""
        doc = json.loads(Path(path).read_text())
        table = {
            (int(entry["target"]), frozenset(int(i) for i in entry["excluded"])):
                float(entry["logit"])
            for entry in doc["entries"]
        }
        default = doc.get("default")
        return cls(table, default=None if default is None else float(default),
                   num_layers=int(doc.get("num_layers", 2)))

    def evaluate(self, view: GraphView, target: Event) -> float:
        key = (target.event_id, frozenset(view.excluded))
        if key in self.table:
            return self.table[key]
        if self.default is not None:
            return self.default
        raise OracleError(
            f"scripted oracle has no entry for target {target.event_id} "
            f"with exclusions {sorted(view.excluded)}")


class BridgeClient:
    """Line-delimited JSON client for an external model server.

    One connection, one in-flight request.  The server owns the event
    features; requests carry event ids only.
    """

    def __init__(self, address: str, timeout: float = 60.0):
        host, _, port = address.rpartition(":")
        if not host or not port:
            raise ValueError(f"bridge address must be host:port, got {address!r}")
        self._sock = socket.create_connection((host, int(port)), timeout=timeout)
        self._reader = self._sock.makefile("r", encoding="utf-8")
        self._writer = self._sock.makefile("w", encoding="utf-8")
        self._request_id = 0
        info = self._call({"type": "info"})
        self.info = info.get("info", {})
        self.num_layers = int(self.info.get("num_layers", 2))

    def _call(self, payload: dict) -> dict:
        self._request_id += 1
        payload = dict(payload, request_id=self._request_id)
        try:
            self._writer.write(json.dumps(payload) + "\n")
            self._writer.flush()
            line = self._reader.readline()
        except OSError as exc:
            raise OracleError(f"bridge transport failure: {exc}") from exc
        if not line:
            raise OracleError("bridge closed the connection")
        response = json.loads(line)
        if response.get("request_id") != self._request_id:
            raise OracleError(
                f"bridge response id {response.get('request_id')} does not match "
                f"request id {self._request_id}")
        if response.get("error") is not None:
            raise OracleError(f"bridge error: {response['error']}")
        return response

    def evaluate(self, view: GraphView, target: Event) -> float:
        response = self._call({
            "type": "predict",
            "target_event_id": target.event_id,
            "excluded_event_ids": sorted(view.excluded),
        })
        if "logit" not in response:
            raise OracleError("bridge predict response carries no logit")
        return float(response["logit"])

    def reset(self) -> None:
        self._call({"type": "reset"})

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass


class PredictorSession:
    """One oracle backend plus a prediction cache and a call counter.

    ``call_counter`` counts true oracle invocations only; cache hits return
    the originally computed logit bit-identically.  A session may expose a
    cheap approximate path via a backend ``evaluate_approx``; searches score
    with the approximation and re-confirm with the exact predictor before
    recording a counterfactual.  The default backends are exact-only.
    """

    def __init__(self, backend: OracleBackend):
        self.backend = backend
        self.call_counter = 0
        self._cache: dict[tuple[int, tuple[int, ...]], float] = {}
        self.uses_approximation = hasattr(backend, "evaluate_approx")

    @property
    def num_layers(self) -> int:
        return getattr(self.backend, "num_layers", 2)

    @staticmethod
    def _key(view: GraphView, target: Event) -> tuple[int, tuple[int, ...]]:
        return (target.event_id, tuple(sorted(view.excluded)))

    def _check_view(self, view: GraphView, target: Event) -> None:
        if view.cutoff_time != target.timestamp or view.cutoff_event_id > target.event_id:
            raise ValueError(
                f"view cutoff {view.cutoff} does not match target "
                f"({target.timestamp}, {target.event_id})")

    def predict(self, view: GraphView, target: Event) -> float:
        """Exact logit for the target over the view, cached per exclusion set."""
        self._check_view(view, target)
        key = self._key(view, target)
        if key in self._cache:
            return self._cache[key]
        value = float(self.backend.evaluate(view, target))
        if not math.isfinite(value):
            raise OracleError(f"oracle returned non-finite logit {value!r} for {key}")
        self.call_counter += 1
        self._cache[key] = value
        return value

    def predict_approx(self, view: GraphView, target: Event) -> float:
        """Approximate logit when the backend has a cheap path, else exact."""
        if not self.uses_approximation:
            return self.predict(view, target)
        self._check_view(view, target)
        value = self.backend.evaluate_approx(view, target)  # type: ignore[attr-defined]
        if not math.isfinite(value):
            raise OracleError(f"approximate oracle returned non-finite logit {value!r}")
        return value

    def predict_excluding(self, graph: TemporalGraph, target: Event,
                          excluded: Iterable[int] = (),
                          cutoff: tuple[float, int] | None = None) -> float:
        return self.predict(temporal_view(graph, target, excluded, cutoff=cutoff), target)


def make_session(spec: str, graph: TemporalGraph | None = None) -> PredictorSession:
    """Build a session from a CLI oracle spec.

    Accepted forms: ``reference``, ``bridge:<host:port>``, ``fixture:<path>``.
    """
    if spec == "reference":
        if graph is None:
            raise ValueError("reference oracle needs the dataset graph")
        return PredictorSession(ReferencePredictor(ReferenceParams.for_graph(graph)))
    if spec.startswith("bridge:"):
        return PredictorSession(BridgeClient(spec.split(":", 1)[1]))
    if spec.startswith("fixture:"):
        return PredictorSession(ScriptedOracle.from_fixture(spec.split(":", 1)[1]))
    raise ValueError(f"unknown oracle spec {spec!r}")
