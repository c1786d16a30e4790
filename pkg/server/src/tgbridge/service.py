"""Request handling: the protocol semantics independent of transport.

Requests and responses are JSON objects; every response echoes the request
id and carries exactly one of ``logit``, ``error``, or ``info``.  Errors
(unknown event ids, malformed requests) keep the connection usable.
"""

from __future__ import annotations

import json
import math

from .data import EventLog
from .model import ToyAttentionModel


class BridgeService:
    def __init__(self, model: ToyAttentionModel, log: EventLog):
        self.model = model
        self.log = log
        self._cache: dict[tuple[int, tuple[int, ...]], float] = {}

    def info_payload(self) -> dict:
        return {
            "model_name": self.model.config.model_name,
            "num_layers": self.model.config.num_layers,
            "dataset_name": self.log.name,
        }

    def handle_line(self, line: str) -> dict:
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            return {"request_id": None, "error": f"malformed request: {exc}"}
        if not isinstance(request, dict):
            return {"request_id": None, "error": "request must be a JSON object"}
        request_id = request.get("request_id")
        try:
            return self._dispatch(request, request_id)
        except Exception as exc:  # noqa: BLE001 - fault isolation per request
            return {"request_id": request_id, "error": f"{type(exc).__name__}: {exc}"}

    def _dispatch(self, request: dict, request_id) -> dict:
        kind = request.get("type")
        if kind == "info":
            return {"request_id": request_id, "info": self.info_payload()}
        if kind == "reset":
            self._cache.clear()
            return {"request_id": request_id, "info": self.info_payload()}
        if kind == "predict":
            return self._predict(request, request_id)
        return {"request_id": request_id, "error": f"unknown request type {kind!r}"}

    def _predict(self, request: dict, request_id) -> dict:
        target = request.get("target_event_id")
        if not isinstance(target, int):
            return {"request_id": request_id,
                    "error": "predict needs an integer target_event_id"}
        if not self.log.has_event(target):
            return {"request_id": request_id,
                    "error": f"unknown event id {target}"}
        raw_excluded = request.get("excluded_event_ids", [])
        if not isinstance(raw_excluded, list) or \
                not all(isinstance(i, int) for i in raw_excluded):
            return {"request_id": request_id,
                    "error": "excluded_event_ids must be a list of integers"}
        unknown = [i for i in raw_excluded if not self.log.has_event(i)]
        if unknown:
            return {"request_id": request_id,
                    "error": f"unknown excluded event ids {unknown[:5]}"}

        key = (target, tuple(sorted(set(raw_excluded))))
        if key not in self._cache:
            self._cache[key] = self.model.predict(self.log, target,
                                                  frozenset(key[1]))
        logit = self._cache[key]
        if not math.isfinite(logit):
            return {"request_id": request_id,
                    "error": f"model produced non-finite logit {logit!r}"}
        return {"request_id": request_id, "logit": logit}
