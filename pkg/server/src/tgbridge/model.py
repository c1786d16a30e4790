"""Deterministic two-layer temporal attention scorer with checkpoint I/O.

The architecture is a desk-scale stand-in for a trained temporal graph
model: layer one summarizes each endpoint's recent events, layer two
aggregates the layer-one states of the partners at their event times, and a
readout maps both endpoint embeddings to one logit.  Weights come from a
seeded initialization stored in the checkpoint; inference is pure numpy with
no sampling, so repeated calls are bit-identical.
"""

from __future__ import annotations

import argparse
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import EventLog, load_jodie_csv


@dataclass(frozen=True)
class ModelConfig:
    model_name: str = "toy_attention"
    dim: int = 16
    time_dim: int = 8
    num_neighbors: int = 10
    num_layers: int = 2
    max_nodes: int = 10_000
    seed: int = 0


class ToyAttentionModel:
    def __init__(self, config: ModelConfig, weights: dict[str, np.ndarray]):
        self.config = config
        self.weights = weights

    @classmethod
    def initialize(cls, config: ModelConfig) -> "ToyAttentionModel":
        rng = np.random.default_rng(config.seed)
        d, td = config.dim, config.time_dim

        def glorot(shape):
            scale = np.sqrt(2.0 / sum(shape))
            return rng.normal(0.0, scale, size=shape)

        weights = {
            "node_emb": rng.normal(0.0, 1.0, size=(config.max_nodes, d)),
            "time_scales": np.geomspace(0.1, 100.0, td),
            "w_msg1": glorot((d, d + td)),
            "w_self1": glorot((d, d)),
            "w_msg2": glorot((d, d + td)),
            "w_self2": glorot((d, d)),
            "w_out": glorot((3 * d,)),
            "b_out": np.zeros(()),
        }
        return cls(config, weights)

    # ------------------------------------------------------------- forward
    def _time_features(self, dt: float) -> np.ndarray:
        return np.cos(dt / self.weights["time_scales"])

    def _embed(self, log: EventLog, node: int, t: float, max_id: int,
               excluded: frozenset[int], layer: int) -> np.ndarray:
        z_self = self.weights["node_emb"][node]
        if layer == 0:
            return z_self
        w_msg = self.weights[f"w_msg{layer}"]
        w_self = self.weights[f"w_self{layer}"]
        neighbors = log.neighbors_before(node, t, max_id, excluded,
                                         self.config.num_neighbors)
        message = np.zeros(self.config.dim)
        if neighbors:
            for partner, t_event in neighbors:
                z_partner = self._embed(log, partner, t_event, max_id,
                                        excluded, layer - 1)
                features = np.concatenate([z_partner, self._time_features(t - t_event)])
                message += w_msg @ features
            message /= np.sqrt(len(neighbors))
        lower = self._embed(log, node, t, max_id, excluded, layer - 1)
        return np.tanh(w_self @ lower + message)

    def predict(self, log: EventLog, target_event_id: int,
                excluded: frozenset[int]) -> float:
        """Logit for the target event given the filtered history.

        The history is rebuilt per call from scratch (everything strictly
        before the target minus the excluded ids), so exclusion is exact.
        """
        if not log.has_event(target_event_id):
            raise KeyError(f"unknown event id {target_event_id}")
        u = int(log.src[target_event_id])
        v = int(log.dst[target_event_id])
        t = float(log.timestamp[target_event_id])
        depth = self.config.num_layers
        z_u = self._embed(log, u, t, target_event_id, excluded, depth)
        z_v = self._embed(log, v, t, target_event_id, excluded, depth)
        readout = np.concatenate([z_u, z_v, z_u * z_v])
        return float(self.weights["w_out"] @ readout + self.weights["b_out"])


# ---------------------------------------------------------------- storage

def save_checkpoint(model: ToyAttentionModel, path: str | Path) -> None:
    meta = json.dumps(model.config.__dict__)
    np.savez(path, __config__=np.frombuffer(meta.encode(), dtype=np.uint8),
             **model.weights)


def load_checkpoint(path: str | Path) -> ToyAttentionModel:
    archive = np.load(Path(path))
    meta = json.loads(archive["__config__"].tobytes().decode())
    config = ModelConfig(**meta)
    weights = {name: archive[name] for name in archive.files if name != "__config__"}
    return ToyAttentionModel(config, weights)


def make_checkpoint_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        description="Create a randomly initialized toy checkpoint for a dataset")
    parser.add_argument("--data", required=True)
    parser.add_argument("--bipartite", action="store_true")
    parser.add_argument("--out", required=True)
    parser.add_argument("--dim", type=int, default=16)
    parser.add_argument("--layers", type=int, default=2)
    parser.add_argument("--neighbors", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    log = load_jodie_csv(args.data, bipartite=args.bipartite)
    config = ModelConfig(dim=args.dim, num_layers=args.layers,
                         num_neighbors=args.neighbors,
                         max_nodes=log.node_count, seed=args.seed)
    save_checkpoint(ToyAttentionModel.initialize(config), args.out)
    print(f"checkpoint written to {args.out} "
          f"({config.num_layers} layers, dim {config.dim}, "
          f"{log.node_count} nodes)")
    return 0


if __name__ == "__main__":
    raise SystemExit(make_checkpoint_main())
