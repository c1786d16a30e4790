"""Shared fixtures: a toy dataset file, checkpoint, and running servers."""

from __future__ import annotations

import threading

import numpy as np
import pytest

from tgbridge.data import load_jodie_csv
from tgbridge.model import ModelConfig, ToyAttentionModel, save_checkpoint
from tgbridge.server import serve_tcp
from tgbridge.service import BridgeService


def write_toy_dataset(path, n_users=20, n_items=12, n_events=800, seed=5):
    rng = np.random.default_rng(seed)
    lines = ["user_id,item_id,timestamp,state_label"]
    t = 0.0
    for _ in range(n_events):
        t += float(rng.uniform(0.02, 0.4))
        lines.append(f"{rng.integers(0, n_users)},{rng.integers(0, n_items)},{t:.5f},0")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture(scope="session")
def toy_dataset(tmp_path_factory):
    return write_toy_dataset(tmp_path_factory.mktemp("data") / "toy.csv")


@pytest.fixture(scope="session")
def toy_log(toy_dataset):
    return load_jodie_csv(toy_dataset, bipartite=True)


@pytest.fixture(scope="session")
def toy_model(toy_log):
    config = ModelConfig(dim=12, time_dim=6, num_neighbors=8, num_layers=2,
                         max_nodes=toy_log.node_count, seed=3)
    return ToyAttentionModel.initialize(config)


@pytest.fixture(scope="session")
def toy_checkpoint(tmp_path_factory, toy_model):
    path = tmp_path_factory.mktemp("ckpt") / "toy.npz"
    save_checkpoint(toy_model, path)
    return path


@pytest.fixture()
def running_server(toy_model, toy_log):
    """A live TCP server for the toy model; yields its port."""
    service = BridgeService(toy_model, toy_log)
    port_holder: dict[str, int] = {}
    ready = threading.Event()

    def on_ready(port: int) -> None:
        port_holder["port"] = port
        ready.set()

    thread = threading.Thread(
        target=serve_tcp,
        args=(service, "127.0.0.1", 0),
        kwargs={"max_connections": 64, "ready_callback": on_ready},
        daemon=True)
    thread.start()
    assert ready.wait(timeout=10)
    yield port_holder["port"]
