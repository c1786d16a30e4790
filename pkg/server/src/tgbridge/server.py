"""Transports and the command-line entry point.

One client connection at a time, one in-flight request per connection;
responses go back in request order.  ``--listen host:port`` serves TCP,
``--listen stdio`` serves the standard streams (one session).
"""

from __future__ import annotations

import argparse
import json
import socket
import sys

import numpy as np

from .data import load_jodie_csv
from .model import load_checkpoint
from .service import BridgeService


def serve_stream(service: BridgeService, reader, writer) -> None:
    for line in reader:
        if not line.strip():
            continue
        response = service.handle_line(line)
        writer.write(json.dumps(response) + "\n")
        writer.flush()


def serve_tcp(service: BridgeService, host: str, port: int,
              max_connections: int | None = None,
              ready_callback=None) -> None:
    with socket.create_server((host, port)) as server_socket:
        if ready_callback is not None:
            ready_callback(server_socket.getsockname()[1])
        served = 0
        while max_connections is None or served < max_connections:
            connection, _ = server_socket.accept()
            with connection:
                reader = connection.makefile("r", encoding="utf-8")
                writer = connection.makefile("w", encoding="utf-8")
                try:
                    serve_stream(service, reader, writer)
                except (BrokenPipeError, ConnectionResetError):
                    pass
            served += 1


def build_service(checkpoint: str, data: str, bipartite: bool,
                  seed: int | None, deterministic: bool) -> BridgeService:
    model = load_checkpoint(checkpoint)
    log = load_jodie_csv(data, bipartite=bipartite)
    if log.node_count > model.config.max_nodes:
        raise SystemExit(
            f"checkpoint covers {model.config.max_nodes} nodes but the dataset "
            f"has {log.node_count}; rebuild the checkpoint for this dataset")
    # The toy model samples nothing at inference time, so determinism holds
    # regardless; the flags exist for adapters that need them.
    if seed is not None:
        np.random.seed(seed)
    _ = deterministic
    return BridgeService(model, log)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="tgcf-bridge",
        description="Serve a link-prediction checkpoint over line-delimited JSON")
    parser.add_argument("--checkpoint", required=True)
    parser.add_argument("--data", required=True)
    parser.add_argument("--bipartite", action="store_true")
    parser.add_argument("--listen", required=True,
                        help="host:port for TCP, or 'stdio'")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--deterministic", action="store_true")
    args = parser.parse_args(argv)

    service = build_service(args.checkpoint, args.data, args.bipartite,
                            args.seed, args.deterministic)
    if args.listen == "stdio":
        serve_stream(service, sys.stdin, sys.stdout)
        return 0
    host, _, port = args.listen.rpartition(":")
    if not host or not port:
        parser.error(f"--listen must be host:port or stdio, got {args.listen!r}")

    def announce(bound_port: int) -> None:
        print(f"serving {service.info_payload()['model_name']} on "
              f"{host}:{bound_port}", file=sys.stderr, flush=True)

    serve_tcp(service, host, int(port), ready_callback=announce)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
