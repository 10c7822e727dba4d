"""Protocol server: REQ/RES/ERR frames over stdio or TCP.

Frames:
    client -> ``REQ <id> <direction>\\n<payload>\\n``
    server -> ``RES <id> <k>\\n`` + k output lines, or ``ERR <id> <reason>\\n``

One request is in flight per connection; the TCP listener accepts multiple
concurrent connections, each handled on its own thread.
"""

from __future__ import annotations

import socketserver
from pathlib import Path
from typing import Callable, TextIO

from .config import AdapterConfig
from .model import LanguageModel, ModelError

Generator = Callable[[str, str], list[str]]  # (direction, payload) -> outputs

DIRECTIONS = ("nlg", "nlu")


class RequestError(ValueError):
    """Reported to the client as an ERR frame; the connection survives."""


def model_generator(model_root: str | Path, cfg: AdapterConfig) -> Generator:
    """Lazily load one model artifact per direction from ``model_root``."""
    root = Path(model_root)
    loaded: dict[str, LanguageModel] = {}

    def generator(direction: str, payload: str) -> list[str]:
        if direction not in loaded:
            try:
                loaded[direction] = LanguageModel.load(root / direction)
            except (ModelError, OSError) as e:
                raise RequestError(f"cannot load {direction} model: {e}") from e
        try:
            return loaded[direction].generate(
                payload,
                samples=cfg.samples,
                top_p=cfg.top_p,
                temperature=cfg.temperature,
                max_new_tokens=cfg.max_new_tokens,
            )
        except ModelError as e:
            raise RequestError(str(e)) from e

    return generator


def stub_generator(mode: str, cfg: AdapterConfig) -> Generator:
    """Model-free generation hook used by the protocol conformance tests."""

    def generator(direction: str, payload: str) -> list[str]:
        if mode == "echo":
            return [payload] * cfg.samples
        if mode == "constant":
            return ["beep"] * cfg.samples
        raise RequestError(f"unknown stub mode {mode!r}")

    return generator


def handle_stream(reader: TextIO, writer: TextIO, generator: Generator) -> None:
    """Serve frames until EOF. Request-level failures become ERR frames."""
    while True:
        header = reader.readline()
        if not header:
            return
        parts = header.rstrip("\n").split(" ")
        if len(parts) != 3 or parts[0] != "REQ":
            writer.write("ERR 0 malformed request header\n")
            writer.flush()
            continue
        _, req_id, direction = parts
        payload = reader.readline()
        if not payload:
            writer.write(f"ERR {req_id} missing payload line\n")
            writer.flush()
            return
        payload = payload.rstrip("\n")
        try:
            if direction not in DIRECTIONS:
                raise RequestError(f"unknown direction {direction!r}")
            if not payload.strip():
                raise RequestError("empty payload")
            outputs = generator(direction, payload)
        except RequestError as e:
            reason = str(e).replace("\n", " ")
            writer.write(f"ERR {req_id} {reason}\n")
            writer.flush()
            continue
        writer.write(f"RES {req_id} {len(outputs)}\n")
        for line in outputs:
            writer.write(line.replace("\n", " ") + "\n")
        writer.flush()


def serve_stdio(generator: Generator) -> None:
    import sys

    handle_stream(sys.stdin, sys.stdout, generator)


def serve_tcp(generator: Generator, host: str, port: int) -> socketserver.ThreadingTCPServer:
    """Start a threaded TCP listener; caller owns shutdown."""

    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            import io

            reader = io.TextIOWrapper(self.rfile, encoding="utf-8", newline="\n")
            writer = io.TextIOWrapper(
                self.wfile, encoding="utf-8", newline="\n", write_through=True
            )
            handle_stream(reader, writer, generator)

    server = socketserver.ThreadingTCPServer((host, port), Handler)
    server.daemon_threads = True
    return server
