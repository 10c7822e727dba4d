import subprocess
import sys

import pytest


class ProtocolClient:
    """Line-frame client over a spawned stdio server process."""

    def __init__(self, argv: list[str]):
        self.proc = subprocess.Popen(
            argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            encoding="utf-8",
        )
        self.next_id = 0

    def send_raw(self, text: str) -> None:
        assert self.proc.stdin is not None
        self.proc.stdin.write(text)
        self.proc.stdin.flush()

    def read_frame(self) -> tuple[str, str, str, list[str]]:
        """Returns (kind, id, tail, lines) where tail is count or reason."""
        assert self.proc.stdout is not None
        header = self.proc.stdout.readline()
        assert header, "server closed the stream"
        kind, req_id, tail = header.rstrip("\n").split(" ", 2)
        lines = []
        if kind == "RES":
            lines = [self.proc.stdout.readline().rstrip("\n") for _ in range(int(tail))]
        return kind, req_id, tail, lines

    def request(self, direction: str, payload: str):
        self.next_id += 1
        self.send_raw(f"REQ {self.next_id} {direction}\n{payload}\n")
        return self.read_frame()

    def close(self) -> None:
        if self.proc.stdin:
            self.proc.stdin.close()
        self.proc.wait(timeout=30)


@pytest.fixture
def spawn_server():
    clients = []

    def factory(*args: str) -> ProtocolClient:
        client = ProtocolClient([sys.executable, "-m", "lm_adapter.cli", *args])
        clients.append(client)
        return client

    yield factory
    for client in clients:
        client.close()
