"""Agentless command channels to devices.

The reconciler pushes rendered commands through one of these.  In-process
channels talk straight to a SimDevice; TCP/HTTP channels speak the devsim
wire protocol to a bound simulator (or, later, a real transport adapter
behind the same interface).
"""

from __future__ import annotations

import socket
from typing import Optional, Protocol

import httpx

from .devsim import SimNetwork
from .dialect import Dialect
from .errors import ChannelError


class Channel(Protocol):
    def probe(self) -> bool: ...
    def push(self, command: str) -> str:
        """Send one command; returns "ok" or "err <reason>". Raises ChannelError."""
        ...
    def show(self) -> str: ...
    def close(self) -> None: ...


class InProcessChannel:
    def __init__(self, device):
        self._device = device

    def probe(self) -> bool:
        try:
            return self._device.probe() == "ok"
        except ChannelError:
            return False

    def push(self, command: str) -> str:
        return self._device.push(command)

    def show(self) -> str:
        return self._device.show()

    def close(self) -> None:
        pass


class TcpChannel:
    """Newline-delimited command channel (devsim wire protocol)."""

    def __init__(self, host: str, port: int, dialect: Dialect, timeout: float = 5.0):
        self._dialect = dialect
        try:
            self._sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise ChannelError(f"connect {host}:{port} failed: {exc}") from exc
        self._sock.settimeout(timeout)
        self._rfile = self._sock.makefile("r", encoding="utf-8", newline="\n")

    def _send(self, line: str) -> None:
        try:
            self._sock.sendall((line + "\n").encode("utf-8"))
        except OSError as exc:
            raise ChannelError(str(exc)) from exc

    def _recv_line(self) -> str:
        try:
            line = self._rfile.readline()
        except OSError as exc:
            raise ChannelError(str(exc)) from exc
        if not line:
            raise ChannelError("connection closed by device")
        return line.rstrip("\n")

    def probe(self) -> bool:
        try:
            self._send(self._dialect.probe_command)
            return self._recv_line() == "ok"
        except ChannelError:
            return False

    def push(self, command: str) -> str:
        self._send(command)
        return self._recv_line()

    def show(self) -> str:
        self._send(self._dialect.show_command)
        lines: list[str] = []
        while True:
            line = self._recv_line()
            if line == ".":
                return "\n".join(lines)
            lines.append(line)

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass


class HttpChannel:
    """restish over real HTTP: set -> PUT path/value, delete -> DELETE path."""

    def __init__(self, base_url: str, timeout: float = 5.0):
        self._client = httpx.Client(base_url=base_url, timeout=timeout)

    def probe(self) -> bool:
        try:
            return self._client.get("/health").status_code == 200
        except httpx.HTTPError:
            return False

    def push(self, command: str) -> str:
        words = command.split(None, 2)
        try:
            if words[0] == "PUT":
                resp = self._client.put(words[1], content=words[2])
            elif words[0] == "DELETE":
                resp = self._client.delete(words[1])
            else:
                raise ChannelError(f"unrenderable HTTP command {command!r}")
        except httpx.HTTPError as exc:
            raise ChannelError(str(exc)) from exc
        return resp.text or ("ok" if resp.status_code < 400 else "err http")

    def show(self) -> str:
        try:
            resp = self._client.get("/config")
        except httpx.HTTPError as exc:
            raise ChannelError(str(exc)) from exc
        return resp.text

    def close(self) -> None:
        self._client.close()


def open_channel(
    endpoint: str, dialect: Dialect, simnet: Optional[SimNetwork] = None
) -> Channel:
    """Open the appropriate channel type for an endpoint.

    sim:// endpoints resolve in-process; host:port endpoints use the wire.
    """
    if endpoint.startswith("sim://"):
        if simnet is None:
            raise ChannelError(f"no simulator network for {endpoint}")
        return InProcessChannel(simnet.get(endpoint))
    if simnet is not None and endpoint in simnet.endpoints():
        # bound simulators are also reachable in-process; prefer the wire
        pass
    host, _, port = endpoint.rpartition(":")
    if not host or not port.isdigit():
        raise ChannelError(f"malformed endpoint {endpoint!r}")
    if dialect.style == "http":
        return HttpChannel(f"http://{host}:{port}")
    return TcpChannel(host, int(port), dialect)
