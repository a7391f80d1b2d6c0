"""Simulated device fleet.

Every SimDevice speaks one dialect and applies received commands exactly per
that dialect's grammar, so the rest of the system can be exercised at desk
scale without hardware.  Devices run in-process by default (endpoint
"sim://<n>"); CLI dialects can also bind a real TCP port and restish an HTTP
port for wire-level integration tests.

CLI wire protocol: newline-delimited UTF-8.  The device answers each command
with "ok" or "err <reason>"; the dialect's show command returns the rendered
document followed by a lone "." sentinel line.
"""

from __future__ import annotations

import socketserver
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from .configtree import ConfigDocument, apply_delta, ConfigDelta
from .dialect import CommandSession, Dialect, DialectRegistry, render_full
from .errors import ChannelError, PortExhausted, UnknownEndpoint


@dataclass
class FaultSpec:
    """Injectable faults; indexes count config commands since spawn (0-based)."""

    nack_at: Optional[int] = None
    drop_connection: bool = False
    latency_ms: int = 0
    provision_fail: bool = False


class SimDevice:
    def __init__(
        self,
        endpoint: str,
        dialect: Dialect,
        initial: Optional[ConfigDocument] = None,
        faults: Optional[FaultSpec] = None,
    ):
        self.endpoint = endpoint
        self.dialect = dialect
        self.running: ConfigDocument = initial or ConfigDocument()
        self.command_log: list[str] = []
        self.faults = faults or FaultSpec()
        self.alive = True
        self._session = CommandSession(dialect)
        self._config_commands = 0
        self._lock = threading.Lock()

    def _check_transport(self) -> None:
        if not self.alive or self.faults.drop_connection:
            raise ChannelError(f"connection to {self.endpoint} dropped")

    def _delay(self) -> None:
        if self.faults.latency_ms:
            time.sleep(self.faults.latency_ms / 1000.0)

    def probe(self) -> str:
        with self._lock:
            self._check_transport()
            self._delay()
            self.command_log.append(self.dialect.probe_command)
            return "ok"

    def show(self) -> str:
        with self._lock:
            self._check_transport()
            self._delay()
            self.command_log.append(self.dialect.show_command)
            return render_full(self.running, self.dialect)

    def push(self, command: str) -> str:
        """Apply one config command; returns "ok" or "err <reason>"."""
        with self._lock:
            self._check_transport()
            self._delay()
            self.command_log.append(command)
            index = self._config_commands
            self._config_commands += 1
            if self.faults.nack_at is not None and index == self.faults.nack_at:
                return "err injected-nack"
            try:
                op = self._session.feed(command)
                if op is not None:
                    self.running = apply_delta(self.running, ConfigDelta([op]))
            except Exception as exc:
                return f"err {exc}"
            return "ok"

    def execute(self, command: str) -> str:
        """Dispatch a raw command line (wire-protocol entry point)."""
        if command == self.dialect.probe_command:
            return self.probe()
        if command == self.dialect.show_command:
            return self.show()
        return self.push(command)

    def snapshot(self) -> dict:
        with self._lock:
            return {"running": self.running, "command_log": list(self.command_log)}


class SimNetwork:
    """Registry of simulated devices, in-process or bound to real ports."""

    def __init__(self, dialects: Optional[DialectRegistry] = None):
        self.dialects = dialects or DialectRegistry()
        self._devices: dict[str, SimDevice] = {}
        self._servers: list = []
        self._counter = 0
        self._lock = threading.Lock()

    def spawn(
        self,
        dialect_id: str,
        initial: Optional[ConfigDocument] = None,
        faults: Optional[FaultSpec] = None,
        bind: bool = False,
        port: int = 0,
    ) -> str:
        dialect = self.dialects.get(dialect_id)
        with self._lock:
            self._counter += 1
            endpoint = f"sim://{self._counter:04d}"
        device = SimDevice(endpoint, dialect, initial, faults)
        if bind:
            endpoint = self._bind(device, port)
            device.endpoint = endpoint
        with self._lock:
            self._devices[endpoint] = device
        return endpoint

    def _bind(self, device: SimDevice, port: int = 0) -> str:
        try:
            if device.dialect.style == "http":
                server = _HttpSimServer(device, port)
            else:
                server = _TcpSimServer(device, port)
        except OSError as exc:
            raise PortExhausted(str(exc)) from exc
        self._servers.append(server)
        return f"127.0.0.1:{server.port}"

    def get(self, endpoint: str) -> SimDevice:
        try:
            return self._devices[endpoint]
        except KeyError:
            raise UnknownEndpoint(endpoint) from None

    def inspect(self, endpoint: str) -> dict:
        return self.get(endpoint).snapshot()

    def kill(self, endpoint: str) -> None:
        device = self.get(endpoint)
        device.alive = False

    def remove(self, endpoint: str) -> None:
        self.kill(endpoint)
        with self._lock:
            self._devices.pop(endpoint, None)

    def endpoints(self) -> list[str]:
        with self._lock:
            return sorted(self._devices)

    def shutdown(self) -> None:
        for server in self._servers:
            server.shutdown()
        self._servers.clear()


# --- wire servers ------------------------------------------------------------


class _TcpSimServer:
    def __init__(self, device: SimDevice, port: int = 0):
        class Handler(socketserver.StreamRequestHandler):
            def handle(self):
                while True:
                    raw = self.rfile.readline()
                    if not raw:
                        return
                    command = raw.decode("utf-8").rstrip("\r\n")
                    if not command:
                        continue
                    try:
                        if command == device.dialect.show_command:
                            body = device.show()
                            out = (body + "\n" if body else "") + ".\n"
                        else:
                            out = device.execute(command) + "\n"
                    except ChannelError:
                        return  # simulate the connection dropping
                    self.wfile.write(out.encode("utf-8"))

        self._server = socketserver.ThreadingTCPServer(("127.0.0.1", port), Handler)
        self._server.daemon_threads = True
        self.port = self._server.server_address[1]
        threading.Thread(target=self._server.serve_forever, daemon=True).start()

    def shutdown(self):
        self._server.shutdown()
        self._server.server_close()


class _HttpSimServer:
    """HTTP front for restish devices: PUT/DELETE /config/<path>, GET /config."""

    def __init__(self, device: SimDevice, port: int = 0):
        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):  # quiet
                pass

            def _reply(self, code: int, body: str):
                data = body.encode("utf-8")
                self.send_response(code)
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def do_GET(self):
                if self.path == "/health":
                    self._reply(200, device.probe())
                elif self.path == "/config":
                    self._reply(200, device.show())
                else:
                    self._reply(404, "not found")

            def do_PUT(self):
                if not self.path.startswith("/config/"):
                    return self._reply(404, "not found")
                length = int(self.headers.get("Content-Length", 0))
                body = self.rfile.read(length).decode("utf-8").strip()
                path = self.path[len("/config/"):]
                result = device.push(f"PUT /config/{path} {body}")
                self._reply(200 if result == "ok" else 422, result)

            def do_DELETE(self):
                if not self.path.startswith("/config/"):
                    return self._reply(404, "not found")
                path = self.path[len("/config/"):]
                result = device.push(f"DELETE /config/{path}")
                self._reply(200 if result == "ok" else 422, result)

        self._server = ThreadingHTTPServer(("127.0.0.1", port), Handler)
        self._server.daemon_threads = True
        self.port = self._server.server_address[1]
        threading.Thread(target=self._server.serve_forever, daemon=True).start()

    def shutdown(self):
        self._server.shutdown()
        self._server.server_close()
