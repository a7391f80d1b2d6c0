"""JSON-lines-over-TCP transport for BGP speakers.

One JSON object per line.  Message schema (documented bit-exactly in the
repo docs; deliberately not RFC 4271 wire-compatible):

  {"type": "open", "id": "<speaker>", "asn": 65001, "hold_time": 90}
  {"type": "keepalive"}
  {"type": "update", "announce": [<route>...], "withdraw": ["<prefix>"...]}

Session FSM is the simplified 3-state machine idle -> connecting ->
established; keepalives run at hold_time/3 and a hold-time expiry (3 missed
keepalives) drops the session and flushes the peer's adj-rib-in.
"""

from __future__ import annotations

import json
import socket
import socketserver
import threading
import time
from dataclasses import dataclass
from typing import Optional

from ..errors import AsnMismatch, MalformedUpdate, OpenTimeout
from .speaker import Speaker

DEFAULT_HOLD_TIME = 90.0


@dataclass
class BgpPeer:
    local_asn: int
    remote_asn: int
    endpoint: str
    remote_id: str = ""
    session_state: str = "idle"  # idle | connecting | established
    hold_time: float = DEFAULT_HOLD_TIME


class _Session:
    def __init__(self, wire: "WireSpeaker", sock: socket.socket, peer: BgpPeer):
        self.wire = wire
        self.sock = sock
        self.peer = peer
        self.last_heard = time.monotonic()
        self._wlock = threading.Lock()
        self._closed = threading.Event()

    def send(self, message: dict) -> None:
        data = (json.dumps(message, sort_keys=True) + "\n").encode("utf-8")
        try:
            with self._wlock:
                self.sock.sendall(data)
        except OSError:
            self.close()

    def close(self) -> None:
        if self._closed.is_set():
            return
        self._closed.set()
        self.peer.session_state = "idle"
        try:
            self.sock.close()
        except OSError:
            pass
        self.wire._session_down(self)

    def pump(self) -> None:
        """Reader loop: dispatch updates, track keepalives, enforce hold time."""
        rfile = self.sock.makefile("r", encoding="utf-8", newline="\n")
        self.sock.settimeout(self.peer.hold_time / 3.0)
        while not self._closed.is_set():
            try:
                line = rfile.readline()
            except socket.timeout:
                if time.monotonic() - self.last_heard > self.peer.hold_time:
                    self.close()
                    return
                continue
            except OSError:
                self.close()
                return
            if not line:
                self.close()
                return
            self.last_heard = time.monotonic()
            try:
                message = json.loads(line)
                if not isinstance(message, dict):
                    raise ValueError("message must be an object")
            except ValueError:
                self.close()  # malformed -> session reset + flush
                return
            kind = message.get("type")
            if kind == "keepalive":
                continue
            if kind == "update":
                try:
                    self.wire.speaker.process_update(self.peer.remote_id, message)
                except MalformedUpdate:
                    self.close()
                    return
                self.wire.flush_outbox()
            # anything else (including stray opens) is ignored post-open

    def keepalive_loop(self) -> None:
        interval = self.peer.hold_time / 3.0
        while not self._closed.wait(interval):
            if time.monotonic() - self.last_heard > self.peer.hold_time:
                self.close()
                return
            self.send({"type": "keepalive"})


class WireSpeaker:
    """A Speaker bound to a TCP listener, exchanging JSON-line messages."""

    def __init__(self, speaker: Speaker, hold_time: float = DEFAULT_HOLD_TIME):
        self.speaker = speaker
        self.hold_time = hold_time
        self._sessions: dict[str, _Session] = {}  # keyed by remote speaker id
        self._lock = threading.RLock()
        self._server: Optional[socketserver.ThreadingTCPServer] = None
        self.port: Optional[int] = None

    # -- listener --------------------------------------------------------------

    def listen(self, port: int = 0) -> int:
        wire = self

        class Handler(socketserver.StreamRequestHandler):
            def handle(self):
                wire._handle_inbound(self.connection)

        self._server = socketserver.ThreadingTCPServer(("127.0.0.1", port), Handler)
        self._server.daemon_threads = True
        self.port = self._server.server_address[1]
        threading.Thread(target=self._server.serve_forever, daemon=True).start()
        return self.port

    def _handle_inbound(self, sock: socket.socket) -> None:
        rfile = sock.makefile("r", encoding="utf-8", newline="\n")
        sock.settimeout(self.hold_time)
        try:
            line = rfile.readline()
            message = json.loads(line)
            if message.get("type") != "open":
                raise ValueError("expected open")
        except (OSError, ValueError):
            sock.close()
            return
        peer = BgpPeer(
            local_asn=self.speaker.asn,
            remote_asn=message["asn"],
            endpoint=f"{sock.getpeername()[0]}:{sock.getpeername()[1]}",
            remote_id=message["id"],
            session_state="connecting",
            hold_time=min(self.hold_time, message.get("hold_time", DEFAULT_HOLD_TIME)),
        )
        session = _Session(self, sock, peer)
        session.send({"type": "open", "id": self.speaker.id, "asn": self.speaker.asn,
                      "hold_time": self.hold_time})
        self._establish(session)
        threading.Thread(target=session.keepalive_loop, daemon=True).start()
        session.pump()  # runs on the server handler thread

    # -- outbound --------------------------------------------------------------

    def open_session(
        self,
        endpoint: str,
        remote_asn: int,
        timeout: float = 5.0,
        hold_time: Optional[float] = None,
    ) -> BgpPeer:
        host, _, port = endpoint.rpartition(":")
        hold_time = hold_time or self.hold_time
        peer = BgpPeer(self.speaker.asn, remote_asn, endpoint,
                       session_state="connecting", hold_time=hold_time)
        try:
            sock = socket.create_connection((host, int(port)), timeout=timeout)
        except OSError as exc:
            peer.session_state = "idle"
            raise OpenTimeout(f"{endpoint}: {exc}") from exc
        session = _Session(self, sock, peer)
        session.send({"type": "open", "id": self.speaker.id, "asn": self.speaker.asn,
                      "hold_time": hold_time})
        sock.settimeout(timeout)
        rfile = sock.makefile("r", encoding="utf-8", newline="\n")
        try:
            line = rfile.readline()
            if not line:
                raise OpenTimeout(f"{endpoint}: closed before open")
            reply = json.loads(line)
        except socket.timeout:
            sock.close()
            peer.session_state = "idle"
            raise OpenTimeout(endpoint) from None
        except ValueError as exc:
            sock.close()
            peer.session_state = "idle"
            raise MalformedUpdate(str(exc)) from None
        if reply.get("type") != "open" or reply.get("asn") != remote_asn:
            sock.close()
            peer.session_state = "idle"
            raise AsnMismatch(
                f"{endpoint}: expected asn {remote_asn}, got {reply.get('asn')}"
            )
        peer.remote_id = reply["id"]
        self._establish(session)
        threading.Thread(target=session.pump, daemon=True).start()
        threading.Thread(target=session.keepalive_loop, daemon=True).start()
        return peer

    def _establish(self, session: _Session) -> None:
        session.peer.session_state = "established"
        with self._lock:
            self._sessions[session.peer.remote_id] = session
        self.speaker.add_peer(session.peer.remote_id)
        self.flush_outbox()

    def _session_down(self, session: _Session) -> None:
        with self._lock:
            current = self._sessions.get(session.peer.remote_id)
            if current is session:
                del self._sessions[session.peer.remote_id]
        self.speaker.drop_peer(session.peer.remote_id)

    def flush_outbox(self) -> None:
        """Ship queued per-peer updates over their sessions."""
        with self.speaker._lock:
            pending = list(self.speaker.outbox)
            self.speaker.outbox.clear()
        for peer_id, message in pending:
            with self._lock:
                session = self._sessions.get(peer_id)
            if session is not None:
                session.send(message)

    def announce(self, prefix: str, **kwargs) -> None:
        self.speaker.announce(prefix, **kwargs)
        self.flush_outbox()

    def withdraw(self, prefix: str) -> None:
        self.speaker.withdraw(prefix)
        self.flush_outbox()

    def sessions(self) -> list[BgpPeer]:
        with self._lock:
            return [s.peer for s in self._sessions.values()]

    def shutdown(self) -> None:
        with self._lock:
            sessions = list(self._sessions.values())
        for session in sessions:
            session.close()
        if self._server:
            self._server.shutdown()
            self._server.server_close()
