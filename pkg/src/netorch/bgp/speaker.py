"""In-process BGP speakers with eBGP semantics.

Each speaker keeps the classic three stores: adj-rib-in (per peer),
loc-rib (selected best per prefix), and adj-rib-out (what it has told each
peer).  Egress prepends the local ASN; ingress silently rejects routes
already carrying it, which keeps every loc-rib loop-free.  Updates are
re-advertised to all peers except the one they came from, as withdraw +
announce pairs computed from adj-rib-out, so duplicate announcements are
suppressed.

The Fabric delivers queued messages in synchronous rounds, which is what
lets convergence be measured in message rounds against topology diameter.
"""

from __future__ import annotations

import threading
from typing import Optional

from ..errors import MalformedUpdate
from ..events import EventLog
from .routes import Route, best_path, normalize_prefix

LOCAL = "local"


class Speaker:
    def __init__(self, speaker_id: str, asn: int, events: Optional[EventLog] = None):
        self.id = speaker_id
        self.asn = asn
        self.events = events
        self.peers: list[str] = []
        # adj_rib_in[prefix][source] where source is a peer id or "local"
        self.adj_rib_in: dict[str, dict[str, Route]] = {}
        self.loc_rib: dict[str, Route] = {}
        self.adj_rib_out: dict[str, dict[str, Route]] = {}
        self.outbox: list[tuple[str, dict]] = []
        self._lock = threading.RLock()

    # -- session wiring (fabric or wire layer calls these) ----------------------

    def add_peer(self, peer_id: str) -> None:
        with self._lock:
            if peer_id in self.peers:
                return
            self.peers.append(peer_id)
            self.adj_rib_out[peer_id] = {}
            # full table sync toward the new peer
            announce = [
                self._export(route).to_json()
                for prefix, route in sorted(self.loc_rib.items())
                if route.learned_from != peer_id
            ]
            if announce:
                self.outbox.append((peer_id, {"type": "update", "announce": announce,
                                              "withdraw": []}))

    def drop_peer(self, peer_id: str) -> None:
        """Session loss: flush everything learned from the peer."""
        with self._lock:
            if peer_id in self.peers:
                self.peers.remove(peer_id)
            self.adj_rib_out.pop(peer_id, None)
            touched = []
            for prefix, sources in self.adj_rib_in.items():
                if sources.pop(peer_id, None) is not None:
                    touched.append(prefix)
            for prefix in touched:
                self._reselect(prefix)

    # -- origination -------------------------------------------------------------

    def announce(self, prefix: str, local_pref: int = 100, origin: str = "igp") -> None:
        prefix = normalize_prefix(prefix)
        route = Route(prefix=prefix, next_hop=self.id, local_pref=local_pref,
                      origin=origin, learned_from=LOCAL)
        with self._lock:
            current = self.adj_rib_in.setdefault(prefix, {}).get(LOCAL)
            if current == route:
                return  # idempotent announce
            self.adj_rib_in[prefix][LOCAL] = route
            self._reselect(prefix)

    def withdraw(self, prefix: str) -> None:
        prefix = normalize_prefix(prefix)
        with self._lock:
            sources = self.adj_rib_in.get(prefix, {})
            if sources.pop(LOCAL, None) is not None:
                self._reselect(prefix)

    # -- receive path ----------------------------------------------------------------

    def process_update(self, peer_id: str, message: dict) -> dict:
        """Apply one UPDATE from a peer; returns a RibChange summary."""
        if (
            not isinstance(message, dict)
            or message.get("type") != "update"
            or not isinstance(message.get("announce", []), list)
            or not isinstance(message.get("withdraw", []), list)
        ):
            raise MalformedUpdate(f"from {peer_id}: {message!r}")
        touched: set[str] = set()
        rejected: list[str] = []
        with self._lock:
            for prefix in message.get("withdraw", []):
                prefix = normalize_prefix(prefix)
                if self.adj_rib_in.get(prefix, {}).pop(peer_id, None) is not None:
                    touched.add(prefix)
            for entry in message.get("announce", []):
                try:
                    route = Route.from_json({**entry, "learned_from": peer_id,
                                             "next_hop": peer_id})
                except (KeyError, TypeError, ValueError) as exc:
                    raise MalformedUpdate(f"from {peer_id}: {exc}") from None
                if self.asn in route.as_path:
                    rejected.append(route.prefix)
                    if self.events:
                        self.events.emit(
                            "bgp",
                            {"action": "loop-rejected", "speaker": self.id,
                             "prefix": route.prefix, "peer": peer_id},
                            severity="warn",
                        )
                    continue
                self.adj_rib_in.setdefault(route.prefix, {})[peer_id] = route
                touched.add(route.prefix)
            changed = [prefix for prefix in sorted(touched) if self._reselect(prefix)]
        return {"touched": sorted(touched), "changed": changed, "loop_rejected": rejected}

    # -- selection / advertisement ------------------------------------------------------

    def _reselect(self, prefix: str) -> bool:
        candidates = list(self.adj_rib_in.get(prefix, {}).values())
        new_best = best_path(candidates) if candidates else None
        old_best = self.loc_rib.get(prefix)
        if new_best == old_best:
            return False
        if new_best is None:
            del self.loc_rib[prefix]
        else:
            self.loc_rib[prefix] = new_best
        for peer_id in self.peers:
            self._sync_out(peer_id, prefix)
        return True

    def _sync_out(self, peer_id: str, prefix: str) -> None:
        best = self.loc_rib.get(prefix)
        desired = None
        if best is not None and best.learned_from != peer_id:
            desired = self._export(best)
        advertised = self.adj_rib_out[peer_id].get(prefix)
        if desired == advertised:
            return
        if desired is None:
            del self.adj_rib_out[peer_id][prefix]
            self.outbox.append((peer_id, {"type": "update", "announce": [],
                                          "withdraw": [prefix]}))
        else:
            self.adj_rib_out[peer_id][prefix] = desired
            self.outbox.append((peer_id, {"type": "update",
                                          "announce": [desired.to_json()],
                                          "withdraw": []}))

    def _export(self, route: Route) -> Route:
        return Route(
            prefix=route.prefix,
            next_hop=self.id,
            as_path=(self.asn,) + route.as_path,
            local_pref=route.local_pref,
            origin=route.origin,
            learned_from=self.id,
        )

    # -- observability ---------------------------------------------------------------------

    def rib_snapshot(self) -> dict:
        with self._lock:
            return {
                "adj_rib_in": {
                    prefix: {source: route.to_json() for source, route in sources.items()}
                    for prefix, sources in self.adj_rib_in.items()
                    if sources
                },
                "loc_rib": {prefix: route.to_json()
                            for prefix, route in sorted(self.loc_rib.items())},
                "adj_rib_out": {
                    peer: {prefix: route.to_json() for prefix, route in table.items()}
                    for peer, table in self.adj_rib_out.items()
                },
            }


class Fabric:
    """Synchronous-round message scheduler for in-process speakers."""

    def __init__(self):
        self.speakers: dict[str, Speaker] = {}

    def add(self, speaker: Speaker) -> Speaker:
        self.speakers[speaker.id] = speaker
        return speaker

    def connect(self, a_id: str, b_id: str) -> None:
        self.speakers[a_id].add_peer(b_id)
        self.speakers[b_id].add_peer(a_id)

    def step(self) -> int:
        """Deliver every currently queued message; returns how many moved."""
        batch: list[tuple[str, str, dict]] = []
        for speaker in self.speakers.values():
            with speaker._lock:
                for peer_id, message in speaker.outbox:
                    batch.append((speaker.id, peer_id, message))
                speaker.outbox.clear()
        for src, dst, message in sorted(batch, key=lambda m: (m[0], m[1])):
            self.speakers[dst].process_update(src, message)
        return len(batch)

    def run(self, max_rounds: int = 100) -> int:
        """Step until no messages remain; returns the number of rounds used."""
        for rounds in range(1, max_rounds + 1):
            if self.step() == 0:
                return rounds - 1
        raise RuntimeError(f"fabric did not quiesce within {max_rounds} rounds")
