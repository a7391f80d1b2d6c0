"""Top-level wiring: one object owning every subsystem, shared by the HTTP
API, the CLI's embedded mode, and the tests."""

from __future__ import annotations

import threading
import uuid
from typing import Optional

from .autoscaler import Autoscaler
from .channel import open_channel
from .devsim import SimNetwork
from .dialect import DialectRegistry
from .errors import UnknownDevice
from .events import EventLog
from .inventory import Inventory
from .provisioner import Provisioner, SimProvider
from .reconciler import Reconciler, RetryPolicy, TaskDocument
from .bgp import Fabric, Speaker


class Orchestrator:
    def __init__(
        self,
        inventory_path: Optional[str] = None,
        event_log_path: Optional[str] = None,
        retry: Optional[RetryPolicy] = None,
        provision_latency_ms: Optional[int] = None,
        command_latency_ms: Optional[int] = None,
    ):
        self.events = EventLog(path=event_log_path)
        self.dialects = DialectRegistry()
        self.simnet = SimNetwork(self.dialects)
        self.inventory = Inventory(self.dialects, self.events, path=inventory_path)
        self.inventory.channel_factory = lambda endpoint, dialect_id: open_channel(
            endpoint, self.dialects.get(dialect_id), self.simnet
        )
        self.reconciler = Reconciler(
            self.inventory, self.dialects, self.events, simnet=self.simnet, retry=retry
        )
        provider_kwargs = {}
        if provision_latency_ms is not None:
            provider_kwargs["provision_latency_ms"] = provision_latency_ms
        if command_latency_ms is not None:
            provider_kwargs["command_latency_ms"] = command_latency_ms
        self.provider = SimProvider(self.simnet, **provider_kwargs)
        self.provisioner = Provisioner(
            self.inventory, self.reconciler, self.provider, self.events
        )
        self.autoscaler = Autoscaler(self.provisioner, self.events)
        self.fabric = Fabric()
        self._tasks: dict[str, dict] = {}
        self._lock = threading.Lock()

    # -- tasks ---------------------------------------------------------------

    def run_task(self, task: TaskDocument) -> dict:
        task_id = f"t-{uuid.uuid4().hex[:8]}"
        reports = self.reconciler.run_task(task)
        result = {
            "task_id": task_id,
            "reports": [r.to_json() for r in reports],
        }
        with self._lock:
            self._tasks[task_id] = result
        return result

    def get_task(self, task_id: str) -> Optional[dict]:
        with self._lock:
            return self._tasks.get(task_id)

    # -- bgp -------------------------------------------------------------------

    def ensure_speaker(self, device_id: str) -> Speaker:
        """Every inventory device with an ASN gets an in-process speaker."""
        device = self.inventory.get(device_id)
        if device.asn is None:
            raise UnknownDevice(f"{device_id} has no asn; cannot speak BGP")
        if device.name not in self.fabric.speakers:
            self.fabric.add(Speaker(device.name, device.asn, events=self.events))
            self.events.emit("bgp", {"action": "speaker-created", "speaker": device.name,
                                     "asn": device.asn})
        return self.fabric.speakers[device.name]

    def bootstrap_speakers(self) -> list[Speaker]:
        return [
            self.ensure_speaker(device.id)
            for device in self.inventory.list_devices()
            if device.asn is not None
        ]

    def rib(self, speaker_id: str) -> dict:
        speaker = self.fabric.speakers.get(speaker_id)
        if speaker is None:
            raise UnknownDevice(f"no speaker {speaker_id!r}")
        return speaker.rib_snapshot()

    # -- metrics ------------------------------------------------------------------

    def metrics(self) -> dict:
        return self.autoscaler.metrics()

    def shutdown(self) -> None:
        self.autoscaler.stop_loops()
        self.simnet.shutdown()
