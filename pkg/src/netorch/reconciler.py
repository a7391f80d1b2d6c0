"""Declarative reconciliation: fetch actual config, diff against desired,
push only the delta over the device's command channel.

The engine is deliberately fetch-before-apply on every run (no cached
actual state) so that running it twice in a row is observably idempotent:
the second run always computes an empty delta.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from threading import Lock
from typing import Optional

from .channel import Channel, open_channel
from .configtree import ConfigDelta, ConfigDocument, DeltaOp
from .devsim import SimNetwork
from .dialect import DialectRegistry, parse_running, render
from .errors import ChannelError, UnknownTarget
from .events import EventLog
from .inventory import Device, Inventory, Platform

MODES = ("merge", "replace")


@dataclass(frozen=True)
class TaskDocument:
    """Declarative "hosts + desired state" unit (the playbook analog).

    JSON form: {"targets": [...], "desired": {tree}, "mode": "merge"|"replace"}
    where a target is a device id, a device name, or "platform=<value>".
    """

    targets: tuple[str, ...]
    desired: ConfigDocument
    mode: str = "merge"

    def __post_init__(self):
        if not self.targets:
            raise ValueError("task targets must be nonempty")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")

    @classmethod
    def from_json(cls, data: dict) -> "TaskDocument":
        return cls(
            targets=tuple(data["targets"]),
            desired=ConfigDocument.from_tree(data.get("desired", {})),
            mode=data.get("mode", "merge"),
        )

    def to_json(self) -> dict:
        return {
            "targets": list(self.targets),
            "desired": self.desired.to_tree(),
            "mode": self.mode,
        }

    @classmethod
    def load(cls, path: str) -> "TaskDocument":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass
class ApplyReport:
    device_id: str
    commands_sent: int
    delta: ConfigDelta
    duration_ms: float
    outcome: str  # ok | partial | failed
    failed_at: Optional[int] = None
    error: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "device_id": self.device_id,
            "commands_sent": self.commands_sent,
            "delta": self.delta.to_json(),
            "duration_ms": self.duration_ms,
            "outcome": self.outcome,
            "failed_at": self.failed_at,
            "error": self.error,
        }


def diff(actual: ConfigDocument, desired: ConfigDocument, mode: str = "merge") -> ConfigDelta:
    """Minimal delta turning actual into desired (replace) or actual
    overlaid with desired (merge).  Deletes are emitted before sets."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    deletes: list[DeltaOp] = []
    sets: list[DeltaOp] = []
    if mode == "replace":
        for path in actual.paths():
            if path not in desired:
                deletes.append(DeltaOp("delete", path))
    for path, value in desired.items():
        if path not in actual or actual.get(path) != value:
            sets.append(DeltaOp("set", path, value))
    return ConfigDelta(deletes + sets)


@dataclass
class RetryPolicy:
    """Per-command transport retry; NACKs are never retried."""

    command_timeout: float = 5.0
    retries: int = 3
    backoff_base: float = 1.0

    def backoff(self, attempt: int) -> float:
        return self.backoff_base * (2 ** attempt)


class Reconciler:
    def __init__(
        self,
        inventory: Inventory,
        dialects: DialectRegistry,
        events: EventLog,
        simnet: Optional[SimNetwork] = None,
        retry: Optional[RetryPolicy] = None,
        max_parallel_devices: int = 8,
    ):
        self.inventory = inventory
        self.dialects = dialects
        self.events = events
        self.simnet = simnet
        self.retry = retry or RetryPolicy()
        self._device_locks: dict[str, Lock] = {}
        self._locks_guard = Lock()
        self._pool = ThreadPoolExecutor(max_workers=max_parallel_devices)

    def _device_lock(self, device_id: str) -> Lock:
        with self._locks_guard:
            return self._device_locks.setdefault(device_id, Lock())

    def _open(self, device: Device) -> Channel:
        return open_channel(
            device.mgmt_endpoint, self.dialects.get(device.dialect_id), self.simnet
        )

    # -- core pipeline -------------------------------------------------------

    def fetch(self, device: Device) -> ConfigDocument:
        channel = self._open(device)
        try:
            raw = self._with_retries(channel.show)
        finally:
            channel.close()
        return parse_running(raw, self.dialects.get(device.dialect_id))

    def _with_retries(self, fn):
        attempt = 0
        while True:
            try:
                return fn()
            except ChannelError:
                if attempt >= self.retry.retries:
                    raise
                time.sleep(self.retry.backoff(attempt))
                attempt += 1

    def apply(self, device: Device, delta: ConfigDelta) -> ApplyReport:
        """Render and push a delta; commands go out in delta order and stop
        at the first NACK (no rollback: the device is flagged mid-state)."""
        dialect = self.dialects.get(device.dialect_id)
        commands = render(delta, dialect)
        started = time.monotonic()
        outcome, failed_at, error = "ok", None, None
        with self._device_lock(device.id):
            if commands:
                try:
                    channel = self._open(device)
                except ChannelError as exc:
                    return self._report(device, delta, commands, started, "failed", 0, str(exc))
                try:
                    for index, command in enumerate(commands):
                        try:
                            response = self._with_retries(lambda c=command: channel.push(c))
                        except ChannelError as exc:
                            outcome, failed_at, error = "failed", index, str(exc)
                            break
                        if response != "ok":
                            outcome, failed_at = "partial", index
                            error = response
                            break
                finally:
                    channel.close()
        return self._report(device, delta, commands, started, outcome, failed_at, error)

    def _report(self, device, delta, commands, started, outcome, failed_at, error) -> ApplyReport:
        report = ApplyReport(
            device_id=device.id,
            commands_sent=len(commands),
            delta=delta,
            duration_ms=(time.monotonic() - started) * 1000.0,
            outcome=outcome,
            failed_at=failed_at,
            error=error,
        )
        self.events.emit(
            "task",
            {
                "action": "apply",
                "device": device.id,
                "outcome": outcome,
                "commands_sent": report.commands_sent,
                "failed_at": failed_at,
            },
            severity="info" if outcome == "ok" else "warn",
        )
        return report

    def reconcile(self, device: Device, desired: ConfigDocument, mode: str = "merge") -> ApplyReport:
        actual = self.fetch(device)
        return self.apply(device, diff(actual, desired, mode))

    # -- tasks ----------------------------------------------------------------

    def resolve_targets(self, targets: tuple[str, ...]) -> list[Device]:
        resolved: dict[str, Device] = {}
        for target in targets:
            if "=" in target:
                key, _, value = target.partition("=")
                if key == "platform":
                    matches = self.inventory.list_devices(platform=Platform(value))
                elif key == "reachability":
                    matches = self.inventory.list_devices(reachability=value)
                else:
                    raise UnknownTarget(target)
                for device in matches:
                    resolved[device.id] = device
            else:
                device = self.inventory.get_by_name(target)
                if device is None:
                    try:
                        device = self.inventory.get(target)
                    except Exception:
                        raise UnknownTarget(target) from None
                resolved[device.id] = device
        return sorted(resolved.values(), key=lambda d: d.name)

    def run_task(self, task: TaskDocument) -> list[ApplyReport]:
        """Reconcile every resolved target; device failures are isolated."""
        devices = self.resolve_targets(task.targets)

        def _one(device: Device) -> ApplyReport:
            try:
                return self.reconcile(device, task.desired, task.mode)
            except Exception as exc:
                return self._report(device, ConfigDelta(), [], time.monotonic(), "failed", None, str(exc))

        reports = list(self._pool.map(_one, devices))
        self.events.emit(
            "task",
            {
                "action": "task-finished",
                "devices": [d.id for d in devices],
                "outcomes": [r.outcome for r in reports],
            },
        )
        return reports
