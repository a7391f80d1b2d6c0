"""Instance provisioning: create N VMs/containers of a chosen type on a
chosen cloud host for a tenant, with validation checks and fresh-install
(revert to the golden baseline).

Instances are realized as simulator-backed logical endpoints plus lifecycle
records; the InstanceProvider seam is where a real hypervisor/container
backend would plug in later.
"""

from __future__ import annotations

import importlib.resources
import json
import threading
import time
import uuid
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .configtree import ConfigDocument
from .devsim import FaultSpec, SimNetwork
from .errors import (
    IllegalTransition,
    IncompatibleKind,
    InvalidSpec,
    NotReady,
    QuotaExceeded,
    Terminated,
    UnknownHost,
    UnknownInstance,
)
from .events import EventLog
from .inventory import Inventory, Platform
from .reconciler import Reconciler, diff

INSTANCE_TYPES = (
    "ryu-controller",
    "onos-controller",
    "odl-controller",
    "mininet",
    "ovs",
    "floodlight-controller",
    "dns",
    "dhcp",
)
KINDS = ("vm", "container")
# mininet needs a full network namespace stack, so vm only
VM_ONLY_TYPES = frozenset({"mininet"})

STATES = ("requested", "provisioning", "ready", "failed", "terminated")
LEGAL_TRANSITIONS = {
    "requested": {"provisioning"},
    "provisioning": {"ready", "failed"},
    "ready": {"terminated"},
    "failed": {"provisioning", "terminated"},
    "terminated": set(),
}
ROLES = ("primary", "secondary", "none")

# default simulated latencies for instance endpoints: these are what the
# timing experiments (failover, controller scaling) run against
DEFAULT_PROVISION_LATENCY_MS = 50
DEFAULT_COMMAND_LATENCY_MS = 10

INSTANCE_DIALECT = "ovsish"


def load_baselines() -> dict[str, ConfigDocument]:
    data = importlib.resources.files("netorch.data").joinpath("baselines.json").read_text()
    return {
        instance_type: ConfigDocument.from_tree(tree)
        for instance_type, tree in json.loads(data).items()
    }


@dataclass(frozen=True)
class InstanceSpec:
    host_device_id: str
    tenant: str
    count: int
    instance_type: str
    kind: str
    validate: bool = False
    fresh_install: bool = False

    def __post_init__(self):
        if self.count < 1:
            raise InvalidSpec("count must be >= 1")
        if self.instance_type not in INSTANCE_TYPES:
            raise InvalidSpec(f"unknown instance type {self.instance_type!r}")
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown kind {self.kind!r}")
        if self.instance_type in VM_ONLY_TYPES and self.kind != "vm":
            raise IncompatibleKind(f"{self.instance_type} can only run as a vm")


@dataclass
class InstanceRecord:
    id: str
    spec: InstanceSpec
    state: str = "requested"
    role: str = "primary"
    in_service: bool = True
    endpoint: Optional[str] = None
    baseline: Optional[ConfigDocument] = None
    created_at: float = field(default_factory=time.time)
    ready_at: Optional[float] = None
    error: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "host": self.spec.host_device_id,
            "tenant": self.spec.tenant,
            "type": self.spec.instance_type,
            "kind": self.spec.kind,
            "state": self.state,
            "role": self.role,
            "in_service": self.in_service,
            "endpoint": self.endpoint,
            "created_at": self.created_at,
            "ready_at": self.ready_at,
            "error": self.error,
        }


class SimProvider:
    """Simulator-backed instance endpoints with injectable provision failure."""

    def __init__(
        self,
        simnet: SimNetwork,
        provision_latency_ms: int = DEFAULT_PROVISION_LATENCY_MS,
        command_latency_ms: int = DEFAULT_COMMAND_LATENCY_MS,
    ):
        self.simnet = simnet
        self.provision_latency_ms = provision_latency_ms
        self.command_latency_ms = command_latency_ms
        self.fail_next = False
        self.fail_all = False
        self._lock = threading.Lock()

    def create_endpoint(self, instance_type: str) -> str:
        with self._lock:
            fail = self.fail_all or self.fail_next
            self.fail_next = False
        time.sleep(self.provision_latency_ms / 1000.0)
        faults = FaultSpec(latency_ms=self.command_latency_ms, provision_fail=fail)
        endpoint = self.simnet.spawn(INSTANCE_DIALECT, faults=faults)
        if fail:
            self.simnet.kill(endpoint)
        return endpoint

    def destroy_endpoint(self, endpoint: str) -> None:
        self.simnet.remove(endpoint)

    def port_listening(self, endpoint: str) -> bool:
        try:
            device = self.simnet.get(endpoint)
        except Exception:
            return False
        return device.alive and not device.faults.drop_connection


class Provisioner:
    def __init__(
        self,
        inventory: Inventory,
        reconciler: Reconciler,
        provider: SimProvider,
        events: EventLog,
        parallelism: int = 4,
    ):
        self.inventory = inventory
        self.reconciler = reconciler
        self.provider = provider
        self.events = events
        self.baselines = load_baselines()
        self._records: dict[str, InstanceRecord] = {}
        self._futures: dict[str, Future] = {}
        self._lock = threading.RLock()
        self._pool = ThreadPoolExecutor(max_workers=parallelism)

    # -- state machine ---------------------------------------------------------

    def _transition(self, record: InstanceRecord, new_state: str) -> None:
        with self._lock:
            if new_state not in LEGAL_TRANSITIONS[record.state]:
                raise IllegalTransition(f"{record.state} -> {new_state}")
            record.state = new_state
            if new_state == "ready" and record.ready_at is None:
                record.ready_at = time.time()
        self.events.emit(
            "instance",
            {"action": "state", "id": record.id, "state": new_state},
            severity="error" if new_state == "failed" else "info",
        )

    # -- submit ------------------------------------------------------------------

    def submit(self, spec: InstanceSpec, role: str = "primary") -> list[InstanceRecord]:
        host = self.inventory.get(spec.host_device_id)
        if host.platform is not Platform.CLOUD_NODE:
            raise UnknownHost(f"{spec.host_device_id} is not a cloud-node")
        tenant = self.inventory.get_tenant(spec.tenant)
        assert role in ROLES
        with self._lock:
            live = sum(
                1
                for r in self._records.values()
                if r.spec.tenant == spec.tenant and r.state != "terminated"
            )
            if live + spec.count > tenant.quota_instances:
                raise QuotaExceeded(
                    f"tenant {spec.tenant}: {live} live + {spec.count} requested "
                    f"> quota {tenant.quota_instances}"
                )
            records = []
            for _ in range(spec.count):
                record = InstanceRecord(id=f"i-{uuid.uuid4().hex[:8]}", spec=spec, role=role)
                record.baseline = self.baselines[spec.instance_type]
                self._records[record.id] = record
                records.append(record)
        for record in records:
            self.events.emit("instance", {"action": "submitted", "id": record.id, "type": spec.instance_type})
            self._futures[record.id] = self._pool.submit(self._provision, record)
        return records

    def _provision(self, record: InstanceRecord) -> None:
        self._transition(record, "provisioning")
        try:
            endpoint = self.provider.create_endpoint(record.spec.instance_type)
            record.endpoint = endpoint
            device = self._instance_device(record)
            if self.provider.simnet.get(endpoint).faults.provision_fail:
                raise RuntimeError("provisioning fault injected")
            report = self.reconciler.reconcile(device, record.baseline, mode="replace")
            if report.outcome != "ok":
                raise RuntimeError(f"baseline push {report.outcome}: {report.error}")
            self._transition(record, "ready")
        except Exception as exc:
            record.error = str(exc)
            self._transition(record, "failed")

    def _instance_device(self, record: InstanceRecord):
        """Instance endpoints ride the same channel machinery as devices."""
        from .inventory import Device, Reachability

        return Device(
            id=record.id,
            name=record.id,
            platform=Platform.CLOUD_NODE,
            dialect_id=INSTANCE_DIALECT,
            mgmt_endpoint=record.endpoint,
            reachability=Reachability.REACHABLE,
        )

    def wait(self, record_ids: list[str], timeout: float = 30.0) -> None:
        """Block until the given records leave the provisioning pipeline."""
        deadline = time.monotonic() + timeout
        for record_id in record_ids:
            future = self._futures.get(record_id)
            if future is None:
                continue
            remaining = max(0.0, deadline - time.monotonic())
            future.result(timeout=remaining)

    # -- accessors ---------------------------------------------------------------

    def get(self, instance_id: str) -> InstanceRecord:
        with self._lock:
            try:
                return self._records[instance_id]
            except KeyError:
                raise UnknownInstance(instance_id) from None

    def list_instances(
        self,
        tenant: Optional[str] = None,
        instance_type: Optional[str] = None,
        states: Optional[set[str]] = None,
    ) -> list[InstanceRecord]:
        with self._lock:
            records = list(self._records.values())
        if tenant is not None:
            records = [r for r in records if r.spec.tenant == tenant]
        if instance_type is not None:
            records = [r for r in records if r.spec.instance_type == instance_type]
        if states is not None:
            records = [r for r in records if r.state in states]
        return sorted(records, key=lambda r: r.created_at)

    def in_service(self, instance_type: str) -> list[InstanceRecord]:
        return [
            r
            for r in self.list_instances(instance_type=instance_type, states={"ready"})
            if r.in_service
        ]

    # -- validation / reset --------------------------------------------------------

    def validate(self, instance_id: str) -> dict:
        record = self.get(instance_id)
        if record.state != "ready":
            raise NotReady(f"{instance_id} is {record.state}")
        device = self._instance_device(record)
        checks = []

        try:
            actual = self.reconciler.fetch(device)
            alive = True
        except Exception as exc:
            actual = None
            alive = False
            checks.append({"name": "process-liveness", "pass": False, "detail": str(exc)})
        if alive:
            checks.append({"name": "process-liveness", "pass": True, "detail": "probe ok"})
            delta = diff(actual, record.baseline, mode="replace")
            checks.append(
                {
                    "name": "baseline-config",
                    "pass": delta.is_empty(),
                    "detail": "in sync" if delta.is_empty() else f"{len(delta)} paths drifted",
                }
            )
        listening = self.provider.port_listening(record.endpoint)
        port = record.baseline.get("service.port")
        checks.append(
            {
                "name": "service-port",
                "pass": bool(listening),
                "detail": f"port {port} {'listening' if listening else 'not listening'}",
            }
        )
        overall = all(c["pass"] for c in checks)
        report = {"instance_id": instance_id, "checks": checks, "overall": overall}
        self.events.emit(
            "instance",
            {"action": "validated", "id": instance_id, "overall": overall},
            severity="info" if overall else "warn",
        )
        return report

    def fresh_install(self, instance_id: str) -> InstanceRecord:
        record = self.get(instance_id)
        if record.state == "terminated":
            raise Terminated(instance_id)
        if record.state != "ready":
            raise NotReady(f"{instance_id} is {record.state}")
        device = self._instance_device(record)
        report = self.reconciler.reconcile(device, record.baseline, mode="replace")
        if report.outcome != "ok":
            raise RuntimeError(f"fresh install push {report.outcome}")
        self.events.emit("instance", {"action": "fresh-install", "id": instance_id})
        return record

    def terminate(self, instance_id: str) -> InstanceRecord:
        record = self.get(instance_id)
        if record.state == "terminated":
            return record
        if record.state == "provisioning":
            self.wait([instance_id])
        self._transition(record, "terminated")
        if record.endpoint:
            self.provider.destroy_endpoint(record.endpoint)
        return record

    def disable(self, instance_id: str) -> InstanceRecord:
        """Take an instance out of service without destroying it."""
        record = self.get(instance_id)
        record.in_service = False
        record.role = "none"
        self.events.emit("instance", {"action": "disabled", "id": instance_id})
        return record
