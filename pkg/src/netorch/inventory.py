"""Registry of managed devices and tenants.

Models the whole fleet: cloud instance hosts (overlay) plus SDN switches and
traditional routers (underlay).  Persisted as a single JSON file written
atomically on every mutation; credentials live in a separate secrets file
and only opaque references appear here.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
import threading
import time
import uuid
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional

from .dialect import DialectRegistry
from .errors import (
    ChannelError,
    DuplicateName,
    InvalidEndpoint,
    UnknownDevice,
    UnknownDialect,
    UnknownTenant,
)
from .events import EventLog

MAX_ASN = 4_294_967_295
DEFAULT_REACHABILITY_TTL = 300.0

_HOSTPORT_RE = re.compile(r"^[A-Za-z0-9_.-]+:[0-9]{1,5}$")


class Platform(str, Enum):
    CLOUD_NODE = "cloud-node"
    SDN_SWITCH = "sdn-switch"
    TRADITIONAL_ROUTER = "traditional-router"


class Reachability(str, Enum):
    UNKNOWN = "unknown"
    REACHABLE = "reachable"
    UNREACHABLE = "unreachable"


def validate_endpoint(endpoint: str) -> None:
    if endpoint.startswith("sim://") and len(endpoint) > len("sim://"):
        return
    if _HOSTPORT_RE.match(endpoint):
        port = int(endpoint.rsplit(":", 1)[1])
        if 1 <= port <= 65535:
            return
    raise InvalidEndpoint(endpoint)


@dataclass
class Device:
    id: str
    name: str
    platform: Platform
    dialect_id: str
    mgmt_endpoint: str
    credential_ref: Optional[str] = None
    reachability: Reachability = Reachability.UNKNOWN
    asn: Optional[int] = None
    probed_at: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "platform": self.platform.value,
            "dialect_id": self.dialect_id,
            "mgmt_endpoint": self.mgmt_endpoint,
            "credential_ref": self.credential_ref,
            "reachability": self.reachability.value,
            "asn": self.asn,
            "probed_at": self.probed_at,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Device":
        return cls(
            id=data["id"],
            name=data["name"],
            platform=Platform(data["platform"]),
            dialect_id=data["dialect_id"],
            mgmt_endpoint=data["mgmt_endpoint"],
            credential_ref=data.get("credential_ref"),
            reachability=Reachability(data.get("reachability", "unknown")),
            asn=data.get("asn"),
            probed_at=data.get("probed_at"),
        )


@dataclass
class Tenant:
    name: str
    quota_instances: int

    def __post_init__(self):
        if self.quota_instances < 1:
            raise ValueError("quota_instances must be >= 1")


class Inventory:
    """Thread-safe device/tenant registry with JSON persistence."""

    def __init__(
        self,
        dialects: DialectRegistry,
        events: EventLog,
        path: Optional[str] = None,
        reachability_ttl: float = DEFAULT_REACHABILITY_TTL,
    ):
        self._dialects = dialects
        self._events = events
        self._path = path
        self._ttl = reachability_ttl
        self._devices: dict[str, Device] = {}
        self._tenants: dict[str, Tenant] = {}
        self._lock = threading.RLock()
        # set at wiring time: endpoint, dialect -> Channel
        self.channel_factory: Optional[Callable] = None
        if path and os.path.exists(path):
            self._load()

    # -- persistence -------------------------------------------------------

    def _load(self) -> None:
        with open(self._path) as fh:
            data = json.load(fh)
        for entry in data.get("devices", []):
            device = Device.from_json(entry)
            self._devices[device.id] = device
        for entry in data.get("tenants", []):
            self._tenants[entry["name"]] = Tenant(entry["name"], entry["quota_instances"])

    def _save(self) -> None:
        if not self._path:
            return
        data = {
            "devices": [d.to_json() for d in sorted(self._devices.values(), key=lambda d: d.name)],
            "tenants": [
                {"name": t.name, "quota_instances": t.quota_instances}
                for t in sorted(self._tenants.values(), key=lambda t: t.name)
            ],
        }
        directory = os.path.dirname(os.path.abspath(self._path))
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".inventory-")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump(data, fh, indent=2, sort_keys=True)
            os.replace(tmp, self._path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    # -- devices -----------------------------------------------------------

    def register_device(
        self,
        name: str,
        platform: Platform | str,
        dialect_id: str,
        mgmt_endpoint: str,
        credential_ref: Optional[str] = None,
        asn: Optional[int] = None,
    ) -> Device:
        platform = Platform(platform)
        validate_endpoint(mgmt_endpoint)
        if dialect_id not in self._dialects:
            raise UnknownDialect(dialect_id)
        if platform is Platform.TRADITIONAL_ROUTER and asn is None:
            raise ValueError("traditional-router devices require an asn")
        if asn is not None and not (1 <= asn <= MAX_ASN):
            raise ValueError(f"asn {asn} out of range")
        with self._lock:
            if any(d.name == name for d in self._devices.values()):
                raise DuplicateName(name)
            device = Device(
                id=f"d-{uuid.uuid4().hex[:8]}",
                name=name,
                platform=platform,
                dialect_id=dialect_id,
                mgmt_endpoint=mgmt_endpoint,
                credential_ref=credential_ref,
                asn=asn,
            )
            self._devices[device.id] = device
            self._save()
        self._events.emit("device", {"action": "registered", "id": device.id, "name": name})
        return device

    def get(self, device_id: str) -> Device:
        with self._lock:
            try:
                return self._devices[device_id]
            except KeyError:
                raise UnknownDevice(device_id) from None

    def get_by_name(self, name: str) -> Optional[Device]:
        with self._lock:
            for device in self._devices.values():
                if device.name == name:
                    return device
        return None

    def list_devices(
        self,
        platform: Optional[Platform | str] = None,
        reachability: Optional[Reachability | str] = None,
    ) -> list[Device]:
        now = time.time()
        with self._lock:
            devices = [self._effective(d, now) for d in self._devices.values()]
        if platform is not None:
            platform = Platform(platform)
            devices = [d for d in devices if d.platform is platform]
        if reachability is not None:
            reachability = Reachability(reachability)
            devices = [d for d in devices if d.reachability is reachability]
        return sorted(devices, key=lambda d: d.name)

    def _effective(self, device: Device, now: float) -> Device:
        """Reachability decays to unknown once the last probe is stale."""
        if (
            device.reachability is not Reachability.UNKNOWN
            and device.probed_at is not None
            and now - device.probed_at > self._ttl
        ):
            return replace(device, reachability=Reachability.UNKNOWN)
        return device

    def probe_device(self, device_id: str) -> Reachability:
        device = self.get(device_id)
        reachable = False
        if self.channel_factory is not None:
            try:
                channel = self.channel_factory(device.mgmt_endpoint, device.dialect_id)
                try:
                    reachable = channel.probe()
                finally:
                    channel.close()
            except ChannelError:
                reachable = False
        state = Reachability.REACHABLE if reachable else Reachability.UNREACHABLE
        with self._lock:
            device = self._devices[device_id]
            device.reachability = state
            device.probed_at = time.time()
            self._save()
        self._events.emit(
            "device", {"action": "probed", "id": device_id, "reachability": state.value}
        )
        return state

    # -- tenants -----------------------------------------------------------

    def add_tenant(self, name: str, quota_instances: int) -> Tenant:
        with self._lock:
            if name in self._tenants:
                raise DuplicateName(name)
            tenant = Tenant(name, quota_instances)
            self._tenants[name] = tenant
            self._save()
        self._events.emit(
            "device",
            {"action": "tenant-added", "tenant": name, "quota_instances": quota_instances},
        )
        return tenant

    def get_tenant(self, name: str) -> Tenant:
        with self._lock:
            try:
                return self._tenants[name]
            except KeyError:
                raise UnknownTenant(name) from None

    def list_tenants(self) -> list[Tenant]:
        with self._lock:
            return sorted(self._tenants.values(), key=lambda t: t.name)
