"""Threshold-driven self-healing for containerized controllers.

Ingests utilization/liveness samples, detects threshold breach, death, or a
missing heartbeat, and reacts with the failover pair: spawn a secondary
controller, then (and only then) disable the primary.  Detect-to-ready
latency is recorded for every failover so the speedup over a manual
runbook can be measured.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .errors import InvalidSample, ProvisionFailed, UnknownPolicy
from .events import EventLog
from .provisioner import INSTANCE_TYPES, InstanceRecord, InstanceSpec, Provisioner

SAMPLE_RING_SIZE = 256

DEFAULT_THRESHOLD = 0.8
DEFAULT_CHECK_INTERVAL_MS = 500
DEFAULT_COOLDOWN_MS = 5_000


@dataclass(frozen=True)
class HealthSample:
    instance_id: str
    timestamp: float
    utilization: float
    alive: bool = True

    def __post_init__(self):
        if not 0.0 <= self.utilization <= 1.0:
            raise InvalidSample(f"utilization {self.utilization} outside [0, 1]")


@dataclass(frozen=True)
class ScalePolicy:
    service: str  # instance type being protected
    threshold: float = DEFAULT_THRESHOLD
    check_interval_ms: int = DEFAULT_CHECK_INTERVAL_MS
    cooldown_ms: int = DEFAULT_COOLDOWN_MS
    max_replicas: int = 2
    mode: str = "failover"  # failover | scale-out
    smoothing_window: int = 1  # samples averaged; 1 = latest only

    def __post_init__(self):
        if self.service not in INSTANCE_TYPES:
            raise ValueError(f"unknown service type {self.service!r}")
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError("threshold must be in (0, 1]")
        if self.cooldown_ms < self.check_interval_ms:
            raise ValueError("cooldown must be >= check interval")
        if self.mode not in ("failover", "scale-out"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "failover" and self.max_replicas < 2:
            raise ValueError("failover mode needs max_replicas >= 2")

    def to_json(self) -> dict:
        return {
            "service": self.service,
            "threshold": self.threshold,
            "check_interval_ms": self.check_interval_ms,
            "cooldown_ms": self.cooldown_ms,
            "max_replicas": self.max_replicas,
            "mode": self.mode,
            "smoothing_window": self.smoothing_window,
        }


@dataclass
class ScaleAction:
    kind: str  # spawn-secondary | disable-primary | promote-secondary | no-op
    service: str
    target: Optional[str]  # instance id, None for spawn
    reason: str
    issued_at: float
    completed_at: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "service": self.service,
            "target": self.target,
            "reason": self.reason,
            "issued_at": self.issued_at,
            "completed_at": self.completed_at,
        }


def decide(
    latest: Optional[HealthSample],
    policy: ScalePolicy,
    now: float,
    in_cooldown: bool,
    replicas: int,
    window: tuple[HealthSample, ...] = (),
) -> tuple[bool, str]:
    """Pure breach decision: (breached, reason)."""
    stale_after = 2 * policy.check_interval_ms / 1000.0
    if latest is None or now - latest.timestamp > stale_after:
        breached, reason = True, "missing-heartbeat"
    elif not latest.alive:
        breached, reason = True, "instance-dead"
    else:
        if policy.smoothing_window > 1 and window:
            recent = window[-policy.smoothing_window:]
            utilization = sum(s.utilization for s in recent) / len(recent)
        else:
            utilization = latest.utilization
        if utilization >= policy.threshold:
            breached, reason = True, "threshold-breach"
        else:
            return False, "healthy"
    if in_cooldown:
        return False, "cooldown"
    if replicas >= policy.max_replicas:
        return False, "replica-limit"
    return True, reason


class Autoscaler:
    def __init__(self, provisioner: Provisioner, events: EventLog):
        self.provisioner = provisioner
        self.events = events
        self._samples: dict[str, deque[HealthSample]] = {}
        self._policies: dict[str, ScalePolicy] = {}
        self._last_failover: dict[str, float] = {}
        self._exec_locks: dict[str, threading.Lock] = {}
        self._lock = threading.RLock()
        self._loops: dict[str, threading.Thread] = {}
        self._stop = threading.Event()
        self.latencies_ms: list[float] = []

    # -- samples ------------------------------------------------------------

    def ingest(self, sample: HealthSample) -> None:
        self.provisioner.get(sample.instance_id)  # raises UnknownInstance
        with self._lock:
            ring = self._samples.setdefault(
                sample.instance_id, deque(maxlen=SAMPLE_RING_SIZE)
            )
            if ring and sample.timestamp < ring[-1].timestamp:
                self.events.emit(
                    "scale",
                    {"action": "sample-dropped", "id": sample.instance_id,
                     "reason": "out-of-order"},
                    severity="warn",
                )
                return
            ring.append(sample)

    def latest_sample(self, instance_id: str) -> Optional[HealthSample]:
        with self._lock:
            ring = self._samples.get(instance_id)
            return ring[-1] if ring else None

    def sample_window(self, instance_id: str) -> tuple[HealthSample, ...]:
        with self._lock:
            return tuple(self._samples.get(instance_id, ()))

    # -- policies -------------------------------------------------------------

    def add_policy(self, policy: ScalePolicy) -> None:
        with self._lock:
            self._policies[policy.service] = policy
            self._exec_locks.setdefault(policy.service, threading.Lock())
        self.events.emit("scale", {"action": "policy-added", **policy.to_json()})

    def get_policy(self, service: str) -> ScalePolicy:
        with self._lock:
            try:
                return self._policies[service]
            except KeyError:
                raise UnknownPolicy(service) from None

    def list_policies(self) -> list[ScalePolicy]:
        with self._lock:
            return sorted(self._policies.values(), key=lambda p: p.service)

    # -- evaluation -------------------------------------------------------------

    def evaluate(self, policy: ScalePolicy, now: Optional[float] = None) -> list[ScaleAction]:
        """Deterministic decision for one policy at one instant."""
        now = time.time() if now is None else now
        in_service = self.provisioner.in_service(policy.service)
        primary = next((r for r in in_service if r.role == "primary"), None)
        if primary is None:
            return [ScaleAction("no-op", policy.service, None, "no-primary", now)]
        last = self._last_failover.get(policy.service)
        in_cooldown = last is not None and (now - last) < policy.cooldown_ms / 1000.0
        breached, reason = decide(
            self.latest_sample(primary.id),
            policy,
            now,
            in_cooldown,
            replicas=len(in_service),
            window=self.sample_window(primary.id),
        )
        if not breached:
            return [ScaleAction("no-op", policy.service, primary.id, reason, now)]
        if policy.mode == "scale-out":
            return [ScaleAction("spawn-secondary", policy.service, None, reason, now)]
        return [
            ScaleAction("spawn-secondary", policy.service, None, reason, now),
            ScaleAction("disable-primary", policy.service, primary.id, reason, now),
        ]

    # -- execution -----------------------------------------------------------------

    def execute(self, actions: list[ScaleAction]) -> list[ScaleAction]:
        """Run an action sequence from evaluate; failovers for one service
        never overlap.  Safety rule: the primary is disabled only after the
        secondary is ready; if the spawn fails the primary is untouched."""
        if not actions:
            return actions
        service = actions[0].service
        with self._exec_locks.setdefault(service, threading.Lock()):
            secondary: Optional[InstanceRecord] = None
            for action in actions:
                if action.kind == "no-op":
                    action.completed_at = time.time()
                    self.events.emit("scale", {"action": "no-op", "service": service,
                                               "reason": action.reason})
                elif action.kind == "spawn-secondary":
                    secondary = self._spawn_secondary(action)
                elif action.kind == "disable-primary":
                    if secondary is None or secondary.state != "ready":
                        raise ProvisionFailed(
                            f"refusing to disable primary {action.target}: no ready secondary"
                        )
                    self.provisioner.disable(action.target)
                    self.provisioner.get(secondary.id).role = "primary"
                    action.completed_at = time.time()
                    self._last_failover[service] = action.completed_at
                    self.events.emit(
                        "scale",
                        {"action": "disable-primary", "service": service,
                         "target": action.target, "promoted": secondary.id},
                    )
        return actions

    def _spawn_secondary(self, action: ScaleAction) -> InstanceRecord:
        template = self.provisioner.in_service(action.service)
        if not template:
            raise ProvisionFailed(f"no in-service {action.service} to clone")
        base = template[0].spec
        spec = InstanceSpec(
            host_device_id=base.host_device_id,
            tenant=base.tenant,
            count=1,
            instance_type=base.instance_type,
            kind=base.kind,
        )
        records = self.provisioner.submit(spec, role="secondary")
        self.provisioner.wait([records[0].id])
        record = self.provisioner.get(records[0].id)
        if record.state != "ready":
            self.events.emit(
                "scale",
                {"action": "spawn-failed", "service": action.service, "id": record.id,
                 "error": record.error},
                severity="error",
            )
            raise ProvisionFailed(record.error or "secondary failed to provision")
        action.completed_at = time.time()
        latency_ms = (action.completed_at - action.issued_at) * 1000.0
        self.latencies_ms.append(latency_ms)
        self.events.emit(
            "scale",
            {"action": "spawn-secondary", "service": action.service, "id": record.id,
             "reason": action.reason, "latency_ms": latency_ms},
        )
        return record

    # -- metrics ---------------------------------------------------------------------

    def metrics(self) -> dict:
        buckets = [100, 250, 500, 1000, 2000, 5000]
        histogram = {f"<={b}ms": sum(1 for v in self.latencies_ms if v <= b) for b in buckets}
        histogram[f">{buckets[-1]}ms"] = sum(1 for v in self.latencies_ms if v > buckets[-1])
        replicas = {
            policy.service: len(self.provisioner.in_service(policy.service))
            for policy in self.list_policies()
        }
        return {
            "detect_to_ready_ms": {
                "count": len(self.latencies_ms),
                "histogram": histogram,
                "max": max(self.latencies_ms) if self.latencies_ms else None,
            },
            "in_service_replicas": replicas,
        }

    # -- control loop -------------------------------------------------------------------

    def start_loop(self, service: str) -> None:
        policy = self.get_policy(service)
        if service in self._loops:
            return

        def loop():
            while not self._stop.is_set():
                try:
                    actions = self.evaluate(policy)
                    if any(a.kind != "no-op" for a in actions):
                        self.execute(actions)
                except ProvisionFailed:
                    pass  # alarm already in the event log
                self._stop.wait(policy.check_interval_ms / 1000.0)

        thread = threading.Thread(target=loop, daemon=True, name=f"autoscaler-{service}")
        self._loops[service] = thread
        thread.start()

    def stop_loops(self) -> None:
        self._stop.set()
        for thread in self._loops.values():
            thread.join(timeout=2.0)
        self._loops.clear()
        self._stop = threading.Event()
