"""Repeatable timing experiments: automated failover vs a scripted
human-paced baseline, and the controller-count scaling curve.

The manual baseline replays the same recovery steps a person at a terminal
would take, inserting a documented think-time delay per step.  The delays
are an invented stand-in for a human operator (no published methodology
exists to copy), so the headline number is the speedup ratio, not either
absolute time.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass
from typing import Callable, Optional

from .autoscaler import Autoscaler, HealthSample, ScalePolicy
from .provisioner import InstanceSpec, Provisioner

# (step, think-time seconds) for the scripted human-paced failover
MANUAL_FAILOVER_STEPS: tuple[tuple[str, float], ...] = (
    ("notice the controller alarm", 1.2),
    ("open a console on the cloud host", 0.9),
    ("look up the container image and parameters", 1.1),
    ("type the command that starts the secondary", 0.8),
    ("wait for the secondary to come up and check it", 0.9),
    ("type the command that disables the primary", 0.8),
)


@dataclass
class FailoverTiming:
    automated_s: float
    manual_s: float

    @property
    def speedup(self) -> float:
        return self.manual_s / self.automated_s


def scripted_manual_failover(
    provisioner: Provisioner,
    service: str,
    sleep: Callable[[float], None] = time.sleep,
) -> float:
    """Perform one failover at human pace: the same recovery actions the
    autoscaler takes, with the documented think-time delay before each."""
    primary = provisioner.in_service(service)[0]
    started = time.monotonic()
    secondary = None
    for step, think_time in MANUAL_FAILOVER_STEPS:
        sleep(think_time)
        if step.startswith("type the command that starts"):
            spec = InstanceSpec(
                host_device_id=primary.spec.host_device_id,
                tenant=primary.spec.tenant,
                count=1,
                instance_type=primary.spec.instance_type,
                kind=primary.spec.kind,
            )
            secondary = provisioner.submit(spec, role="secondary")[0]
        elif step.startswith("wait for the secondary"):
            provisioner.wait([secondary.id])
        elif step.startswith("type the command that disables"):
            provisioner.disable(primary.id)
            provisioner.get(secondary.id).role = "primary"
    return time.monotonic() - started


def automated_failover(autoscaler: Autoscaler, policy: ScalePolicy) -> float:
    """Breach-to-secondary-ready time for the automated control loop path."""
    primary = autoscaler.provisioner.in_service(policy.service)[0]
    autoscaler.ingest(
        HealthSample(primary.id, timestamp=time.time(), utilization=1.0, alive=True)
    )
    started = time.monotonic()
    actions = autoscaler.evaluate(policy)
    autoscaler.execute(actions)
    return time.monotonic() - started


def controller_scaling(
    provisioner: Provisioner,
    host_device_id: str,
    tenant: str,
    n_max: int = 10,
    instance_type: str = "floodlight-controller",
) -> list[float]:
    """Provision and configure 1..n_max controllers one at a time; returns
    cumulative wall-clock seconds after each controller is ready."""
    timings: list[float] = []
    started = time.monotonic()
    for _ in range(n_max):
        spec = InstanceSpec(
            host_device_id=host_device_id,
            tenant=tenant,
            count=1,
            instance_type=instance_type,
            kind="container",
        )
        records = provisioner.submit(spec)
        provisioner.wait([records[0].id])
        record = provisioner.get(records[0].id)
        if record.state != "ready":
            raise RuntimeError(f"controller {record.id} failed: {record.error}")
        timings.append(time.monotonic() - started)
    return timings


def linear_fit_r2(xs: list[float], ys: list[float]) -> float:
    """R^2 of the least-squares line through (xs, ys)."""
    slope, intercept = statistics.linear_regression(xs, ys)
    mean_y = statistics.fmean(ys)
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    if ss_tot == 0:
        return 1.0
    return 1.0 - ss_res / ss_tot
