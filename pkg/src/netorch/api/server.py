"""North-bound REST API: the only machine-facing surface of the system.

Every mutating endpoint funnels into the owning module and therefore emits
at least one event; GET /events (with optional long-poll) is the single
stream the CLI and UI consume.
"""

from __future__ import annotations

from typing import Optional

from fastapi import Depends, FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .. import errors
from ..autoscaler import ScalePolicy
from ..inventory import Platform
from ..orchestrator import Orchestrator
from ..provisioner import InstanceSpec
from ..reconciler import TaskDocument

# error class -> HTTP status
_STATUS = {
    errors.DuplicateName: 409,
    errors.QuotaExceeded: 409,
    errors.UnknownDialect: 422,
    errors.InvalidEndpoint: 422,
    errors.InvalidSpec: 422,
    errors.IncompatibleKind: 422,
    errors.InvalidDocument: 422,
    errors.InvalidDelta: 422,
    errors.InvalidPrefix: 422,
    errors.InvalidSample: 422,
    errors.UnknownDevice: 404,
    errors.UnknownTenant: 404,
    errors.UnknownInstance: 404,
    errors.UnknownTarget: 404,
    errors.UnknownPolicy: 404,
    errors.UnknownEndpoint: 404,
    errors.UnknownHost: 422,
    errors.NotReady: 409,
    errors.Terminated: 409,
    errors.ChannelError: 502,
    errors.ProvisionFailed: 502,
}


class DeviceIn(BaseModel):
    name: str
    platform: str
    dialect_id: str
    mgmt_endpoint: str
    credential_ref: Optional[str] = None
    asn: Optional[int] = None


class TenantIn(BaseModel):
    name: str
    quota_instances: int


class TaskIn(BaseModel):
    targets: list[str]
    desired: dict = Field(default_factory=dict)
    mode: str = "merge"


class InstanceIn(BaseModel):
    host: str
    tenant: str
    count: int
    type: str
    kind: str
    validate_after: bool = Field(default=False, alias="validate")
    fresh_install: bool = False

    model_config = {"populate_by_name": True}


class PolicyIn(BaseModel):
    service: str
    threshold: float = 0.8
    check_interval_ms: int = 500
    cooldown_ms: int = 5000
    max_replicas: int = 2
    mode: str = "failover"


class SampleIn(BaseModel):
    instance_id: str
    timestamp: float
    utilization: float
    alive: bool = True


def create_app(orch: Orchestrator, token: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="netorch", version="0.1.0")

    async def require_auth(request: Request) -> None:
        if token is None:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or bad bearer token")

    dep = [Depends(require_auth)]

    @app.exception_handler(errors.NetorchError)
    async def on_error(request: Request, exc: errors.NetorchError):
        status = 500
        for cls, code in _STATUS.items():
            if isinstance(exc, cls):
                status = code
                break
        return JSONResponse(
            status_code=status, content={"error": exc.code, "detail": str(exc)}
        )

    # -- devices ----------------------------------------------------------

    @app.get("/devices", dependencies=dep)
    def list_devices(platform: Optional[str] = None, reachability: Optional[str] = None):
        return [
            d.to_json()
            for d in orch.inventory.list_devices(platform=platform, reachability=reachability)
        ]

    @app.post("/devices", status_code=201, dependencies=dep)
    def register_device(body: DeviceIn):
        try:
            device = orch.inventory.register_device(
                name=body.name,
                platform=Platform(body.platform),
                dialect_id=body.dialect_id,
                mgmt_endpoint=body.mgmt_endpoint,
                credential_ref=body.credential_ref,
                asn=body.asn,
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return device.to_json()

    @app.post("/devices/{device_id}/probe", dependencies=dep)
    def probe_device(device_id: str):
        state = orch.inventory.probe_device(device_id)
        return {"id": device_id, "reachability": state.value}

    # -- tenants ------------------------------------------------------------

    @app.get("/tenants", dependencies=dep)
    def list_tenants():
        return [
            {"name": t.name, "quota_instances": t.quota_instances}
            for t in orch.inventory.list_tenants()
        ]

    @app.post("/tenants", status_code=201, dependencies=dep)
    def add_tenant(body: TenantIn):
        try:
            tenant = orch.inventory.add_tenant(body.name, body.quota_instances)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"name": tenant.name, "quota_instances": tenant.quota_instances}

    # -- tasks -----------------------------------------------------------------

    @app.post("/tasks", dependencies=dep)
    def run_task(body: TaskIn):
        try:
            task = TaskDocument.from_json(body.model_dump())
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return orch.run_task(task)

    @app.get("/tasks/{task_id}", dependencies=dep)
    def get_task(task_id: str):
        result = orch.get_task(task_id)
        if result is None:
            raise HTTPException(status_code=404, detail=f"no task {task_id}")
        return result

    # -- instances ----------------------------------------------------------------

    @app.get("/instances", dependencies=dep)
    def list_instances(tenant: Optional[str] = None, type: Optional[str] = None):
        return [r.to_json() for r in orch.provisioner.list_instances(tenant, type)]

    @app.post("/instances", status_code=201, dependencies=dep)
    def create_instances(body: InstanceIn):
        host = orch.inventory.get_by_name(body.host)
        host_id = host.id if host else body.host
        spec = InstanceSpec(
            host_device_id=host_id,
            tenant=body.tenant,
            count=body.count,
            instance_type=body.type,
            kind=body.kind,
            validate=body.validate_after,
            fresh_install=body.fresh_install,
        )
        records = orch.provisioner.submit(spec)
        return {"ids": [r.id for r in records]}

    @app.get("/instances/{instance_id}", dependencies=dep)
    def get_instance(instance_id: str):
        return orch.provisioner.get(instance_id).to_json()

    @app.post("/instances/{instance_id}/validate", dependencies=dep)
    def validate_instance(instance_id: str):
        return orch.provisioner.validate(instance_id)

    @app.post("/instances/{instance_id}/fresh-install", dependencies=dep)
    def fresh_install(instance_id: str):
        return orch.provisioner.fresh_install(instance_id).to_json()

    # -- policies / samples / metrics ---------------------------------------------

    @app.get("/policies", dependencies=dep)
    def list_policies():
        return [p.to_json() for p in orch.autoscaler.list_policies()]

    @app.post("/policies", status_code=201, dependencies=dep)
    def add_policy(body: PolicyIn):
        try:
            policy = ScalePolicy(**body.model_dump())
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        orch.autoscaler.add_policy(policy)
        return policy.to_json()

    @app.post("/samples", status_code=202, dependencies=dep)
    def ingest_sample(body: SampleIn):
        from ..autoscaler import HealthSample

        orch.autoscaler.ingest(HealthSample(**body.model_dump()))
        return {"accepted": True}

    @app.get("/metrics", dependencies=dep)
    def metrics():
        return orch.metrics()

    # -- bgp --------------------------------------------------------------------------

    @app.get("/bgp/{speaker_id}/rib", dependencies=dep)
    def rib(speaker_id: str):
        return orch.rib(speaker_id)

    # -- events -------------------------------------------------------------------------

    @app.get("/events", dependencies=dep)
    def events(since: int = 0, wait_ms: int = 0):
        if wait_ms > 0:
            records = orch.events.wait_since(since, timeout=wait_ms / 1000.0)
        else:
            records = orch.events.since(since)
        return [e.to_json() for e in records]

    return app
