"""netorch command-line interface.

Subcommands map one-to-one onto API endpoints.  By default the CLI runs
against an embedded orchestrator (local mode); pass --server URL to talk
to a running service instead.  Exit codes: 0 success, 1 API error, 2 usage
error.  Flags can also come from NETORCH_* environment variables.
"""

from __future__ import annotations

import json
import logging
import sys
from typing import Optional

import click
import httpx

from ..orchestrator import Orchestrator


class ApiClient:
    """Uniform HTTP-shaped access to either a remote server or an embedded app."""

    def __init__(self, server: Optional[str], inventory: Optional[str], token: Optional[str]):
        if server:
            headers = {"Authorization": f"Bearer {token}"} if token else {}
            self._client = httpx.Client(base_url=server, headers=headers, timeout=30.0)
            self._orch = None
        else:
            from starlette.testclient import TestClient

            from .server import create_app

            self._orch = Orchestrator(inventory_path=inventory)
            self._client = TestClient(create_app(self._orch, token=None))

    @property
    def orchestrator(self) -> Optional[Orchestrator]:
        return self._orch

    def call(self, method: str, path: str, **kwargs) -> dict | list:
        response = self._client.request(method, path, **kwargs)
        if response.status_code >= 400:
            try:
                detail = response.json()
            except ValueError:
                detail = {"error": "http", "detail": response.text}
            raise ApiError(response.status_code, detail)
        if response.text:
            return response.json()
        return {}


class ApiError(Exception):
    def __init__(self, status: int, body: dict):
        super().__init__(f"HTTP {status}: {body}")
        self.status = status
        self.body = body


def _fail(exc: ApiError) -> None:
    click.echo(f"error: {exc.body.get('error', 'http')}: {exc.body.get('detail', '')}", err=True)
    sys.exit(1)


@click.group()
@click.option("--server", envvar="NETORCH_SERVER", default=None,
              help="URL of a running netorch API; omit for embedded local mode.")
@click.option("--inventory", envvar="NETORCH_INVENTORY", default=None,
              type=click.Path(), help="Inventory file (local mode).")
@click.option("--token", envvar="NETORCH_TOKEN", default=None,
              help="Bearer token for --server mode.")
@click.option("--log-level", envvar="NETORCH_LOG_LEVEL", default="warning")
@click.pass_context
def main(ctx, server, inventory, token, log_level):
    logging.basicConfig(level=log_level.upper())
    ctx.obj = ApiClient(server, inventory, token)


# -- device -------------------------------------------------------------------


@main.group()
def device():
    """Manage the device registry."""


@device.command("list")
@click.option("--platform", default=None)
@click.pass_obj
def device_list(client: ApiClient, platform):
    try:
        devices = client.call("GET", "/devices", params={"platform": platform} if platform else None)
    except ApiError as exc:
        _fail(exc)
    for d in devices:
        click.echo(f"{d['id']}  {d['name']:<16} {d['platform']:<18} "
                   f"{d['dialect_id']:<10} {d['reachability']}")


@device.command("register")
@click.option("--name", required=True)
@click.option("--platform", required=True,
              type=click.Choice(["cloud-node", "sdn-switch", "traditional-router"]))
@click.option("--dialect", "dialect_id", required=True)
@click.option("--endpoint", "mgmt_endpoint", required=True)
@click.option("--asn", type=int, default=None)
@click.pass_obj
def device_register(client: ApiClient, name, platform, dialect_id, mgmt_endpoint, asn):
    body = {"name": name, "platform": platform, "dialect_id": dialect_id,
            "mgmt_endpoint": mgmt_endpoint, "asn": asn}
    try:
        result = client.call("POST", "/devices", json=body)
    except ApiError as exc:
        _fail(exc)
    click.echo(result["id"])


@device.command("probe")
@click.argument("device_id")
@click.pass_obj
def device_probe(client: ApiClient, device_id):
    try:
        result = client.call("POST", f"/devices/{device_id}/probe")
    except ApiError as exc:
        _fail(exc)
    click.echo(result["reachability"])


# -- tenant --------------------------------------------------------------------


@main.group()
def tenant():
    """Manage tenants."""


@tenant.command("add")
@click.option("--name", required=True)
@click.option("--quota", "quota_instances", required=True, type=int)
@click.pass_obj
def tenant_add(client: ApiClient, name, quota_instances):
    try:
        client.call("POST", "/tenants", json={"name": name, "quota_instances": quota_instances})
    except ApiError as exc:
        _fail(exc)
    click.echo(name)


# -- task -----------------------------------------------------------------------


@main.group()
def task():
    """Run declarative task documents."""


@task.command("run")
@click.argument("task_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def task_run(client: ApiClient, task_file):
    with open(task_file) as fh:
        body = json.load(fh)
    try:
        result = client.call("POST", "/tasks", json=body)
    except ApiError as exc:
        _fail(exc)
    click.echo(result["task_id"])
    for report in result["reports"]:
        click.echo(f"  {report['device_id']}  {report['outcome']:<8} "
                   f"commands={report['commands_sent']}")
    if any(r["outcome"] != "ok" for r in result["reports"]):
        sys.exit(1)


# -- instance ----------------------------------------------------------------------


@main.group()
def instance():
    """Provision and manage instances."""


@instance.command("create")
@click.option("--host", required=True)
@click.option("--tenant", required=True)
@click.option("--count", required=True, type=int)
@click.option("--type", "instance_type", required=True)
@click.option("--kind", required=True, type=click.Choice(["vm", "container"]))
@click.option("--validate", "validate_after", is_flag=True)
@click.option("--fresh-install", is_flag=True)
@click.pass_obj
def instance_create(client, host, tenant, count, instance_type, kind, validate_after, fresh_install):
    body = {"host": host, "tenant": tenant, "count": count, "type": instance_type,
            "kind": kind, "validate": validate_after, "fresh_install": fresh_install}
    try:
        result = client.call("POST", "/instances", json=body)
    except ApiError as exc:
        _fail(exc)
    for instance_id in result["ids"]:
        click.echo(instance_id)


@instance.command("list")
@click.option("--tenant", default=None)
@click.pass_obj
def instance_list(client: ApiClient, tenant):
    try:
        records = client.call("GET", "/instances", params={"tenant": tenant} if tenant else None)
    except ApiError as exc:
        _fail(exc)
    for r in records:
        click.echo(f"{r['id']}  {r['type']:<22} {r['kind']:<10} {r['state']:<12} "
                   f"role={r['role']}")


@instance.command("validate")
@click.argument("instance_id")
@click.pass_obj
def instance_validate(client: ApiClient, instance_id):
    try:
        report = client.call("POST", f"/instances/{instance_id}/validate")
    except ApiError as exc:
        _fail(exc)
    for check in report["checks"]:
        click.echo(f"{'PASS' if check['pass'] else 'FAIL'}  {check['name']}: {check['detail']}")
    click.echo("overall: " + ("pass" if report["overall"] else "fail"))
    if not report["overall"]:
        sys.exit(1)


@instance.command("fresh-install")
@click.argument("instance_id")
@click.pass_obj
def instance_fresh_install(client: ApiClient, instance_id):
    try:
        result = client.call("POST", f"/instances/{instance_id}/fresh-install")
    except ApiError as exc:
        _fail(exc)
    click.echo(result["state"])


# -- policy ---------------------------------------------------------------------------


@main.group()
def policy():
    """Autoscaling / failover policies."""


@policy.command("add")
@click.option("--service", required=True)
@click.option("--threshold", type=float, default=0.8)
@click.option("--check-interval-ms", type=int, default=500)
@click.option("--cooldown-ms", type=int, default=5000)
@click.option("--max-replicas", type=int, default=2)
@click.option("--mode", type=click.Choice(["failover", "scale-out"]), default="failover")
@click.pass_obj
def policy_add(client, service, threshold, check_interval_ms, cooldown_ms, max_replicas, mode):
    body = {"service": service, "threshold": threshold,
            "check_interval_ms": check_interval_ms, "cooldown_ms": cooldown_ms,
            "max_replicas": max_replicas, "mode": mode}
    try:
        client.call("POST", "/policies", json=body)
    except ApiError as exc:
        _fail(exc)
    click.echo(service)


@policy.command("list")
@click.pass_obj
def policy_list(client: ApiClient):
    try:
        policies = client.call("GET", "/policies")
    except ApiError as exc:
        _fail(exc)
    for p in policies:
        click.echo(f"{p['service']:<24} threshold={p['threshold']} mode={p['mode']}")


# -- bgp --------------------------------------------------------------------------------


@main.group()
def bgp():
    """BGP speaker observability."""


@bgp.command("rib")
@click.argument("speaker_id")
@click.pass_obj
def bgp_rib(client: ApiClient, speaker_id):
    try:
        rib = client.call("GET", f"/bgp/{speaker_id}/rib")
    except ApiError as exc:
        _fail(exc)
    click.echo(json.dumps(rib, indent=2, sort_keys=True))


# -- sim ---------------------------------------------------------------------------------


@main.group()
def sim():
    """Simulated device control (local mode only)."""


@sim.command("spawn")
@click.option("--dialect", "dialect_id", required=True)
@click.option("--port", type=int, default=0)
@click.option("--foreground/--no-foreground", default=True,
              help="Keep the process alive serving the simulator.")
@click.pass_obj
def sim_spawn(client: ApiClient, dialect_id, port, foreground):
    orch = client.orchestrator
    if orch is None:
        click.echo("error: sim spawn needs local mode", err=True)
        sys.exit(1)
    try:
        endpoint = orch.simnet.spawn(dialect_id, bind=True, port=port)
    except Exception as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(endpoint)
    if foreground:
        import threading

        threading.Event().wait()


# -- events --------------------------------------------------------------------------------


@main.command("events")
@click.option("--since", type=int, default=0)
@click.option("--follow", is_flag=True)
@click.pass_obj
def events_cmd(client: ApiClient, since, follow):
    while True:
        try:
            records = client.call(
                "GET", "/events",
                params={"since": since, "wait_ms": 2000 if follow else 0},
            )
        except ApiError as exc:
            _fail(exc)
        for e in records:
            click.echo(f"{e['seq']:>6}  {e['category']:<8} {e['severity']:<6} "
                       f"{json.dumps(e['payload'], sort_keys=True)}")
            since = max(since, e["seq"])
        if not follow:
            break


# -- serve ------------------------------------------------------------------------------------


@main.command("serve")
@click.option("--listen", default="127.0.0.1:8080", help="host:port to bind.")
@click.option("--token-file", "token_path", type=click.Path(exists=True), default=None)
@click.pass_obj
def serve(client: ApiClient, listen, token_path):
    import uvicorn

    from .server import create_app

    orch = client.orchestrator or Orchestrator()
    token = None
    if token_path:
        with open(token_path) as fh:
            token = fh.read().strip()
    host, _, port = listen.rpartition(":")
    app = create_app(orch, token=token)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))


if __name__ == "__main__":
    main()
