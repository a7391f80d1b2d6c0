import threading

import pytest

from netorch.configtree import ConfigDelta, ConfigDocument, DeltaOp
from netorch.devsim import FaultSpec
from netorch.errors import ChannelError, UnknownTarget
from netorch.reconciler import TaskDocument, diff

from conftest import naive_apply, random_document


def _switch(orch, name, dialect="ciscoish", initial=None, faults=None):
    endpoint = orch.simnet.spawn(dialect, initial=initial, faults=faults)
    return orch.inventory.register_device(name, "sdn-switch", dialect, endpoint)


# -- diff -----------------------------------------------------------------


def test_diff_identity_is_empty():
    doc = ConfigDocument({"a.b": 1, "c.d": "x"})
    assert diff(doc, doc, "replace").is_empty()
    assert diff(doc, doc, "merge").is_empty()


def test_diff_empty_actual_merge():
    desired = ConfigDocument({"interfaces.eth0.mtu": 1500})
    delta = diff(ConfigDocument(), desired, "merge")
    assert delta.ops == (DeltaOp("set", "interfaces.eth0.mtu", 1500),)


def test_diff_merge_never_deletes():
    actual = ConfigDocument({"a.b": 1, "c.d": 2})
    desired = ConfigDocument({"a.b": 9})
    delta = diff(actual, desired, "merge")
    assert all(op.op == "set" for op in delta)


def test_diff_deletes_before_sets():
    actual = ConfigDocument({"a.b": 1})
    desired = ConfigDocument({"a.c": 2})
    delta = diff(actual, desired, "replace")
    assert [op.op for op in delta] == ["delete", "set"]


def test_diff_replace_roundtrip_oracle(rng):
    # apply(diff(a, b, replace), a) == b against the independent naive apply
    for _ in range(500):
        a = random_document(rng)
        b = random_document(rng)
        assert naive_apply(a, diff(a, b, "replace")) == b


def test_diff_minimality_brute_force(rng):
    # no op can be removed and still converge (documents <= 12 paths)
    for _ in range(60):
        a = random_document(rng, max_paths=12)
        b = random_document(rng, max_paths=12)
        delta = diff(a, b, "replace")
        for skip in range(len(delta)):
            pruned = ConfigDelta([op for i, op in enumerate(delta.ops) if i != skip])
            assert naive_apply(a, pruned) != b


def test_diff_not_larger_than_full_rewrite(rng):
    for _ in range(100):
        a = random_document(rng)
        b = random_document(rng)
        full = len(set(a.paths()) | set(b.paths()))
        assert len(diff(a, b, "replace")) <= full


# -- apply ------------------------------------------------------------------


def test_apply_empty_delta(orch):
    device = _switch(orch, "sw1")
    report = orch.reconciler.apply(device, ConfigDelta())
    assert report.outcome == "ok"
    assert report.commands_sent == 0


def test_apply_one_op_ciscoish_sends_three(orch):
    device = _switch(orch, "sw1")
    delta = ConfigDelta([DeltaOp("set", "interfaces.eth0.mtu", 1500)])
    report = orch.reconciler.apply(device, delta)
    assert report.outcome == "ok"
    assert report.commands_sent == 3
    assert orch.simnet.inspect(device.mgmt_endpoint)["running"] == ConfigDocument(
        {"interfaces.eth0.mtu": 1500}
    )


def test_apply_nack_partial(orch):
    device = _switch(orch, "sw1", faults=FaultSpec(nack_at=1))
    delta = ConfigDelta([DeltaOp("set", "interfaces.eth0.mtu", 1500)])
    report = orch.reconciler.apply(device, delta)
    assert report.outcome == "partial"
    assert report.failed_at == 1  # 0-based: second of three rendered commands
    # remaining commands not sent: log has context line + nacked line only
    log = orch.simnet.inspect(device.mgmt_endpoint)["command_log"]
    assert log == ["interface eth0", "mtu 1500"]


def test_apply_transport_failure(orch):
    device = _switch(orch, "sw1", faults=FaultSpec(drop_connection=True))
    delta = ConfigDelta([DeltaOp("set", "interfaces.eth0.mtu", 1500)])
    report = orch.reconciler.apply(device, delta)
    assert report.outcome == "failed"
    assert report.failed_at is not None


# -- reconcile ------------------------------------------------------------------


def test_reconcile_in_sync_sends_nothing(orch):
    desired = ConfigDocument({"interfaces.eth0.mtu": 1500})
    device = _switch(orch, "sw1", initial=desired)
    report = orch.reconciler.reconcile(device, desired)
    assert report.commands_sent == 0


def test_reconcile_idempotent_random(orch, rng):
    device = _switch(orch, "sw1")
    for _ in range(50):
        desired = random_document(rng)
        first = orch.reconciler.reconcile(device, desired, mode="replace")
        assert first.outcome == "ok"
        second = orch.reconciler.reconcile(device, desired, mode="replace")
        assert second.commands_sent == 0


def test_reconcile_converges_to_predicted_state(orch, rng):
    for dialect_id in ("ciscoish", "junosish", "ovsish", "restish"):
        device = _switch(orch, f"sw-{dialect_id}", dialect=dialect_id)
        desired = random_document(rng)
        report = orch.reconciler.reconcile(device, desired, mode="replace")
        assert report.outcome == "ok"
        assert orch.simnet.inspect(device.mgmt_endpoint)["running"] == desired


def test_dialect_independence(orch, rng):
    # same desired document through every dialect yields the same actual state
    desired = random_document(rng, max_paths=10)
    for dialect_id in ("ciscoish", "junosish", "ovsish", "restish"):
        device = _switch(orch, f"d-{dialect_id}", dialect=dialect_id)
        orch.reconciler.reconcile(device, desired, mode="replace")
        assert orch.simnet.inspect(device.mgmt_endpoint)["running"] == desired


def test_reconcile_unreachable_raises(orch):
    device = orch.inventory.register_device("dead", "sdn-switch", "ciscoish", "127.0.0.1:1")
    with pytest.raises(ChannelError):
        orch.reconciler.reconcile(device, ConfigDocument({"a.b": 1}))


# -- run_task ----------------------------------------------------------------------


def test_run_task_in_sync_devices(orch):
    desired = ConfigDocument({"system.hostname": "x"})
    for name in ("a", "b", "c"):
        _switch(orch, name, initial=desired)
    task = TaskDocument(targets=("a", "b", "c"), desired=desired)
    reports = orch.reconciler.run_task(task)
    assert len(reports) == 3
    assert all(r.commands_sent == 0 for r in reports)


def test_run_task_platform_selector(orch):
    _switch(orch, "sw1")
    _switch(orch, "sw2")
    host = orch.inventory.register_device("h1", "cloud-node", "ovsish", orch.simnet.spawn("ovsish"))
    desired = ConfigDocument({"system.hostname": "set-by-task"})
    task = TaskDocument(targets=("platform=sdn-switch",), desired=desired)
    reports = orch.reconciler.run_task(task)
    assert {r.device_id for r in reports} == {
        d.id for d in orch.inventory.list_devices(platform="sdn-switch")
    }
    # the cloud node was not touched
    assert orch.simnet.inspect(host.mgmt_endpoint)["running"] == ConfigDocument()


def test_run_task_isolates_failures(orch):
    _switch(orch, "ok1")
    _switch(orch, "ok2")
    orch.inventory.register_device("dead", "sdn-switch", "ciscoish", "127.0.0.1:1")
    task = TaskDocument(targets=("platform=sdn-switch",),
                        desired=ConfigDocument({"system.hostname": "y"}))
    reports = orch.reconciler.run_task(task)
    assert len(reports) == 3
    outcomes = sorted(r.outcome for r in reports)
    assert outcomes == ["failed", "ok", "ok"]


def test_run_task_unknown_target(orch):
    task = TaskDocument(targets=("ghost",), desired=ConfigDocument({"a.b": 1}))
    with pytest.raises(UnknownTarget):
        orch.reconciler.run_task(task)


def test_run_task_reports_ordered_by_name(orch):
    for name in ("zeta", "alpha", "mid"):
        _switch(orch, name)
    task = TaskDocument(targets=("platform=sdn-switch",),
                        desired=ConfigDocument({"a.b": 1}))
    reports = orch.reconciler.run_task(task)
    by_name = {d.id: d.name for d in orch.inventory.list_devices()}
    assert [by_name[r.device_id] for r in reports] == ["alpha", "mid", "zeta"]


def test_per_device_serialization(orch):
    # two concurrent applies to one device never interleave on its channel
    device = _switch(orch, "sw1")
    delta_a = ConfigDelta([DeltaOp("set", "interfaces.eth0.mtu", 1500)])
    delta_b = ConfigDelta([DeltaOp("set", "vlan.10.name", "blue")])

    threads = [
        threading.Thread(target=orch.reconciler.apply, args=(device, d))
        for d in (delta_a, delta_b)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    log = orch.simnet.inspect(device.mgmt_endpoint)["command_log"]
    seq_a = ["interface eth0", "mtu 1500", "exit"]
    seq_b = ["vlan 10", "name \"blue\"", "exit"]
    assert log in ([*seq_a, *seq_b], [*seq_b, *seq_a])


def test_task_document_json_roundtrip(tmp_path):
    task = TaskDocument(targets=("a", "platform=sdn-switch"),
                        desired=ConfigDocument({"a.b": 1}), mode="replace")
    path = tmp_path / "task.json"
    path.write_text(__import__("json").dumps(task.to_json()))
    assert TaskDocument.load(str(path)) == task
