import random
import time

import pytest

from netorch.autoscaler import HealthSample, ScalePolicy, decide
from netorch.errors import InvalidSample, ProvisionFailed, UnknownInstance
from netorch.provisioner import InstanceSpec


@pytest.fixture
def env(orch):
    host = orch.inventory.register_device(
        "h1", "cloud-node", "ovsish", orch.simnet.spawn("ovsish")
    )
    orch.inventory.add_tenant("t1", 50)
    spec = InstanceSpec(host.id, "t1", 1, "floodlight-controller", "container")
    record = orch.provisioner.submit(spec)[0]
    orch.provisioner.wait([record.id])
    policy = ScalePolicy(service="floodlight-controller", threshold=0.8,
                         check_interval_ms=500, cooldown_ms=5000)
    orch.autoscaler.add_policy(policy)
    return orch, record, policy


def test_policy_invariants():
    with pytest.raises(ValueError):
        ScalePolicy(service="ovs", cooldown_ms=100, check_interval_ms=500)
    with pytest.raises(ValueError):
        ScalePolicy(service="ovs", max_replicas=1, mode="failover")
    with pytest.raises(ValueError):
        ScalePolicy(service="ovs", threshold=0.0)


def test_ingest_and_ring(env):
    orch, record, _ = env
    now = time.time()
    orch.autoscaler.ingest(HealthSample(record.id, now, 0.5))
    assert orch.autoscaler.latest_sample(record.id).utilization == 0.5


def test_ingest_rejects_out_of_range():
    with pytest.raises(InvalidSample):
        HealthSample("i", 0.0, 1.3)


def test_ingest_unknown_instance(env):
    orch, _, _ = env
    with pytest.raises(UnknownInstance):
        orch.autoscaler.ingest(HealthSample("i-ghost", time.time(), 0.5))


def test_out_of_order_sample_dropped(env):
    orch, record, _ = env
    now = time.time()
    orch.autoscaler.ingest(HealthSample(record.id, now, 0.5))
    seq_before = orch.events.max_seq
    orch.autoscaler.ingest(HealthSample(record.id, now - 10, 0.9))
    assert orch.autoscaler.latest_sample(record.id).utilization == 0.5
    dropped = [e for e in orch.events.since(seq_before)
               if e.payload.get("action") == "sample-dropped"]
    assert len(dropped) == 1


def test_evaluate_breach_emits_failover_pair(env):
    orch, record, policy = env
    now = time.time()
    orch.autoscaler.ingest(HealthSample(record.id, now, 0.95))
    actions = orch.autoscaler.evaluate(policy, now)
    assert [a.kind for a in actions] == ["spawn-secondary", "disable-primary"]


def test_evaluate_below_threshold_noop(env):
    orch, record, policy = env
    now = time.time()
    orch.autoscaler.ingest(HealthSample(record.id, now, 0.5))
    actions = orch.autoscaler.evaluate(policy, now)
    assert [a.kind for a in actions] == ["no-op"]


def test_evaluate_cooldown(env):
    orch, record, policy = env
    now = time.time()
    orch.autoscaler._last_failover[policy.service] = now - 1.0
    orch.autoscaler.ingest(HealthSample(record.id, now, 0.95))
    actions = orch.autoscaler.evaluate(policy, now)
    assert actions[0].kind == "no-op"
    assert actions[0].reason == "cooldown"


def test_evaluate_missing_heartbeat_is_failure(env):
    orch, record, policy = env
    stale = time.time() - 10.0
    orch.autoscaler.ingest(HealthSample(record.id, stale, 0.1))
    actions = orch.autoscaler.evaluate(policy)
    assert actions[0].kind == "spawn-secondary"
    assert actions[0].reason == "missing-heartbeat"


def test_evaluate_dead_instance(env):
    orch, record, policy = env
    now = time.time()
    orch.autoscaler.ingest(HealthSample(record.id, now, 0.1, alive=False))
    actions = orch.autoscaler.evaluate(policy, now)
    assert actions[0].reason == "instance-dead"


def _naive_decide(latest, policy, now, in_cooldown, replicas):
    # straight-line restatement of the decision rule, kept independent
    if latest is None or now - latest.timestamp > 2 * policy.check_interval_ms / 1000.0:
        breached, reason = True, "missing-heartbeat"
    elif not latest.alive:
        breached, reason = True, "instance-dead"
    elif latest.utilization >= policy.threshold:
        breached, reason = True, "threshold-breach"
    else:
        return False, "healthy"
    if in_cooldown:
        return False, "cooldown"
    if replicas >= policy.max_replicas:
        return False, "replica-limit"
    return True, reason


def test_decision_against_naive_oracle():
    rng = random.Random(5)
    policy = ScalePolicy(service="ovs", threshold=0.8, check_interval_ms=500,
                         cooldown_ms=5000, max_replicas=3)
    now = 1_000_000.0
    for _ in range(1000):
        if rng.random() < 0.1:
            latest = None
        else:
            latest = HealthSample(
                "i", now - rng.uniform(0, 3.0), rng.random(), alive=rng.random() > 0.2
            )
        in_cooldown = rng.random() < 0.3
        replicas = rng.randint(1, 4)
        assert decide(latest, policy, now, in_cooldown, replicas) == _naive_decide(
            latest, policy, now, in_cooldown, replicas
        )


def test_execute_failover_golden_path(env):
    orch, record, policy = env
    now = time.time()
    orch.autoscaler.ingest(HealthSample(record.id, now, 0.95))
    actions = orch.autoscaler.execute(orch.autoscaler.evaluate(policy, now))
    assert all(a.completed_at is not None and a.completed_at >= a.issued_at
               for a in actions)
    primary = orch.provisioner.get(record.id)
    assert primary.in_service is False
    survivors = orch.provisioner.in_service(policy.service)
    assert len(survivors) == 1
    assert survivors[0].role == "primary"
    assert len(orch.autoscaler.latencies_ms) == 1


def test_execute_spawn_failure_leaves_primary(env):
    orch, record, policy = env
    orch.provider.fail_next = True
    now = time.time()
    orch.autoscaler.ingest(HealthSample(record.id, now, 0.95))
    with pytest.raises(ProvisionFailed):
        orch.autoscaler.execute(orch.autoscaler.evaluate(policy, now))
    primary = orch.provisioner.get(record.id)
    assert primary.in_service is True
    assert primary.role == "primary"


def test_never_zero_in_service_controllers(env):
    orch, record, policy = env
    # sample-stream fuzz: at no point do in-service controllers hit zero
    rng = random.Random(11)
    for i in range(20):
        now = time.time()
        orch.autoscaler.ingest(HealthSample(
            orch.provisioner.in_service(policy.service)[0].id,
            now, rng.random(), alive=rng.random() > 0.3,
        ))
        actions = orch.autoscaler.evaluate(policy, now)
        try:
            orch.autoscaler.execute(actions)
        except ProvisionFailed:
            pass
        assert len(orch.provisioner.in_service(policy.service)) >= 1
        orch.autoscaler._last_failover.pop(policy.service, None)  # defeat cooldown


def test_replica_bound(env):
    orch, record, _ = env
    policy = ScalePolicy(service="floodlight-controller", mode="scale-out",
                         max_replicas=3, cooldown_ms=500, check_interval_ms=500)
    orch.autoscaler.add_policy(policy)
    for _ in range(6):
        now = time.time()
        live = orch.provisioner.in_service(policy.service)[0]
        orch.autoscaler.ingest(HealthSample(live.id, now, 0.99))
        actions = orch.autoscaler.evaluate(policy, now)
        if actions[0].kind != "no-op":
            orch.autoscaler.execute(actions)
        orch.autoscaler._last_failover.pop(policy.service, None)
        assert len(orch.provisioner.in_service(policy.service)) <= policy.max_replicas


def test_actions_audited_once(env):
    orch, record, policy = env
    now = time.time()
    orch.autoscaler.ingest(HealthSample(record.id, now, 0.95))
    seq_before = orch.events.max_seq
    orch.autoscaler.execute(orch.autoscaler.evaluate(policy, now))
    events = orch.events.since(seq_before)
    spawns = [e for e in events if e.payload.get("action") == "spawn-secondary"]
    disables = [e for e in events if e.payload.get("action") == "disable-primary"]
    assert len(spawns) == 1 and len(disables) == 1
    assert spawns[0].seq < disables[0].seq
