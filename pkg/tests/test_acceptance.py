"""Acceptance suite: the six headline properties of the orchestrator.

Each test prints exactly one PASS/FAIL line (bypassing capture) so the run
log doubles as the acceptance report.  Timing-sensitive criteria run with
the simulator's default latencies; pure-logic criteria use zero latency.
"""

import random
import time

import pytest

from netorch.autoscaler import HealthSample, ScalePolicy
from netorch.bgp import Fabric, Route, Speaker, best_path
from netorch.configtree import ConfigDelta
from netorch.errors import ProvisionFailed
from netorch.experiments import (
    automated_failover,
    controller_scaling,
    linear_fit_r2,
    scripted_manual_failover,
)
from netorch.orchestrator import Orchestrator
from netorch.provisioner import InstanceSpec
from netorch.reconciler import RetryPolicy, diff

from conftest import naive_apply, random_document
from test_bgp import _bfs_diameter, _pairwise_better, _random_connected_topology


def _report(capsys, criterion, ok, detail):
    with capsys.disabled():
        print(f"\n[ACCEPTANCE] {criterion}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{criterion}: {detail}"


@pytest.fixture
def fast_orch(tmp_path):
    o = Orchestrator(
        inventory_path=str(tmp_path / "inventory.json"),
        retry=RetryPolicy(command_timeout=1.0, retries=0, backoff_base=0.0),
        provision_latency_ms=0,
        command_latency_ms=0,
    )
    yield o
    o.shutdown()


@pytest.fixture
def timed_orch(tmp_path):
    # default simulated latencies: timing claims are made against these
    o = Orchestrator(inventory_path=str(tmp_path / "inventory.json"))
    yield o
    o.shutdown()


def _cloud_env(orch, quota=200):
    host = orch.inventory.register_device(
        "h1", "cloud-node", "ovsish", orch.simnet.spawn("ovsish")
    )
    orch.inventory.add_tenant("t1", quota)
    return host


# -- 1. idempotent delta push --------------------------------------------------


def test_acceptance_idempotent_delta_push(fast_orch, capsys):
    rng = random.Random(1001)
    device = fast_orch.inventory.register_device(
        "sw1", "sdn-switch", "ciscoish", fast_orch.simnet.spawn("ciscoish")
    )
    started = time.monotonic()
    runs = 200
    second_zero = 0
    for _ in range(runs):
        desired = random_document(rng)
        first = fast_orch.reconciler.reconcile(device, desired, mode="replace")
        assert first.outcome == "ok"
        second = fast_orch.reconciler.reconcile(device, desired, mode="replace")
        if second.commands_sent == 0:
            second_zero += 1
    elapsed = time.monotonic() - started
    ok = second_zero == runs and elapsed < 30.0
    _report(capsys, "idempotent-delta-push", ok,
            f"{second_zero}/{runs} second reconciles sent 0 commands in {elapsed:.1f}s")


# -- 2. diff/apply correctness ---------------------------------------------------


def test_acceptance_diff_apply_correctness(capsys):
    rng = random.Random(1002)
    started = time.monotonic()
    roundtrip_ok = 0
    pairs = 500
    for _ in range(pairs):
        a, b = random_document(rng), random_document(rng)
        if naive_apply(a, diff(a, b, "replace")) == b:
            roundtrip_ok += 1
    minimal_ok = True
    for _ in range(100):
        a = random_document(rng, max_paths=12)
        b = random_document(rng, max_paths=12)
        delta = diff(a, b, "replace")
        for skip in range(len(delta)):
            pruned = ConfigDelta([op for i, op in enumerate(delta.ops) if i != skip])
            if naive_apply(a, pruned) == b:
                minimal_ok = False
    elapsed = time.monotonic() - started
    ok = roundtrip_ok == pairs and minimal_ok and elapsed < 60.0
    _report(capsys, "diff-apply-correctness", ok,
            f"{roundtrip_ok}/{pairs} roundtrips exact, minimality "
            f"{'held' if minimal_ok else 'violated'}, {elapsed:.1f}s")


# -- 3. failover speedup -----------------------------------------------------------


def test_acceptance_failover_speedup(timed_orch, capsys):
    orch = timed_orch
    host = _cloud_env(orch)
    service = "floodlight-controller"
    records = orch.provisioner.submit(InstanceSpec(host.id, "t1", 1, service, "container"))
    orch.provisioner.wait([r.id for r in records])
    policy = ScalePolicy(service=service, threshold=0.8,
                         check_interval_ms=500, cooldown_ms=500)
    orch.autoscaler.add_policy(policy)

    manual_s = scripted_manual_failover(orch.provisioner, service)
    automated_s = automated_failover(orch.autoscaler, policy)
    speedup = manual_s / automated_s
    ok = automated_s <= 2.0 and speedup >= 10.0
    _report(capsys, "failover-speedup", ok,
            f"automated {automated_s * 1000:.0f}ms vs scripted manual "
            f"{manual_s:.1f}s = {speedup:.0f}x")


def test_acceptance_failover_ordering_fuzz(fast_orch, capsys):
    orch = fast_orch
    host = _cloud_env(orch)
    service = "floodlight-controller"
    records = orch.provisioner.submit(InstanceSpec(host.id, "t1", 1, service, "container"))
    orch.provisioner.wait([r.id for r in records])
    policy = ScalePolicy(service=service, threshold=0.8,
                         check_interval_ms=500, cooldown_ms=500, max_replicas=4)
    orch.autoscaler.add_policy(policy)

    rng = random.Random(1003)
    runs = 100
    ordered = 0
    for _ in range(runs):
        primary = orch.provisioner.in_service(service)[0]
        breach = rng.choice(("threshold", "dead", "stale"))
        now = time.time()
        if breach == "threshold":
            orch.autoscaler.ingest(HealthSample(primary.id, now, rng.uniform(0.8, 1.0)))
        elif breach == "dead":
            orch.autoscaler.ingest(HealthSample(primary.id, now, 0.1, alive=False))
        else:
            orch.autoscaler.ingest(HealthSample(primary.id, now - 30.0, 0.1))
        inject_failure = rng.random() < 0.2
        orch.provider.fail_next = inject_failure
        seq_before = orch.events.max_seq
        try:
            orch.autoscaler.execute(orch.autoscaler.evaluate(policy))
        except ProvisionFailed:
            pass
        events = orch.events.since(seq_before)
        ready_seqs = [e.seq for e in events
                      if e.payload.get("action") == "state"
                      and e.payload.get("state") == "ready"]
        disable_seqs = [e.seq for e in events
                        if e.payload.get("action") == "disabled"]
        still = orch.provisioner.get(primary.id)
        if inject_failure:
            # failed spawn: the primary must be untouched
            run_ok = not disable_seqs and still.in_service
        else:
            run_ok = (
                len(ready_seqs) == 1
                and len(disable_seqs) == 1
                and ready_seqs[0] < disable_seqs[0]
                and not still.in_service
            )
        ordered += run_ok
        assert orch.provisioner.in_service(service), "no controller left in service"
        orch.autoscaler._last_failover.pop(service, None)  # defeat cooldown between runs
    ok = ordered == runs
    _report(capsys, "failover-ordering", ok,
            f"secondary ready before primary disabled in {ordered}/{runs} fuzzed runs")


# -- 4. scaling shape ----------------------------------------------------------------


def test_acceptance_controller_scaling(timed_orch, capsys):
    orch = timed_orch
    host = _cloud_env(orch)
    timings = controller_scaling(orch.provisioner, host.id, "t1", n_max=10)
    r2 = linear_fit_r2(list(range(1, 11)), timings)
    total = timings[-1]
    ok = r2 >= 0.9 and total <= 15.0 * 1.2
    _report(capsys, "controller-scaling", ok,
            f"10 controllers in {total:.2f}s (budget 18.0s), linear fit R2={r2:.3f}")


# -- 5. bgp interconnect ----------------------------------------------------------------


def test_acceptance_bgp_interconnect(capsys):
    started = time.monotonic()
    rng = random.Random(1005)

    converged = 0
    topologies = 50
    for trial in range(topologies):
        n = rng.randint(2, 12)
        edges = _random_connected_topology(rng, n)
        adjacency = {i: set() for i in range(n)}
        for a, b in edges:
            adjacency[a].add(b)
            adjacency[b].add(a)
        diameter = _bfs_diameter(adjacency)
        fabric = Fabric()
        for i in range(n):
            fabric.add(Speaker(f"s{i}", 64512 + i))
        prefixes = 0
        for i in range(n):
            for _ in range(rng.randint(0, 3)):
                if prefixes >= 40:
                    break
                fabric.speakers[f"s{i}"].announce(f"10.{trial}.{prefixes}.0/24")
                prefixes += 1
        for a, b in sorted(edges):
            fabric.connect(f"s{a}", f"s{b}")
        rounds = fabric.run()
        loop_free = all(
            speaker.asn not in route.as_path
            and len(set(route.as_path)) == len(route.as_path)
            for speaker in fabric.speakers.values()
            for route in speaker.loc_rib.values()
        )
        complete = all(len(s.loc_rib) == prefixes for s in fabric.speakers.values())
        if rounds <= diameter + 2 and loop_free and complete:
            converged += 1

    oracle_agree = 0
    sets = 1000
    for _ in range(sets):
        peers = rng.sample([f"p{i}" for i in range(20)], rng.randint(1, 8))
        candidates = [
            Route("10.42.0.0/16", next_hop=p,
                  as_path=tuple(rng.randint(64512, 64520)
                                for _ in range(rng.randint(1, 5))),
                  local_pref=rng.choice((50, 100, 100, 200)),
                  origin=rng.choice(("igp", "egp", "incomplete")),
                  learned_from=p)
            for p in peers
        ]
        winners = [c for c in candidates
                   if not any(_pairwise_better(o, c) for o in candidates if o is not c)]
        if len(winners) == 1 and best_path(candidates) == winners[0]:
            oracle_agree += 1

    elapsed = time.monotonic() - started
    ok = converged == topologies and oracle_agree == sets and elapsed < 120.0
    _report(capsys, "bgp-interconnect", ok,
            f"{converged}/{topologies} topologies converged within diameter+2, "
            f"best_path matched oracle on {oracle_agree}/{sets} sets, {elapsed:.1f}s")


# -- 6. end-to-end paper scenario -----------------------------------------------------------


def test_acceptance_end_to_end_scenario(fast_orch, capsys):
    orch = fast_orch
    host = orch.inventory.register_device(
        "overlay1", "cloud-node", "ovsish", orch.simnet.spawn("ovsish"), asn=65000
    )
    r1 = orch.inventory.register_device(
        "r1", "traditional-router", "ciscoish", orch.simnet.spawn("ciscoish"), asn=65001
    )
    r2 = orch.inventory.register_device(
        "r2", "traditional-router", "junosish", orch.simnet.spawn("junosish"), asn=65002
    )
    orch.inventory.add_tenant("t1", 10)

    records = orch.provisioner.submit(
        InstanceSpec(host.id, "t1", 1, "floodlight-controller", "container")
    )
    orch.provisioner.wait([r.id for r in records])
    controller = orch.provisioner.get(records[0].id)
    validated = orch.provisioner.validate(controller.id)["overall"]

    orch.bootstrap_speakers()
    orch.fabric.connect("overlay1", "r1")
    orch.fabric.connect("r1", "r2")
    orch.fabric.speakers["overlay1"].announce("10.10.0.0/24")
    orch.fabric.run()

    in_r1 = "10.10.0.0/24" in orch.rib("r1")["loc_rib"]
    in_r2 = "10.10.0.0/24" in orch.rib("r2")["loc_rib"]
    path_r2 = tuple(orch.rib("r2")["loc_rib"].get("10.10.0.0/24", {}).get("as_path", ()))
    ok = (controller.state == "ready" and validated and in_r1 and in_r2
          and path_r2 == (65001, 65000))
    _report(capsys, "end-to-end-scenario", ok,
            f"controller {controller.state}, validate={validated}, "
            f"prefix in r1={in_r1}, in r2={in_r2}, r2 as_path={list(path_r2)}")
