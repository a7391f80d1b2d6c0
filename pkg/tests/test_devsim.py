import random
import time

import pytest

from netorch.channel import HttpChannel, TcpChannel, open_channel
from netorch.configtree import ConfigDocument, apply_delta
from netorch.devsim import FaultSpec, SimNetwork
from netorch.dialect import parse_running, render
from netorch.errors import UnknownEndpoint
from netorch.reconciler import diff

from conftest import random_document


@pytest.fixture
def simnet():
    net = SimNetwork()
    yield net
    net.shutdown()


def test_spawn_empty_probe_and_show(simnet):
    endpoint = simnet.spawn("ciscoish")
    device = simnet.get(endpoint)
    assert device.probe() == "ok"
    assert device.show() == ""


def test_latency_fault(simnet):
    endpoint = simnet.spawn("ciscoish", faults=FaultSpec(latency_ms=100))
    device = simnet.get(endpoint)
    started = time.monotonic()
    device.push("interface eth0")
    assert time.monotonic() - started >= 0.1


def test_unknown_endpoint(simnet):
    with pytest.raises(UnknownEndpoint):
        simnet.inspect("sim://9999")


def test_nack_leaves_running_unchanged(simnet):
    endpoint = simnet.spawn("ciscoish", faults=FaultSpec(nack_at=1))
    device = simnet.get(endpoint)
    assert device.push("interface eth0") == "ok"
    assert device.push("mtu 1500") == "err injected-nack"
    assert device.running == ConfigDocument()


def test_command_log_order(simnet):
    endpoint = simnet.spawn("junosish")
    device = simnet.get(endpoint)
    commands = ["set interfaces eth0 mtu 1500", "set system hostname \"r1\""]
    for command in commands:
        device.push(command)
    assert simnet.inspect(endpoint)["command_log"] == commands


@pytest.mark.parametrize("dialect_id", ["ciscoish", "junosish", "ovsish", "restish"])
def test_wire_apply_equals_in_memory_apply(simnet, dialect_id):
    # differential test: pushing rendered commands through the simulator
    # produces exactly apply_delta's result
    rng = random.Random(4242)
    dialect = simnet.dialects.get(dialect_id)
    for _ in range(40):
        initial = random_document(rng)
        desired = random_document(rng)
        delta = diff(initial, desired, mode="replace")
        endpoint = simnet.spawn(dialect_id, initial=initial)
        device = simnet.get(endpoint)
        for command in render(delta, dialect):
            assert device.push(command) == "ok"
        assert device.running == apply_delta(initial, delta) == desired


def test_tcp_wire_protocol(simnet):
    endpoint = simnet.spawn("ciscoish", bind=True)
    host, port = endpoint.split(":")
    channel = TcpChannel(host, int(port), simnet.dialects.get("ciscoish"))
    assert channel.probe()
    assert channel.push("interface eth0") == "ok"
    assert channel.push("mtu 1500") == "ok"
    assert channel.push("exit") == "ok"
    shown = channel.show()
    doc = parse_running(shown, simnet.dialects.get("ciscoish"))
    assert doc == ConfigDocument({"interfaces.eth0.mtu": 1500})
    assert channel.push("interface eth0") == "ok"
    assert channel.push("mtu banana").startswith("err")  # unquoted non-scalar
    channel.close()


def test_restish_http_listener(simnet):
    endpoint = simnet.spawn("restish", bind=True)
    channel = HttpChannel(f"http://{endpoint}")
    assert channel.probe()
    assert channel.push('PUT /config/interfaces.eth0.mtu 1500') == "ok"
    device = [simnet.get(e) for e in simnet.endpoints()][0]
    assert device.running == ConfigDocument({"interfaces.eth0.mtu": 1500})
    assert channel.push("DELETE /config/interfaces.eth0.mtu") == "ok"
    assert device.running == ConfigDocument()
    channel.close()


def test_open_channel_dispatch(simnet):
    inproc = simnet.spawn("ovsish")
    channel = open_channel(inproc, simnet.dialects.get("ovsish"), simnet)
    assert channel.probe()
