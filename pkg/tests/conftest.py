import random

import pytest

from netorch.configtree import ConfigDocument
from netorch.orchestrator import Orchestrator
from netorch.reconciler import RetryPolicy

# parents never prefix one another, so generated documents are always canonical
PARENTS = (
    "interfaces.eth0",
    "interfaces.eth1",
    "interfaces.eth2",
    "system",
    "vlan.10",
    "vlan.20",
    "acl.100",
    "routing.static",
)
LEAVES = ("mtu", "up", "desc", "cost", "action", "name", "speed")
STRINGS = ("permit", "deny", "core uplink", "backup link", "r1", "lab")


def random_document(rng: random.Random, max_paths: int = 12) -> ConfigDocument:
    entries = {}
    for _ in range(rng.randint(0, max_paths)):
        path = f"{rng.choice(PARENTS)}.{rng.choice(LEAVES)}"
        kind = rng.randrange(3)
        if kind == 0:
            entries[path] = rng.randint(-5, 5000)
        elif kind == 1:
            entries[path] = rng.choice((True, False))
        else:
            entries[path] = rng.choice(STRINGS)
    return ConfigDocument(entries)


def naive_apply(doc: ConfigDocument, delta) -> ConfigDocument:
    """Independent oracle: plain dict mutation, no shared code path with
    configtree.apply_delta's validation-heavy route."""
    entries = {p: v for p, v in doc.items()}
    for op in delta:
        if op.op == "set":
            entries[op.path] = op.value
        else:
            entries.pop(op.path, None)
    return ConfigDocument(entries)


@pytest.fixture
def orch(tmp_path):
    o = Orchestrator(
        inventory_path=str(tmp_path / "inventory.json"),
        retry=RetryPolicy(command_timeout=1.0, retries=0, backoff_base=0.0),
        provision_latency_ms=0,
        command_latency_ms=0,
    )
    yield o
    o.shutdown()


@pytest.fixture
def rng():
    return random.Random(20260823)
