"""Routes and the best-path decision process.

Selection is a strict lexicographic order: highest local_pref, then
shortest AS path, then origin (igp < egp < incomplete), then lowest
learned_from peer id as the deterministic tie-break.  The order is total,
so every candidate set has exactly one winner and identical event
sequences always produce identical ribs.
"""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass
from typing import Iterable

from ..errors import InvalidPrefix

ORIGINS = ("igp", "egp", "incomplete")
_ORIGIN_RANK = {name: rank for rank, name in enumerate(ORIGINS)}


def normalize_prefix(prefix: str) -> str:
    try:
        network = ipaddress.IPv4Network(prefix, strict=True)
    except (ValueError, TypeError) as exc:
        raise InvalidPrefix(str(exc)) from None
    return str(network)


@dataclass(frozen=True)
class Route:
    prefix: str
    next_hop: str
    as_path: tuple[int, ...] = ()
    local_pref: int = 100
    origin: str = "igp"
    learned_from: str = "local"

    def __post_init__(self):
        object.__setattr__(self, "prefix", normalize_prefix(self.prefix))
        object.__setattr__(self, "as_path", tuple(self.as_path))
        if self.origin not in ORIGINS:
            raise ValueError(f"unknown origin {self.origin!r}")
        if self.local_pref < 0:
            raise ValueError("local_pref must be non-negative")
        if self.learned_from == "local" and self.as_path:
            raise ValueError("locally originated routes carry an empty as_path")

    def selection_key(self) -> tuple:
        return (-self.local_pref, len(self.as_path), _ORIGIN_RANK[self.origin], self.learned_from)

    def to_json(self) -> dict:
        return {
            "prefix": self.prefix,
            "next_hop": self.next_hop,
            "as_path": list(self.as_path),
            "local_pref": self.local_pref,
            "origin": self.origin,
            "learned_from": self.learned_from,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Route":
        return cls(
            prefix=data["prefix"],
            next_hop=data["next_hop"],
            as_path=tuple(data.get("as_path", ())),
            local_pref=data.get("local_pref", 100),
            origin=data.get("origin", "igp"),
            learned_from=data.get("learned_from", "local"),
        )


def best_path(candidates: Iterable[Route]) -> Route:
    candidates = list(candidates)
    if not candidates:
        raise ValueError("best_path needs at least one candidate")
    prefixes = {route.prefix for route in candidates}
    if len(prefixes) != 1:
        raise ValueError(f"candidates span multiple prefixes: {sorted(prefixes)}")
    return min(candidates, key=Route.selection_key)
