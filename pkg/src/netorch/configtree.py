"""Canonical configuration documents and deltas.

A ConfigDocument is a tree of sections ending in scalar leaves, stored flat
as dot-separated paths.  Canonical form (sorted paths, no duplicates, no
empty sections, no leaf that is also a section) makes equality and
serialization deterministic, which the diff/apply pipeline relies on.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Union

from .errors import InvalidDelta, InvalidDocument

Scalar = Union[str, int, bool]

_SEGMENT_RE = re.compile(r"^[A-Za-z0-9_-]+$")


def validate_path(path: str) -> list[str]:
    """Split and validate a dot-path; returns its segments."""
    if not isinstance(path, str):
        raise InvalidDocument(f"path must be a string, got {type(path).__name__}")
    segments = path.split(".")
    if len(segments) < 2:
        raise InvalidDocument(f"path {path!r} needs at least a section and a key")
    for seg in segments:
        if not _SEGMENT_RE.match(seg):
            raise InvalidDocument(f"bad path segment {seg!r} in {path!r}")
    return segments


def validate_scalar(path: str, value: object) -> Scalar:
    # bool first: bool is a subclass of int
    if isinstance(value, (bool, str)):
        return value
    if isinstance(value, int):
        return value
    raise InvalidDocument(f"value for {path!r} must be str/int/bool, got {type(value).__name__}")


class ConfigDocument:
    """Immutable canonical map of dot-paths to scalar values."""

    __slots__ = ("_entries",)

    def __init__(self, entries: Optional[Mapping[str, Scalar]] = None):
        items: dict[str, Scalar] = {}
        for path, value in (entries or {}).items():
            validate_path(path)
            items[path] = validate_scalar(path, value)
        ordered = dict(sorted(items.items()))
        # a leaf path may not also be a section prefix of another path
        paths = list(ordered)
        for i in range(len(paths) - 1):
            if paths[i + 1].startswith(paths[i] + "."):
                raise InvalidDocument(
                    f"path {paths[i]!r} is both a value and a section ({paths[i + 1]!r})"
                )
        self._entries = ordered

    # -- mapping surface --------------------------------------------------

    def paths(self) -> list[str]:
        return list(self._entries)

    def items(self) -> Iterator[tuple[str, Scalar]]:
        return iter(self._entries.items())

    def get(self, path: str, default: Optional[Scalar] = None) -> Optional[Scalar]:
        return self._entries.get(path, default)

    def __contains__(self, path: str) -> bool:
        return path in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConfigDocument):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self) -> int:
        return hash(tuple(self._entries.items()))

    def __repr__(self) -> str:
        return f"ConfigDocument({self._entries!r})"

    # -- tree / serialization ---------------------------------------------

    def to_tree(self) -> dict:
        tree: dict = {}
        for path, value in self._entries.items():
            segments = path.split(".")
            node = tree
            for seg in segments[:-1]:
                node = node.setdefault(seg, {})
            node[segments[-1]] = value
        return tree

    @classmethod
    def from_tree(cls, tree: Mapping) -> "ConfigDocument":
        entries: dict[str, Scalar] = {}

        def walk(node: Mapping, prefix: str) -> None:
            if not node and prefix:
                raise InvalidDocument(f"empty section {prefix!r}")
            for key, value in node.items():
                path = f"{prefix}.{key}" if prefix else key
                if isinstance(value, Mapping):
                    walk(value, path)
                else:
                    entries[path] = value  # validated by constructor

        if not isinstance(tree, Mapping):
            raise InvalidDocument("document tree must be a mapping")
        walk(tree, "")
        return cls(entries)

    def serialize(self) -> str:
        """Deterministic serialization: equal documents are byte-identical."""
        return json.dumps(self.to_tree(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def deserialize(cls, text: str) -> "ConfigDocument":
        if not text.strip():
            return cls()
        return cls.from_tree(json.loads(text))


EMPTY_DOCUMENT = ConfigDocument()


@dataclass(frozen=True)
class DeltaOp:
    op: str  # "set" | "delete"
    path: str
    value: Optional[Scalar] = None

    def __post_init__(self):
        if self.op not in ("set", "delete"):
            raise InvalidDelta(f"unknown op {self.op!r}")
        validate_path(self.path)
        if self.op == "set":
            validate_scalar(self.path, self.value)
        elif self.value is not None:
            raise InvalidDelta(f"delete of {self.path!r} must not carry a value")


class ConfigDelta:
    """Ordered list of set/delete operations; each path appears once."""

    __slots__ = ("_ops",)

    def __init__(self, ops: Iterable[DeltaOp] = ()):
        ops = tuple(ops)
        seen: set[str] = set()
        for op in ops:
            if op.path in seen:
                raise InvalidDelta(f"path {op.path!r} appears twice in delta")
            seen.add(op.path)
        self._ops = ops

    @property
    def ops(self) -> tuple[DeltaOp, ...]:
        return self._ops

    def is_empty(self) -> bool:
        return not self._ops

    def __len__(self) -> int:
        return len(self._ops)

    def __iter__(self) -> Iterator[DeltaOp]:
        return iter(self._ops)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConfigDelta):
            return NotImplemented
        return self._ops == other._ops

    def __repr__(self) -> str:
        return f"ConfigDelta({list(self._ops)!r})"

    def to_json(self) -> list[dict]:
        out = []
        for op in self._ops:
            entry: dict = {"op": op.op, "path": op.path}
            if op.op == "set":
                entry["value"] = op.value
            out.append(entry)
        return out

    @classmethod
    def from_json(cls, data: Iterable[Mapping]) -> "ConfigDelta":
        return cls(
            DeltaOp(entry["op"], entry["path"], entry.get("value")) for entry in data
        )


def apply_delta(doc: ConfigDocument, delta: ConfigDelta) -> ConfigDocument:
    """Apply a delta to a document, returning a new canonical document.

    Deleting an absent path is a no-op; a set that would break canonical
    form (leaf vs section conflict) raises InvalidDocument.
    """
    entries = dict(doc.items())
    for op in delta:
        if op.op == "set":
            entries[op.path] = op.value  # type: ignore[assignment]
        else:
            entries.pop(op.path, None)
    return ConfigDocument(entries)
