"""Vendor-dialect abstraction.

A dialect maps canonical config deltas to vendor command lines and parses
vendor "show" output back into canonical documents.  Dialect grammars are
data (data/dialects.json); the rendering/parsing engines are keyed by a
small set of styles:

  stanza  - context line, indented key/value lines, "exit"  (ciscoish)
  flat    - one "set a b c value" line per leaf              (junosish)
  kv      - one "a.b.c=value" line per leaf                  (ovsish)
  http    - HTTP verb + path, document shown as JSON         (restish)

Scalar values are rendered unambiguously: ints as digits, bools as
true/false, strings always JSON-quoted, so render/parse round-trips types.
"""

from __future__ import annotations

import importlib.resources
import json
import re
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .configtree import ConfigDelta, ConfigDocument, DeltaOp, Scalar, validate_path
from .errors import ParseError, UnknownDialect, UnrenderablePath

_INT_RE = re.compile(r"^-?[0-9]+$")

STYLES = ("stanza", "flat", "kv", "http")


def render_value(value: Scalar) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return json.dumps(value)


def parse_value(token: str, line: int) -> Scalar:
    token = token.strip()
    if token.startswith('"'):
        try:
            value = json.loads(token)
        except ValueError:
            raise ParseError(f"bad quoted string {token!r}", line)
        if not isinstance(value, str):
            raise ParseError(f"quoted value {token!r} is not a string", line)
        return value
    if token == "true":
        return True
    if token == "false":
        return False
    if _INT_RE.match(token):
        return int(token)
    raise ParseError(f"unparseable value {token!r}", line)


@dataclass(frozen=True)
class Dialect:
    id: str
    style: str
    probe_command: str
    show_command: str
    set_template: tuple[str, ...]
    delete_template: tuple[str, ...]
    section_aliases: Mapping[str, str] = field(default_factory=dict)
    allowed_roots: Optional[frozenset[str]] = None

    def __post_init__(self):
        if self.style not in STYLES:
            raise ValueError(f"unknown dialect style {self.style!r}")
        reverse = {v: k for k, v in self.section_aliases.items()}
        if len(reverse) != len(self.section_aliases):
            raise ValueError("section aliases must be invertible")

    def alias(self, segment: str) -> str:
        return self.section_aliases.get(segment, segment)

    def unalias(self, word: str) -> str:
        for canonical, rendered in self.section_aliases.items():
            if rendered == word:
                return canonical
        return word

    @classmethod
    def from_json(cls, dialect_id: str, spec: Mapping) -> "Dialect":
        roots = spec.get("allowed_roots")
        return cls(
            id=dialect_id,
            style=spec["style"],
            probe_command=spec["probe_command"],
            show_command=spec["show_command"],
            set_template=tuple(spec["set"]),
            delete_template=tuple(spec["delete"]),
            section_aliases=dict(spec.get("section_aliases", {})),
            allowed_roots=frozenset(roots) if roots else None,
        )


class DialectRegistry:
    """Registry of known dialects; loads the shipped grammar file by default."""

    def __init__(self, load_builtin: bool = True):
        self._dialects: dict[str, Dialect] = {}
        if load_builtin:
            data = (
                importlib.resources.files("netorch.data")
                .joinpath("dialects.json")
                .read_text()
            )
            for dialect_id, spec in json.loads(data).items():
                self.register(Dialect.from_json(dialect_id, spec))

    def register(self, dialect: Dialect) -> None:
        self._dialects[dialect.id] = dialect

    def get(self, dialect_id: str) -> Dialect:
        try:
            return self._dialects[dialect_id]
        except KeyError:
            raise UnknownDialect(dialect_id) from None

    def __contains__(self, dialect_id: str) -> bool:
        return dialect_id in self._dialects

    def ids(self) -> list[str]:
        return sorted(self._dialects)


# --- rendering ------------------------------------------------------------


def _fields(dialect: Dialect, op: DeltaOp) -> dict[str, str]:
    segments = validate_path(op.path)
    if dialect.allowed_roots is not None and segments[0] not in dialect.allowed_roots:
        raise UnrenderablePath(f"{op.path!r} not renderable in dialect {dialect.id!r}")
    context = [dialect.alias(segments[0])] + segments[1:-1]
    return {
        "path": op.path,
        "spacepath": " ".join(segments),
        "parent": ".".join(segments[:-1]),
        "section": " ".join(context),
        "leaf": segments[-1],
        "value": render_value(op.value) if op.op == "set" else "",
    }


def render_op(dialect: Dialect, op: DeltaOp) -> list[str]:
    template = dialect.set_template if op.op == "set" else dialect.delete_template
    fields = _fields(dialect, op)
    return [line.format(**fields) for line in template]


def render(delta: ConfigDelta, dialect: Dialect) -> list[str]:
    """Translate a canonical delta into the dialect's command sequence."""
    commands: list[str] = []
    for op in delta:
        commands.extend(render_op(dialect, op))
    return commands


def render_full(doc: ConfigDocument, dialect: Dialect) -> str:
    """Render the full running config as the dialect's show output."""
    if dialect.style == "http":
        return doc.serialize()
    lines: list[str] = []
    if dialect.style == "stanza":
        groups: dict[str, list[tuple[str, Scalar]]] = {}
        for path, value in doc.items():
            parent, leaf = path.rsplit(".", 1)
            groups.setdefault(parent, []).append((leaf, value))
        for parent in sorted(groups):
            segments = parent.split(".")
            lines.append(" ".join([dialect.alias(segments[0])] + segments[1:]))
            for leaf, value in sorted(groups[parent]):
                lines.append(f" {leaf} {render_value(value)}")
            lines.append("exit")
    elif dialect.style == "flat":
        for path, value in doc.items():
            lines.append(f"set {' '.join(path.split('.'))} {render_value(value)}")
    elif dialect.style == "kv":
        for path, value in doc.items():
            lines.append(f"{path}={render_value(value)}")
    return "\n".join(lines)


# --- parsing ---------------------------------------------------------------


def parse_running(raw_output: str, dialect: Dialect) -> ConfigDocument:
    """Parse a device's show output back into a canonical document.

    Unknown lines are a hard ParseError: silently skipping would let config
    drift escape reconciliation.
    """
    if dialect.style == "http":
        try:
            return ConfigDocument.deserialize(raw_output)
        except Exception as exc:
            raise ParseError(str(exc), 1) from None

    entries: dict[str, Scalar] = {}
    parser = {
        "stanza": _parse_stanza,
        "flat": _parse_flat,
        "kv": _parse_kv,
    }[dialect.style]
    parser(raw_output, dialect, entries)
    try:
        return ConfigDocument(entries)
    except Exception as exc:
        raise ParseError(str(exc), 1) from None


def _parse_stanza(raw: str, dialect: Dialect, entries: dict) -> None:
    context: Optional[list[str]] = None
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith(" "):
            if context is None:
                raise ParseError(f"value line outside a section: {line!r}", lineno)
            body = line.strip()
            parts = body.split(None, 1)
            if len(parts) != 2:
                raise ParseError(f"expected 'key value': {body!r}", lineno)
            leaf, token = parts
            path = ".".join(context + [leaf])
            entries[path] = parse_value(token, lineno)
        elif line == "exit":
            if context is None:
                raise ParseError("exit without open section", lineno)
            context = None
        else:
            if context is not None:
                raise ParseError(f"section {line!r} opened before exit", lineno)
            words = line.split()
            context = [dialect.unalias(words[0])] + words[1:]
    if context is not None:
        raise ParseError("unterminated section at end of output", lineno)


def _parse_flat(raw: str, dialect: Dialect, entries: dict) -> None:
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        if not line.startswith("set "):
            raise ParseError(f"expected 'set ...': {line!r}", lineno)
        body = line[4:]
        quote = body.find('"')
        if quote >= 0:
            pathpart, token = body[:quote].rstrip(), body[quote:]
        else:
            try:
                pathpart, token = body.rsplit(None, 1)
            except ValueError:
                raise ParseError(f"missing value: {line!r}", lineno)
        segments = pathpart.split()
        if len(segments) < 2:
            raise ParseError(f"path too short: {line!r}", lineno)
        entries[".".join(segments)] = parse_value(token, lineno)


def _parse_kv(raw: str, dialect: Dialect, entries: dict) -> None:
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        if "=" not in line:
            raise ParseError(f"expected 'path=value': {line!r}", lineno)
        path, token = line.split("=", 1)
        entries[path] = parse_value(token, lineno)


# --- command interpretation (device side) -----------------------------------


class CommandSession:
    """Stateful interpreter turning incoming command lines back into ops.

    The device simulator feeds each received config command through one of
    these; the session yields a DeltaOp when the command mutates state and
    None for pure context lines (stanza enter/exit).
    """

    def __init__(self, dialect: Dialect):
        self.dialect = dialect
        self._context: Optional[list[str]] = None

    def feed(self, command: str) -> Optional[DeltaOp]:
        style = self.dialect.style
        if style == "stanza":
            return self._feed_stanza(command)
        if style == "flat":
            return self._feed_flat(command)
        if style == "kv":
            return self._feed_kv(command)
        return self._feed_http(command)

    def _feed_stanza(self, command: str) -> Optional[DeltaOp]:
        command = command.rstrip()
        if self._context is None:
            if command == "exit":
                raise ValueError("exit outside section")
            words = command.split()
            if not words:
                raise ValueError("empty command")
            self._context = [self.dialect.unalias(words[0])] + words[1:]
            return None
        if command == "exit":
            self._context = None
            return None
        if command.startswith("no "):
            leaf = command[3:].strip()
            return DeltaOp("delete", ".".join(self._context + [leaf]))
        parts = command.split(None, 1)
        if len(parts) != 2:
            raise ValueError(f"expected 'key value': {command!r}")
        leaf, token = parts
        return DeltaOp("set", ".".join(self._context + [leaf]), parse_value(token, 0))

    def _feed_flat(self, command: str) -> Optional[DeltaOp]:
        if command.startswith("set "):
            body = command[4:]
            quote = body.find('"')
            if quote >= 0:
                pathpart, token = body[:quote].rstrip(), body[quote:]
            else:
                pathpart, token = body.rsplit(None, 1)
            return DeltaOp("set", ".".join(pathpart.split()), parse_value(token, 0))
        if command.startswith("delete "):
            return DeltaOp("delete", ".".join(command[7:].split()))
        raise ValueError(f"unknown command {command!r}")

    def _feed_kv(self, command: str) -> Optional[DeltaOp]:
        words = command.split(None, 3)
        if len(words) >= 4 and words[:2] == ["vsctl", "set"]:
            parent, assignment = words[2], words[3]
            leaf, token = assignment.split("=", 1)
            return DeltaOp("set", f"{parent}.{leaf}", parse_value(token, 0))
        if len(words) == 4 and words[:2] == ["vsctl", "remove"]:
            return DeltaOp("delete", f"{words[2]}.{words[3]}")
        raise ValueError(f"unknown command {command!r}")

    def _feed_http(self, command: str) -> Optional[DeltaOp]:
        words = command.split(None, 2)
        if len(words) == 3 and words[0] == "PUT" and words[1].startswith("/config/"):
            return DeltaOp("set", words[1][len("/config/"):], parse_value(words[2], 0))
        if len(words) == 2 and words[0] == "DELETE" and words[1].startswith("/config/"):
            return DeltaOp("delete", words[1][len("/config/"):])
        raise ValueError(f"unknown command {command!r}")
