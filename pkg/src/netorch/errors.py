"""Exception hierarchy shared by every netorch module."""


class NetorchError(Exception):
    """Base class for all orchestrator errors."""

    code = "error"


# --- inventory ---------------------------------------------------------


class DuplicateName(NetorchError):
    code = "duplicate-name"


class UnknownDialect(NetorchError):
    code = "unknown-dialect"


class InvalidEndpoint(NetorchError):
    code = "invalid-endpoint"


class UnknownDevice(NetorchError):
    code = "unknown-device"


class UnknownTenant(NetorchError):
    code = "unknown-tenant"


# --- dialect / config --------------------------------------------------


class InvalidDocument(NetorchError):
    code = "invalid-document"


class InvalidDelta(NetorchError):
    code = "invalid-delta"


class UnrenderablePath(NetorchError):
    code = "unrenderable-path"


class ParseError(NetorchError):
    code = "parse-error"

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


# --- transport / reconciler --------------------------------------------


class ChannelError(NetorchError):
    code = "channel-error"


class NackError(NetorchError):
    code = "nack-error"

    def __init__(self, reason: str, command_index: int):
        super().__init__(reason)
        self.command_index = command_index


class UnknownTarget(NetorchError):
    code = "unknown-target"


# --- provisioner --------------------------------------------------------


class QuotaExceeded(NetorchError):
    code = "quota-exceeded"


class UnknownHost(NetorchError):
    code = "unknown-host"


class IncompatibleKind(NetorchError):
    code = "incompatible-kind"


class InvalidSpec(NetorchError):
    code = "invalid-spec"


class UnknownInstance(NetorchError):
    code = "unknown-instance"


class NotReady(NetorchError):
    code = "not-ready"


class Terminated(NetorchError):
    code = "terminated"


class IllegalTransition(NetorchError):
    code = "illegal-transition"


# --- autoscaler ---------------------------------------------------------


class UnknownPolicy(NetorchError):
    code = "unknown-policy"


class InvalidSample(NetorchError):
    code = "invalid-sample"


class ProvisionFailed(NetorchError):
    code = "provision-failed"


# --- bgp ----------------------------------------------------------------


class InvalidPrefix(NetorchError):
    code = "invalid-prefix"


class OpenTimeout(NetorchError):
    code = "open-timeout"


class AsnMismatch(NetorchError):
    code = "asn-mismatch"


class MalformedUpdate(NetorchError):
    code = "malformed-update"


# --- devsim / api -------------------------------------------------------


class UnknownEndpoint(NetorchError):
    code = "unknown-endpoint"


class PortExhausted(NetorchError):
    code = "port-exhausted"


class BindError(NetorchError):
    code = "bind-error"


class ConfigError(NetorchError):
    code = "config-error"
