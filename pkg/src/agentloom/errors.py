"""Exception hierarchy shared across the runtime."""

from __future__ import annotations


class AgentLoomError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(AgentLoomError):
    """Invalid input supplied by the caller (bad role, bad schema, ...)."""


class MessageParseError(ValidationError):
    """A message could not be decoded from JSON.

    Carries the path to the offending field, e.g. ``content[2].type``.
    """

    def __init__(self, path: str, reason: str) -> None:
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class NotFoundError(AgentLoomError):
    """A named entity (run, group, participant, ...) does not exist."""


class CapabilityError(AgentLoomError):
    """A backend was asked for a feature it does not support."""

    def __init__(self, capability: str, detail: str = "") -> None:
        self.capability = capability
        msg = f"backend does not support {capability}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class TransportError(AgentLoomError):
    """Network or I/O level failure; safe to retry."""

    retryable = True


class ProviderError(AgentLoomError):
    """The model provider rejected the request; not retryable."""

    retryable = False

    def __init__(self, message: str, status_code: int | None = None) -> None:
        self.status_code = status_code
        super().__init__(message)


class ScriptExhaustedError(AgentLoomError):
    """A scripted mock backend ran out of replies."""


class ToolkitError(AgentLoomError):
    """Base class for toolkit management errors."""


class ToolConflictError(ToolkitError):
    """A tool with the same name is already registered."""


class ToolNotFoundError(ToolkitError, NotFoundError):
    """No tool registered under the requested name."""


class GroupNotFoundError(ToolkitError, NotFoundError):
    """No tool group with the requested name."""


class ProtectedGroupError(ToolkitError):
    """The "basic" group cannot be deactivated or removed."""


class ToolExecutionError(AgentLoomError):
    """A tool reported failure; the text is agent-visible."""


class McpError(AgentLoomError):
    """Base class for MCP client failures."""


class McpLaunchError(McpError):
    """The server subprocess could not be spawned."""


class McpProtocolError(McpError):
    """The server broke the JSON-RPC contract (bad id, malformed frame)."""


class McpSessionStateError(McpError):
    """Operation invalid for the session state (e.g. double close)."""


class StateError(AgentLoomError):
    """A state dict does not match the registered state shape."""


class StorageError(AgentLoomError):
    """Evaluation storage could not be read or written."""


class EndOfInputError(AgentLoomError):
    """The interactive input source was closed."""
