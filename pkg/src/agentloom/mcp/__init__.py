from .client import (
    McpCallResult,
    RemoteToolDescriptor,
    StatefulMcpClient,
    StatelessMcpClient,
    StdioServerConfig,
    stateless_call,
)

__all__ = [
    "StdioServerConfig",
    "RemoteToolDescriptor",
    "McpCallResult",
    "StatefulMcpClient",
    "StatelessMcpClient",
    "stateless_call",
]
