"""Runtime instrumentation agent for archlens.

Wraps functions selected by naming-convention rules and writes trace logs
that `archlens dynamic` ingests directly.
"""

from archlens_agent.policy import InstrumentationPolicy, PolicyError
from archlens_agent.tracer import AgentHandle, install, uninstall

__version__ = "0.1.0"

__all__ = [
    "AgentHandle",
    "InstrumentationPolicy",
    "PolicyError",
    "install",
    "uninstall",
]
