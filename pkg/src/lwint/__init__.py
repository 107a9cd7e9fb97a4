"""Lightweight in-band network telemetry: DLINT and PLINT with comparison baselines."""

__version__ = "0.1.0"

from .model import INITIAL_TTL, Direction, FlowKey, Packet, Role, Scheme, SinkReport  # noqa: E402

__all__ = ["INITIAL_TTL", "Direction", "FlowKey", "Packet", "Role", "Scheme", "SinkReport",
           "__version__"]
