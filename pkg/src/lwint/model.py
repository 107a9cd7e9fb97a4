"""Core value types shared by the switch pipelines, the collector and the simulator."""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

INITIAL_TTL = 64

_FLOWKEY = struct.Struct(">IIHHB")


class Scheme(str, enum.Enum):
    DLINT = "DLINT"
    PLINT = "PLINT"
    P4INT = "P4INT"
    PINT_LITE = "PINT_LITE"

    def __str__(self) -> str:
        return self.value


class Direction(enum.Enum):
    FORWARD = "forward"
    REVERSE = "reverse"


class Role(enum.Flag):
    """Position of a switch on a packet's own route.

    A one-switch route is ``SOURCE | SINK``.
    """

    TRANSIT = 0
    SOURCE = enum.auto()
    SINK = enum.auto()


SOURCE_SINK = Role.SOURCE | Role.SINK


# Identity checks: Flag arithmetic is too slow for the per-hop hot path.
def is_source(role: Role) -> bool:
    return role is Role.SOURCE or role is SOURCE_SINK


def is_sink(role: Role) -> bool:
    return role is Role.SINK or role is SOURCE_SINK


def role_at(hop: int, path_len: int) -> Role:
    if hop == 0:
        return SOURCE_SINK if path_len == 1 else Role.SOURCE
    return Role.SINK if hop == path_len - 1 else Role.TRANSIT


@dataclass(frozen=True)
class FlowKey:
    src_addr: int
    dst_addr: int
    src_port: int
    dst_port: int
    proto: int = 6

    def __post_init__(self):
        for name, bits in (("src_addr", 32), ("dst_addr", 32), ("src_port", 16),
                           ("dst_port", 16), ("proto", 8)):
            value = getattr(self, name)
            if not 0 <= value < (1 << bits):
                raise ValueError(f"FlowKey.{name} out of {bits}-bit range: {value}")

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash(self.packed)
            object.__setattr__(self, "_hash", h)
        return h

    @cached_property
    def packed(self) -> bytes:
        """13-byte network-order serialization (the Bloom-filter hash input)."""
        return _FLOWKEY.pack(self.src_addr, self.dst_addr, self.src_port, self.dst_port, self.proto)

    @classmethod
    def unpack(cls, data: bytes) -> "FlowKey":
        return cls(*_FLOWKEY.unpack(data))

    def reversed(self) -> "FlowKey":
        rev = self.__dict__.get("_rev")
        if rev is None:
            rev = FlowKey(self.dst_addr, self.src_addr, self.dst_port, self.src_port, self.proto)
            object.__setattr__(self, "_rev", rev)
            object.__setattr__(rev, "_rev", self)
        return rev

    def as_dict(self) -> dict:
        return {"src_addr": self.src_addr, "dst_addr": self.dst_addr, "src_port": self.src_port,
                "dst_port": self.dst_port, "proto": self.proto}

    def __str__(self) -> str:
        def ip(a):
            return ".".join(str((a >> s) & 0xFF) for s in (24, 16, 8, 0))
        return f"{ip(self.src_addr)}:{self.src_port}->{ip(self.dst_addr)}:{self.dst_port}/{self.proto}"


@dataclass(slots=True, eq=False)
class Packet:
    """A simulated packet.

    ``path`` is the route assigned at emission (ground truth, never read by
    switch logic) and ``hop`` the index of the switch the packet is at or
    heading to.
    """

    flow: FlowKey
    direction: Direction = Direction.FORWARD
    ttl: int = INITIAL_TTL
    seq: int = 0
    payload_bytes: int = 0
    header: Optional[object] = None
    timestamp: float = 0.0
    path: tuple = ()
    hop: int = 0


@dataclass(slots=True)
class SinkReport:
    """What an INT sink hands to the telemetry server for one packet.

    ``items`` holds ``(switch_id, hop_num)`` pairs in slot order; ``hop_num``
    is ``None`` for schemes that carry no position.  ``direct`` marks a DLINT
    sink that delivered its own ID outside any header.
    """

    flow: FlowKey
    scheme: Scheme
    items: list
    signals: list = field(default_factory=list)
    cycle_complete: bool = False
    path_len: int = 0
    timestamp: float = 0.0
    sink_id: int = 0
    seq: int = 0
    header_bytes: int = 0
    direct: bool = False

    @property
    def header_present(self) -> bool:
        return self.header_bytes > 0


@dataclass(slots=True)
class ForwardAction:
    """Outcome of one switch processing one packet."""

    state_before: Optional[int] = None
    state_after: Optional[int] = None
    inserted_slot: Optional[int] = None
    attached: bool = False
    stripped: bool = False
    reset_emitted: bool = False
    report: Optional[SinkReport] = None
