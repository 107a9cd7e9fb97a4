"""Telemetry header formats, their byte layouts and per-scheme overhead.

All layouts are big-endian:

DLINT      v x u32 slot                                          (4v bytes)
PLINT      u8 init_ttl, v x (u32 sw_id, u8 hop_num)              (1 + 5v bytes)
P4-INT     16-byte metadata shim, then v x u32 per hop           (16 + 4vh bytes)
PINT-lite  u32 sw_id                                             (4 bytes)

The P4-INT shim is ``u8 version, u8 value_count, u8 hop_count, u8 reserved,
u16 instruction_bitmap, 10 bytes padding``.  Its stack is kept in path order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Union

from .errors import InvariantViolation, MalformedHeader, MalformedSlot, TruncatedHeader
from .model import Scheme

EMPTY = 0x00000000
INIT = 0xFFFFFFFF
RESET = 0xFFFFFFFE
PROBE = 0xFFFFFFFD
MAX_SWITCH_ID = 0xFFFFFFF0

SIGNALS = frozenset((INIT, RESET, PROBE))
SIGNAL_NAMES = {INIT: "INIT", RESET: "RESET", PROBE: "PROBE"}

P4INT_META_BYTES = 16
P4INT_VERSION = 2
P4INT_SWITCH_ID_BIT = 0x8000

_U32 = struct.Struct(">I")
_PLINT_SLOT = struct.Struct(">IB")
_P4INT_META = struct.Struct(">BBBBH10x")


def is_switch_id(raw: int) -> bool:
    return 1 <= raw <= MAX_SWITCH_ID


def is_signal(raw: int) -> bool:
    return raw in SIGNALS


def is_valid_slot(raw: int) -> bool:
    return raw == EMPTY or raw in SIGNALS or 1 <= raw <= MAX_SWITCH_ID


@dataclass
class DlintHeader:
    slots: list

    @classmethod
    def empty(cls, v: int) -> "DlintHeader":
        return cls([EMPTY] * v)

    @property
    def v(self) -> int:
        return len(self.slots)

    def free_slot(self):
        """Index of the first EMPTY slot, or None when the header is full."""
        try:
            return self.slots.index(EMPTY)
        except ValueError:
            return None

    def size(self) -> int:
        return 4 * len(self.slots)


@dataclass
class PlintHeader:
    init_ttl: int
    slots: list  # (sw_id, hop_num) pairs

    @property
    def v(self) -> int:
        return len(self.slots)

    def size(self) -> int:
        return 1 + 5 * len(self.slots)


@dataclass
class P4IntHeader:
    v: int
    stack: list = field(default_factory=list)
    version: int = P4INT_VERSION
    instructions: int = P4INT_SWITCH_ID_BIT

    @property
    def hop_count(self) -> int:
        return len(self.stack) // self.v

    def push(self, switch_id: int) -> None:
        self.stack.append(switch_id)
        self.stack.extend([0] * (self.v - 1))

    def switch_ids(self) -> list:
        return self.stack[:: self.v]

    def size(self) -> int:
        return P4INT_META_BYTES + 4 * len(self.stack)


@dataclass
class PintLiteHeader:
    sw_id: int

    def size(self) -> int:
        return 4


TelemetryHeader = Union[DlintHeader, PlintHeader, P4IntHeader, PintLiteHeader]


def overhead_bytes(scheme: Scheme, hops: int, v: int) -> int:
    """Header bytes a packet carries after ``hops`` INT switches with ``v`` values."""
    if hops < 1 or v < 1:
        raise ValueError(f"hops and v must be >= 1 (got hops={hops}, v={v})")
    scheme = Scheme(scheme)
    if scheme is Scheme.DLINT:
        return 4 * v
    if scheme is Scheme.PLINT:
        return 1 + 5 * v
    if scheme is Scheme.P4INT:
        return P4INT_META_BYTES + 4 * v * hops
    return 4


def _require_switch_id(raw: int, where: str) -> None:
    if not is_switch_id(raw):
        raise InvariantViolation(f"{where}: {raw:#010x} is not a switch ID")


def encode_header(h: TelemetryHeader) -> bytes:
    if isinstance(h, DlintHeader):
        if h.v < 1:
            raise InvariantViolation("DLINT header needs at least one slot")
        for i, raw in enumerate(h.slots):
            if not is_valid_slot(raw):
                raise InvariantViolation(f"slot {i}: reserved value {raw:#010x}")
        return b"".join(_U32.pack(raw) for raw in h.slots)

    if isinstance(h, PlintHeader):
        if h.v < 1:
            raise InvariantViolation("PLINT header needs at least one slot")
        if not 0 <= h.init_ttl <= 0xFF:
            raise InvariantViolation(f"init_ttl out of range: {h.init_ttl}")
        out = [bytes((h.init_ttl,))]
        for i, (sw_id, hop) in enumerate(h.slots):
            _require_switch_id(sw_id, f"slot {i}")
            if not 1 <= hop <= 0xFF:
                raise InvariantViolation(f"slot {i}: hop_num {hop} outside [1, 255]")
            out.append(_PLINT_SLOT.pack(sw_id, hop))
        return b"".join(out)

    if isinstance(h, P4IntHeader):
        if h.v < 1 or len(h.stack) % h.v:
            raise InvariantViolation(f"stack length {len(h.stack)} is not a multiple of v={h.v}")
        for i in range(0, len(h.stack), h.v):
            _require_switch_id(h.stack[i], f"stack entry {i}")
        meta = _P4INT_META.pack(h.version, h.v, h.hop_count, 0, h.instructions)
        return meta + b"".join(_U32.pack(w) for w in h.stack)

    if isinstance(h, PintLiteHeader):
        _require_switch_id(h.sw_id, "sw_id")
        return _U32.pack(h.sw_id)

    raise TypeError(f"not a telemetry header: {type(h).__name__}")


def decode_header(data: bytes, scheme: Scheme, v: int) -> TelemetryHeader:
    scheme = Scheme(scheme)
    if v < 1:
        raise ValueError(f"v must be >= 1, got {v}")
    n = len(data)

    if scheme is Scheme.DLINT:
        if n != 4 * v:
            raise TruncatedHeader(f"DLINT v={v} needs {4 * v} bytes, got {n}")
        slots = [raw for (raw,) in _U32.iter_unpack(data)]
        for i, raw in enumerate(slots):
            if not is_valid_slot(raw):
                raise MalformedSlot(f"slot {i}: reserved value {raw:#010x}")
        return DlintHeader(slots)

    if scheme is Scheme.PLINT:
        if n != 1 + 5 * v:
            raise TruncatedHeader(f"PLINT v={v} needs {1 + 5 * v} bytes, got {n}")
        slots = []
        for i, (sw_id, hop) in enumerate(_PLINT_SLOT.iter_unpack(data[1:])):
            if not is_switch_id(sw_id):
                raise MalformedSlot(f"slot {i}: {sw_id:#010x} is not a switch ID")
            if hop < 1:
                raise MalformedSlot(f"slot {i}: hop_num 0")
            slots.append((sw_id, hop))
        return PlintHeader(data[0], slots)

    if scheme is Scheme.P4INT:
        if n < P4INT_META_BYTES or (n - P4INT_META_BYTES) % (4 * v):
            raise TruncatedHeader(f"P4-INT v={v}: {n} bytes is not 16 + 4*v*h")
        version, count, hops, _, instructions = _P4INT_META.unpack(data[:P4INT_META_BYTES])
        stack = [w for (w,) in _U32.iter_unpack(data[P4INT_META_BYTES:])]
        if count != v:
            raise MalformedHeader(f"metadata value count {count} != v={v}")
        if hops != len(stack) // v:
            raise MalformedHeader(f"metadata hop count {hops} != {len(stack) // v} from stack length")
        for i in range(0, len(stack), v):
            if not is_switch_id(stack[i]):
                raise MalformedSlot(f"stack entry {i}: {stack[i]:#010x} is not a switch ID")
        return P4IntHeader(v, stack, version, instructions)

    if n != 4:
        raise TruncatedHeader(f"PINT-lite needs 4 bytes, got {n}")
    (sw_id,) = _U32.unpack(data)
    if not is_switch_id(sw_id):
        raise MalformedSlot(f"{sw_id:#010x} is not a switch ID")
    return PintLiteHeader(sw_id)
