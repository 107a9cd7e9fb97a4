"""Comparison schemes: hop-append P4-INT (MD mode) and PINT-lite.

PINT-lite runs the same reservoir sampling as PLINT with one value but its
4-byte header has no hop number and no initial TTL.  Switches derive their
hop index from the domain-wide initial TTL instead.
"""

from __future__ import annotations

import random

from .errors import InvariantViolation
from .model import INITIAL_TTL, ForwardAction, Packet, Role, Scheme, SinkReport, is_sink, is_source
from .plint import replaces
from .wire import P4IntHeader, PintLiteHeader, is_switch_id


class P4IntSwitch:
    scheme = Scheme.P4INT

    def __init__(self, switch_id: int, v: int = 1):
        if not is_switch_id(switch_id):
            raise InvariantViolation(f"invalid switch ID {switch_id:#x}")
        if v < 1:
            raise ValueError(f"v must be >= 1, got {v}")
        self.switch_id = switch_id
        self.v = v

    def process_forward(self, pkt: Packet, role: Role) -> ForwardAction:
        act = ForwardAction()
        if is_source(role) and pkt.header is None:
            pkt.header = P4IntHeader(self.v)
            act.attached = True
        hdr = pkt.header
        act.inserted_slot = len(hdr.stack)
        hdr.push(self.switch_id)
        if is_sink(role):
            pkt.header = None
            act.stripped = True
            ids = hdr.switch_ids()
            act.report = SinkReport(
                flow=pkt.flow, scheme=Scheme.P4INT,
                items=[(sw, pos) for pos, sw in enumerate(ids, 1)],
                path_len=len(ids), timestamp=pkt.timestamp, sink_id=self.switch_id,
                seq=pkt.seq, header_bytes=hdr.size())
        return act

    def process_reverse(self, pkt: Packet, role: Role) -> ForwardAction:
        return ForwardAction()


class PintLiteSwitch:
    scheme = Scheme.PINT_LITE

    def __init__(self, switch_id: int, rng: random.Random | int | None = None):
        if not is_switch_id(switch_id):
            raise InvariantViolation(f"invalid switch ID {switch_id:#x}")
        self.switch_id = switch_id
        self.rng = rng if isinstance(rng, random.Random) else random.Random(rng)

    def process_forward(self, pkt: Packet, role: Role) -> ForwardAction:
        act = ForwardAction()
        i = INITIAL_TTL - pkt.ttl + 1
        if is_source(role) and pkt.header is None:
            pkt.header = PintLiteHeader(self.switch_id)
            act.attached = True
            act.inserted_slot = 0
        elif replaces(self.rng, i):
            pkt.header.sw_id = self.switch_id
            act.inserted_slot = 0
        if is_sink(role):
            hdr = pkt.header
            pkt.header = None
            act.stripped = True
            act.report = SinkReport(
                flow=pkt.flow, scheme=Scheme.PINT_LITE, items=[(hdr.sw_id, None)], path_len=i,
                timestamp=pkt.timestamp, sink_id=self.switch_id, seq=pkt.seq,
                header_bytes=hdr.size())
        return act

    def process_reverse(self, pkt: Packet, role: Role) -> ForwardAction:
        return ForwardAction()
