"""PLINT switch pipeline: reservoir-sampled switch IDs tagged with hop numbers."""

from __future__ import annotations

import random

from .errors import InvariantViolation, TtlInversion
from .model import ForwardAction, Packet, Role, Scheme, SinkReport, is_sink, is_source
from .wire import PlintHeader, is_switch_id


def hop_index(pkt: Packet, init_ttl: int) -> int:
    """1-based position of the switch currently holding ``pkt``.

    TTL is decremented after INT processing, so the source sees ``ttl ==
    init_ttl``.
    """
    if pkt.ttl > init_ttl:
        raise TtlInversion(f"ttl {pkt.ttl} above init_ttl {init_ttl}")
    return init_ttl - pkt.ttl + 1


def replaces(rng: random.Random, i: int) -> bool:
    """Reservoir step: the i-th candidate takes the slot with probability 1/i."""
    return i == 1 or rng.random() * i < 1.0


def dedup_slots(slots: list, own_id: int, n: int) -> bool:
    """Overwrite the lowest-index repeated slot with ``(own_id, n)``.

    Skipped when ``own_id`` is already present, since writing it again would
    not add a distinct value.  Returns whether a slot was rewritten.
    """
    seen = set()
    if any(sw == own_id for sw, _ in slots):
        return False
    for idx, (sw, _) in enumerate(slots):
        if sw in seen:
            slots[idx] = (own_id, n)
            return True
        seen.add(sw)
    return False


class PlintSwitch:
    scheme = Scheme.PLINT

    def __init__(self, switch_id: int, v: int = 1, rng: random.Random | int | None = None,
                 dedup_at_sink: bool = False):
        if not is_switch_id(switch_id):
            raise InvariantViolation(f"invalid switch ID {switch_id:#x}")
        if v < 1:
            raise ValueError(f"v must be >= 1, got {v}")
        self.switch_id = switch_id
        self.v = v
        self.rng = rng if isinstance(rng, random.Random) else random.Random(rng)
        self.dedup_at_sink = dedup_at_sink

    def __repr__(self) -> str:
        return f"PlintSwitch(id={self.switch_id}, v={self.v})"

    def process_forward(self, pkt: Packet, role: Role) -> ForwardAction:
        act = ForwardAction()
        own = self.switch_id
        if is_source(role) and pkt.header is None:
            pkt.header = PlintHeader(pkt.ttl, [(own, 1)] * self.v)
            act.attached = True
            i = 1
        else:
            hdr = pkt.header
            i = hop_index(pkt, hdr.init_ttl)
            slots = hdr.slots
            rng = self.rng
            for k in range(len(slots)):
                if replaces(rng, i):
                    slots[k] = (own, i)
                    act.inserted_slot = k

        if is_sink(role):
            hdr = pkt.header
            if self.dedup_at_sink:
                dedup_slots(hdr.slots, own, i)
            pkt.header = None
            act.stripped = True
            act.report = SinkReport(
                flow=pkt.flow, scheme=Scheme.PLINT, items=list(hdr.slots), path_len=i,
                timestamp=pkt.timestamp, sink_id=own, seq=pkt.seq, header_bytes=hdr.size())
        return act

    def process_reverse(self, pkt: Packet, role: Role) -> ForwardAction:
        return ForwardAction()
