"""DLINT switch pipeline: deterministic per-flow spreading of switch IDs.

Every switch keeps a 2-bit state per flow in a :class:`BloomStateStore`:

* AwaitingInit   -- waits for an INIT signal (or evidence that one was lost)
* ReadyToInsert  -- writes its ID into the next packet with room for it
* InsertedId     -- done for this cycle; waits for RESET or the next INIT

The INT source starts a cycle by writing INIT into the first slot.  The sink
strips the header, reports it, and once its own ID has gone out arms a RESET
that rides the next packet of the opposite direction back to the source.

Roles passed to :meth:`DlintSwitch.process_forward` and
:meth:`DlintSwitch.process_reverse` are relative to the packet's own route, so
for an ACK the forward sink is ``Role.SOURCE``.
"""

from __future__ import annotations

from collections import defaultdict

from .bloom import BloomStateStore, TelemetryState
from .errors import InvariantViolation, UnexpectedHeaderAtSource
from .model import (INITIAL_TTL, Direction, ForwardAction, Packet, Role, Scheme, SinkReport,
                    is_sink, is_source)
from .wire import EMPTY, INIT, RESET, SIGNALS, DlintHeader, is_switch_id

# plain ints: the store hands back raw codes on the hot path
AWAITING = int(TelemetryState.AWAITING_INIT)
READY = int(TelemetryState.READY_TO_INSERT)
INSERTED = int(TelemetryState.INSERTED_ID)

DEFAULT_WATCHDOG = 64


class DlintSwitch:
    """One DLINT-capable switch.

    ``watchdog`` (packets) enables source self-reset after that many bare
    packets of a flow were forwarded while waiting for RESET; ``None``
    disables it.  ``trace_reverse`` makes ACK-direction packets trace their
    own path as well.
    """

    scheme = Scheme.DLINT

    def __init__(self, switch_id: int, v: int = 1, K: int = 1 << 16, m: int = 1, seeds=None,
                 *, store: BloomStateStore | None = None, trace_reverse: bool = False,
                 watchdog: int | None = None):
        if not is_switch_id(switch_id):
            raise InvariantViolation(f"invalid switch ID {switch_id:#x}")
        if v < 1:
            raise ValueError(f"v must be >= 1, got {v}")
        self.switch_id = switch_id
        self.v = v
        self.store = store if store is not None else BloomStateStore(K, m, seeds)
        self.trace_reverse = trace_reverse
        self.watchdog = watchdog
        self.reset_armed: set = set()
        self._bare_forwarded: defaultdict = defaultdict(int)

    def __repr__(self) -> str:
        return f"DlintSwitch(id={self.switch_id}, v={self.v}, {self.store!r})"

    def state_of(self, key) -> TelemetryState:
        return self.store.lookup(key)

    def process_forward(self, pkt: Packet, role: Role) -> ForwardAction:
        return self._process(pkt, role, tracing=True)

    def process_reverse(self, pkt: Packet, role: Role) -> ForwardAction:
        return self._process(pkt, role, tracing=self.trace_reverse)

    def process(self, pkt: Packet, role: Role) -> ForwardAction:
        if pkt.direction is Direction.FORWARD:
            return self.process_forward(pkt, role)
        return self.process_reverse(pkt, role)

    # -- internals ---------------------------------------------------------

    def _process(self, pkt: Packet, role: Role, tracing: bool) -> ForwardAction:
        act = ForwardAction()
        source = is_source(role)
        sink = is_sink(role)
        if source and pkt.header is not None:
            raise UnexpectedHeaderAtSource(
                f"switch {self.switch_id}: packet {pkt.seq} of {pkt.flow} arrived encapsulated")

        hdr = pkt.header
        opposite = None
        if hdr is not None and RESET in hdr.slots:
            opposite = pkt.flow.reversed()
            self.store.update(opposite, AWAITING)

        if source and self.reset_armed:
            opposite = opposite or pkt.flow.reversed()
            if opposite in self.reset_armed:
                # RESET takes the first slot, ahead of any switch ID
                self.reset_armed.discard(opposite)
                hdr = pkt.header = DlintHeader.empty(self.v)
                hdr.slots[0] = RESET
                act.attached = True
                act.reset_emitted = True
                self.store.update(opposite, AWAITING)

        direct = False
        if tracing:
            direct = self._trace(pkt, source, sink, act)

        if sink:
            hdr = pkt.header
            if tracing:
                act.report = self._report(pkt, hdr, direct, act)
            if hdr is not None:
                pkt.header = None
                act.stripped = True
        return act

    def _trace(self, pkt: Packet, is_source: bool, is_sink: bool, act: ForwardAction) -> bool:
        """Apply the state machine for ``pkt.flow``; returns True on direct sink delivery."""
        key = pkt.flow
        store = self.store
        state = store.code(key)
        act.state_before = act.state_after = state
        hdr = pkt.header
        new = state
        direct = False

        if is_source:
            if state == AWAITING:
                hdr = self._ensure_header(pkt, act)
                i = hdr.free_slot()
                if i is not None:
                    hdr.slots[i] = INIT
                    j = hdr.free_slot()
                    if j is not None:
                        hdr.slots[j] = self.switch_id
                        act.inserted_slot = j
                        new = INSERTED
                    else:
                        new = READY
            elif state == READY:
                hdr = self._ensure_header(pkt, act)
                i = hdr.free_slot()
                if i is not None:
                    hdr.slots[i] = self.switch_id
                    act.inserted_slot = i
                    new = INSERTED
            elif hdr is None and self.watchdog is not None:
                self._bare_forwarded[key] += 1
                if self._bare_forwarded[key] >= self.watchdog:
                    del self._bare_forwarded[key]
                    new = AWAITING
        elif hdr is None:
            if state == READY:
                if is_sink:
                    direct = True
                else:
                    hdr = self._ensure_header(pkt, act)
                    hdr.slots[0] = self.switch_id
                    act.inserted_slot = 0
                new = INSERTED
        elif state != READY and INIT in hdr.slots:
            # INIT opens a new cycle even where the previous RESET never arrived
            i = hdr.free_slot()
            if i is not None:
                hdr.slots[i] = self.switch_id
                act.inserted_slot = i
                new = INSERTED
            else:
                new = READY
        elif state == AWAITING:
            if any(is_switch_id(s) for s in hdr.slots):
                # IDs without INIT: the INIT for this cycle was lost upstream
                new = READY
        elif state == READY:
            i = hdr.free_slot()
            if i is not None:
                hdr.slots[i] = self.switch_id
                act.inserted_slot = i
                new = INSERTED

        if new != state or act.inserted_slot is not None:
            store.update(key, new)
            act.state_after = new
            if new == INSERTED:
                self._bare_forwarded.pop(key, None)
                if is_sink:
                    self.reset_armed.add(key)
        return direct

    def _ensure_header(self, pkt: Packet, act: ForwardAction) -> DlintHeader:
        if pkt.header is None:
            pkt.header = DlintHeader.empty(self.v)
            act.attached = True
        return pkt.header

    def _report(self, pkt: Packet, hdr, direct: bool, act: ForwardAction) -> SinkReport:
        if hdr is not None:
            items = [(s, None) for s in hdr.slots if s != EMPTY and s not in SIGNALS]
            signals = [s for s in hdr.slots if s in SIGNALS]
            header_bytes = hdr.size()
        else:
            items, signals, header_bytes = [], [], 0
        if direct:
            items.append((self.switch_id, None))
        delivered_own = direct or act.inserted_slot is not None
        return SinkReport(
            flow=pkt.flow,
            scheme=Scheme.DLINT,
            items=items,
            signals=signals,
            cycle_complete=delivered_own,
            path_len=INITIAL_TTL - pkt.ttl + 1,
            timestamp=pkt.timestamp,
            sink_id=self.switch_id,
            seq=pkt.seq,
            header_bytes=header_bytes,
            direct=direct,
        )
