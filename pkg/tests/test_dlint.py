import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lwint.bloom import BloomStateStore, TelemetryState
from lwint.dlint import DlintSwitch
from lwint.errors import InvariantViolation, UnexpectedHeaderAtSource
from lwint.model import Direction, FlowKey, Packet, Role
from lwint.wire import EMPTY, INIT, RESET, DlintHeader

from helpers import FLOW, ack, send

AWAITING = TelemetryState.AWAITING_INIT
READY = TelemetryState.READY_TO_INSERT
INSERTED = TelemetryState.INSERTED_ID


def path(n, v=1, **kw):
    return [DlintSwitch(i, v, K=1 << 16, **kw) for i in range(1, n + 1)]


def observed(report):
    """(signals, ids, direct, cycle_complete) of one sink report."""
    return (tuple(report.signals), tuple(sw for sw, _ in report.items), report.direct,
            report.cycle_complete)


def run_flow(switches, packets, acks=True):
    out = []
    for seq in range(packets):
        actions, _ = send(switches, seq=seq)
        out.append(observed(actions[-1].report))
        if acks:
            ack(switches, seq=seq)
    return out


# Hand-enumerated per-packet sink observations for one collision-free cycle.
SCHEDULES = {
    (5, 1): [((INIT,), (), False, False), ((), (1,), False, False), ((), (2,), False, False),
             ((), (3,), False, False), ((), (4,), False, False), ((), (5,), True, True)],
    (5, 3): [((INIT,), (1, 2), False, False), ((), (3, 4, 5), False, True)],
    (10, 2): [((INIT,), (1,), False, False), ((), (2, 3), False, False), ((), (4, 5), False, False),
              ((), (6, 7), False, False), ((), (8, 9), False, False), ((), (10,), True, True)],
}

SCHEDULES_3_1 = [((INIT,), (), False, False), ((), (1,), False, False), ((), (2,), False, False),
                 ((), (3,), True, True)]


@pytest.mark.parametrize("n,v", sorted(SCHEDULES))
def test_cycle_schedule(n, v):
    expected = SCHEDULES[n, v]
    got = run_flow(path(n, v), 3 * len(expected))
    assert got == expected * 3
    assert len(expected) == -(-(n + 1) // v)


def test_fig4_header_contents_v1():
    sws = path(5)
    actions, pkt = send(sws, seq=0)
    assert actions[0].attached and actions[0].state_after == READY
    assert all(a.state_after == READY for a in actions[1:])
    assert actions[-1].stripped and pkt.header is None
    actions, _ = send(sws, seq=1)
    assert actions[0].inserted_slot == 0 and actions[0].state_after == INSERTED
    assert all(a.inserted_slot is None for a in actions[1:])


def test_v3_first_packet_header():
    sws = path(5, 3)
    pkt = Packet(FLOW)
    sws[0].process_forward(pkt, Role.SOURCE)
    pkt.ttl -= 1
    sws[1].process_forward(pkt, Role.TRANSIT)
    assert pkt.header.slots == [INIT, 1, 2]


def test_lost_init_recovery():
    sw = DlintSwitch(3)
    pkt = Packet(FLOW, header=DlintHeader([1]))
    act = sw.process_forward(pkt, Role.TRANSIT)
    assert act.state_after == READY
    assert pkt.header.slots == [1]
    assert act.inserted_slot is None


def test_empty_header_without_init_is_not_recovery():
    sw = DlintSwitch(3)
    sw.process_forward(Packet(FLOW, header=DlintHeader([EMPTY, EMPTY])), Role.TRANSIT)
    assert sw.state_of(FLOW) is AWAITING


def test_ready_transit_attaches_header_to_bare_packet():
    sw = DlintSwitch(4, v=2)
    sw.store.update(FLOW, READY)
    pkt = Packet(FLOW)
    act = sw.process_forward(pkt, Role.TRANSIT)
    assert act.attached and pkt.header.slots == [4, EMPTY]
    assert sw.state_of(FLOW) is INSERTED


def test_ready_sink_delivers_directly():
    sw = DlintSwitch(9)
    sw.store.update(FLOW, READY)
    act = sw.process_forward(Packet(FLOW), Role.SINK)
    assert act.report.direct and act.report.items == [(9, None)] and act.report.cycle_complete
    assert not act.attached
    assert FLOW in sw.reset_armed


def test_inserted_switch_leaves_packet_alone():
    sw = DlintSwitch(2)
    sw.store.update(FLOW, INSERTED)
    pkt = Packet(FLOW, header=DlintHeader([1]))
    act = sw.process_forward(pkt, Role.TRANSIT)
    assert pkt.header.slots == [1] and act.inserted_slot is None
    assert sw.state_of(FLOW) is INSERTED


def test_inserted_source_forwards_bare():
    sw = DlintSwitch(1)
    sw.store.update(FLOW, INSERTED)
    pkt = Packet(FLOW)
    act = sw.process_forward(pkt, Role.SOURCE)
    assert pkt.header is None and not act.attached


def test_init_restarts_switch_still_inserted():
    sw = DlintSwitch(2, v=2)
    sw.store.update(FLOW, INSERTED)
    pkt = Packet(FLOW, header=DlintHeader([INIT, 1]))
    sw.process_forward(pkt, Role.TRANSIT)
    assert sw.state_of(FLOW) is READY
    pkt = Packet(FLOW, header=DlintHeader([INIT, EMPTY]))
    sw.store.update(FLOW, INSERTED)
    sw.process_forward(pkt, Role.TRANSIT)
    assert pkt.header.slots == [INIT, 2]


def test_source_rejects_encapsulated_packet():
    with pytest.raises(UnexpectedHeaderAtSource):
        DlintSwitch(1).process_forward(Packet(FLOW, header=DlintHeader([INIT])), Role.SOURCE)


def test_invalid_switch_id():
    with pytest.raises(InvariantViolation):
        DlintSwitch(INIT)


def test_reset_on_first_ack_after_cycle():
    sws = path(5)
    for seq in range(5):
        send(sws, seq=seq)
        actions, pkt = ack(sws, seq=seq)
        assert not any(a.reset_emitted for a in actions)
    send(sws, seq=5)
    assert all(sw.state_of(FLOW) is INSERTED for sw in sws)
    actions, pkt = ack(sws, seq=5)
    assert actions[0].reset_emitted
    assert actions[-1].stripped and pkt.header is None
    assert all(sw.state_of(FLOW) is AWAITING for sw in sws)
    assert not sws[-1].reset_armed
    # the ACK after that carries nothing
    actions, _ = ack(sws, seq=6)
    assert not any(a.attached for a in actions)


def test_reset_reaching_only_source_restarts_cycle():
    sws = path(5)
    run_flow(sws, 6, acks=False)
    # asymmetric return: sink -> source directly
    send([sws[4], sws[0]], FLOW.reversed(), 6, Direction.REVERSE)
    assert sws[0].state_of(FLOW) is AWAITING
    assert [sw.state_of(FLOW) for sw in sws[1:4]] == [INSERTED] * 3
    got = []
    for seq in range(7, 13):
        actions, _ = send(sws, seq=seq)
        got.append(observed(actions[-1].report))
        send([sws[4], sws[0]], FLOW.reversed(), seq, Direction.REVERSE)
    assert got == SCHEDULES[5, 1]


def test_ack_without_reset_untouched():
    sws = path(3)
    actions, pkt = ack(sws)
    assert pkt.header is None
    assert not any(a.attached or a.stripped for a in actions)


def test_trace_reverse_reset_takes_first_slot():
    sws = path(3, v=2, trace_reverse=True)
    for seq in range(2):
        send(sws, seq=seq)
    assert FLOW in sws[-1].reset_armed
    rev = list(reversed(sws))
    pkt = Packet(FLOW.reversed(), Direction.REVERSE)
    rev[0].process_reverse(pkt, Role.SOURCE)
    assert pkt.header.slots[0] == RESET
    assert pkt.header.slots[1] == INIT  # the reverse flow starts its own cycle behind it


def test_watchdog_restarts_stalled_source():
    # the source counts bare packets from its own insertion (seq 1): seqs 2 and 3
    # finish the cycle, 4 and 5 wait for a RESET that never comes
    sws = path(3, watchdog=4)
    seen = run_flow(sws, 8, acks=False)
    assert seen[:4] == SCHEDULES_3_1
    assert seen[4:6] == [((), (), False, False)] * 2
    assert seen[6][0] == (INIT,)


def test_without_watchdog_source_stalls():
    sws = path(3)
    seen = run_flow(sws, 80, acks=False)
    assert all(s == ((), (), False, False) for s in seen[4:])


def test_non_colliding_flows_independent():
    other = FlowKey(0x0A000009, 0x0A00000A, 5555, 80)
    store_probe = BloomStateStore(1 << 16)
    assert store_probe.indices(other) != store_probe.indices(FLOW)
    sws = path(5)
    for seq in range(12):
        a1, _ = send(sws, FLOW, seq)
        ack(sws, FLOW, seq)
        if seq % 2:
            send(sws, other, seq)
        assert observed(a1[-1].report) == SCHEDULES[5, 1][seq % 6]


@given(st.integers(2, 12), st.integers(1, 6))
@settings(max_examples=40, deadline=None)
def test_collision_free_traces_exact(n, v):
    sws = path(n, v)
    cycle = -(-(n + 1) // v)
    ids = []
    for seq in range(3 * cycle):
        actions, _ = send(sws, seq=seq)
        assert sum(a.inserted_slot is not None for a in actions) <= n
        r = actions[-1].report
        ids.extend(sw for sw, _ in r.items)
        if r.cycle_complete:
            assert ids == list(range(1, n + 1))
            assert seq % cycle == cycle - 1
            ids = []
        ack(sws, seq=seq)


@given(st.lists(st.tuples(st.integers(0, 3), st.booleans()), min_size=1, max_size=80),
       st.integers(1, 4), st.integers(1, 3))
@settings(max_examples=60, deadline=None)
def test_soundness_under_collisions(schedule, v, K):
    """Whatever the interleaving and cell sharing, every ID in a slot belongs to a switch that wrote it."""
    flows = [FlowKey(0x0A000000 + i, 0x0B000000 + i, 1000 + i, 80) for i in range(4)]
    sws = [DlintSwitch(i, v, K=K) for i in range(1, 6)]
    for seq, (f, with_ack) in enumerate(schedule):
        pkt = Packet(flows[f], seq=seq)
        for hop, sw in enumerate(sws):
            before = list(pkt.header.slots) if pkt.header else []
            role = Role.SOURCE if hop == 0 else Role.SINK if hop == 4 else Role.TRANSIT
            act = sw.process_forward(pkt, role)
            after = list(pkt.header.slots) if pkt.header else []
            written = [x for i, x in enumerate(after) if i >= len(before) or before[i] != x]
            assert len([x for x in written if x not in (INIT, EMPTY)]) <= 1
            assert all(x in (INIT, EMPTY, sw.switch_id) for x in written)
            if act.report:
                assert all(1 <= s <= 5 for s, _ in act.report.items)
            pkt.ttl -= 1
        if with_ack:
            ack(sws, flows[f], seq)
