import random
from collections import Counter

from hypothesis import given, settings
from hypothesis import strategies as st

from lwint.baselines import P4IntSwitch, PintLiteSwitch
from lwint.model import Packet, Role
from lwint.plint import PlintSwitch

from helpers import FLOW, send


def p4int_chain(n, v=1):
    return [P4IntSwitch(i, v) for i in range(1, n + 1)]


def test_p4int_report_is_full_path():
    sws = p4int_chain(5)
    for seq in range(10):
        r = send(sws, seq=seq)[0][-1].report
        assert [sw for sw, _ in r.items] == [1, 2, 3, 4, 5]
        assert [pos for _, pos in r.items] == [1, 2, 3, 4, 5]
        assert r.header_bytes == 36


@given(st.integers(1, 10), st.integers(1, 8))
def test_p4int_header_grows_per_hop(n, v):
    sws = p4int_chain(n, v)
    pkt = Packet(FLOW)
    for hop, sw in enumerate(sws):
        role = Role.SOURCE if hop == 0 else Role.TRANSIT
        if hop == n - 1:
            role = role | Role.SINK
        act = sw.process_forward(pkt, role)
        size = act.report.header_bytes if act.report else pkt.header.size()
        assert size == 16 + 4 * v * (hop + 1)
        pkt.ttl -= 1


def test_p4int_single_hop():
    act = P4IntSwitch(9, 1).process_forward(Packet(FLOW), Role.SOURCE | Role.SINK)
    assert act.report.header_bytes == 20
    assert act.report.items == [(9, 1)]


def test_p4int_filler_words_are_zero():
    sws = p4int_chain(2, v=3)
    pkt = Packet(FLOW)
    sws[0].process_forward(pkt, Role.SOURCE)
    assert pkt.header.stack == [1, 0, 0]


def test_pintlite_first_hop_writes():
    pkt = Packet(FLOW)
    act = PintLiteSwitch(4, 0).process_forward(pkt, Role.SOURCE)
    assert pkt.header.sw_id == 4 and act.inserted_slot == 0


def test_pintlite_prevalence_and_no_hop_numbers():
    sws = [PintLiteSwitch(i, random.Random(i)) for i in range(1, 6)]
    counts = Counter()
    packets = 10_000
    for seq in range(packets):
        r = send(sws, seq=seq)[0][-1].report
        assert r.path_len == 5 and r.header_bytes == 4
        assert all(hop is None for _, hop in r.items)
        counts[r.items[0][0]] += 1
    assert all(abs(counts[sw] / packets - 0.2) <= 0.015 for sw in range(1, 6))


@given(st.integers(1, 10), st.integers(0, 2**32))
@settings(max_examples=30, deadline=None)
def test_pintlite_matches_plint_v1_under_same_seeds(n, seed):
    plint = [PlintSwitch(i, 1, random.Random(seed + i)) for i in range(1, n + 1)]
    pint = [PintLiteSwitch(i, random.Random(seed + i)) for i in range(1, n + 1)]
    for seq in range(40):
        a = send(plint, seq=seq)[0][-1].report.items
        b = send(pint, seq=seq)[0][-1].report.items
        assert [sw for sw, _ in a] == [sw for sw, _ in b]
